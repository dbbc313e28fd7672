import os
import sys
from collections import defaultdict
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from synth import synth_students, write_instance  # noqa: E402

from examtt.instance import Instance, load_instance, parse_stu  # noqa: E402

DATA = HERE / "data"
TORONTO = Path(os.environ.get("EXAMTT_DATA", HERE.parent / "data" / "toronto"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture(scope="session")
def toy():
    return parse_stu((DATA / "toy4.stu").read_text(), "toy4", 3)


def make_synth(m=80, n_students=900, k=14, seed=1, name="syn"):
    students = tuple(frozenset(e - 1 for e in s) for s in synth_students(m, n_students, seed))
    return Instance(name, m, k, students)


@pytest.fixture(scope="session")
def synth():
    return make_synth()


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synthdata")
    write_instance(d, "syn-a", synth_students(80, 900, 1), 14)
    write_instance(d, "syn-b", synth_students(60, 500, 2), 12)
    return d


def toronto(name):
    """Load a Toronto instance or fail: these criteria need the real files."""
    try:
        return load_instance(name, TORONTO)
    except Exception as exc:  # noqa: BLE001
        reason = str(exc)
    pytest.fail(f"Toronto instance files not found ({reason}); set EXAMTT_DATA", pytrace=False)


# ---------------------------------------------------------- acceptance report

_outcomes = defaultdict(list)
_notes = []


@pytest.fixture
def note():
    """Record a measured value for the acceptance summary."""
    return _notes.append


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _outcomes[mark.args[0]].append((item.name, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        ok = all(passed for _, passed in results)
        failed = [name for name, passed in results if not passed]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
    if _notes:
        tr.section("acceptance measurements")
        for line in _notes:
            tr.write_line(line)
