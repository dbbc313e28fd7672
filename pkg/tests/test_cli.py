import csv
import subprocess
import sys

import pytest

from examtt.cli import COMPARE_FIELDS, CONSTRUCT_FIELDS, DEFAULT_LEVELS, main
from examtt.results import RESULT_FIELDS

FAST = ["--hhls-iters", "300", "--hhls-stall", "150"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(synth_dir, *args):
    return main([*args[:1], "--data-dir", str(synth_dir), *args[1:]])


def test_info(synth_dir, tmp_path):
    out = tmp_path / "info.csv"
    assert run(synth_dir, "info", "--instance", "syn-a", "--instance", "syn-b", "--out", str(out)) == 0
    got = rows(out)
    assert [r["instance"] for r in got] == ["syn-a", "syn-b"]
    assert got[0]["exams"] == "80" and got[0]["slots"] == "14"


def test_construct(synth_dir, tmp_path):
    out = tmp_path / "c.csv"
    assert run(synth_dir, "construct", "--instance", "syn-a", "--samples", "5", "--runs", "3",
               "--out", str(out)) == 0
    got = rows(out)
    assert list(got[0]) == CONSTRUCT_FIELDS
    assert len(got) == 6 and {r["rule"] for r in got} == {"min", "dist"}
    assert all(0 <= int(r["feasible_count"]) <= 5 for r in got)


def test_solve_is_byte_identical(synth_dir, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"s{i}.csv"
        tr = tmp_path / f"t{i}.csv"
        assert run(synth_dir, "solve", "--instance", "syn-a", "--algo", "parhga", "--seed", "7",
                   "--time", "0.3", "--pop", "6", *FAST, "--out", str(out), "--trace", str(tr)) == 0
        outs.append((out.read_bytes(), tr.read_bytes()))
    assert outs[0] == outs[1]
    got = rows(tmp_path / "s0.csv")
    assert list(got[0]) == RESULT_FIELDS and got[0]["seed"] == "7"


def test_bench_concurrent_matches_serial(synth_dir, tmp_path):
    args = ["bench", "--instance", "syn-b", "--instance", "syn-a", "--algo", "multls",
            "--algo", "pure-parhga", "--runs", "2", "--time", "0.2", "--pop", "6", *FAST]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(synth_dir, *args, "--out", str(a)) == 0
    assert run(synth_dir, *args, "--jobs", "3", "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()
    keys = [(r["instance"], r["algorithm"]) for r in rows(a)]
    assert keys == sorted(keys) and len(keys) == 8


def test_calibrate_row_count(synth_dir, tmp_path):
    out = tmp_path / "cal.csv"
    assert run(synth_dir, "calibrate", "--instance", "syn-b", "--algo", "parhga", "--time", "0.1",
               "--levels", "ls=vdls", "--levels", "pop=4,6", "--levels", "init_frac=1.0",
               "--levels", "init_heuristic=min,dist", "--levels", "hybrid=0,50,75",
               "--runs", "2", *FAST, "--out", str(out)) == 0
    got = rows(out)
    assert len(got) == 2 * 2 * 3 * 2
    assert {"ls", "pop", "hybrid"} <= set(got[0])


def test_default_grids():
    n = 1
    for v in DEFAULT_LEVELS["parhga"].values():
        n *= len(v)
    assert n == 96


def test_compare_min_vs_dist(synth_dir, tmp_path):
    paths = {}
    for rule in ("min", "dist"):
        paths[rule] = tmp_path / f"{rule}.csv"
        assert run(synth_dir, "construct", "--instance", "syn-a", "--rule", rule, "--samples", "20",
                   "--runs", "12", "--out", str(paths[rule])) == 0
    out = tmp_path / "cmp.csv"
    assert main(["compare", str(paths["min"]), str(paths["dist"]), "--out", str(out)]) == 0
    got = rows(out)
    assert list(got[0]) == COMPARE_FIELDS
    assert got[0]["significant"] == "1" and got[0]["better"] == "b"


@pytest.mark.parametrize("args,code", [
    (["solve", "--instance", "nope", "--algo", "parhga"], 2),
    (["solve", "--instance", "syn-a", "--algo", "nonsense"], 1),
    (["solve", "--instance", "syn-a", "--instance", "syn-b", "--algo", "parhga"], 1),
    (["solve", "--instance", "syn-a", "--algo", "parhga", "--time", "0"], 1),
    (["calibrate", "--instance", "syn-a", "--algo", "multls"], 1),
    (["calibrate", "--instance", "syn-a", "--algo", "parhga", "--levels", "colour=red"], 1),
])
def test_error_codes(synth_dir, args, code, capsys):
    assert run(synth_dir, *args) == code
    assert "examtt:" in capsys.readouterr().err


def test_missing_slot_count(tmp_path):
    (tmp_path / "lone.stu").write_text("1 2\n")
    assert main(["info", "--instance", "lone", "--data-dir", str(tmp_path)]) == 2
    assert main(["info", "--instance", "lone", "--data-dir", str(tmp_path), "--slots", "3"]) == 0


def test_unwritable_output(synth_dir, tmp_path):
    bad = tmp_path / "missing-dir" / "x.csv"
    assert run(synth_dir, "info", "--instance", "syn-a", "--out", str(bad)) == 3


def test_compare_missing_file(tmp_path):
    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 2


def test_console_entry(synth_dir):
    proc = subprocess.run([sys.executable, "-m", "examtt.cli", "info", "--instance", "syn-b",
                           "--data-dir", str(synth_dir)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("instance,exams")
