"""Toronto-format instances, the student conflict graph, and timetable evaluation.

Exams and slots are 0-based in memory. File exam number ``i`` maps to exam
``i - 1``; slot ``t`` in the interface maps to slot ``t - 1``.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse

log = logging.getLogger(__name__)

UNASSIGNED = -1
# proximity weight by slot gap; index 0 is a clash and counted separately
PROXIMITY_WEIGHTS = (0, 16, 8, 4, 2, 1)


class ParseError(ValueError):
    pass


class DataError(RuntimeError):
    """Instance files or metadata missing or unusable."""


@dataclass(frozen=True)
class Instance:
    name: str
    m: int
    k: int
    students: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"slot count must be positive, got {self.k}")
        if not self.students:
            raise ValueError("instance has no students")
        for s in self.students:
            for e in s:
                if not 0 <= e < self.m:
                    raise ValueError(f"exam {e} outside [0, {self.m})")

    @property
    def num_students(self) -> int:
        return len(self.students)

    def with_slots(self, k: int) -> "Instance":
        return Instance(self.name, self.m, k, self.students)

    @cached_property
    def graph(self) -> "ConflictGraph":
        return build_conflict_graph(self)

    @cached_property
    def default_conflict_penalty_raw(self) -> int:
        """Clash weight on the raw (student-summed) scale.

        Equals ``32 * sum_s C(|s|, 2) + S``, so a single clashing student
        outweighs any feasible proximity total.
        """
        pairs = sum(len(s) * (len(s) - 1) // 2 for s in self.students)
        return 32 * pairs + self.num_students

    def conflict_penalty_raw(self, w_conflict: float | None = None) -> int:
        if w_conflict is None:
            return self.default_conflict_penalty_raw
        if w_conflict < 0:
            raise ValueError("conflict weight must be non-negative")
        return int(math.floor(w_conflict * self.num_students + 0.5))


@dataclass(frozen=True, eq=False)
class ConflictGraph:
    """Symmetric co-enrollment counts, stored as CSR adjacency.

    ``weights[i, j]`` is the number of students taking both exam i and exam j.
    """

    m: int
    weights: sparse.csr_matrix
    ptr: np.ndarray = field(repr=False)
    idx: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    def neighbors(self, e: int) -> list[tuple[int, int]]:
        lo, hi = self.ptr[e], self.ptr[e + 1]
        return list(zip(self.idx[lo:hi].tolist(), self.w[lo:hi].tolist()))

    def degree(self, e: int) -> int:
        return int(self.ptr[e + 1] - self.ptr[e])

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle edge list ``(i, j, w)`` with ``i < j``."""
        rows = np.repeat(np.arange(self.m, dtype=np.int64), np.diff(self.ptr))
        keep = rows < self.idx
        return rows[keep], self.idx[keep].astype(np.int64), self.w[keep]

    @property
    def num_edges(self) -> int:
        return len(self.idx) // 2

    def dense(self) -> np.ndarray:
        return self.weights.toarray()


def build_conflict_graph(inst: Instance) -> ConflictGraph:
    rows, cols = [], []
    for i, s in enumerate(inst.students):
        rows.extend([i] * len(s))
        cols.extend(s)
    data = np.ones(len(rows), dtype=np.int64)
    enroll = sparse.csr_matrix((data, (rows, cols)), shape=(inst.num_students, inst.m))
    co = (enroll.T @ enroll).tocsr()
    co.setdiag(0)
    co.eliminate_zeros()
    co.sort_indices()
    return ConflictGraph(
        m=inst.m,
        weights=co,
        ptr=co.indptr.astype(np.int64),
        idx=co.indices.astype(np.int32),
        w=co.data.astype(np.int64),
    )


def density(g: ConflictGraph) -> float:
    """Fraction of ordered exam pairs that share at least one student."""
    if g.m < 2:
        raise ValueError("density needs at least two exams")
    return len(g.idx) / (g.m * (g.m - 1))


# ---------------------------------------------------------------- parsing

def parse_stu(text: str, name: str = "instance", k: int = 1) -> Instance:
    students = []
    m = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split()
        if not tokens:
            continue
        exams = set()
        for tok in tokens:
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: bad exam number {tok!r}") from None
            if v <= 0:
                raise ParseError(f"line {lineno}: exam number must be positive, got {v}")
            exams.add(v - 1)
            m = max(m, v)
        students.append(frozenset(exams))
    if not students:
        raise ParseError("no enrollments found")
    return Instance(name=name, m=m, k=k, students=tuple(students))


def parse_crs(text: str) -> dict[int, int]:
    """Map 0-based exam -> enrollment count."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise ParseError(f"line {lineno}: expected 'exam count', got {line!r}")
        try:
            exam, count = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field in {line!r}") from None
        out[exam - 1] = count
    return out


def crs_mismatches(inst: Instance, counts: dict[int, int]) -> list[str]:
    enrolled = np.zeros(inst.m, dtype=np.int64)
    for s in inst.students:
        for e in s:
            enrolled[e] += 1
    notes = []
    if counts and max(counts) + 1 != inst.m:
        notes.append(f"crs lists {max(counts) + 1} exams, stu implies {inst.m}")
    for e, c in sorted(counts.items()):
        have = int(enrolled[e]) if e < inst.m else 0
        if have != c:
            notes.append(f"exam {e + 1}: crs {c}, stu {have}")
    return notes


def load_slot_table(path: str | os.PathLike | None = None) -> dict[str, int]:
    if path is None:
        text = resources.files("examtt").joinpath("data/slots.txt").read_text()
    else:
        text = Path(path).read_text()
    table = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"slots file line {lineno}: expected 'name slots'")
        table[canonical_name(parts[0])] = int(parts[1])
    return table


def canonical_name(name: str) -> str:
    return Path(name).name.lower().removesuffix(".stu")


def default_data_dir() -> Path:
    return Path(os.environ.get("EXAMTT_DATA", "data/toronto"))


def find_instance_file(name: str, data_dir: str | os.PathLike, ext: str) -> Path | None:
    data_dir = Path(data_dir)
    want = f"{canonical_name(name)}.{ext}"
    if not data_dir.is_dir():
        return None
    for p in data_dir.iterdir():
        if p.name.lower() == want:
            return p
    return None


def load_instance(
    name: str,
    data_dir: str | os.PathLike | None = None,
    slots: int | None = None,
    slots_file: str | os.PathLike | None = None,
) -> Instance:
    """Load ``<name>.stu`` (and ``<name>.crs`` if present) from ``data_dir``.

    The slot count comes from ``slots`` when given, otherwise from the slot
    table. Raises DataError when a file or the slot count is missing.
    """
    data_dir = default_data_dir() if data_dir is None else Path(data_dir)
    key = canonical_name(name)
    stu = find_instance_file(key, data_dir, "stu")
    if stu is None:
        raise DataError(f"no {key}.stu in {data_dir}")
    if slots is None:
        try:
            table = load_slot_table(slots_file)
        except OSError as exc:
            raise DataError(f"cannot read slots file: {exc}") from exc
        except ParseError as exc:
            raise DataError(str(exc)) from exc
        local = data_dir / "slots.txt"
        if key not in table and slots_file is None and local.is_file():
            table = load_slot_table(local)
        if key not in table:
            raise DataError(f"no slot count for {key}; pass slots or a slots file")
        slots = table[key]
    try:
        inst = parse_stu(stu.read_text(), name=key, k=slots)
    except ParseError as exc:
        raise DataError(f"{stu}: {exc}") from exc
    crs = find_instance_file(key, data_dir, "crs")
    if crs is not None:
        notes = crs_mismatches(inst, parse_crs(crs.read_text()))
        for note in notes[:5]:
            log.warning("%s: %s", key, note)
        if len(notes) > 5:
            log.warning("%s: %d further crs mismatches", key, len(notes) - 5)
    return inst


# ------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class CostBreakdown:
    conflict_weight: int
    proximity_raw: int
    num_students: int
    conflict_penalty_raw: int

    @property
    def proximity_avg(self) -> float:
        return self.proximity_raw / self.num_students

    @property
    def w_conflict(self) -> float:
        return self.conflict_penalty_raw / self.num_students

    @property
    def penalized_raw(self) -> int:
        return self.proximity_raw + self.conflict_penalty_raw * self.conflict_weight

    @property
    def penalized_total(self) -> float:
        return self.penalized_raw / self.num_students

    @property
    def feasible(self) -> bool:
        return self.conflict_weight == 0


def is_complete(slots: np.ndarray) -> bool:
    return bool(np.all(np.asarray(slots) != UNASSIGNED))


def evaluate(
    slots: np.ndarray,
    inst: Instance,
    g: ConflictGraph | None = None,
    w_conflict: float | None = None,
) -> CostBreakdown:
    slots = np.asarray(slots)
    if slots.shape != (inst.m,):
        raise ValueError(f"timetable has shape {slots.shape}, expected ({inst.m},)")
    if not is_complete(slots):
        raise ValueError("timetable is incomplete")
    if slots.min() < 0 or slots.max() >= inst.k:
        raise ValueError("slot index out of range")
    g = inst.graph if g is None else g
    i, j, w = g.edges
    gap = np.abs(slots[i].astype(np.int64) - slots[j])
    conflict = int(w[gap == 0].sum())
    near = gap <= 5
    prox = int((w[near] * np.asarray(PROXIMITY_WEIGHTS, dtype=np.int64)[gap[near]]).sum())
    return CostBreakdown(conflict, prox, inst.num_students, inst.conflict_penalty_raw(w_conflict))
