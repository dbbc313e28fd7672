"""Vertex descent (VDLS) and the hyper-heuristic local search (HHLS).

HHLS draws one of five operators uniformly per iteration and keeps the
result when the penalized cost does not increase:

1. move a random exam to a random clash-free slot
2. best clash-free swap partner for a random movable exam
3. Kempe-chain swap between a random exam's slot and another slot
4. lift one slot's block out and reinsert it elsewhere, shifting the slots
   in between (or, in ``merge`` mode, pour it into the target slot)
5. exchange the contents of two slots
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .costs import CostTable

OPERATOR_NAMES = ("llh1", "llh2", "llh3", "llh4", "llh5")


class LocalSearch(Enum):
    VDLS_ONLY = "vdls"
    VDLS_PLUS_HHLS = "vdls+hhls"

    @classmethod
    def parse(cls, value) -> "LocalSearch":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class HhlsParams:
    iteration_limit: int = 25_000
    stall_limit: int = 5_000
    llh4_mode: str = "reinsert"

    def __post_init__(self):
        if self.iteration_limit <= 0 or self.stall_limit <= 0:
            raise ValueError("HHLS limits must be positive")
        if self.stall_limit > self.iteration_limit:
            raise ValueError("stall_limit must not exceed iteration_limit")
        if self.llh4_mode not in ("reinsert", "merge"):
            raise ValueError(f"unknown llh4 mode {self.llh4_mode!r}")


@dataclass
class HhlsTrace:
    operator: np.ndarray
    accepted: np.ndarray
    cost_raw: np.ndarray
    num_students: int

    def write_csv(self, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["iteration", "operator", "accepted", "cost"])
            for i, (op, acc, c) in enumerate(zip(self.operator, self.accepted, self.cost_raw)):
                out.writerow([i + 1, OPERATOR_NAMES[op], int(acc), f"{c / self.num_students:.6f}"])
        finally:
            if own:
                fh.close()


@dataclass
class HhlsStats:
    iterations: int
    accepted: int
    improved: int
    op_counts: tuple
    trace: HhlsTrace | None = None


@dataclass
class SearchCounters:
    """Instrumentation for tests and ablations."""

    vdls_calls: int = 0
    hhls_calls: int = 0
    ls_initial: int = 0
    ls_offspring: int = 0
    ls_migrants: int = 0
    extra: dict = field(default_factory=dict)


def vdls(tbl: CostTable) -> int:
    """Descend to a fixpoint, in place. Returns the number of moves made."""
    g = tbl.graph
    dp, dc, moves, _, work = kernels.vdls(tbl.slots, g.ptr, g.idx, g.w, tbl.m, tbl.k,
                                          tbl.prox, tbl.conf, tbl.W)
    tbl.proximity_raw += int(dp)
    tbl.conflict_weight += int(dc)
    tbl.work += int(work)
    return int(moves)


_EMPTY32 = np.zeros(0, dtype=np.int32)
_EMPTY64 = np.zeros(0, dtype=np.int64)


def hhls(tbl: CostTable, params: HhlsParams, rng, trace: bool = False) -> HhlsStats:
    """Run the hyper-heuristic in place on ``tbl``."""
    g = tbl.graph
    n = params.iteration_limit
    if trace:
        ops, acc, cost = (np.zeros(n, np.int32), np.zeros(n, np.int32), np.zeros(n, np.int64))
    else:
        ops, acc, cost = _EMPTY32, _EMPTY32, _EMPTY64
    mode = kernels.LLH4_MERGE if params.llh4_mode == "merge" else kernels.LLH4_REINSERT
    dp, dc, its, accepted, improved, op_counts, work = kernels.hhls(
        tbl.slots, g.ptr, g.idx, g.w, tbl.m, tbl.k, tbl.prox, tbl.conf, tbl.W,
        n, params.stall_limit, rng, mode, ops, acc, cost, tbl.penalized_raw)
    tbl.proximity_raw += int(dp)
    tbl.conflict_weight += int(dc)
    tbl.work += int(work)
    tr = None
    if trace:
        tr = HhlsTrace(ops[:its].copy(), acc[:its].copy(), cost[:its].copy(), tbl.inst.num_students)
    return HhlsStats(int(its), int(accepted), int(improved), tuple(int(c) for c in op_counts), tr)


def apply_llh(tbl: CostTable, op: int | str, rng, llh4_mode: str = "reinsert") -> int:
    """Apply one low-level heuristic in place, unconditionally.

    ``op`` is 0..4 or a name from OPERATOR_NAMES. LLH2 applies its best
    feasible swap even when that swap worsens the cost. Returns the raw
    penalized delta (0 for a no-op).
    """
    if isinstance(op, str):
        op = OPERATOR_NAMES.index(op.lower())
    if not 0 <= op < 5:
        raise ValueError(f"operator index {op} out of range")
    g = tbl.graph
    mode = kernels.LLH4_MERGE if llh4_mode == "merge" else kernels.LLH4_REINSERT
    dp, dc, _, _, _, _, work = kernels.hhls(
        tbl.slots, g.ptr, g.idx, g.w, tbl.m, tbl.k, tbl.prox, tbl.conf, tbl.W,
        1, 1, rng, mode, _EMPTY32, _EMPTY32, _EMPTY64, tbl.penalized_raw, op, True)
    tbl.proximity_raw += int(dp)
    tbl.conflict_weight += int(dc)
    tbl.work += int(work)
    return int(dp) + tbl.W * int(dc)


def improve(tbl: CostTable, mode: LocalSearch, params: HhlsParams, rng,
            counters: SearchCounters | None = None) -> CostTable:
    """VDLS to a fixpoint; with HHLS enabled, then HHLS and a final VDLS."""
    vdls(tbl)
    if counters is not None:
        counters.vdls_calls += 1
    if mode is LocalSearch.VDLS_PLUS_HHLS:
        hhls(tbl, params, rng)
        vdls(tbl)
        if counters is not None:
            counters.hhls_calls += 1
            counters.vdls_calls += 1
    return tbl
