"""Incrementally maintained move-cost table for a complete timetable."""

from __future__ import annotations

import numpy as np

from . import kernels
from .instance import CostBreakdown, Instance, evaluate, is_complete


class CostTable:
    """A complete timetable plus per-(exam, slot) move costs.

    Costs live on the raw scale (summed over students): moving exam ``e`` to
    slot ``t`` changes the penalized raw cost by ``delta_raw(e, t)``. The
    object owns its arrays; share an instance across threads only read-only.
    """

    def __init__(self, inst: Instance, slots, w_conflict: float | None = None,
                 conflict_penalty_raw: int | None = None):
        slots = np.array(slots, dtype=np.int32)
        if slots.shape != (inst.m,):
            raise ValueError(f"timetable has shape {slots.shape}, expected ({inst.m},)")
        if not is_complete(slots):
            raise ValueError("timetable is incomplete")
        if slots.min() < 0 or slots.max() >= inst.k:
            raise ValueError("slot index out of range")
        self.inst = inst
        self.graph = inst.graph
        self.m, self.k = inst.m, inst.k
        if conflict_penalty_raw is None:
            conflict_penalty_raw = inst.conflict_penalty_raw(w_conflict)
        self.W = int(conflict_penalty_raw)
        self.slots = slots
        self.prox = np.zeros(self.m * self.k, dtype=np.int64)
        self.conf = np.zeros(self.m * self.k, dtype=np.int64)
        g = self.graph
        tp, tc = kernels.init_tables(slots, g.ptr, g.idx, g.w, self.m, self.k, self.prox, self.conf)
        self.proximity_raw = int(tp)
        self.conflict_weight = int(tc)
        self.work = self.m * self.k + len(g.idx)

    # ------------------------------------------------------------ queries
    @property
    def penalized_raw(self) -> int:
        return self.proximity_raw + self.W * self.conflict_weight

    @property
    def penalized_total(self) -> float:
        return self.penalized_raw / self.inst.num_students

    @property
    def proximity_avg(self) -> float:
        return self.proximity_raw / self.inst.num_students

    @property
    def feasible(self) -> bool:
        return self.conflict_weight == 0

    def breakdown(self) -> CostBreakdown:
        return CostBreakdown(self.conflict_weight, self.proximity_raw,
                             self.inst.num_students, self.W)

    def timetable(self) -> np.ndarray:
        return self.slots.copy()

    def _check_slot(self, t):
        if not 0 <= t < self.k:
            raise ValueError(f"slot {t} outside [0, {self.k})")

    def delta_raw(self, e: int, t: int) -> int:
        self._check_slot(t)
        base = e * self.k
        s = int(self.slots[e])
        return int(self.prox[base + t] - self.prox[base + s]
                   + self.W * (self.conf[base + t] - self.conf[base + s]))

    def delta(self, e: int, t: int) -> float:
        """Change in penalized_total if exam e moved to slot t."""
        return self.delta_raw(e, t) / self.inst.num_students

    def move_costs(self) -> np.ndarray:
        """(m, k) matrix of raw deltas; zero in each exam's own slot."""
        total = (self.prox + self.W * self.conf).reshape(self.m, self.k)
        return total - total[np.arange(self.m), self.slots][:, None]

    def feasible_moves(self, e: int) -> np.ndarray:
        row = self.conf[e * self.k:(e + 1) * self.k]
        out = np.flatnonzero(row == 0)
        return out[out != self.slots[e]]

    # ---------------------------------------------------------- mutation
    def apply_move(self, e: int, t: int) -> int:
        """Move exam e to slot t; returns the raw penalized change."""
        self._check_slot(t)
        g = self.graph
        dp, dc = kernels.apply_move(self.slots, g.ptr, g.idx, g.w, self.k,
                                    self.prox, self.conf, int(e), int(t))
        self.proximity_raw += int(dp)
        self.conflict_weight += int(dc)
        self.work += 1 + g.degree(e)
        return int(dp) + self.W * int(dc)

    def copy(self) -> "CostTable":
        other = object.__new__(CostTable)
        other.__dict__.update(self.__dict__)
        other.slots = self.slots.copy()
        other.prox = self.prox.copy()
        other.conf = self.conf.copy()
        return other

    def consistent(self) -> bool:
        """True when tables and totals equal a from-scratch rebuild."""
        fresh = CostTable(self.inst, self.slots, conflict_penalty_raw=self.W)
        cb = evaluate(self.slots, self.inst)
        return (np.array_equal(fresh.prox, self.prox)
                and np.array_equal(fresh.conf, self.conf)
                and cb.proximity_raw == self.proximity_raw
                and cb.conflict_weight == self.conflict_weight)
