"""Randomised saturation-degree constructors (SAT-MIN and SAT-DIST)."""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import kernels
from .instance import UNASSIGNED, ConflictGraph, Instance


class SatRule(Enum):
    MIN = 0
    DIST = 1

    @classmethod
    def parse(cls, value) -> "SatRule":
        if isinstance(value, cls):
            return value
        return cls[str(value).upper().removeprefix("SAT-")]


def empty_timetable(inst: Instance) -> np.ndarray:
    return np.full(inst.m, UNASSIGNED, dtype=np.int32)


def saturation_construct(inst: Instance, rule: SatRule, rng, partial=None,
                         budget=None, return_order: bool = False):
    """Complete ``partial`` (or an empty timetable) by saturation degree.

    Repeatedly picks the unassigned exam with the fewest clash-free slots
    (ties uniform), places it by ``rule``, and finally drops exams that have
    no clash-free slot left into uniform random slots. Fixed entries of
    ``partial`` are never changed. With ``return_order`` the placement
    sequence of the newly assigned exams is returned as well.
    """
    rule = SatRule.parse(rule)
    g = inst.graph
    slots = empty_timetable(inst) if partial is None else np.array(partial, dtype=np.int32)
    if slots.shape != (inst.m,):
        raise ValueError("partial timetable has wrong length")
    order = np.zeros(inst.m, dtype=np.int32)
    placed, _, work = kernels.construct(g.ptr, g.idx, inst.m, inst.k, rule.value, slots, rng, order)
    if budget is not None:
        budget.charge(work)
    if return_order:
        return slots, order[:placed].copy()
    return slots


def feasible_slots(e: int, slots, g: ConflictGraph, k: int) -> set[int]:
    """Slots where exam ``e`` (unassigned) would clash with no assigned neighbour."""
    slots = np.asarray(slots)
    if slots[e] != UNASSIGNED:
        raise ValueError(f"exam {e} is already assigned")
    lo, hi = g.ptr[e], g.ptr[e + 1]
    taken = slots[g.idx[lo:hi]]
    return set(range(k)) - set(taken[taken >= 0].tolist())


def random_timetable(inst: Instance, rng) -> np.ndarray:
    return np.array([rng.randbelow(inst.k) for _ in range(inst.m)], dtype=np.int32)
