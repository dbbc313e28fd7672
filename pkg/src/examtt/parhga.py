"""Partition-based hybrid genetic algorithm (PARHGA).

Steady state: each generation draws two distinct parents uniformly, builds
one offspring with the saturation-hybridised greedy partition crossover,
improves it by local search, adds it, and drops the costlier parent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .budget import Budget, make_rng
from .constructors import SatRule, empty_timetable, random_timetable, saturation_construct
from .costs import CostTable
from .instance import Instance
from .local_search import HhlsParams, LocalSearch, SearchCounters, improve, vdls
from .results import RunResult, Tracker


@dataclass
class ParhgaConfig:
    n: int = 20
    r: float = 0.5
    init_heuristic: SatRule = SatRule.DIST
    heuristic_init_fraction: float = 0.5
    ls: LocalSearch = LocalSearch.VDLS_PLUS_HHLS
    completion: SatRule = SatRule.DIST
    time_limit: float = 60.0
    seed: int = 0
    hhls: HhlsParams = field(default_factory=HhlsParams)
    preserve_source_slot: bool = False
    offspring_ls: bool = True
    clock: str = "work"
    w_conflict: float | None = None

    def __post_init__(self):
        self.init_heuristic = SatRule.parse(self.init_heuristic)
        self.completion = SatRule.parse(self.completion)
        self.ls = LocalSearch.parse(self.ls)
        if self.n < 2:
            raise ValueError("population size must be at least 2")
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if not 0 <= self.heuristic_init_fraction <= 1:
            raise ValueError("heuristic_init_fraction must lie in [0, 1]")
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")


def partition(slots, k: int) -> list[set[int]]:
    sets = [set() for _ in range(k)]
    for e, s in enumerate(np.asarray(slots).tolist()):
        sets[s].add(e)
    return sets


def sathgpx(inst: Instance, slots_a, slots_b, r: float, completion: SatRule, rng,
            preserve_source_slot: bool = False, budget=None) -> np.ndarray:
    """Greedy partition crossover for ``floor(r*k)`` steps, then SAT completion.

    Each step takes the largest remaining set over both parents (ties
    uniform), installs it as offspring slot ``i`` and deletes its exams from
    both parents.
    """
    k = inst.k
    parents = (partition(slots_a, k), partition(slots_b, k))
    where = (np.asarray(slots_a).tolist(), np.asarray(slots_b).tolist())
    child = empty_timetable(inst)
    used = [False] * k
    for i in range(math.floor(r * k)):
        best = None
        best_size = -1
        ties = 0
        for p in (0, 1):
            for j, members in enumerate(parents[p]):
                size = len(members)
                if size > best_size:
                    best, best_size, ties = (p, j), size, 1
                elif size == best_size:
                    ties += 1
                    if rng.randbelow(ties) == 0:
                        best = (p, j)
        p, j = best
        target = i
        if preserve_source_slot:
            target = j if not used[j] else used.index(False)
        used[target] = True
        moved = parents[p][j]
        parents[p][j] = set()
        other = parents[1 - p]
        for e in moved:
            child[e] = target
            other[where[1 - p][e]].discard(e)
    if budget is not None:
        budget.charge(inst.m + 2 * k * k)
    return saturation_construct(inst, completion, rng, partial=child, budget=budget)


def _local_search(tbl, cfg, rng, counters, budget, initial):
    before = tbl.work
    if initial or cfg.offspring_ls:
        improve(tbl, cfg.ls, cfg.hhls, rng, counters)
        if initial:
            counters.ls_initial += 1
        else:
            counters.ls_offspring += 1
    budget.charge(tbl.work - before)


def initial_population(inst, cfg, rng, counters, budget, ls_mode=None):
    n_heur = math.ceil(cfg.heuristic_init_fraction * cfg.n)
    pop = []
    for i in range(cfg.n):
        if i < n_heur:
            slots = saturation_construct(inst, cfg.init_heuristic, rng, budget=budget)
        else:
            slots = random_timetable(inst, rng)
            budget.charge(inst.m)
        tbl = CostTable(inst, slots, cfg.w_conflict)
        budget.charge(tbl.work)
        before = tbl.work
        if ls_mode is LocalSearch.VDLS_ONLY:
            vdls(tbl)
            counters.vdls_calls += 1
            counters.ls_initial += 1
        else:
            improve(tbl, cfg.ls, cfg.hhls, rng, counters)
            counters.ls_initial += 1
        budget.charge(tbl.work - before)
        pop.append(tbl)
    return pop


def parhga_run(inst: Instance, cfg: ParhgaConfig, algorithm: str = "parhga",
               observer=None) -> RunResult:
    """Run PARHGA until the (soft) time limit.

    ``observer(generation, population, removed_index, parents)`` is called
    after every replacement when given.
    """
    budget = Budget(cfg.time_limit, cfg.clock)
    rng = make_rng(cfg.seed, "parhga")
    counters = SearchCounters()
    tracker = Tracker(budget)
    init_ls = None if cfg.offspring_ls else LocalSearch.VDLS_ONLY
    pop = initial_population(inst, cfg, rng, counters, budget, init_ls)
    for tbl in pop:
        tracker.offer(tbl)
    tracker.record(0)
    initial_best = tracker.best.penalized_raw
    selected = np.zeros(cfg.n, dtype=np.int64)
    gen = 0
    while not budget.expired():
        gen += 1
        ia = rng.randbelow(cfg.n)
        ib = rng.randbelow(cfg.n)
        while ib == ia:
            ib = rng.randbelow(cfg.n)
        selected[ia] += 1
        selected[ib] += 1
        a, b = pop[ia], pop[ib]
        child = sathgpx(inst, a.slots, b.slots, cfg.r, cfg.completion, rng,
                        cfg.preserve_source_slot, budget)
        tbl = CostTable(inst, child, cfg.w_conflict)
        budget.charge(tbl.work)
        _local_search(tbl, cfg, rng, counters, budget, initial=False)
        pop.append(tbl)
        # fitness is quality: the parent with the higher cost leaves
        drop = ia if a.penalized_raw > b.penalized_raw else ib
        pop.pop(drop)
        tracker.offer(tbl)
        tracker.record(gen)
        if observer is not None:
            observer(gen, pop, drop, (ia, ib))
    counters.extra["parent_selections"] = selected.tolist()
    counters.extra["initial_best_raw"] = initial_best
    return tracker.result(inst, algorithm, cfg.seed, gen, vars(counters))
