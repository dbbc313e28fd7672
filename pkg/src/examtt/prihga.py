"""Priority-based (random-key) hybrid genetic algorithm (PRIHGA).

A chromosome holds one key in [0, 1] per exam. Decoding visits exams by
decreasing key and gives each its earliest clash-free slot. Every
individual also carries its phenotype: the decoded timetable, after local
search for offspring and the initial population. Fitness is the
phenotype's penalized cost. In Lamarckian mode (default) the improved
timetable is written back into the keys via :func:`encode`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .budget import Budget, make_rng
from .constructors import SatRule, empty_timetable, saturation_construct
from .costs import CostTable
from .instance import Instance
from .local_search import HhlsParams, LocalSearch, SearchCounters, improve, vdls
from .results import RunResult, Tracker


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class PrihgaConfig:
    n: int = 100
    sel_frac: float = 0.10
    mig_frac: float = 0.10
    p_elit: float = 0.6
    r: float = 1.0
    completion: SatRule = SatRule.MIN
    init_heuristic: SatRule = SatRule.MIN
    ls: LocalSearch = LocalSearch.VDLS_PLUS_HHLS
    lamarckian: bool = True
    time_limit: float = 60.0
    seed: int = 0
    hhls: HhlsParams = field(default_factory=HhlsParams)
    offspring_ls: bool = True
    clock: str = "work"
    w_conflict: float | None = None

    def __post_init__(self):
        self.completion = SatRule.parse(self.completion)
        self.init_heuristic = SatRule.parse(self.init_heuristic)
        self.ls = LocalSearch.parse(self.ls)
        if not 0.5 < self.p_elit <= 1:
            raise ValueError("p_elit must lie in (0.5, 1]")
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.n_sel < 1 or self.n_cross < 1 or self.n_mig < 0:
            raise ValueError(f"bad split n_sel={self.n_sel} n_cross={self.n_cross} n_mig={self.n_mig}")

    @property
    def n_sel(self) -> int:
        return _half_up(self.sel_frac * self.n)

    @property
    def n_mig(self) -> int:
        return _half_up(self.mig_frac * self.n)

    @property
    def n_cross(self) -> int:
        return self.n - self.n_sel - self.n_mig


def key_order(keys) -> np.ndarray:
    """Exam visiting order: decreasing key, ties by lower exam index."""
    keys = np.asarray(keys, dtype=float)
    return np.lexsort((np.arange(len(keys)), -keys)).astype(np.int32)


def decode(keys, inst: Instance, rng, budget=None) -> np.ndarray:
    """Earliest clash-free slot per exam in key order; leftovers go to random slots."""
    g = inst.graph
    slots = empty_timetable(inst)
    _, work = kernels.decode(key_order(keys), g.ptr, g.idx, inst.m, inst.k, slots, rng, True)
    if budget is not None:
        budget.charge(work + inst.m)
    return slots


def encode(slots) -> np.ndarray:
    """Keys m/(m+1), (m-1)/(m+1), ... in (slot, exam) order."""
    slots = np.asarray(slots)
    m = len(slots)
    order = np.lexsort((np.arange(m), slots))
    keys = np.empty(m, dtype=float)
    keys[order] = np.arange(m, 0, -1) / (m + 1)
    return keys


def sathucx(keys_a, keys_b, inst: Instance, r: float, p_elit: float, completion: SatRule,
            rng, budget=None) -> np.ndarray:
    """Biased uniform crossover over ``floor(r*m)`` genes, then SAT completion.

    Each step tosses a coin (elite parent ``a`` with probability
    ``p_elit``), takes that parent's highest-key exam not yet transmitted and
    copies its key. Untransmitted exams are placed by the saturation
    heuristic on top of the partial decode and receive evenly spaced keys
    below the smallest transmitted key, in placement order.
    """
    m = inst.m
    a = np.asarray(keys_a, dtype=float)
    b = np.asarray(keys_b, dtype=float)
    child = np.zeros(m)
    sent = np.zeros(m, dtype=bool)
    orders = (key_order(a).tolist(), key_order(b).tolist())
    heads = [0, 0]
    n_steps = math.floor(r * m)
    for _ in range(n_steps):
        p = 0 if rng.random() < p_elit else 1
        order = orders[p]
        h = heads[p]
        while sent[order[h]]:
            h += 1
        heads[p] = h
        j = order[h]
        child[j] = (a, b)[p][j]
        sent[j] = True
    if budget is not None:
        budget.charge(2 * m)
    if n_steps >= m:
        return child
    g = inst.graph
    partial = empty_timetable(inst)
    transmitted = key_order(np.where(sent, child, -1.0))[:n_steps]
    _, work = kernels.decode(transmitted, g.ptr, g.idx, m, inst.k, partial, rng, False)
    if budget is not None:
        budget.charge(work)
    _, placement = saturation_construct(inst, completion, rng, partial=partial,
                                        budget=budget, return_order=True)
    rest = [e for e in placement.tolist() if not sent[e]]
    top = child[sent].min() if n_steps > 0 else 1.0
    q = len(rest)
    for i, e in enumerate(rest):
        child[e] = top * (q - i) / (q + 1)
    return child


@dataclass
class Individual:
    keys: np.ndarray
    table: CostTable

    @property
    def cost(self) -> int:
        return self.table.penalized_raw


def _offspring(inst, cfg, a: Individual, b: Individual, rng, counters, budget):
    keys = sathucx(a.keys, b.keys, inst, cfg.r, cfg.p_elit, cfg.completion, rng, budget)
    tbl = CostTable(inst, decode(keys, inst, rng, budget), cfg.w_conflict)
    budget.charge(tbl.work)
    if cfg.offspring_ls:
        before = tbl.work
        improve(tbl, cfg.ls, cfg.hhls, rng, counters)
        counters.ls_offspring += 1
        budget.charge(tbl.work - before)
        if cfg.lamarckian:
            keys = encode(tbl.slots)
    return Individual(keys, tbl)


def _migrant(inst, cfg, rng, budget):
    keys = np.array([rng.random() for _ in range(inst.m)])
    tbl = CostTable(inst, decode(keys, inst, rng, budget), cfg.w_conflict)
    budget.charge(tbl.work)
    return Individual(keys, tbl)


def prihga_run(inst: Instance, cfg: PrihgaConfig, algorithm: str = "prihga",
               observer=None) -> RunResult:
    """Run PRIHGA until the (soft) time limit.

    Offspring ``i`` of generation ``g`` uses its own stream derived from
    ``(seed, g, i)``, so the crossover pipelines are independent of each
    other and of execution order. ``observer(generation, population,
    parts)`` sees every new population.
    """
    budget = Budget(cfg.time_limit, cfg.clock)
    rng = make_rng(cfg.seed, "prihga", "init")
    counters = SearchCounters()
    tracker = Tracker(budget)
    pop = []
    for _ in range(cfg.n):
        slots = saturation_construct(inst, cfg.init_heuristic, rng, budget=budget)
        tbl = CostTable(inst, slots, cfg.w_conflict)
        budget.charge(tbl.work)
        before = tbl.work
        if cfg.offspring_ls:
            improve(tbl, cfg.ls, cfg.hhls, rng, counters)
        else:
            vdls(tbl)
            counters.vdls_calls += 1
        counters.ls_initial += 1
        budget.charge(tbl.work - before)
        keys = encode(tbl.slots) if cfg.lamarckian else encode(slots)
        pop.append(Individual(keys, tbl))
        tracker.offer(tbl)
    tracker.record(0)
    initial_best = tracker.best.penalized_raw
    gen = 0
    while not budget.expired():
        gen += 1
        ranked = sorted(range(len(pop)), key=lambda i: (pop[i].cost, i))
        top = [pop[i] for i in ranked[:cfg.n_sel]]
        rest = [pop[i] for i in ranked[cfg.n_sel:]]
        children = []
        for i in range(cfg.n_cross):
            crng = make_rng(cfg.seed, "prihga", gen, i)
            a = top[crng.randbelow(len(top))]
            b = rest[crng.randbelow(len(rest))]
            children.append(_offspring(inst, cfg, a, b, crng, counters, budget))
        mrng = make_rng(cfg.seed, "prihga", gen, "migrants")
        migrants = [_migrant(inst, cfg, mrng, budget) for _ in range(cfg.n_mig)]
        counters.extra["migrants"] = counters.extra.get("migrants", 0) + len(migrants)
        pop = top + children + migrants
        for ind in children + migrants:
            tracker.offer(ind.table)
        tracker.record(gen)
        if observer is not None:
            observer(gen, pop, (len(top), len(children), len(migrants)))
    counters.extra["initial_best_raw"] = initial_best
    return tracker.result(inst, algorithm, cfg.seed, gen, vars(counters))
