"""Ablation baselines: multi-start local search and GAs without offspring local search."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .budget import Budget, make_rng
from .constructors import SatRule, saturation_construct
from .costs import CostTable
from .instance import Instance
from .local_search import HhlsParams, LocalSearch, SearchCounters, improve
from .parhga import ParhgaConfig, parhga_run
from .prihga import PrihgaConfig, prihga_run
from .results import RunResult, Tracker


@dataclass
class MultlsConfig:
    time_limit: float = 60.0
    seed: int = 0
    constructor: SatRule = SatRule.MIN
    hhls: HhlsParams = field(default_factory=HhlsParams)
    clock: str = "work"
    w_conflict: float | None = None

    def __post_init__(self):
        self.constructor = SatRule.parse(self.constructor)
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")


def multls_run(inst: Instance, cfg: MultlsConfig, algorithm: str = "multls") -> RunResult:
    """Restart SAT construction + VDLS/HHLS until the budget runs out.

    Restart ``i`` draws from its own stream derived from ``(seed, i)``.
    """
    budget = Budget(cfg.time_limit, cfg.clock)
    counters = SearchCounters()
    tracker = Tracker(budget)
    restarts = 0
    while restarts == 0 or not budget.expired():
        rng = make_rng(cfg.seed, "multls", restarts)
        slots = saturation_construct(inst, cfg.constructor, rng, budget=budget)
        tbl = CostTable(inst, slots, cfg.w_conflict)
        improve(tbl, LocalSearch.VDLS_PLUS_HHLS, cfg.hhls, rng, counters)
        budget.charge(tbl.work)
        restarts += 1
        tracker.offer(tbl)
        tracker.record(restarts)
    return tracker.result(inst, algorithm, cfg.seed, restarts, vars(counters))


def pure_ga_run(inst: Instance, algo: str, cfg) -> RunResult:
    """Run PARHGA or PRIHGA with offspring local search switched off.

    The initial population still gets one VDLS pass each.
    """
    cfg = dataclasses.replace(cfg, offspring_ls=False)
    if algo == "parhga":
        if not isinstance(cfg, ParhgaConfig):
            raise TypeError("PARHGA needs a ParhgaConfig")
        return parhga_run(inst, cfg, algorithm="pure-parhga")
    if algo == "prihga":
        if not isinstance(cfg, PrihgaConfig):
            raise TypeError("PRIHGA needs a PrihgaConfig")
        return prihga_run(inst, cfg, algorithm="pure-prihga")
    raise ValueError(f"unknown algorithm {algo!r}")
