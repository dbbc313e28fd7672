"""Run results, the result CSV schema, best-known values and RPD."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .instance import canonical_name

RESULT_FIELDS = ["instance", "algorithm", "seed", "wall_seconds", "generations",
                 "best_cost", "feasible", "rpd"]
TRACE_FIELDS = ["instance", "algorithm", "seed", "generation", "elapsed", "best_cost"]


def fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.6f}"


@dataclass
class RunResult:
    instance: str
    algorithm: str
    seed: int
    wall_seconds: float
    generations: int
    best_cost: float
    feasible: bool
    best_timetable: np.ndarray | None = None
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def row(self, best_known: dict[str, float] | None = None) -> dict[str, str]:
        best = (best_known or {}).get(canonical_name(self.instance))
        return {
            "instance": self.instance,
            "algorithm": self.algorithm,
            "seed": str(self.seed),
            "wall_seconds": fmt(self.wall_seconds),
            "generations": str(self.generations),
            "best_cost": fmt(self.best_cost),
            "feasible": "1" if self.feasible else "0",
            "rpd": fmt(rpd(self.best_cost, best)) if best else "",
        }

    def trace_rows(self):
        for gen, elapsed, cost in self.trace:
            yield {"instance": self.instance, "algorithm": self.algorithm, "seed": str(self.seed),
                   "generation": str(gen), "elapsed": fmt(elapsed), "best_cost": fmt(cost)}


class Tracker:
    """Best-ever bookkeeping shared by all algorithms."""

    def __init__(self, budget):
        self.budget = budget
        self.best = None
        self.trace: list[tuple[int, float, float]] = []

    def offer(self, tbl) -> bool:
        if self.best is None or tbl.penalized_raw < self.best.penalized_raw:
            self.best = tbl.copy()
            return True
        return False

    def record(self, generation: int):
        self.trace.append((generation, self.budget.elapsed(), self.best.penalized_total))

    def result(self, inst, algorithm, seed, generations, counters=None) -> RunResult:
        b = self.best
        return RunResult(
            instance=inst.name, algorithm=algorithm, seed=seed,
            wall_seconds=self.budget.elapsed(), generations=generations,
            best_cost=b.proximity_avg, feasible=b.feasible,
            best_timetable=b.timetable(), trace=self.trace, counters=counters or {},
        )


def rpd(val: float, best: float) -> float:
    """Relative percentage deviation of ``val`` from ``best``."""
    if best <= 0:
        raise ValueError("best-known value must be positive")
    return (val - best) / best * 100.0


def load_best_known(path=None) -> dict[str, float]:
    if path is None:
        text = resources.files("examtt").joinpath("data/best_known.csv").read_text()
    else:
        text = Path(path).read_text()
    table = {}
    for row in csv.DictReader(io.StringIO(text)):
        v = float(row["best"])
        if v <= 0:
            raise ValueError(f"best-known value for {row['instance']} must be positive")
        table[canonical_name(row["instance"])] = v
    return table


def write_rows(fh, fields, rows):
    out = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
    out.writeheader()
    for r in rows:
        out.writerow(r)
