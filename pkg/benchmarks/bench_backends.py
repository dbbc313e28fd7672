"""Compare the compiled and pure-Python kernels on a synthetic instance.

Also reports operations per second for the compiled backend, which is what
``examtt.budget.WORK_RATE`` approximates.

    python3 benchmarks/bench_backends.py [--exams 150] [--students 2000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from synth import synth_students  # noqa: E402

from examtt.instance import Instance  # noqa: E402
from examtt.kernels import load_backend  # noqa: E402


def _tables(inst, slots, be):
    g = inst.graph
    n = inst.m * inst.k
    prox = np.zeros(n, dtype=np.int64)
    conf = np.zeros(n, dtype=np.int64)
    be.init_tables(slots, g.ptr, g.idx, g.w, inst.m, inst.k, prox, conf)
    return prox, conf


def run_kernels(inst, be, hhls_iters):
    """Time construct, vdls and hhls; return {kernel: (seconds, work)}."""
    g = inst.graph
    m, k = inst.m, inst.k
    W = inst.default_conflict_penalty_raw
    out = {}
    rng = be.Rng(12345)
    slots = np.full(m, -1, dtype=np.int32)
    order = np.empty(m, dtype=np.int32)
    t0 = time.perf_counter()
    _, _, work = be.construct(g.ptr, g.idx, m, k, 0, slots, rng, order)
    out["construct"] = (time.perf_counter() - t0, work)
    prox, conf = _tables(inst, slots, be)
    t0 = time.perf_counter()
    *_, work = be.vdls(slots, g.ptr, g.idx, g.w, m, k, prox, conf, W)
    out["vdls"] = (time.perf_counter() - t0, work)
    empty32 = np.zeros(0, dtype=np.int32)
    empty64 = np.zeros(0, dtype=np.int64)
    t0 = time.perf_counter()
    *_, work = be.hhls(slots, g.ptr, g.idx, g.w, m, k, prox, conf, W, hhls_iters, hhls_iters,
                       rng, 0, empty32, empty32, empty64, 0)
    out["hhls"] = (time.perf_counter() - t0, work)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exams", type=int, default=150)
    ap.add_argument("--students", type=int, default=2000)
    ap.add_argument("--slots", type=int, default=18)
    ap.add_argument("--hhls-iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    students = tuple(frozenset(e - 1 for e in s) for s in synth_students(args.exams, args.students, 3))
    inst = Instance("synthetic", args.exams, args.slots, students)
    rows = {}
    for name in ("cython", "python"):
        try:
            be = load_backend(name)
        except ImportError:
            print(f"{name}: unavailable")
            continue
        best = None
        for _ in range(args.repeat):
            res = run_kernels(inst, be, args.hhls_iters)
            best = res if best is None else {kk: min(best[kk], res[kk]) for kk in res}
        rows[name] = best

    print(f"instance: {inst.m} exams, {inst.num_students} students, {inst.k} slots; "
          f"hhls {args.hhls_iters} iterations; best of {args.repeat}")
    print(f"{'kernel':<10}{'cython s':>12}{'python s':>12}{'speedup':>10}{'work':>12}")
    for kern in ("construct", "vdls", "hhls"):
        c = rows.get("cython", {}).get(kern)
        p = rows.get("python", {}).get(kern)
        speed = f"{p[0] / c[0]:.0f}x" if c and p and c[0] > 0 else "-"
        print(f"{kern:<10}{c[0] if c else float('nan'):>12.5f}{p[0] if p else float('nan'):>12.5f}"
              f"{speed:>10}{(c or p)[1]:>12d}")
    if "cython" in rows:
        secs = sum(v[0] for v in rows["cython"].values())
        work = sum(v[1] for v in rows["cython"].values())
        print(f"compiled kernels: {work / secs:,.0f} work units per second")
        if "python" in rows:
            assert all(rows["cython"][kk][1] == rows["python"][kk][1] for kk in rows["cython"]), \
                "backends disagree on work counts"


if __name__ == "__main__":
    main()
