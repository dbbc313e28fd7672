"""Command-line harness: construct, solve, bench, calibrate, compare, info.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baselines import MultlsConfig, multls_run, pure_ga_run
from .budget import derive_seed, make_rng
from .constructors import SatRule, saturation_construct
from .instance import DataError, density, evaluate, load_instance
from .local_search import HhlsParams
from .parhga import ParhgaConfig, parhga_run
from .prihga import PrihgaConfig, prihga_run
from .results import RESULT_FIELDS, TRACE_FIELDS, fmt, load_best_known, write_rows
from .stats import mann_whitney_u

log = logging.getLogger("examtt")

ALGORITHMS = ("parhga", "prihga", "multls", "pure-parhga", "pure-prihga")
CONSTRUCT_FIELDS = ["instance", "rule", "run", "seed", "samples", "best_cost", "feasible_count"]
COMPARE_FIELDS = ["instance", "n_a", "n_b", "mean_a", "mean_b", "u", "p", "significant", "better"]

# factor levels swept by `calibrate` when --levels is not given
DEFAULT_LEVELS = {
    "parhga": {
        "ls": ["vdls", "vdls+hhls"],
        "pop": ["20", "50", "100"],
        "init_frac": ["0.5", "1.0"],
        "init_heuristic": ["min", "dist"],
        "hybrid": ["0", "25", "50", "75"],
    },
    "prihga": {
        "pop": ["20", "50", "100"],
        "selmig": ["0.1/0.1", "0.2/0.2", "0.25/0.25"],
        "p_elit": ["0.6", "0.8"],
        "hybrid": ["0", "25", "50", "75"],
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ configs

def build_config(algo: str, opts: dict):
    """Algorithm config from CLI-style overrides (None means default)."""
    hh = HhlsParams(
        iteration_limit=opts.get("hhls_iters") or HhlsParams.iteration_limit,
        stall_limit=opts.get("hhls_stall") or HhlsParams.stall_limit,
        llh4_mode=opts.get("llh4") or HhlsParams.llh4_mode,
    )
    common = dict(time_limit=opts["time"], seed=opts["seed"], hhls=hh,
                  clock=opts.get("clock") or "work", w_conflict=opts.get("w_conflict"))
    base = algo.removeprefix("pure-")
    if base == "parhga":
        kw = dict(common)
        for key, name in (("pop", "n"), ("r", "r"), ("ls", "ls"), ("init_heuristic", "init_heuristic"),
                          ("init_frac", "heuristic_init_fraction"), ("completion", "completion")):
            if opts.get(key) is not None:
                kw[name] = opts[key]
        if opts.get("preserve_source_slot"):
            kw["preserve_source_slot"] = True
        return ParhgaConfig(**kw)
    if base == "prihga":
        kw = dict(common)
        for key, name in (("pop", "n"), ("r", "r"), ("ls", "ls"), ("p_elit", "p_elit"),
                          ("sel_frac", "sel_frac"), ("mig_frac", "mig_frac"),
                          ("completion", "completion")):
            if opts.get(key) is not None:
                kw[name] = opts[key]
        if opts.get("baldwinian"):
            kw["lamarckian"] = False
        return PrihgaConfig(**kw)
    if base == "multls":
        return MultlsConfig(time_limit=opts["time"], seed=opts["seed"], hhls=hh,
                            clock=common["clock"], w_conflict=opts.get("w_conflict"))
    raise UsageError(f"unknown algorithm {algo!r}")


def run_algorithm(inst, algo: str, opts: dict):
    cfg = build_config(algo, opts)
    if algo == "parhga":
        return parhga_run(inst, cfg)
    if algo == "prihga":
        return prihga_run(inst, cfg)
    if algo == "multls":
        return multls_run(inst, cfg)
    return pure_ga_run(inst, algo.removeprefix("pure-"), cfg)


def _load(name, opts):
    return load_instance(name, opts.get("data_dir"), opts.get("slots"), opts.get("slots_file"))


def run_cell(cell: dict):
    """Run one (instance, algorithm, seed, overrides) cell. Picklable entry point."""
    inst = _load(cell["instance"], cell)
    res = run_algorithm(inst, cell["algo"], cell)
    best = load_best_known(cell.get("best_known"))
    row = res.row(best)
    for key in cell.get("factors", ()):
        row[key] = cell["factor_values"][key]
    return row, list(res.trace_rows())


def _run_cells(cells, jobs):
    if jobs <= 1 or len(cells) <= 1:
        return [run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells))


# ------------------------------------------------------------------ output

@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise RuntimeError(f"cannot write {path}: {exc}") from exc
    with fh:
        yield fh


# ---------------------------------------------------------------- commands

def cmd_info(args):
    rows = []
    for name in args.instance:
        inst = _load(name, vars(args))
        rows.append({"instance": inst.name, "exams": inst.m, "students": inst.num_students,
                     "slots": inst.k, "density": f"{density(inst.graph):.4f}"})
    with _output(args.out) as fh:
        write_rows(fh, ["instance", "exams", "students", "slots", "density"], rows)


def construct_runs(inst, rule: SatRule, runs: int, samples: int, seed: int):
    """Per run: best feasible proximity and feasible count over ``samples`` constructions."""
    out = []
    for run in range(runs):
        run_seed = derive_seed(seed, inst.name, rule.name, run)
        rng = make_rng(run_seed)
        best = math.inf
        feasible = 0
        for _ in range(samples):
            cb = evaluate(saturation_construct(inst, rule, rng), inst)
            if cb.feasible:
                feasible += 1
                best = min(best, cb.proximity_avg)
        out.append({"instance": inst.name, "rule": rule.name.lower(), "run": str(run),
                    "seed": str(run_seed), "samples": str(samples),
                    "best_cost": fmt(best) if feasible else "", "feasible_count": str(feasible)})
    return out


def cmd_construct(args):
    rules = [SatRule.MIN, SatRule.DIST] if args.rule == "both" else [SatRule.parse(args.rule)]
    rows = []
    for name in args.instance:
        inst = _load(name, vars(args))
        for rule in rules:
            rows.extend(construct_runs(inst, rule, args.runs, args.samples, args.seed))
    with _output(args.out) as fh:
        write_rows(fh, CONSTRUCT_FIELDS, rows)
    for name in args.instance:
        for rule in rules:
            sub = [r for r in rows if r["instance"].lower() == name.lower().removesuffix(".stu")
                   and r["rule"] == rule.name.lower()]
            bests = [float(r["best_cost"]) for r in sub if r["best_cost"]]
            feas = [int(r["feasible_count"]) for r in sub]
            none = sum(1 for r in sub if not r["best_cost"])
            mean_best = f"{np.mean(bests):.2f}" if bests else "n/a"
            log.info("%s %s: mean best %s, mean feasible %.2f, runs without feasible %d",
                     name, rule.name, mean_best, np.mean(feas), none)


def _algo_opts(args) -> dict:
    return {k: getattr(args, k, None) for k in (
        "data_dir", "slots", "slots_file", "best_known", "time", "clock", "w_conflict", "pop", "r",
        "p_elit", "sel_frac", "mig_frac", "ls", "hhls_iters", "hhls_stall", "llh4",
        "init_heuristic", "init_frac", "completion", "baldwinian", "preserve_source_slot")}


def cmd_solve(args):
    cell = dict(_algo_opts(args), instance=args.instance[0], algo=args.algo[0], seed=args.seed)
    row, trace = run_cell(cell)
    with _output(args.out) as fh:
        write_rows(fh, RESULT_FIELDS, [row])
    if args.trace:
        with _output(args.trace) as fh:
            write_rows(fh, TRACE_FIELDS, trace)


def cmd_bench(args):
    opts = _algo_opts(args)
    cells = []
    for name, algo, run in itertools.product(args.instance, args.algo, range(args.runs)):
        seed = derive_seed(args.seed, name.lower(), algo, run)
        cells.append(dict(opts, instance=name, algo=algo, seed=seed, _key=(name.lower(), algo, run)))
    cells.sort(key=lambda c: c["_key"])
    results = _run_cells(cells, args.jobs)
    with _output(args.out) as fh:
        write_rows(fh, RESULT_FIELDS, [r for r, _ in results])
    if args.trace:
        with _output(args.trace) as fh:
            write_rows(fh, TRACE_FIELDS, [t for _, tr in results for t in tr])


def parse_levels(algo: str, specs: list[str] | None) -> dict[str, list[str]]:
    levels = {k: list(v) for k, v in DEFAULT_LEVELS[algo].items()}
    for item in specs or []:
        if "=" not in item:
            raise UsageError(f"--levels expects factor=v1,v2, got {item!r}")
        key, vals = item.split("=", 1)
        if key not in levels:
            raise UsageError(f"unknown factor {key!r} for {algo}; know {sorted(levels)}")
        levels[key] = [v for v in vals.split(",") if v]
        if not levels[key]:
            raise UsageError(f"factor {key!r} has no levels")
    return levels


def _apply_factors(opts: dict, values: dict) -> dict:
    opts = dict(opts)
    for key, val in values.items():
        if key == "hybrid":
            opts["r"] = 1 - float(val) / 100
        elif key == "pop":
            opts["pop"] = int(val)
        elif key == "selmig":
            sel, mig = val.split("/")
            opts["sel_frac"], opts["mig_frac"] = float(sel), float(mig)
        elif key in ("init_frac", "p_elit"):
            opts[key] = float(val)
        else:
            opts[key] = val
    return opts


def cmd_calibrate(args):
    algo = args.algo[0]
    if algo not in DEFAULT_LEVELS:
        raise UsageError("calibrate supports parhga and prihga")
    levels = parse_levels(algo, args.levels)
    factors = list(levels)
    base = _algo_opts(args)
    cells = []
    for name in args.instance:
        for run in range(args.runs):
            seed = derive_seed(args.seed, name.lower(), algo, "calibrate", run)
            for combo in itertools.product(*(levels[f] for f in factors)):
                values = dict(zip(factors, combo))
                opts = _apply_factors(base, values)
                cells.append(dict(opts, instance=name, algo=algo, seed=seed, factors=factors,
                                  factor_values=values, _key=(name.lower(), run, combo)))
    results = _run_cells(cells, args.jobs)
    fields = RESULT_FIELDS[:3] + factors + RESULT_FIELDS[3:]
    with _output(args.out) as fh:
        write_rows(fh, fields, [r for r, _ in results])


def _read_samples(path, column):
    samples = {}
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                if column not in row:
                    raise DataError(f"{path}: no column {column!r}")
                samples.setdefault(row["instance"], [])
                if row[column] != "":
                    samples[row["instance"]].append(float(row[column]))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return samples


def compare_samples(a: dict, b: dict, alpha: float = 0.05):
    rows = []
    for name in sorted(set(a) & set(b)):
        xs, ys = a[name], b[name]
        if len(xs) < 3 or len(ys) < 3:
            log.warning("%s: too few samples (%d, %d)", name, len(xs), len(ys))
            continue
        mw = mann_whitney_u(xs, ys)
        better = "none"
        if mw.significant(alpha):
            better = "a" if mw.x_tends_smaller else "b"
        rows.append({"instance": name, "n_a": str(len(xs)), "n_b": str(len(ys)),
                     "mean_a": fmt(float(np.mean(xs))), "mean_b": fmt(float(np.mean(ys))),
                     "u": fmt(mw.u), "p": fmt(mw.p), "significant": "1" if mw.significant(alpha) else "0",
                     "better": better})
    return rows


def cmd_compare(args):
    a = _read_samples(args.a, args.column)
    b = _read_samples(args.b, args.column)
    rows = compare_samples(a, b, args.alpha)
    with _output(args.out) as fh:
        write_rows(fh, COMPARE_FIELDS, rows)


# ------------------------------------------------------------------- parser

def _add_common(p, multi_instance=True):
    p.add_argument("--instance", action="append", required=True,
                   help="instance name, e.g. hec-s-92 (repeatable)" if multi_instance else "instance name")
    p.add_argument("--data-dir", help="directory with .stu/.crs files (default $EXAMTT_DATA or data/toronto)")
    p.add_argument("--slots-file", help="file mapping instance name to slot count")
    p.add_argument("--slots", type=int, help="override the slot count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default stdout)")


def _add_algo(p, multi=True):
    p.add_argument("--algo", action="append", required=True, choices=ALGORITHMS,
                   help="algorithm (repeatable)" if multi else "algorithm")
    p.add_argument("--time", type=float, default=60.0, help="time limit in seconds")
    p.add_argument("--clock", choices=("work", "wall"), default="work",
                   help="work: deterministic nominal seconds; wall: real time")
    p.add_argument("--trace", help="write per-generation best-cost trace CSV here")
    p.add_argument("--best-known", help="CSV of instance,best overriding the shipped values")
    p.add_argument("--w-conflict", type=float, help="clash weight per student (default: automatic)")
    p.add_argument("--pop", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--p-elit", type=float)
    p.add_argument("--sel-frac", type=float)
    p.add_argument("--mig-frac", type=float)
    p.add_argument("--ls", choices=("vdls", "vdls+hhls"))
    p.add_argument("--hhls-iters", type=int)
    p.add_argument("--hhls-stall", type=int)
    p.add_argument("--llh4", choices=("reinsert", "merge"))
    p.add_argument("--init-heuristic", choices=("min", "dist"))
    p.add_argument("--init-frac", type=float)
    p.add_argument("--completion", choices=("min", "dist"))
    p.add_argument("--baldwinian", action="store_true", help="PRIHGA: keep crossover keys after local search")
    p.add_argument("--preserve-source-slot", action="store_true",
                   help="PARHGA: keep each transferred set at its parent's slot index")


def make_parser():
    parser = _Parser(prog="examtt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("info", help="instance statistics")
    _add_common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("construct", help="sample the saturation-degree constructors")
    _add_common(p)
    p.add_argument("--rule", choices=("min", "dist", "both"), default="both")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--runs", type=int, default=50)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("solve", help="one algorithm, one instance, one seed")
    _add_common(p, multi_instance=False)
    _add_algo(p, multi=False)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="algorithms x instances x runs")
    _add_common(p)
    _add_algo(p)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("calibrate", help="full factorial grid over factor levels")
    _add_common(p)
    _add_algo(p, multi=False)
    p.add_argument("--levels", action="append", help="factor=v1,v2,... (repeatable)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compare", help="Mann-Whitney U per instance between two CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--column", default="best_cost")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = make_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        if args.command in ("solve",) and (len(args.instance) > 1 or len(args.algo) > 1):
            raise UsageError("solve takes exactly one --instance and one --algo")
        if args.command == "calibrate" and len(args.algo) > 1:
            raise UsageError("calibrate takes one --algo")
        args.func(args)
    except UsageError as exc:
        print(f"examtt: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"examtt: data error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"examtt: usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"examtt: failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
