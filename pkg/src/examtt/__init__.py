"""Hybrid genetic algorithms for uncapacitated examination timetabling."""

from .baselines import MultlsConfig, multls_run, pure_ga_run
from .budget import Budget, derive_seed, make_rng
from .constructors import SatRule, feasible_slots, random_timetable, saturation_construct
from .costs import CostTable
from .instance import (
    UNASSIGNED,
    ConflictGraph,
    CostBreakdown,
    DataError,
    Instance,
    ParseError,
    build_conflict_graph,
    density,
    evaluate,
    load_instance,
    parse_crs,
    parse_stu,
)
from .kernels import BACKEND
from .local_search import HhlsParams, LocalSearch, apply_llh, hhls, improve, vdls
from .parhga import ParhgaConfig, parhga_run, sathgpx
from .prihga import PrihgaConfig, decode, encode, prihga_run, sathucx
from .results import RunResult, load_best_known, rpd
from .stats import MannWhitney, mann_whitney_u

__version__ = "0.1.0"

__all__ = [
    "MultlsConfig",
    "multls_run",
    "pure_ga_run",
    "Budget",
    "derive_seed",
    "make_rng",
    "SatRule",
    "feasible_slots",
    "random_timetable",
    "saturation_construct",
    "CostTable",
    "UNASSIGNED",
    "ConflictGraph",
    "CostBreakdown",
    "DataError",
    "Instance",
    "ParseError",
    "build_conflict_graph",
    "density",
    "evaluate",
    "load_instance",
    "parse_crs",
    "parse_stu",
    "BACKEND",
    "HhlsParams",
    "LocalSearch",
    "apply_llh",
    "hhls",
    "improve",
    "vdls",
    "ParhgaConfig",
    "parhga_run",
    "sathgpx",
    "PrihgaConfig",
    "decode",
    "encode",
    "prihga_run",
    "sathucx",
    "RunResult",
    "load_best_known",
    "rpd",
    "MannWhitney",
    "mann_whitney_u",
]
