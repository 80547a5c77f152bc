"""Exact maximum s-t flow via weighted push-relabel on shortcutted expander hierarchies."""

from .driver import ApproxResult, SolveReport, approx_maxflow, exact_maxflow, oracle_maxflow
from .graph import (CapGraph, CutResult, Demand, DimacsError, ScaledFlow, check_feasible,
                    normalize_capacities, parse_dimacs, scc, write_dimacs)
from .hierarchy_builder import PRACTICAL, THEORY, Profile, build_hierarchy, unfold

__all__ = [
    "ApproxResult", "CapGraph", "CutResult", "Demand", "DimacsError", "PRACTICAL", "Profile",
    "ScaledFlow", "SolveReport", "THEORY", "approx_maxflow", "build_hierarchy", "check_feasible",
    "exact_maxflow", "normalize_capacities", "oracle_maxflow", "parse_dimacs", "scc", "unfold",
    "write_dimacs",
]

__version__ = "0.1.0"
