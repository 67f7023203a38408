"""Multiplierless constant multiplication: CSD, optimal SCM, Hcub-style MCM."""

from .csd import CsdForm, binary_cost, csd_cost, csd_recode, odd_part
from .graph import ADD, SUB, AdderGraph, GraphError, Op, format_graph, graph_eval, parse_graph, verify_graph
from .hcub import mcm_decompose
from .plan import ButterflyPlan, PlanError, csd_total, optimize_butterfly_constants, reduction_graphs
from .scm import OptimalityCertificate, exhaustive_search, scm_decompose, verify_certificate

__all__ = [
    "ADD", "SUB", "AdderGraph", "ButterflyPlan", "CsdForm", "GraphError", "Op", "OptimalityCertificate",
    "PlanError", "binary_cost", "csd_cost", "csd_recode", "csd_total", "exhaustive_search", "format_graph",
    "graph_eval", "mcm_decompose", "odd_part", "optimize_butterfly_constants", "parse_graph",
    "reduction_graphs", "scm_decompose", "verify_certificate", "verify_graph",
]
