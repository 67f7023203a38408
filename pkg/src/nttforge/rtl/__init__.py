"""Datapath IR, pipelining, Verilog emission and structural metrics."""

from .build import build_datapath, generate_design, plan_butterflies
from .ir import DatapathIR, IRError, Node
from .pipeline import COMBINATIONAL, PipelinePolicy, check_balanced, insert_pipeline

__all__ = [
    "COMBINATIONAL", "DatapathIR", "IRError", "Node", "PipelinePolicy", "build_datapath",
    "check_balanced", "generate_design", "insert_pipeline", "plan_butterflies",
]
