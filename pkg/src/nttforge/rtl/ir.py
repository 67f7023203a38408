"""Datapath IR: a flat netlist of width-annotated arithmetic nodes.

Node kinds and their parameters:

    in      lane index             primary coefficient input
    mode    -                      1 = inverse transform
    valid   -                      input-valid strobe
    add     (sa, sb)               (a << sa) + (b << sb)
    sub     (sa, sb)               (a << sa) - (b << sb), never negative
    shl     k                      a << k   (wires)
    shr     k                      a >> k   (wires)
    csub    K                      a - K if a >= K else a
    modsub  Q                      a - b if a >= b else a + Q - b
    mux     -                      args (sel, a0, a1): a1 if sel else a0
    reg     -                      one-cycle delay, reset to 0

Every value is a non-negative integer bounded by ``vmax``; the declared
width is exactly ``vmax.bit_length()``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PORT_KINDS = ("in", "mode", "valid")
ADDER_KINDS = ("add", "sub", "csub", "modsub")
WIRE_KINDS = ("shl", "shr", "mux")
KINDS = PORT_KINDS + ADDER_KINDS + WIRE_KINDS + ("reg",)


class IRError(ValueError):
    pass


class Node:
    __slots__ = ("kind", "args", "param", "vmax", "coord")

    def __init__(self, kind, args=(), param=None, vmax=0, coord=None):
        self.kind = kind
        self.args = tuple(args)
        self.param = param
        self.vmax = vmax
        self.coord = coord

    @property
    def width(self) -> int:
        return max(1, self.vmax.bit_length())

    def __repr__(self):
        return f"Node({self.kind}, {self.args}, {self.param}, vmax={self.vmax}, coord={self.coord})"


def describe_coord(coord, stages: int | None = None) -> str:
    if coord is None:
        return "top level"
    s, b = coord
    if s < 0:
        return f"input bank lane {b}"
    if stages is not None and s >= stages:
        return f"output bank lane {b}"
    return f"stage {s} butterfly {b}"


@dataclass
class DatapathIR:
    params: object
    nodes: list = field(default_factory=list)
    inputs: list = field(default_factory=list)    # lane -> node id
    outputs: list = field(default_factory=list)   # lane -> node id
    mode: int = -1
    valid: int = -1
    out_valid: int = -1
    latency: int = 0
    policy: object = None
    info: dict = field(default_factory=dict)      # build-time totals (butterflies, costs)

    # -- construction ------------------------------------------------------
    def add(self, kind, args=(), param=None, vmax=None, coord=None) -> int:
        if kind not in KINDS:
            raise IRError(f"unknown node kind {kind!r}")
        for a in args:
            if not 0 <= a < len(self.nodes):
                raise IRError(f"{kind} node references missing node {a}")
        if vmax is None:
            vmax = self._infer_vmax(kind, args, param)
        if vmax < 0:
            raise IRError(f"negative value bound for {kind} at {describe_coord(coord)}")
        self.nodes.append(Node(kind, args, param, vmax, coord))
        return len(self.nodes) - 1

    def _infer_vmax(self, kind, args, param) -> int:
        v = [self.nodes[a].vmax for a in args]
        if kind == "add":
            return (v[0] << param[0]) + (v[1] << param[1])
        if kind == "shl":
            return v[0] << param
        if kind == "shr":
            return v[0] >> param
        if kind == "csub":
            return param - 1 if v[0] < 2 * param else v[0] - param
        if kind == "modsub":
            return param - 1
        if kind == "mux":
            return max(v[1], v[2])
        if kind == "reg":
            return v[0]
        if kind in ("mode", "valid"):
            return 1
        raise IRError(f"{kind} nodes need an explicit value bound")

    # -- queries -----------------------------------------------------------
    @property
    def stage_map(self) -> dict:
        return {i: nd.coord for i, nd in enumerate(self.nodes) if nd.coord is not None}

    def count(self, kind: str) -> int:
        return sum(1 for nd in self.nodes if nd.kind == kind)

    def counts(self) -> dict:
        out = {k: 0 for k in KINDS}
        for nd in self.nodes:
            out[nd.kind] += 1
        return out

    def users(self) -> list[list[int]]:
        u = [[] for _ in self.nodes]
        for i, nd in enumerate(self.nodes):
            for a in nd.args:
                u[a].append(i)
        return u

    def sinks(self) -> list[int]:
        return list(self.outputs) + [self.out_valid]

    def where(self, i: int) -> str:
        nd = self.nodes[i]
        stages = getattr(self.params, "stages", None)
        return f"node {i} ({nd.kind}, {describe_coord(nd.coord, stages)})"

    def copy(self) -> "DatapathIR":
        nodes = [Node(nd.kind, nd.args, nd.param, nd.vmax, nd.coord) for nd in self.nodes]
        return DatapathIR(self.params, nodes, list(self.inputs), list(self.outputs), self.mode,
                          self.valid, self.out_valid, self.latency, self.policy, dict(self.info))

    def check(self) -> None:
        """Structural invariants: topological order, no multipliers, mode
        drives only mux selects, declared bounds consistent with kinds."""
        for i, nd in enumerate(self.nodes):
            if nd.kind not in KINDS:
                raise IRError(f"{self.where(i)} has unknown kind")
            if any(a >= i for a in nd.args):
                raise IRError(f"{self.where(i)} references a later node")
            arity = {"add": 2, "sub": 2, "modsub": 2, "mux": 3, "shl": 1, "shr": 1, "csub": 1, "reg": 1}
            if nd.kind in arity and len(nd.args) != arity[nd.kind]:
                raise IRError(f"{self.where(i)} has {len(nd.args)} operands")
            if nd.kind == "mux" and self.nodes[nd.args[0]].vmax > 1:
                raise IRError(f"{self.where(i)} select is wider than one bit")
        is_mode = []
        for nd in self.nodes:
            is_mode.append(nd.kind == "mode" or (nd.kind == "reg" and is_mode[nd.args[0]]))
        for i, nd in enumerate(self.nodes):
            for pos, a in enumerate(nd.args):
                if is_mode[a] and not (nd.kind == "mux" and pos == 0) and nd.kind != "reg":
                    raise IRError(f"mode signal feeds {self.where(i)} outside a mux select")
        if len(self.outputs) != len(self.inputs):
            raise IRError("output lane count differs from input lane count")
