"""Adder graphs: DAGs of shift/add/sub nodes over a single input.

Node 0 is always the input.  Every other node computes
``(+/-)(lhs << lhs_shift) (+/-) (rhs << rhs_shift)`` from earlier nodes and
carries an odd positive *fundamental* (its value for input 1).  Outputs
are ``fundamental << final_shift``.

Exchange format, one node per line::

    0 INPUT
    1 ADD 0<<2 + 0<<0
    2 ADD 0<<3 + 1<<0
    OUT 13 = 2<<0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

ADD = "add"
SUB = "sub"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Op:
    kind: str
    lhs: int
    lhs_shift: int
    rhs: int
    rhs_shift: int
    negate_lhs: bool = False

    def apply(self, a, b):
        x = a << self.lhs_shift
        y = b << self.rhs_shift
        if self.negate_lhs:
            x = -x
        return x + y if self.kind == ADD else x - y


@dataclass
class AdderGraph:
    input_width: int
    nodes: list = field(default_factory=lambda: [None])  # None marks INPUT
    outputs: dict = field(default_factory=dict)  # constant -> (node, final_shift)
    fundamental_of: list = field(default_factory=lambda: [1])
    optimal: bool | None = None
    certificate: object = None

    @property
    def cost(self) -> int:
        return len(self.nodes) - 1

    @property
    def constants(self) -> list[int]:
        return sorted(self.outputs)

    def node_for(self, fundamental: int) -> int | None:
        try:
            return self.fundamental_of.index(fundamental)
        except ValueError:
            return None

    def add_op(self, op: Op) -> int:
        for ref in (op.lhs, op.rhs):
            if not 0 <= ref < len(self.nodes):
                raise GraphError(f"node reference {ref} is not an earlier node")
        if op.kind not in (ADD, SUB) or op.lhs_shift < 0 or op.rhs_shift < 0:
            raise GraphError(f"bad op {op}")
        f = op.apply(self.fundamental_of[op.lhs], self.fundamental_of[op.rhs])
        if f <= 0 or f % 2 == 0:
            raise GraphError(f"op {op} yields non-odd or non-positive fundamental {f}")
        self.nodes.append(op)
        self.fundamental_of.append(f)
        return len(self.nodes) - 1

    def set_output(self, c: int, node: int, shift: int) -> None:
        if self.fundamental_of[node] << shift != c:
            raise GraphError(f"node {node} << {shift} does not compute {c}")
        self.outputs[c] = (node, shift)

    def depth(self) -> list[int]:
        """Adder depth of every node (input at depth 0)."""
        d = [0]
        for op in self.nodes[1:]:
            d.append(1 + max(d[op.lhs], d[op.rhs]))
        return d

    def check(self) -> None:
        f = [1]
        for i, op in enumerate(self.nodes[1:], 1):
            if not (op.lhs < i and op.rhs < i):
                raise GraphError(f"node {i} references a later node")
            v = op.apply(f[op.lhs], f[op.rhs])
            if v <= 0 or v % 2 == 0:
                raise GraphError(f"node {i} fundamental {v} is not odd positive")
            f.append(v)
        if f != self.fundamental_of:
            raise GraphError("recorded fundamentals disagree with the nodes")
        for c, (node, shift) in self.outputs.items():
            if f[node] << shift != c:
                raise GraphError(f"output {c} is wired to {f[node]} << {shift}")

    def eval_width(self) -> int:
        c_max = max(self.outputs, default=1)
        return self.input_width + (c_max - 1).bit_length() + 1


def graph_eval(graph: AdderGraph, x, width: int | None = None) -> dict:
    """Evaluate every output for input x (an int or an integer numpy array).

    Results are truncated to ``width`` bits, by default the evaluation width
    ``input_width + ceil(log2 c_max) + 1``; intermediates are not truncated.
    """
    if width is None:
        width = graph.eval_width()
    if isinstance(x, np.ndarray):
        if x.size and (int(x.min()) < 0 or int(x.max()) >> graph.input_width):
            raise ValueError("input outside the graph's input width")
        top = max(graph.fundamental_of) << (max((s for _, s in graph.outputs.values()), default=0) + 1)
        if (int(x.max(initial=0)) * top).bit_length() >= 62:
            x = x.astype(object)
        else:
            x = x.astype(np.int64)
    elif not 0 <= x < (1 << graph.input_width):
        raise ValueError(f"x={x} outside {graph.input_width}-bit input range")
    vals = [x]
    for op in graph.nodes[1:]:
        vals.append(op.apply(vals[op.lhs], vals[op.rhs]))
    mask = (1 << width) - 1
    return {c: (vals[node] << shift) & mask for c, (node, shift) in graph.outputs.items()}


def verify_graph(graph: AdderGraph, exhaustive_bits: int = 12, samples: int = 10 ** 5, seed: int = 0) -> None:
    """graph_eval against direct multiplication, exhaustively on the low
    ``exhaustive_bits`` inputs and on random full-width inputs."""
    graph.check()
    bits = min(exhaustive_bits, graph.input_width)
    xs = [np.arange(1 << bits, dtype=np.int64)]
    if samples:
        rng = np.random.default_rng(seed)
        hi = 1 << graph.input_width
        if hi <= 1 << 62:
            xs.append(rng.integers(0, hi, size=samples, dtype=np.int64))
        else:
            xs.append(np.array([int(rng.integers(0, 1 << 62)) << (graph.input_width - 62) for _ in range(samples)], dtype=object))
    mask = (1 << graph.eval_width()) - 1
    for x in xs:
        got = graph_eval(graph, x)
        xo = x.astype(object)
        for c, v in got.items():
            want = (xo * c) & mask
            if not np.array_equal(np.asarray(v, dtype=object), want):
                raise GraphError(f"output {c} disagrees with direct multiplication")


# -- text format ------------------------------------------------------------

def format_graph(graph: AdderGraph) -> str:
    lines = [f"# width {graph.input_width} cost {graph.cost}", "0 INPUT"]
    for i, op in enumerate(graph.nodes[1:], 1):
        lhs = f"{'-' if op.negate_lhs else ''}{op.lhs}<<{op.lhs_shift}"
        sign = "+" if op.kind == ADD else "-"
        lines.append(f"{i} {op.kind.upper()} {lhs} {sign} {op.rhs}<<{op.rhs_shift}")
    for c in sorted(graph.outputs):
        node, shift = graph.outputs[c]
        lines.append(f"OUT {c} = {node}<<{shift}")
    return "\n".join(lines) + "\n"


_NODE_RE = re.compile(r"^(\d+)\s+(ADD|SUB)\s+(-?)(\d+)<<(\d+)\s+([+-])\s+(\d+)<<(\d+)$")
_OUT_RE = re.compile(r"^OUT\s+(\d+)\s*=\s*(\d+)<<(\d+)$")
_WIDTH_RE = re.compile(r"^#\s*width\s+(\d+)")


def parse_graph(text: str, input_width: int | None = None) -> AdderGraph:
    g = None
    width = input_width
    for raw in text.splitlines():
        line = raw.strip()
        m = _WIDTH_RE.match(line)
        if m and width is None:
            width = int(m.group(1))
        if not line or line.startswith("#"):
            continue
        if line == "0 INPUT":
            g = AdderGraph(width or 0)
            continue
        if g is None:
            raise GraphError("graph text must start with '0 INPUT'")
        if m := _NODE_RE.match(line):
            idx, kind, neg, lhs, s1, sign, rhs, s2 = m.groups()
            if int(idx) != len(g.nodes):
                raise GraphError(f"node ids must be consecutive, got {idx}")
            if (kind == "ADD") != (sign == "+"):
                raise GraphError(f"operator sign disagrees with {kind}: {line!r}")
            g.add_op(Op(kind.lower(), int(lhs), int(s1), int(rhs), int(s2), bool(neg)))
        elif m := _OUT_RE.match(line):
            c, node, shift = map(int, m.groups())
            g.set_output(c, node, shift)
        else:
            raise GraphError(f"unparseable line {raw!r}")
    if g is None:
        raise GraphError("empty graph text")
    return g

