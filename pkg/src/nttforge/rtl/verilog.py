"""Flat Verilog-2001 emission and the matching structural reparser.

Each IR node becomes exactly one line named ``n<id>``, so the text can be
read back into an equivalent IR.  Constant shifts are concatenations or
part-selects; the only operators are +, -, >= and ?:.
"""

from __future__ import annotations

import re

from .. import __version__
from ..ring import RingParams
from .ir import DatapathIR, IRError, Node, describe_coord
from .pipeline import PipelinePolicy, check_balanced


def module_name(params: RingParams) -> str:
    return f"{params.label}_ntt{params.N}"


def file_name(params: RingParams) -> str:
    return module_name(params) + ".v"


def _term(a: int, s: int) -> str:
    return f"n{a}" if s == 0 else f"{{n{a}, {s}'d0}}"


def _lit(v: int) -> str:
    return f"{max(1, v.bit_length())}'d{v}"


def _expr(ir: DatapathIR, nd: Node) -> str:
    k, a, n = nd.kind, nd.args, ir.params.n
    if k == "in":
        return f"din[{(nd.param + 1) * n - 1}:{nd.param * n}]"
    if k == "mode":
        return "mode"
    if k == "valid":
        return "in_valid"
    if k == "add":
        return f"{_term(a[0], nd.param[0])} + {_term(a[1], nd.param[1])}"
    if k == "sub":
        return f"{_term(a[0], nd.param[0])} - {_term(a[1], nd.param[1])}"
    if k == "shl":
        return _term(a[0], nd.param)
    if k == "shr":
        w = ir.nodes[a[0]].width
        if nd.param >= w:
            raise IRError(f"shift by {nd.param} empties a {w}-bit value")
        return f"n{a[0]}[{w - 1}:{nd.param}]"
    if k == "csub":
        K = _lit(nd.param)
        return f"(n{a[0]} >= {K}) ? n{a[0]} - {K} : n{a[0]}"
    if k == "modsub":
        return f"(n{a[0]} >= n{a[1]}) ? n{a[0]} - n{a[1]} : n{a[0]} + {_lit(nd.param)} - n{a[1]}"
    if k == "mux":
        return f"n{a[0]} ? n{a[2]} : n{a[1]}"
    raise IRError(f"cannot emit node kind {k}")


def emit_verilog(ir: DatapathIR, name: str | None = None) -> str:
    ir.check()
    check_balanced(ir)
    p = ir.params
    name = name or module_name(p)
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise IRError(f"{name!r} is not a Verilog identifier")
    pol = ir.policy or PipelinePolicy(None, False, False)
    bus = p.N * p.n
    info = " ".join(f"{k}={ir.info[k]}" for k in sorted(ir.info))
    lines = [
        f"// generated by nttforge {__version__}",
        f"// params Q={p.Q} N={p.N} n={p.n} R={p.R} psi={p.psi} stages={p.stages} "
        f"inv_scale={p.inv_scale} variant={p.variant} name={p.name or '-'}",
        f"// policy max_adder_depth={pol.max_adder_depth or 0} register_inputs={int(pol.register_inputs)} "
        f"register_outputs={int(pol.register_outputs)}",
        f"// latency {ir.latency}",
        f"// info {info}",
        f"module {name} (",
        "  input clk,",
        "  input rst,",
        "  input mode,",
        "  input in_valid,",
        f"  input [{bus - 1}:0] din,",
        f"  output [{bus - 1}:0] dout,",
        "  output out_valid",
        ");",
    ]
    where = None
    for i, nd in enumerate(ir.nodes):
        if nd.coord != where and nd.coord is not None:
            where = nd.coord
            lines.append(f"// {describe_coord(where, p.stages)}")
        w = nd.width
        if nd.kind == "reg":
            lines.append(f"reg [{w - 1}:0] n{i}; always @(posedge clk) n{i} <= rst ? {w}'d0 : n{nd.args[0]};")
        else:
            lines.append(f"wire [{w - 1}:0] n{i} = {_expr(ir, nd)};")
    for lane, o in enumerate(ir.outputs):
        lines.append(f"assign dout[{(lane + 1) * p.n - 1}:{lane * p.n}] = n{o};")
    lines.append(f"assign out_valid = n{ir.out_valid};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


# -- reparser ------------------------------------------------------------------

_N = r"n(\d+)"
_T = r"(?:n(\d+)|\{n(\d+), (\d+)'d0\})"
_PATTERNS = [
    ("in", re.compile(r"din\[(\d+):(\d+)\]$")),
    ("mode", re.compile(r"mode$")),
    ("valid", re.compile(r"in_valid$")),
    ("add", re.compile(rf"{_T} \+ {_T}$")),
    ("sub", re.compile(rf"{_T} - {_T}$")),
    ("shl", re.compile(rf"\{{{_N}, (\d+)'d0\}}$")),
    ("shr", re.compile(rf"{_N}\[(\d+):(\d+)\]$")),
    ("csub", re.compile(rf"\({_N} >= \d+'d(\d+)\) \? n\1 - \d+'d\2 : n\1$")),
    ("modsub", re.compile(rf"\({_N} >= {_N}\) \? n\1 - n\2 : n\1 \+ \d+'d(\d+) - n\2$")),
    ("mux", re.compile(rf"{_N} \? {_N} : {_N}$")),
]
_WIRE = re.compile(r"^wire \[(\d+):0\] n(\d+) = (.*);$")
_REG = re.compile(r"^reg \[(\d+):0\] n(\d+); always @\(posedge clk\) n\2 <= rst \? \d+'d0 : n(\d+);$")
_OUT = re.compile(r"^assign dout\[(\d+):(\d+)\] = n(\d+);$")
_OV = re.compile(r"^assign out_valid = n(\d+);$")
_KV = re.compile(r"(\w+)=(\S+)")


def _term_args(g):
    """(node, shift) from the groups of one _T match."""
    if g[0] is not None:
        return int(g[0]), 0
    return int(g[1]), int(g[2])


def strip_comments(text: str) -> str:
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    return "\n".join(line.split("//", 1)[0] for line in text.splitlines())


def parse_verilog(text: str) -> DatapathIR:
    """Rebuild a DatapathIR from text produced by :func:`emit_verilog`."""
    head = {}
    for line in text.splitlines():
        if line.startswith("// params") or line.startswith("// policy") or line.startswith("// info"):
            head[line.split()[1]] = dict(_KV.findall(line))
        elif line.startswith("// latency"):
            head["latency"] = int(line.split()[2])
    if "params" not in head:
        raise IRError("missing '// params' header")
    kv = head["params"]
    try:
        params = RingParams(Q=int(kv["Q"]), N=int(kv["N"]), n=int(kv["n"]), R=int(kv["R"]),
                            psi=int(kv["psi"]), omega=int(kv["psi"]) ** 2 % int(kv["Q"]),
                            stages=int(kv["stages"]), inv_scale=int(kv["inv_scale"]),
                            variant=kv["variant"], name="" if kv["name"] == "-" else kv["name"])
    except (KeyError, ValueError) as exc:
        raise IRError(f"bad params header: {exc}") from None
    params.validate()
    pol = head.get("policy", {})
    policy = PipelinePolicy(int(pol.get("max_adder_depth", 0)) or None,
                            pol.get("register_inputs", "0") == "1", pol.get("register_outputs", "0") == "1")
    ir = DatapathIR(params, policy=policy, latency=head.get("latency", 0))
    for k, v in head.get("info", {}).items():
        ir.info[k] = int(v) if v.lstrip("-").isdigit() else v
    outputs = {}
    coord = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("// stage "):
            _, _, s, _, b = line.split()
            coord = (int(s), int(b))
            continue
        if line.startswith("// input bank lane"):
            coord = (-1, int(line.split()[-1]))
            continue
        if line.startswith("// output bank lane"):
            coord = (params.stages, int(line.split()[-1]))
            continue
        line = line.split("//", 1)[0].strip()
        if not line:
            continue
        if m := _REG.match(line):
            hi, idx, src = map(int, m.groups())
            _append(ir, idx, ln, Node("reg", (src,), None, (1 << (hi + 1)) - 1, coord))
            continue
        if m := _WIRE.match(line):
            hi, idx, expr = int(m.group(1)), int(m.group(2)), m.group(3)
            _append(ir, idx, ln, _parse_expr(expr, (1 << (hi + 1)) - 1, coord, params, ln))
            continue
        if m := _OUT.match(line):
            hi, lo, src = map(int, m.groups())
            outputs[lo // params.n] = src
            continue
        if m := _OV.match(line):
            ir.out_valid = int(m.group(1))
            continue
        if line.startswith(("module", "input", "output", ");", "endmodule")):
            continue
        raise IRError(f"line {ln}: unrecognized statement {raw.strip()!r}")
    for i, nd in enumerate(ir.nodes):
        if nd.kind == "in":
            ir.inputs.append(i)
        elif nd.kind == "mode":
            ir.mode = i
        elif nd.kind == "valid":
            ir.valid = i
    ir.inputs.sort(key=lambda i: ir.nodes[i].param)
    if sorted(outputs) != list(range(params.N)):
        raise IRError("output bus is not fully assigned")
    ir.outputs = [outputs[k] for k in range(params.N)]
    if ir.mode < 0 or ir.valid < 0 or ir.out_valid < 0:
        raise IRError("mode, in_valid or out_valid is not connected")
    ir.check()
    return ir


def _append(ir: DatapathIR, idx: int, ln: int, node: Node) -> None:
    if idx != len(ir.nodes):
        raise IRError(f"line {ln}: node n{idx} out of order (expected n{len(ir.nodes)})")
    for a in node.args:
        if a >= idx:
            raise IRError(f"line {ln}: n{idx} uses undeclared n{a}")
    ir.nodes.append(node)


def _parse_expr(expr: str, vmax: int, coord, params: RingParams, ln: int) -> Node:
    for kind, pat in _PATTERNS:
        m = pat.match(expr)
        if not m:
            continue
        g = m.groups()
        if kind == "in":
            hi, lo = int(g[0]), int(g[1])
            if lo % params.n or hi - lo + 1 != params.n:
                raise IRError(f"line {ln}: input slice [{hi}:{lo}] is not one lane")
            return Node("in", (), lo // params.n, vmax, coord)
        if kind in ("mode", "valid"):
            return Node(kind, (), None, vmax, coord)
        if kind in ("add", "sub"):
            a, sa = _term_args(g[0:3])
            b, sb = _term_args(g[3:6])
            return Node(kind, (a, b), (sa, sb), vmax, coord)
        if kind == "shl":
            return Node("shl", (int(g[0]),), int(g[1]), vmax, coord)
        if kind == "shr":
            return Node("shr", (int(g[0]),), int(g[2]), vmax, coord)
        if kind == "csub":
            return Node("csub", (int(g[0]),), int(g[1]), vmax, coord)
        if kind == "modsub":
            return Node("modsub", (int(g[0]), int(g[1])), int(g[2]), vmax, coord)
        if kind == "mux":
            return Node("mux", (int(g[0]), int(g[2]), int(g[1])), None, vmax, coord)
    raise IRError(f"line {ln}: unsupported expression {expr!r}")


def scan_text(text: str) -> dict:
    """Grep-level audit of emitted text: multiplications, memories, operators."""
    body = strip_comments(text)
    return {
        "multiplications": body.count("*"),
        "divisions": body.count("/"),
        "memories": len(re.findall(r"^\s*reg\s*\[[^\]]*\]\s*\w+\s*\[", body, flags=re.M)),
        "lines": len(text.splitlines()),
    }


def structural_check(text: str, ir: DatapathIR | None = None) -> dict:
    """Reparse the text and audit it; compares node counts with ir when given."""
    scan = scan_text(text)
    if scan["multiplications"] or scan["divisions"] or scan["memories"]:
        raise IRError(f"emitted text is not multiplier-free: {scan}")
    back = parse_verilog(text)
    check_balanced(back)
    counts = back.counts()
    if ir is not None and counts != ir.counts():
        raise IRError(f"reparsed node counts {counts} differ from the IR {ir.counts()}")
    return counts
