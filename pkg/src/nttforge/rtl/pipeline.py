"""Pipeline register insertion and balance checking.

Nodes are scheduled by ASAP adder level L (adds, subs, conditional
subtracts count one level; muxes and shifts are free).  With depth bound d
an adder lands in segment ceil(L/d) - 1, and every edge u -> v receives
seg(v) - seg(u) registers taken from a shared per-source delay chain.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir import ADDER_KINDS, PORT_KINDS, DatapathIR, IRError, Node


@dataclass(frozen=True)
class PipelinePolicy:
    max_adder_depth: int | None = 2  # None: no internal registers
    register_inputs: bool = True
    register_outputs: bool = True

    def __post_init__(self):
        if self.max_adder_depth is not None and self.max_adder_depth < 1:
            raise ValueError("max_adder_depth must be at least 1")

    @property
    def io_registers(self) -> int:
        return int(self.register_inputs) + int(self.register_outputs)


COMBINATIONAL = PipelinePolicy(None, False, False)


def strip_registers(ir: DatapathIR) -> DatapathIR:
    """Copy of ir with every register replaced by its source."""
    out = DatapathIR(ir.params, policy=None, info=dict(ir.info))
    remap = []
    for nd in ir.nodes:
        if nd.kind == "reg":
            remap.append(remap[nd.args[0]])
        else:
            out.nodes.append(Node(nd.kind, tuple(remap[a] for a in nd.args), nd.param, nd.vmax, nd.coord))
            remap.append(len(out.nodes) - 1)
    out.inputs = [remap[i] for i in ir.inputs]
    out.outputs = [remap[i] for i in ir.outputs]
    out.mode, out.valid, out.out_valid = remap[ir.mode], remap[ir.valid], remap[ir.out_valid]
    return out


def adder_levels(ir: DatapathIR) -> list[int]:
    """ASAP adder level of every node, registers ignored."""
    lv = []
    for nd in ir.nodes:
        base = max((lv[a] for a in nd.args), default=0)
        lv.append(base + 1 if nd.kind in ADDER_KINDS else base)
    return lv


def insert_pipeline(ir: DatapathIR, policy: PipelinePolicy) -> DatapathIR:
    """Return a re-pipelined copy; existing registers are discarded first."""
    comb = strip_registers(ir)
    d = policy.max_adder_depth
    base = int(policy.register_inputs)
    lv = adder_levels(comb)
    seg = []
    for nd, L in zip(comb.nodes, lv):
        if nd.kind in PORT_KINDS:
            seg.append(0)
            continue
        s = max([base] + [seg[a] for a in nd.args])
        if nd.kind in ADDER_KINDS and d is not None:
            s = max(s, base + -(-L // d) - 1)
        seg.append(s)
    sources = comb.outputs
    out_seg = max([base] + [seg[i] for i in sources]) + int(policy.register_outputs)

    new = DatapathIR(comb.params, policy=policy, info=dict(comb.info))
    ids = []
    chains = {}

    def delayed(src_old: int, k: int) -> int:
        chain = chains.setdefault(src_old, [ids[src_old]])
        while len(chain) <= k:
            prev = chain[-1]
            new.nodes.append(Node("reg", (prev,), None, new.nodes[prev].vmax, new.nodes[prev].coord))
            chain.append(len(new.nodes) - 1)
        return chain[k]

    for i, nd in enumerate(comb.nodes):
        args = tuple(delayed(a, seg[i] - seg[a]) for a in nd.args)
        new.nodes.append(Node(nd.kind, args, nd.param, nd.vmax, nd.coord))
        ids.append(len(new.nodes) - 1)
    new.inputs = [ids[i] for i in comb.inputs]
    new.mode, new.valid = ids[comb.mode], ids[comb.valid]
    new.outputs = [delayed(i, out_seg - seg[i]) for i in comb.outputs]
    new.out_valid = delayed(comb.valid, out_seg)
    new.latency = out_seg
    return new


def register_delays(ir: DatapathIR) -> list[int]:
    """Registers between the primary inputs and each node; raises IRError
    when two operands of a node arrive with different delays."""
    dl = []
    for i, nd in enumerate(ir.nodes):
        if nd.kind in PORT_KINDS:
            dl.append(0)
        elif nd.kind == "reg":
            dl.append(dl[nd.args[0]] + 1)
        else:
            ds = {dl[a] for a in nd.args}
            if len(ds) != 1:
                raise IRError(f"unbalanced operands at {ir.where(i)}: delays {sorted(ds)}")
            dl.append(ds.pop())
    return dl


def check_balanced(ir: DatapathIR) -> int:
    """Verify every reconvergent path is balanced; returns the latency."""
    dl = register_delays(ir)
    lat = {dl[i] for i in ir.sinks()}
    if len(lat) != 1:
        raise IRError(f"outputs leave the pipeline at different delays {sorted(lat)}")
    got = lat.pop()
    if got != ir.latency:
        raise IRError(f"recorded latency {ir.latency} but outputs are {got} registers deep")
    return got


def max_segment_depth(ir: DatapathIR) -> int:
    """Longest register-to-register chain of adders."""
    depth = []
    for nd in ir.nodes:
        if nd.kind == "reg" or nd.kind in PORT_KINDS:
            depth.append(0)
            continue
        base = max((depth[a] for a in nd.args), default=0)
        depth.append(base + 1 if nd.kind in ADDER_KINDS else base)
    return max(depth, default=0)
