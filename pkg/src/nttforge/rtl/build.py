"""Assemble the fully unrolled NTT datapath from butterfly plans."""

from __future__ import annotations

from ..barrett import correction_bound
from ..mcm.graph import ADD, AdderGraph
from ..mcm.plan import ButterflyPlan, _scm, csd_total, optimize_butterfly_constants, reduction_graphs
from ..ring import (
    FORWARD, INVERSE, RingParams, TwiddleSchedule, butterfly_lanes, inverse_scale_constants,
    inverse_twist_constants, lane_permutation, twiddle_schedule,
)
from .ir import DatapathIR, IRError, describe_coord
from .pipeline import PipelinePolicy, insert_pipeline


def plan_butterflies(params: RingParams, fwd: TwiddleSchedule | None = None,
                     inv: TwiddleSchedule | None = None) -> dict:
    """ButterflyPlan for every (stage, butterfly) position."""
    fwd = fwd or twiddle_schedule(params, FORWARD)
    inv = inv or twiddle_schedule(params, INVERSE)
    plans = {}
    for s, (row_f, row_i) in enumerate(zip(fwd.stages, inv.stages)):
        for (b, w), (_, wi) in zip(row_f, row_i):
            plans[s, b] = optimize_butterfly_constants(w, wi, params)
    return plans


class _Builder:
    def __init__(self, params: RingParams, corrections: int | None):
        self.p = params
        self.ir = DatapathIR(params)
        self.corrections = corrections
        self.opt = 0
        self.csd = 0
        self.r_graph, self.q_graph = reduction_graphs(params)

    def graph(self, g: AdderGraph, x: int, coord) -> dict:
        """Instantiate g on node x; returns constant -> node."""
        ir = self.ir
        xmax = ir.nodes[x].vmax
        ids = [x]
        for op, f in zip(g.nodes[1:], g.fundamental_of[1:]):
            a, sa, b, sb = ids[op.lhs], op.lhs_shift, ids[op.rhs], op.rhs_shift
            if op.negate_lhs:
                if op.kind != ADD:
                    raise IRError(f"graph node -a - b cannot be built at {describe_coord(coord)}")
                a, sa, b, sb, kind = b, sb, a, sa, "sub"
            else:
                kind = op.kind
            ids.append(ir.add(kind, (a, b), (sa, sb), f * xmax, coord))
        out = {}
        for c, (node, shift) in g.outputs.items():
            out[c] = ids[node] if shift == 0 else ir.add("shl", (ids[node],), shift, coord=coord)
        self.opt += g.cost
        self.csd += csd_total(g.outputs)
        return out

    def reduce(self, x: int, coord) -> int:
        """Barrett-reduce node x (value below Q^2) into [0, Q)."""
        ir, p = self.ir, self.p
        Q = p.Q
        xmax = ir.nodes[x].vmax
        if xmax >= Q * Q:
            raise IRError(f"product bound {xmax} reaches Q^2 at {describe_coord(coord)}")
        if xmax < Q:
            return x
        if (xmax * p.R) >> (2 * p.n) == 0:
            r, c = x, xmax // Q
        else:
            xr = self.graph(self.r_graph, x, coord)[p.R]
            t = ir.add("shr", (xr,), 2 * p.n, coord=coord)
            tq = self.graph(self.q_graph, t, coord)[Q]
            bound = correction_bound(p, xmax)
            c = bound if self.corrections is None else self.corrections
            r = ir.add("sub", (x, tq), (0, 0), min(xmax, (bound + 1) * Q - 1), coord)
        for _ in range(c):
            r = ir.add("csub", (r,), Q, coord=coord)
        if ir.nodes[r].vmax != Q - 1:
            raise IRError(f"{c} corrections leave values up to {ir.nodes[r].vmax} at {describe_coord(coord)}")
        return r

    def const_mul(self, c: int, x: int, coord) -> int:
        """x * c mod Q for a constant c."""
        if c == 1:
            return x
        prod = self.graph(_scm(c, self.p.n), x, coord)[c]
        return self.reduce(prod, coord)

    def butterfly(self, plan: ButterflyPlan, A: int, B: int, coord) -> tuple[int, int]:
        ir, Q = self.ir, self.p.Q
        taps = self.graph(plan.mult1, B, coord)
        pw, pi = taps[plan.twiddle], taps[plan.twiddle_inv]
        prod = pw if pw == pi else ir.add("mux", (ir.mode, pw, pi), coord=coord)
        r = self.reduce(prod, coord)
        s = ir.add("add", (A, r), (0, 0), coord=coord)
        a_out = ir.add("csub", (s,), Q, coord=coord)
        b_out = ir.add("modsub", (A, r), Q, coord=coord)
        return a_out, b_out

    def bank(self, lanes: list[int], perm: list[int], consts: list[int], stage: int) -> list[int]:
        """Inverse-mode lane permutation plus per-lane constant multiply."""
        ir = self.ir
        out = []
        for q, (src, c) in enumerate(zip(perm, consts)):
            coord = (stage, q)
            alt = self.const_mul(c, lanes[src], coord)
            out.append(lanes[q] if alt == lanes[q] else ir.add("mux", (ir.mode, lanes[q], alt), coord=coord))
        return out


def build_datapath(params: RingParams, fwd: TwiddleSchedule, inv: TwiddleSchedule, plans: dict,
                   policy: PipelinePolicy | None = None, corrections: int | None = None) -> DatapathIR:
    """Fully unrolled forward/inverse NTT; ``plans`` maps (stage, butterfly) to ButterflyPlan.

    ``corrections`` forces the number of conditional subtractions after each
    Barrett quotient (default: the provable bound for the product range).
    """
    policy = policy or PipelinePolicy()
    N, Q = params.N, params.Q
    if len(fwd.stages) != params.stages or len(inv.stages) != params.stages:
        raise IRError(f"schedules must have {params.stages} stages")
    bld = _Builder(params, corrections)
    ir = bld.ir
    ir.inputs = [ir.add("in", (), lane, Q - 1) for lane in range(N)]
    ir.mode = ir.add("mode")
    ir.valid = ir.add("valid")

    lanes = bld.bank(ir.inputs, lane_permutation(params), inverse_twist_constants(params), -1)
    for s in range(params.stages):
        if len(fwd.stages[s]) != N // 2 or len(inv.stages[s]) != N // 2:
            raise IRError(f"stage {s} does not list {N // 2} butterflies")
        for b in range(N // 2):
            coord = (s, b)
            plan = plans.get(coord)
            if plan is None:
                raise IRError(f"no plan for {describe_coord(coord)}")
            w, wi = fwd.twiddle(s, b), inv.twiddle(s, b)
            if (plan.twiddle, plan.twiddle_inv) != (w, wi):
                raise IRError(f"plan twiddles ({plan.twiddle}, {plan.twiddle_inv}) do not match "
                              f"schedule ({w}, {wi}) at {describe_coord(coord)}")
            top, bot = butterfly_lanes(params, s, b)
            lanes[top], lanes[bot] = bld.butterfly(plan, lanes[top], lanes[bot], coord)
    ir.outputs = bld.bank(lanes, lane_permutation(params), inverse_scale_constants(params), params.stages)
    ir.out_valid = ir.valid
    ir.info.update(butterflies=(N // 2) * params.stages, stages=params.stages,
                   opt_adders=bld.opt, csd_adders=bld.csd)
    ir.check()
    return insert_pipeline(ir, policy)


def generate_design(params: RingParams, policy: PipelinePolicy | None = None,
                    corrections: int | None = None) -> DatapathIR:
    fwd = twiddle_schedule(params, FORWARD)
    inv = twiddle_schedule(params, INVERSE)
    return build_datapath(params, fwd, inv, plan_butterflies(params, fwd, inv), policy, corrections)
