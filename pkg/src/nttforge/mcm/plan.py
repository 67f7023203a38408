"""Per-butterfly constant plans: Mult1 over {w, w^-1}, Mult2 = R, Mult3 = Q."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..ring import RingParams
from .csd import csd_cost, odd_part
from .graph import AdderGraph
from .hcub import mcm_decompose
from .scm import scm_decompose


class PlanError(ValueError):
    pass


def csd_total(constants) -> int:
    """CSD adders for a constant set, counting each odd part once."""
    return sum(csd_cost(o) for o in {odd_part(int(c))[0] for c in constants})


@dataclass
class ButterflyPlan:
    twiddle: int
    twiddle_inv: int
    mult1: AdderGraph
    mult2: AdderGraph
    mult3: AdderGraph
    scale: AdderGraph | None = None  # shared inv_scale graph, not counted per butterfly
    costs: dict = field(default_factory=dict)
    csd_costs: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.costs.values())

    @property
    def csd_total(self) -> int:
        return sum(self.csd_costs.values())


@lru_cache(maxsize=None)
def _pair_graph(w: int, wi: int, width: int) -> AdderGraph:
    return mcm_decompose([w, wi], width)


@lru_cache(maxsize=None)
def _scm(c: int, width: int) -> AdderGraph:
    return scm_decompose(c, max(width, c.bit_length()))


def reduction_graphs(params: RingParams) -> tuple[AdderGraph, AdderGraph]:
    """(R graph over 2n-bit products, Q graph over quotient estimates)."""
    return _scm(params.R, 2 * params.n), _scm(params.Q, params.n + 1)


def optimize_butterfly_constants(twiddle: int, twiddle_inv: int, params: RingParams) -> ButterflyPlan:
    Q = params.Q
    if not (0 < twiddle < Q and 0 < twiddle_inv < Q):
        raise PlanError(f"twiddles must lie in [1, {Q - 1}]: ({twiddle}, {twiddle_inv})")
    if twiddle * twiddle_inv % Q != 1:
        raise PlanError(f"{twiddle} * {twiddle_inv} is not 1 mod {Q}")
    mult1 = _pair_graph(twiddle, twiddle_inv, params.n)
    mult2, mult3 = reduction_graphs(params)
    scale = _scm(params.inv_scale, params.n)
    costs = {"mult1": mult1.cost, "mult2": mult2.cost, "mult3": mult3.cost}
    csd = {
        "mult1": csd_total({twiddle, twiddle_inv}),
        "mult2": csd_total([params.R]),
        "mult3": csd_total([Q]),
    }
    return ButterflyPlan(twiddle, twiddle_inv, mult1, mult2, mult3, scale, costs, csd)
