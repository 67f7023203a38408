"""Single constant multiplication: bounded exhaustive search plus fallbacks.

Odd constants whose optimum needs at most three adders get a provably
optimal graph.  Everything else gets the better of the Hcub-style heuristic
and the CSD chain.  Each claimed optimum carries a certificate recording
that every smaller adder count was searched without success.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .aops import add_fundamental, csd_weights, in_a, successors
from .csd import csd_cost, csd_recode, odd_part
from .graph import ADD, SUB, AdderGraph, Op

EXHAUSTIVE3_LIMIT = 1 << 26
UNKNOWN = 4  # cost-table marker for "needs at least four adders"
MAX_EXHAUSTIVE_COST = 3


@dataclass(frozen=True)
class SearchLevel:
    cost: int
    candidates: int
    found: bool


@dataclass(frozen=True)
class OptimalityCertificate:
    """Exhaustive-search transcript for one odd constant.

    ``bound`` is the fundamental limit 2^(bits+1) used for every level.
    """
    constant: int
    cost: int
    bound: int
    levels: tuple

    def covers(self) -> bool:
        """All levels below ``cost`` were searched and came up empty."""
        failed = {lv.cost for lv in self.levels if not lv.found}
        return all(c in failed for c in range(self.cost))


def fundamental_limit(c: int) -> int:
    return 1 << (c.bit_length() + 1)


@lru_cache(maxsize=None)
def _tables(bits: int):
    lim = 1 << (bits + 1)
    s1 = sorted(successors(1, 1, lim) - {1})
    s1set = set(s1)
    p1, p2 = [], []
    for f1 in s1:
        cands = (successors(1, f1, lim) | successors(f1, f1, lim) | s1set) - {1, f1}
        for f2 in sorted(cands):
            if f2 in s1set and f2 < f1:
                continue  # symmetric duplicate
            p1.append(f1)
            p2.append(f2)
    return lim, s1, s1set, np.array(s1, dtype=np.int64), np.array(p1, dtype=np.int64), np.array(p2, dtype=np.int64)


def _closure(u: np.ndarray, v: np.ndarray, lim: int) -> np.ndarray:
    """All values of A(u_i, v_i) below lim, vectorized over the pair arrays."""
    out = []
    for k in range(1, lim.bit_length() + 1):
        for a, b in ((u, v), (v, u)):
            s = a << k
            for vals in (s + b, s - b, b - s):
                out.append(vals[(vals > 0) & (vals < lim)])
    return np.unique(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)


@lru_cache(maxsize=None)
def cost_table(bits: int) -> np.ndarray:
    """Exact adder cost (0..3, or UNKNOWN) of every odd value below 2^(bits+1).

    Index i holds the cost of 2i+1.  Fundamentals are bounded by the same
    limit as :func:`exhaustive_search`, so both routes agree.
    """
    lim, _, _, S1, P1, P2 = _tables(bits)
    table = np.full(lim // 2, UNKNOWN, dtype=np.int8)
    ones = np.ones_like(S1)
    lv3 = np.concatenate([_closure(np.ones_like(P2), P2, lim), _closure(P2, P2, lim), _closure(P1, P2, lim)])
    table[(lv3 - 1) // 2] = 3
    lv2 = np.concatenate([_closure(ones, S1, lim), _closure(S1, S1, lim)])
    table[(lv2 - 1) // 2] = 2
    table[(S1[S1 < lim] - 1) // 2] = 1
    table[0] = 0
    table.flags.writeable = False
    return table


def lookup_costs(values: np.ndarray, bits: int) -> np.ndarray:
    """Table cost for odd values; outside the table or >= UNKNOWN falls back to CSD."""
    table = cost_table(bits)
    inside = (values > 0) & (values < 2 * len(table))
    idx = np.where(inside, (values - 1) // 2, 0)
    known = np.where(inside, table[idx], UNKNOWN).astype(np.int64)
    return np.where(known < UNKNOWN, known, np.maximum(UNKNOWN, csd_weights(values) - 1))


def odd_parts(e: np.ndarray) -> np.ndarray:
    low = e & -e
    return np.where(e > 0, e // np.where(low > 0, low, 1), 0)


def exhaustive_search(c: int, max_cost: int = MAX_EXHAUSTIVE_COST, budget: int | None = None):
    """Search adder graphs of cost <= max_cost for odd c.

    Returns (chain, levels, complete): ``chain`` is the list of non-input
    fundamentals ending in c (None if not found), ``levels`` the transcript,
    ``complete`` False when the budget stopped the search early.
    """
    if c < 1 or c % 2 == 0:
        raise ValueError(f"exhaustive search wants an odd positive constant, got {c}")
    lim, s1, s1set, S1, P1, P2 = _tables(c.bit_length())
    levels = []
    spent = 0

    def over(n):
        return budget is not None and spent + n > budget

    if c == 1:
        return [], (SearchLevel(0, 1, True),), True
    levels.append(SearchLevel(0, 1, False))
    if max_cost < 1:
        return None, tuple(levels), True
    if over(len(s1)):
        return None, tuple(levels), False
    spent += len(s1)
    if c in s1set:
        levels.append(SearchLevel(1, len(s1), True))
        return [c], tuple(levels), True
    levels.append(SearchLevel(1, len(s1), False))
    if max_cost < 2:
        return None, tuple(levels), True
    if over(len(s1)):
        return None, tuple(levels), False
    spent += len(s1)
    mask = in_a(c, 1, S1) | in_a(c, S1, S1)
    if mask.any():
        levels.append(SearchLevel(2, len(s1), True))
        return [int(S1[np.argmax(mask)]), c], tuple(levels), True
    levels.append(SearchLevel(2, len(s1), False))
    if max_cost < 3:
        return None, tuple(levels), True
    if over(len(P1)):
        return None, tuple(levels), False
    mask = in_a(c, 1, P2) | in_a(c, P2, P2) | in_a(c, P1, P2)
    if mask.any():
        i = int(np.argmax(mask))
        levels.append(SearchLevel(3, len(P1), True))
        return [int(P1[i]), int(P2[i]), c], tuple(levels), True
    levels.append(SearchLevel(3, len(P1), False))
    return None, tuple(levels), True


def verify_certificate(cert: OptimalityCertificate) -> bool:
    """Re-run the search up to cost-1 and confirm it still finds nothing."""
    if not cert.covers():
        return False
    if cert.cost == 0:
        return cert.constant == 1
    chain, _, complete = exhaustive_search(cert.constant, cert.cost - 1)
    return complete and chain is None


def graph_from_chain(chain: list[int], input_width: int) -> AdderGraph:
    g = AdderGraph(input_width)
    for f in chain:
        add_fundamental(g, f)
    return g


def csd_graph(constants, input_width: int) -> AdderGraph:
    """CSD shift-add chains for each constant, sharing identical partial sums."""
    g = AdderGraph(input_width)
    for c in sorted(set(constants)):
        _add_csd_chain(g, c)
    return g


def _add_csd_chain(g: AdderGraph, c: int) -> None:
    terms = csd_recode(c).terms()
    node, prev = 0, terms[0][1]
    for sign, pos in terms[1:]:
        f = (g.fundamental_of[node] << (prev - pos)) + sign
        existing = g.node_for(f)
        if existing is None:
            existing = g.add_op(Op(ADD if sign > 0 else SUB, node, prev - pos, 0, 0))
        node, prev = existing, pos
    g.set_output(c, node, prev)


def _finish_outputs(g: AdderGraph, constants) -> AdderGraph:
    for c in constants:
        odd, shift = odd_part(c)
        g.set_output(c, g.node_for(odd), shift)
    return g


@lru_cache(maxsize=None)
def _cheap_values(bits: int):
    """Odd values of cost <= 2 and their costs."""
    table = cost_table(bits)
    idx = np.flatnonzero(table <= 2)
    return 2 * idx.astype(np.int64) + 1, table[idx].astype(np.int64)


def split_search(c: int):
    """Best c = x<<a +/- y<<b with cost(x) <= 2 and cost(y) <= 3 from the table.

    Returns (x, y, estimated cost) or None.
    """
    bits = c.bit_length()
    xs, cx = _cheap_values(bits)
    shifts = np.arange(bits + 2, dtype=np.int64)
    sx = xs[:, None] << shifts[None, :]
    best = None
    for e in (np.abs(c - sx), c + sx):
        y = odd_parts(e)
        cy = np.where(y > 0, lookup_costs(y, bits), 1 << 20)
        cy = np.where(cy <= 3, cy, 1 << 20)
        total = cx[:, None] + cy + 1
        i = np.unravel_index(int(np.argmin(total)), total.shape)
        t = int(total[i])
        if t < (1 << 20) and (best is None or t < best[2]):
            best = (int(xs[i[0]]), int(y[i]), t)
    return best


def _chain_graph(g: AdderGraph, f: int) -> None:
    """Absorb an exhaustive (<= 3 adder) chain for odd f into g."""
    if g.node_for(f) is not None:
        return
    chain, _, _ = exhaustive_search(f, MAX_EXHAUSTIVE_COST)
    if chain is None:
        raise ValueError(f"{f} needs more than {MAX_EXHAUSTIVE_COST} adders")
    for v in chain:
        add_fundamental(g, v)


@lru_cache(maxsize=None)
def _scm_cached(c: int, input_width: int, budget: int | None) -> AdderGraph:
    from .hcub import grow  # local: hcub imports this module

    odd, _ = odd_part(c)
    max_cost = MAX_EXHAUSTIVE_COST if odd < EXHAUSTIVE3_LIMIT else 2
    chain, levels, complete = exhaustive_search(odd, max_cost, budget)
    if chain is not None:
        g = _finish_outputs(graph_from_chain(chain, input_width), [c])
        g.optimal = True
        g.certificate = OptimalityCertificate(odd, len(chain), fundamental_limit(odd), levels)
        return g
    searched = max((lv.cost for lv in levels), default=-1)
    best = csd_graph([c], input_width)
    split = split_search(odd)
    if split is not None and split[2] < best.cost:
        g = AdderGraph(input_width)
        _chain_graph(g, split[0])
        _chain_graph(g, split[1])
        add_fundamental(g, odd)
        if g.cost < best.cost:
            best = _finish_outputs(g, [c])
    if best.cost > searched + 1:
        heur = AdderGraph(input_width)
        grow(heur, [odd], fundamental_limit(odd))
        if heur.cost < best.cost:
            best = _finish_outputs(heur, [c])
    if complete and best.cost == searched + 1:
        best.optimal = True
        best.certificate = OptimalityCertificate(odd, best.cost, fundamental_limit(odd), levels)
    else:
        best.optimal = False
    return best


def scm_decompose(c: int, width: int | None = None, budget: int | None = None) -> AdderGraph:
    """Shift-add graph for c*x; ``budget`` caps candidate sets examined."""
    if c < 1:
        raise ValueError(f"constant must be positive, got {c}")
    if width is None:
        width = c.bit_length()
    if width < (c - 1).bit_length():
        raise ValueError(f"width {width} is narrower than the constant {c}")
    g = _scm_cached(c, width, budget)
    assert g.cost <= csd_cost(odd_part(c)[0])
    return _copy(g)


def _copy(g: AdderGraph) -> AdderGraph:
    return AdderGraph(g.input_width, list(g.nodes), dict(g.outputs), list(g.fundamental_of), g.optimal, g.certificate)
