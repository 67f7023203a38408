"""Multiple constant multiplication by Hcub-style fundamental-set growth.

The ready set starts from the input (fundamental 1).  Each round either
synthesizes a target that is one adder away, or adjoins the successor with
the largest cumulative benefit

    sum_t 10^-d'(t) * (d(t) - d'(t))

where d is a distance estimate to target t before and d' after adding the
candidate.  Distances past one adder are estimated by the CSD weight of
the residual ``t -/+ s<<k``.  Ties go to the smallest candidate value.
"""

from __future__ import annotations

import numpy as np

from .aops import add_fundamental, in_a, successors
from .csd import csd_cost, csd_recode, odd_part
from .graph import AdderGraph
from .scm import (
    MAX_EXHAUSTIVE_COST, _chain_graph, _finish_outputs, csd_graph, fundamental_limit,
    lookup_costs, odd_parts, scm_decompose,
)

MAX_ROUNDS = 256


def _successor_set(fs: list[int], lim: int, known: set | None = None, start: int = 0) -> set[int]:
    """Successors of the ready set; pairs with both members before ``start``
    are taken from ``known``."""
    out = set(known) if known else set()
    for i in range(start, len(fs)):
        for v in fs[: i + 1]:
            out |= successors(fs[i], v, lim)
    return out


def _residual_costs(base: np.ndarray, t: int, fs: np.ndarray, lim: int, bits: int) -> np.ndarray:
    """Per base value f: min over shifts/signs of 1 + cost(odd(t -/+ f<<k)).

    Residuals already in ``fs`` cost nothing; others use the exact cost table
    (CSD weight beyond three adders).
    """
    kmax = (2 * lim).bit_length()
    shifted = base[:, None] << np.arange(kmax, dtype=np.int64)[None, :]
    valid = shifted < 2 * lim
    shifted = np.where(valid, shifted, 0)
    best = np.full(len(base), 1 << 20, dtype=np.int64)
    for e in (np.abs(t - shifted), t + shifted):
        o = odd_parts(e)
        c = lookup_costs(np.where(o > 0, o, 1), bits)
        c = np.where(np.isin(o, fs) | (o == base[:, None]), 0, c)
        c = np.where(valid & (o > 0), c + 1, 1 << 20)
        best = np.minimum(best, c.min(axis=1))
    return best


def _estimate(fs: list[int], t: int, lim: int, bits: int) -> int:
    f = np.array(fs, dtype=np.int64)
    return max(2, int(_residual_costs(f, t, f, lim, bits).min()))


def _candidate_estimates(cand: np.ndarray, fs: list[int], t: int, lim: int, bits: int) -> np.ndarray:
    f = np.array(fs, dtype=np.int64)
    est = _residual_costs(cand, t, f, lim, bits)
    one = in_a(t, cand, cand) | in_a(t, cand[:, None], f[None, :]).any(axis=1)
    return np.where(one, 1, np.maximum(est, 2))


def _csd_step(fs: list[int], t: int) -> int:
    """Next CSD partial sum of t not yet in the ready set."""
    terms = csd_recode(t).terms()
    p, prev = 1, terms[0][1]
    for sign, pos in terms[1:]:
        p = (p << (prev - pos)) + sign
        prev = pos
        if p not in fs:
            return p
    raise AssertionError("target already synthesized")


def grow(g: AdderGraph, targets, lim: int) -> AdderGraph:
    """Adjoin fundamentals to g until every odd target is present."""
    todo = sorted(set(targets) - set(g.fundamental_of))
    bits = (lim - 1).bit_length() - 1
    succ, seen = set(), 0
    for _ in range(MAX_ROUNDS):
        if not todo:
            return g
        fs = g.fundamental_of
        succ = _successor_set(fs, lim, succ, seen)
        seen = len(fs)
        succ -= set(fs)
        hits = [t for t in todo if t in succ]
        if hits:
            add_fundamental(g, hits[0])
            todo.remove(hits[0])
            continue
        cand = np.array(sorted(succ), dtype=np.int64)
        benefit = np.zeros(len(cand))
        before = {t: _estimate(fs, t, lim, bits) for t in todo}
        for t in todo:
            after = np.minimum(_candidate_estimates(cand, fs, t, lim, bits), before[t])
            benefit += 10.0 ** (-after.astype(float)) * (before[t] - after)
        best = int(np.argmax(benefit))
        if benefit[best] > 0:
            add_fundamental(g, int(cand[best]))
        else:
            t = min(todo, key=lambda x: (before[x], x))
            add_fundamental(g, _csd_step(fs, t))
    raise RuntimeError("MCM growth did not converge")


def extend(g: AdderGraph, t: int, lim: int) -> AdderGraph:
    """Add odd t as f<<a +/- e<<b with f already in g and e cheap (<= 3 adders)."""
    if g.node_for(t) is not None:
        return g
    bits = (lim - 1).bit_length() - 1
    f = np.array(g.fundamental_of, dtype=np.int64)
    kmax = (2 * lim).bit_length()
    shifted = f[:, None] << np.arange(kmax, dtype=np.int64)[None, :]
    valid = shifted < 2 * lim
    best = None
    for e in (np.abs(t - shifted), t + shifted):
        o = odd_parts(np.where(valid, e, 0))
        c = lookup_costs(np.where(o > 0, o, 1), bits)
        c = np.where(np.isin(o, f), 0, c)
        c = np.where(valid & (o > 0) & (c <= MAX_EXHAUSTIVE_COST), c, 1 << 20)
        i = np.unravel_index(int(np.argmin(c)), c.shape)
        if c[i] < (1 << 20) and (best is None or c[i] < best[0]):
            best = (int(c[i]), int(o[i]))
    if best is None:
        return grow(g, [t], lim)
    _chain_graph(g, best[1])
    add_fundamental(g, t)
    return g


def _absorb(g: AdderGraph, other: AdderGraph) -> None:
    for f in other.fundamental_of[1:]:
        if g.node_for(f) is None:
            add_fundamental(g, f)


def mcm_decompose(targets, width: int) -> AdderGraph:
    """One graph producing c*x for every c in ``targets``."""
    consts = sorted(set(int(c) for c in targets))
    if not consts:
        raise ValueError("empty target set")
    if consts[0] < 1:
        raise ValueError("targets must be positive")
    odds = sorted({odd_part(c)[0] for c in consts} - {1})
    if not odds:
        return _finish_outputs(AdderGraph(width), consts)
    lim = fundamental_limit(max(odds))

    scms = {c: scm_decompose(c, max(width, c.bit_length())) for c in odds}
    candidates = [csd_graph(odds, width)]
    if len(odds) == 1:
        candidates.append(scms[odds[0]])
    else:
        union = AdderGraph(width)
        for c in odds:
            _absorb(union, scms[c])
        candidates.append(union)
        for first in odds:
            g = AdderGraph(width)
            _absorb(g, scms[first])
            for t in odds:
                extend(g, t, lim)
            candidates.append(g)
        # Hcub growth seeded with the costliest target's SCM graph
        seed = max(odds, key=lambda c: (scms[c].cost, c))
        g = AdderGraph(width)
        _absorb(g, scms[seed])
        candidates.append(grow(g, odds, lim))

    best = min(candidates, key=lambda h: h.cost)
    out = AdderGraph(width)
    _absorb(out, best)
    _finish_outputs(out, consts)
    if len(odds) == 1:
        single = scm_decompose(odds[0], max(width, odds[0].bit_length()))
        out.optimal = single.optimal if single.cost == out.cost else False
        out.certificate = single.certificate if out.optimal else None
    assert out.cost <= sum(csd_cost(c) for c in odds)
    return out
