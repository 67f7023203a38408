"""Left-shift-only A-operations on odd fundamentals.

For odd u, v and k >= 1 the reachable odd values are

    u<<k + v,   u<<k - v,   v - u<<k      (and the same with u, v swapped)

Right shifts are never used, so every node maps onto wires plus one adder.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .graph import ADD, SUB, AdderGraph, Op


@lru_cache(maxsize=1 << 16)
def successors(u: int, v: int, lim: int) -> frozenset:
    out = set()
    for a, b in ((u, v), (v, u)):
        k = 1
        while (a << k) - b <= lim:
            s = a << k
            if s + b <= lim:
                out.add(s + b)
            if s > b:
                out.add(s - b)
            elif s < b:
                out.add(b - s)
            k += 1
    return frozenset(out)


def realize(t: int, u: int, v: int) -> tuple | None:
    """Find (kind, x, sx, y, sy) with t = (x<<sx) +/- (y<<sy), or None."""
    for a, b in ((u, v), (v, u)):
        for d, kind, first in ((t - b, ADD, True), (t + b, SUB, True), (b - t, SUB, False)):
            if d <= 0 or d % a:
                continue
            q = d // a
            if q >= 2 and q & (q - 1) == 0:
                k = q.bit_length() - 1
                if first:
                    return kind, a, k, b, 0
                return kind, b, 0, a, k
    return None


def add_fundamental(g: AdderGraph, t: int) -> int:
    """Append a node computing fundamental t from two existing fundamentals."""
    idx = g.node_for(t)
    if idx is not None:
        return idx
    fs = g.fundamental_of
    for i, u in enumerate(fs):
        for v in fs[: i + 1]:
            r = realize(t, u, v)
            if r is not None:
                kind, x, sx, y, sy = r
                return g.add_op(Op(kind, g.node_for(x), sx, g.node_for(y), sy))
    raise ValueError(f"{t} is not one adder away from {fs}")


def _pow2_ge2(q: np.ndarray) -> np.ndarray:
    return (q >= 2) & ((q & (q - 1)) == 0)


def in_a(c: int, u, v) -> np.ndarray:
    """Elementwise test c in A(u, v) for int64 arrays (or scalars) u, v."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    hit = np.zeros(np.broadcast(u, v).shape, dtype=bool)
    for a, b in ((u, v), (v, u)):
        for d in (c - b, c + b, b - c):
            ok = (d > 0) & (d % a == 0)
            hit |= ok & _pow2_ge2(np.where(ok, d // a, 0))
    return hit


def csd_weights(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x ^ (3 * x)).astype(np.int64)
