"""Bit-exact model of the Barrett-reduced radix-2 butterfly.

The quotient estimate is ``t = (x * R) >> 2n`` with ``R = floor(4^n / Q)``;
the remainder ``x - t*Q`` is then brought into ``[0, Q)`` by conditional
subtractions.  No division is used anywhere on the reduction path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .ring import RingParams, butterfly_lanes, twiddle_schedule, FORWARD

EXHAUSTIVE_LIMIT = 1 << 32
DEFAULT_SAMPLES = 10 ** 7


@dataclass(frozen=True)
class BarrettTrace:
    x: int
    t: int
    r_raw: int
    corrections: int
    r: int


@dataclass(frozen=True)
class ButterflyResult:
    a_out: int
    b_out: int
    trace: BarrettTrace


def barrett_reduce(x: int, params: RingParams) -> BarrettTrace:
    Q = params.Q
    if not 0 <= x < Q * Q:
        raise ValueError(f"x={x} outside [0, Q^2)")
    t = (x * params.R) >> (2 * params.n)
    r = r_raw = x - t * Q
    corrections = 0
    while r >= Q:
        r -= Q
        corrections += 1
    return BarrettTrace(x, t, r_raw, corrections, r)


def butterfly_ct(A: int, B: int, w: int, params: RingParams) -> ButterflyResult:
    Q = params.Q
    for name, v in (("A", A), ("B", B), ("w", w)):
        if not 0 <= v < Q:
            raise ValueError(f"{name}={v} outside [0, {Q})")
    tr = barrett_reduce(B * w, params)
    s = A + tr.r
    d = A - tr.r
    return ButterflyResult(s - Q if s >= Q else s, d + Q if d < 0 else d, tr)


def ntt_forward_barrett(coeffs: Sequence[int], params: RingParams) -> list[int]:
    """Golden forward NTT with every butterfly replaced by :func:`butterfly_ct`."""
    a = list(coeffs)
    for s, row in enumerate(twiddle_schedule(params, FORWARD).stages):
        for b, w in row:
            i, j = butterfly_lanes(params, s, b)
            res = butterfly_ct(a[i], a[j], w, params)
            a[i], a[j] = res.a_out, res.b_out
    return a


def correction_bound(params: RingParams, x_max: int | None = None) -> int:
    """Provable upper bound on corrections for inputs 0 <= x <= x_max.

    With e = floor(x/Q) - t, e < x * (4^n - R*Q) / (Q * 4^n) + 1.
    """
    Q, four_n = params.Q, 4 ** params.n
    if x_max is None:
        x_max = Q * Q - 1
    if x_max < 0:
        return 0
    bound = Fraction(x_max * (four_n - params.R * Q), Q * four_n) + 1
    e_max = -(-bound.numerator // bound.denominator) - 1
    # r_raw <= (e_max + 1) * Q - 1 and also r_raw <= x_max
    return max(0, min(e_max, x_max // Q))


def _quotients(x: np.ndarray, params: RingParams) -> np.ndarray:
    """Exact (x*R) >> 2n on int64 without overflowing 64 bits."""
    n, R = params.n, params.R
    if (int(x.max(initial=0)) * R).bit_length() < 63:
        return (x * R) >> (2 * n)
    hi, lo = x >> n, x & ((1 << n) - 1)
    return (hi * R + ((lo * R) >> n)) >> n


def _sweep(x: np.ndarray, params: RingParams) -> int:
    Q = params.Q
    t = _quotients(x, params)
    r_raw = x - t * Q
    r = x % Q
    if np.any(r_raw < 0) or np.any((r_raw - r) % Q):
        bad = int(x[np.argmax((r_raw < 0) | ((r_raw - r) % Q != 0))])
        raise AssertionError(f"Barrett model unsound at x={bad}")
    return int(((r_raw - r) // Q).max(initial=0))


def boundary_bands(params: RingParams, width: int | None = None) -> tuple[int, int]:
    """Half-open range [Q^2 - width, Q^2), by default width 2n*Q: the
    largest inputs, where the quotient estimate error peaks."""
    Q = params.Q
    if width is None:
        width = 2 * params.n * Q
    return max(0, Q * Q - width), Q * Q


def max_corrections(params: RingParams, strategy: str = "exhaustive", *,
                    samples: int = DEFAULT_SAMPLES, seed: int = 0,
                    chunk: int = 1 << 22, band: int | None = None) -> int:
    """Largest correction count observed over the swept domain.

    ``exhaustive`` visits every x in [0, Q^2) and needs Q^2 <= 2^32.
    ``sampled`` draws ``samples`` uniform inputs and adds the top boundary band.
    """
    Q = params.Q
    if params.n > 30:
        raise ValueError("int64 sweep supports n <= 30")
    worst = 0
    if strategy == "exhaustive":
        if Q * Q > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive sweep refused: Q^2 = {Q * Q} > 2^32")
        ranges: Iterable[tuple[int, int]] = [(0, Q * Q)]
    elif strategy == "sampled":
        rng = np.random.default_rng(seed)
        left = samples
        while left:
            k = min(left, chunk)
            worst = max(worst, _sweep(rng.integers(0, Q * Q, size=k, dtype=np.int64), params))
            left -= k
        ranges = [boundary_bands(params, band)]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    for lo, hi in ranges:
        for start in range(lo, hi, chunk):
            worst = max(worst, _sweep(np.arange(start, min(hi, start + chunk), dtype=np.int64), params))
    return worst


def format_trace(traces: Iterable[BarrettTrace]) -> str:
    """One reduction per line: ``x t r_raw corrections r``."""
    return "".join(f"{t.x} {t.t} {t.r_raw} {t.corrections} {t.r}\n" for t in traces)


def parse_trace(text: str) -> list[BarrettTrace]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(BarrettTrace(*map(int, line.split())))
    return out
