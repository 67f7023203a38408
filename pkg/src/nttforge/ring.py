"""Ring parameters, twiddle schedules and the golden NTT model.

Everything here works on plain Python integers with explicit reduction.
The forward transform is the merged-twist Cooley-Tukey flow used by the
Kyber/Dilithium reference code: natural-order input, bit-reversed output.
The inverse is the matching Gentleman-Sande flow (bit-reversed input,
natural output) followed by multiplication with ``inv_scale``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

FULL = "full"
INCOMPLETE = "incomplete"
VARIANTS = (FULL, INCOMPLETE)

FORWARD = "forward"
INVERSE = "inverse"

PRESETS = {
    "kyber": (3329, 256, INCOMPLETE),
    "dilithium": (8380417, 256, FULL),
    "falcon512": (12289, 512, FULL),
    "falcon1024": (12289, 1024, FULL),
}


class ParamError(ValueError):
    """Raised for ring parameters that cannot support the requested NTT."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(q: int) -> bool:
    """Deterministic Miller-Rabin, exact for q < 3.3e24."""
    if q < 2:
        return False
    for p in _MR_BASES:
        if q % p == 0:
            return q == p
    d, s = q - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, q)
        if x in (1, q - 1):
            continue
        for _ in range(s - 1):
            x = x * x % q
            if x == q - 1:
                break
        else:
            return False
    return True


def _prime_factors(m: int) -> list[int]:
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


def has_order(r: int, order: int, q: int) -> bool:
    """True when r has multiplicative order exactly ``order`` modulo q."""
    if pow(r, order, q) != 1:
        return False
    return all(pow(r, order // p, q) != 1 for p in _prime_factors(order))


def find_root(q: int, order: int) -> int:
    """Smallest residue of multiplicative order exactly ``order`` mod q.

    ``order == 1`` returns 1, the only element of order one.
    """
    if order < 1 or (q - 1) % order:
        raise ParamError(f"no element of order {order} modulo {q}: {order} does not divide {q - 1}")
    if order == 1:
        return 1
    for r in range(2, q):
        if has_order(r, order, q):
            return r
    raise ParamError(f"no element of order {order} modulo {q}")


def bit_reverse(i: int, bits: int) -> int:
    if bits < 0 or not 0 <= i < (1 << bits):
        raise ValueError(f"index {i} out of range for {bits} bits")
    out = 0
    for _ in range(bits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


@dataclass(frozen=True)
class RingParams:
    Q: int
    N: int
    n: int
    R: int
    psi: int
    omega: int
    stages: int
    inv_scale: int
    variant: str = FULL
    name: str = ""

    @property
    def log_n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def lane_bits(self) -> int:
        """Low lane-index bits untouched by the butterfly network (1 for Kyber)."""
        return self.log_n - self.stages

    @property
    def label(self) -> str:
        return self.name or f"q{self.Q}"

    def validate(self) -> None:
        """Re-check every derived constant; raises ParamError on mismatch."""
        Q, N, n = self.Q, self.N, self.n
        if not is_prime(Q) or Q % 2 == 0:
            raise ParamError(f"Q={Q} is not an odd prime")
        if N < 2 or N & (N - 1):
            raise ParamError(f"N={N} is not a power of two")
        if not (1 << (n - 1)) < Q <= (1 << n):
            raise ParamError(f"n={n} is not ceil(log2 Q)")
        if not self.R * Q <= 4 ** n < (self.R + 1) * Q:
            raise ParamError(f"R={self.R} is not floor(4^n/Q)")
        if self.variant == FULL:
            root_order, stages = 2 * N, self.log_n
        elif self.variant == INCOMPLETE:
            root_order, stages = N, self.log_n - 1
        else:
            raise ParamError(f"unknown variant {self.variant!r}")
        if self.stages != stages:
            raise ParamError(f"stages={self.stages}, expected {stages}")
        if (Q - 1) % root_order:
            raise ParamError(f"Q={Q} is not 1 mod {root_order}")
        if not has_order(self.psi, root_order, Q):
            raise ParamError(f"psi={self.psi} does not have order {root_order}")
        if pow(self.psi, root_order // 2, Q) != Q - 1:
            raise ParamError("psi^(order/2) is not -1")
        if self.omega != self.psi * self.psi % Q:
            raise ParamError("omega != psi^2")
        if self.inv_scale * pow(2, self.stages, Q) % Q != 1:
            raise ParamError("inv_scale is not the inverse of 2^stages")


def derive_params(Q: int, N: int, variant: str = FULL, name: str = "") -> RingParams:
    if variant not in VARIANTS:
        raise ParamError(f"unknown variant {variant!r}")
    if N < 2 or N & (N - 1):
        raise ParamError(f"N={N} is not a power of two")
    if Q < 3 or not is_prime(Q):
        raise ParamError(f"Q={Q} is not prime")
    if variant == INCOMPLETE and N < 4:
        raise ParamError("incomplete variant needs N >= 4")
    log_n = N.bit_length() - 1
    root_order = 2 * N if variant == FULL else N
    if (Q - 1) % root_order:
        raise ParamError(f"Q={Q} is not 1 mod {root_order}; no root of order {root_order} exists")
    n = (Q - 1).bit_length()
    psi = find_root(Q, root_order)
    stages = log_n if variant == FULL else log_n - 1
    params = RingParams(
        Q=Q, N=N, n=n, R=4 ** n // Q, psi=psi, omega=psi * psi % Q,
        stages=stages, inv_scale=pow(2, -stages, Q), variant=variant, name=name,
    )
    params.validate()
    return params


def preset(name: str) -> RingParams:
    try:
        q, n, variant = PRESETS[name]
    except KeyError:
        raise ParamError(f"unknown scheme {name!r}; choose from {', '.join(PRESETS)}") from None
    return derive_params(q, n, variant, name=name)


# -- params text file -------------------------------------------------------

_PARAM_KEYS = ("Q", "N", "n", "R", "psi", "omega", "stages", "inv_scale")


def format_params(params: RingParams) -> str:
    lines = ["# NTT ring parameters"]
    if params.name:
        lines.append(f"scheme = {params.name}")
    lines.append(f"variant = {params.variant}")
    lines += [f"{k} = {getattr(params, k)}" for k in _PARAM_KEYS]
    return "\n".join(lines) + "\n"


def parse_params(text: str) -> RingParams:
    """Inverse of :func:`format_params`; the constants are re-validated."""
    kv = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    try:
        fields = {k: int(kv[k]) for k in _PARAM_KEYS}
    except KeyError as e:
        raise ParamError(f"missing key {e.args[0]}") from None
    except ValueError as e:
        raise ParamError(str(e)) from None
    params = RingParams(**fields, variant=kv.get("variant", FULL), name=kv.get("scheme", ""))
    params.validate()
    return params


# -- twiddles ---------------------------------------------------------------

@dataclass(frozen=True)
class TwiddleSchedule:
    direction: str
    stages: tuple  # tuple per stage of ((butterfly, twiddle), ...)

    @property
    def butterflies(self) -> int:
        return sum(len(s) for s in self.stages)

    def twiddle(self, stage: int, butterfly: int) -> int:
        b, w = self.stages[stage][butterfly]
        assert b == butterfly
        return w


def butterfly_lanes(params: RingParams, stage: int, butterfly: int) -> tuple[int, int]:
    """Lane pair (top, bottom) wired to ``butterfly`` in ``stage``."""
    half = params.N >> (stage + 1)
    block, j = divmod(butterfly, half)
    top = 2 * half * block + j
    return top, top + half


def twiddle_exponent(params: RingParams, stage: int, butterfly: int) -> int:
    """Exponent e such that the forward twiddle is psi**e."""
    half = params.N >> (stage + 1)
    block = butterfly // half
    return bit_reverse((1 << stage) + block, params.stages)


def twiddle_schedule(params: RingParams, direction: str = FORWARD) -> TwiddleSchedule:
    if direction not in (FORWARD, INVERSE):
        raise ValueError(f"unknown direction {direction!r}")
    Q = params.Q
    stages = []
    for s in range(params.stages):
        row = []
        for b in range(params.N // 2):
            w = pow(params.psi, twiddle_exponent(params, s, b), Q)
            row.append((b, w if direction == FORWARD else pow(w, -1, Q)))
        stages.append(tuple(row))
    return TwiddleSchedule(direction, tuple(stages))


def _check_vector(values: Sequence[int], params: RingParams) -> list[int]:
    if len(values) != params.N:
        raise ValueError(f"expected {params.N} values, got {len(values)}")
    out = [int(v) for v in values]
    for i, v in enumerate(out):
        if not 0 <= v < params.Q:
            raise ValueError(f"value {v} at index {i} outside [0, {params.Q})")
    return out


def ntt_forward(coeffs: Sequence[int], params: RingParams, schedule: TwiddleSchedule | None = None) -> list[int]:
    a = _check_vector(coeffs, params)
    sched = schedule or twiddle_schedule(params, FORWARD)
    Q = params.Q
    for s, row in enumerate(sched.stages):
        for b, w in row:
            i, j = butterfly_lanes(params, s, b)
            t = a[j] * w % Q
            a[i], a[j] = (a[i] + t) % Q, (a[i] - t) % Q
    return a


def ntt_inverse(points: Sequence[int], params: RingParams, schedule: TwiddleSchedule | None = None) -> list[int]:
    a = _check_vector(points, params)
    sched = schedule or twiddle_schedule(params, INVERSE)
    Q = params.Q
    for s in reversed(range(params.stages)):
        for b, w_inv in sched.stages[s]:
            i, j = butterfly_lanes(params, s, b)
            x, y = a[i], a[j]
            a[i], a[j] = (x + y) % Q, (x - y) * w_inv % Q
    return [v * params.inv_scale % Q for v in a]


def negacyclic_mul_schoolbook(a: Sequence[int], b: Sequence[int], params: RingParams) -> list[int]:
    N, Q = params.N, params.Q
    if len(a) != N or len(b) != N:
        raise ValueError(f"operands must have length {N}")
    c = [0] * N
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < N:
                c[k] += ai * bj
            else:
                c[k - N] -= ai * bj
    return [v % Q for v in c]


def basemul_roots(params: RingParams) -> list[int]:
    """Per-pair moduli zeta_i of the incomplete variant, X^2 - zeta_i."""
    return [pow(params.psi, 2 * bit_reverse(i, params.stages) + 1, params.Q)
            for i in range(params.N // 2)]


def pointwise_mul(ahat: Sequence[int], bhat: Sequence[int], params: RingParams) -> list[int]:
    if len(ahat) != len(bhat) or len(ahat) != params.N:
        raise ValueError(f"operands must have length {params.N}")
    Q = params.Q
    if params.variant == FULL:
        return [x * y % Q for x, y in zip(ahat, bhat)]
    out = [0] * params.N
    for i, zeta in enumerate(basemul_roots(params)):
        a0, a1 = ahat[2 * i], ahat[2 * i + 1]
        b0, b1 = bhat[2 * i], bhat[2 * i + 1]
        out[2 * i] = (a0 * b0 + a1 * b1 % Q * zeta) % Q
        out[2 * i + 1] = (a0 * b1 + a1 * b0) % Q
    return out


def ntt_polymul(a: Sequence[int], b: Sequence[int], params: RingParams) -> list[int]:
    return ntt_inverse(pointwise_mul(ntt_forward(a, params), ntt_forward(b, params), params), params)


# -- hardware inverse-mode constants -----------------------------------------
#
# The fully unrolled datapath runs the inverse through the same CT flow with
# inverse twiddles.  With merged twists that flow needs a per-lane twist
# psi^q on its inputs and psi^-q * inv_scale on its outputs, where q is the
# lane index with the untouched low bits dropped.

def lane_permutation(params: RingParams) -> list[int]:
    """Bit-reversal of the butterfly-index part of each lane (an involution)."""
    lb = params.lane_bits
    mask = (1 << lb) - 1
    return [(bit_reverse(p >> lb, params.stages) << lb) | (p & mask) for p in range(params.N)]


def inverse_twist_constants(params: RingParams) -> list[int]:
    lb = params.lane_bits
    return [pow(params.psi, p >> lb, params.Q) for p in range(params.N)]


def inverse_scale_constants(params: RingParams) -> list[int]:
    lb, Q = params.lane_bits, params.Q
    return [params.inv_scale * pow(params.psi, -(p >> lb), Q) % Q for p in range(params.N)]


def params_dict(params: RingParams) -> dict:
    return asdict(params)


def iter_presets() -> Iterable[RingParams]:
    for name in PRESETS:
        yield preset(name)
