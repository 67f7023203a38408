"""Cycle-accurate interpreter for DatapathIR plus equivalence checking.

The batch engine evaluates a block of cycles per node: combinational nodes
act elementwise over time, and a register is a one-cycle shift of its input
seeded with the state left by the previous block (0 after reset).  This is
the same two-phase semantics as the per-cycle reference engine, just
reordered.  Every arithmetic result is checked against its declared width.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .ring import RingParams, ntt_forward, ntt_inverse
from .rtl.ir import ADDER_KINDS, DatapathIR

WIDE = 62  # values at or beyond 2^62 switch to Python-int arrays
CHECKED = ADDER_KINDS + ("shl",)


class SimError(RuntimeError):
    pass


@dataclass(frozen=True)
class Stimulus:
    cycle: int
    vector: tuple
    mode: int = 0


@dataclass
class SimRun:
    stimulus: list
    observed: list             # (cycle, output vector)
    latency_measured: int | None
    ii_measured: int | None
    cycles: int


def make_stream(vectors, modes=0, spacing: int = 1, start: int = 0) -> list[Stimulus]:
    vectors = list(vectors)
    if isinstance(modes, int):
        modes = [modes] * len(vectors)
    return [Stimulus(start + k * spacing, tuple(int(x) for x in v), int(m))
            for k, (v, m) in enumerate(zip(vectors, modes))]


def _check_stimulus(ir: DatapathIR, stimulus) -> None:
    N, Q = len(ir.inputs), ir.params.Q
    last = -1
    for s in stimulus:
        if s.cycle <= last:
            raise ValueError(f"stimulus cycles must increase strictly (cycle {s.cycle})")
        last = s.cycle
        if len(s.vector) != N:
            raise ValueError(f"cycle {s.cycle}: expected {N} coefficients, got {len(s.vector)}")
        if s.mode not in (0, 1):
            raise ValueError(f"cycle {s.cycle}: mode must be 0 or 1")
        for lane, x in enumerate(s.vector):
            if not 0 <= x < Q:
                raise ValueError(f"cycle {s.cycle} lane {lane}: coefficient {x} outside [0, {Q})")


def _drive(ir: DatapathIR, stimulus, cycles: int):
    N = len(ir.inputs)
    data = np.zeros((cycles, N), dtype=np.int64)
    mode = np.zeros(cycles, dtype=np.int64)
    valid = np.zeros(cycles, dtype=np.int64)
    for s in stimulus:
        data[s.cycle] = s.vector
        mode[s.cycle] = s.mode
        valid[s.cycle] = 1
    return data, mode, valid


def _overflow(ir: DatapathIR, i: int, v, t0: int) -> None:
    nd = ir.nodes[i]
    bad = (v < 0) | (v >= (1 << nd.width))
    if bad.any():
        k = int(np.argmax(bad))
        raise SimError(f"value {v[k]} does not fit {nd.width} bits at {ir.where(i)}, cycle {t0 + k}")


def _eval_batch(ir: DatapathIR, data, mode, valid, chunk: int):
    """Outputs (cycles x N) and out_valid for the driven inputs."""
    cycles = len(mode)
    nodes = ir.nodes
    last_use = list(range(len(nodes)))
    for i, nd in enumerate(nodes):
        for a in nd.args:
            last_use[a] = i
    keep = set(ir.outputs) | {ir.out_valid}
    wide = [nd.vmax >= (1 << WIDE) or any(nodes[a].vmax >= (1 << WIDE) for a in nd.args) for nd in nodes]
    state = {i: 0 for i, nd in enumerate(nodes) if nd.kind == "reg"}
    out = np.zeros((cycles, len(ir.outputs)), dtype=np.int64)
    out_valid = np.zeros(cycles, dtype=np.int64)
    lane_of = {n: k for k, n in enumerate(ir.outputs)}
    free_after = {}
    for i, u in enumerate(last_use):
        if i not in keep:
            free_after.setdefault(u, []).append(i)

    for t0 in range(0, cycles, chunk):
        t1 = min(cycles, t0 + chunk)
        vals = {}
        for i, nd in enumerate(nodes):
            k = nd.kind
            a = [vals[x] for x in nd.args]
            if wide[i]:
                a = [x.astype(object) for x in a]
            if k == "in":
                v = data[t0:t1, nd.param]
            elif k == "mode":
                v = mode[t0:t1]
            elif k == "valid":
                v = valid[t0:t1]
            elif k == "reg":
                src = a[0]
                v = np.empty_like(src)
                v[0] = state[i]
                v[1:] = src[:-1]
                state[i] = src[-1]
            elif k == "add":
                v = (a[0] << nd.param[0]) + (a[1] << nd.param[1])
            elif k == "sub":
                v = (a[0] << nd.param[0]) - (a[1] << nd.param[1])
            elif k == "shl":
                v = a[0] << nd.param
            elif k == "shr":
                v = a[0] >> nd.param
            elif k == "csub":
                v = np.where(a[0] >= nd.param, a[0] - nd.param, a[0])
            elif k == "modsub":
                v = np.where(a[0] >= a[1], a[0] - a[1], a[0] + nd.param - a[1])
            elif k == "mux":
                v = np.where(a[0] != 0, a[2], a[1])
            else:
                raise SimError(f"cannot evaluate {ir.where(i)}")
            if k in CHECKED:
                _overflow(ir, i, v, t0)
            if v.dtype == object and nd.vmax < (1 << WIDE):
                v = v.astype(np.int64)
            vals[i] = v
            for j in free_after.get(i, ()):
                vals.pop(j, None)
        for n, lane in lane_of.items():
            out[t0:t1, lane] = vals[n]
        out_valid[t0:t1] = vals[ir.out_valid]
    return out, out_valid


def _eval_cycles(ir: DatapathIR, data, mode, valid):
    """Per-cycle reference engine: sample registers, then settle."""
    cycles = len(mode)
    nodes = ir.nodes
    regs = [i for i, nd in enumerate(nodes) if nd.kind == "reg"]
    state = {i: 0 for i in regs}
    out = np.zeros((cycles, len(ir.outputs)), dtype=np.int64)
    out_valid = np.zeros(cycles, dtype=np.int64)
    for t in range(cycles):
        vals = [0] * len(nodes)
        for i, nd in enumerate(nodes):
            k = nd.kind
            a = [vals[x] for x in nd.args]
            if k == "in":
                v = int(data[t, nd.param])
            elif k == "mode":
                v = int(mode[t])
            elif k == "valid":
                v = int(valid[t])
            elif k == "reg":
                v = state[i]
            elif k == "add":
                v = (a[0] << nd.param[0]) + (a[1] << nd.param[1])
            elif k == "sub":
                v = (a[0] << nd.param[0]) - (a[1] << nd.param[1])
            elif k == "shl":
                v = a[0] << nd.param
            elif k == "shr":
                v = a[0] >> nd.param
            elif k == "csub":
                v = a[0] - nd.param if a[0] >= nd.param else a[0]
            elif k == "modsub":
                v = a[0] - a[1] if a[0] >= a[1] else a[0] + nd.param - a[1]
            else:
                v = a[2] if a[0] else a[1]
            if k in CHECKED and not 0 <= v < (1 << nd.width):
                raise SimError(f"value {v} does not fit {nd.width} bits at {ir.where(i)}, cycle {t}")
            vals[i] = v
        for i in regs:
            state[i] = vals[nodes[i].args[0]]
        out[t] = [vals[n] for n in ir.outputs]
        out_valid[t] = vals[ir.out_valid]
    return out, out_valid


def simulate(ir: DatapathIR, stimulus, engine: str = "batch", chunk: int = 1024,
             extra_cycles: int = 0) -> SimRun:
    stimulus = list(stimulus)
    _check_stimulus(ir, stimulus)
    last = stimulus[-1].cycle if stimulus else -1
    cycles = last + ir.latency + 1 + extra_cycles
    data, mode, valid = _drive(ir, stimulus, max(cycles, 1))
    if engine == "batch":
        out, ov = _eval_batch(ir, data, mode, valid, chunk)
    elif engine == "cycle":
        out, ov = _eval_cycles(ir, data, mode, valid)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    hits = np.flatnonzero(ov)
    observed = [(int(t), tuple(int(x) for x in out[t])) for t in hits]
    latency = int(hits[0]) - stimulus[0].cycle if len(hits) and stimulus else None
    ii = int(np.diff(hits).max()) if len(hits) > 1 else None
    return SimRun(stimulus, observed, latency, ii, cycles)


# -- equivalence -------------------------------------------------------------

def golden(vector, mode: int, params: RingParams) -> list[int]:
    return ntt_inverse(vector, params) if mode else ntt_forward(vector, params)


def corner_vectors(params: RingParams) -> list[list[int]]:
    N, Q = params.N, params.Q
    out = [[0] * N, [Q - 1] * N]
    for pos in (0, 1, N - 2, N - 1):
        v = [0] * N
        v[pos] = 1
        out.append(v)
    return out


@dataclass
class EquivalenceReport:
    scheme: str
    seed: int
    trials: int
    vectors: int
    passed: bool
    latency: int
    latency_measured: int | None
    ii_measured: int | None
    roundtrip_ok: bool
    mismatch: dict | None = None
    version: str = ""
    extra: dict = field(default_factory=dict)

    def text(self) -> str:
        lines = [
            f"tool = nttforge {self.version}".rstrip(),
            f"scheme = {self.scheme}",
            f"seed = {self.seed}",
            f"trials = {self.trials}",
            f"vectors = {self.vectors}",
            f"latency = {self.latency}",
            f"latency_measured = {self.latency_measured}",
            f"ii_measured = {self.ii_measured}",
            f"roundtrip = {'pass' if self.roundtrip_ok else 'fail'}",
        ]
        for k in sorted(self.extra):
            lines.append(f"{k} = {self.extra[k]}")
        if self.mismatch:
            m = self.mismatch
            lines.append(f"first_mismatch = cycle {m['cycle']} lane {m['lane']} mode {m['mode']} "
                         f"expected {m['expected']} got {m['got']}")
        lines.append(f"result = {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _first_mismatch(run: SimRun, expected: list) -> dict | None:
    by_cycle = dict(run.observed)
    for s, want in zip(run.stimulus, expected):
        got = by_cycle.get(s.cycle + (run.latency_measured or 0))
        if got is None:
            return {"cycle": s.cycle, "lane": -1, "mode": s.mode, "expected": "output", "got": "nothing"}
        if list(got) != list(want):
            lane = next(k for k, (g, e) in enumerate(zip(got, want)) if g != e)
            return {"cycle": s.cycle, "lane": lane, "mode": s.mode, "expected": want[lane], "got": got[lane]}
    if len(run.observed) != len(run.stimulus):
        return {"cycle": -1, "lane": -1, "mode": -1, "expected": f"{len(run.stimulus)} outputs",
                "got": f"{len(run.observed)} outputs"}
    return None


def check_equivalence(ir: DatapathIR, params: RingParams, trials: int = 1000, seed: int = 0,
                      engine: str = "batch") -> EquivalenceReport:
    """Forward and inverse on corner plus seeded random vectors, interleaved
    back to back, and a forward-then-inverse roundtrip."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    from . import __version__
    rng = np.random.default_rng(seed)
    vecs = corner_vectors(params) + rng.integers(0, params.Q, size=(trials, params.N)).tolist()
    stream_vecs, modes = [], []
    for v in vecs:
        stream_vecs += [v, v]
        modes += [0, 1]
    stim = make_stream(stream_vecs, modes)
    expected = [golden(s.vector, s.mode, params) for s in stim]
    run = simulate(ir, stim, engine=engine)
    mismatch = None
    if run.latency_measured != ir.latency:
        mismatch = {"cycle": 0, "lane": -1, "mode": -1, "expected": f"latency {ir.latency}",
                    "got": f"latency {run.latency_measured}"}
    mismatch = mismatch or _first_mismatch(run, expected)

    # roundtrip: the forward outputs go back through the design in inverse mode
    fwd_out = [expected[k] for k in range(0, len(expected), 2)]
    back = simulate(ir, make_stream(fwd_out, 1), engine=engine)
    roundtrip = [list(v) for _, v in back.observed] == vecs

    return EquivalenceReport(
        scheme=params.label, seed=seed, trials=trials, vectors=len(vecs), passed=mismatch is None and roundtrip,
        latency=ir.latency, latency_measured=run.latency_measured, ii_measured=run.ii_measured,
        roundtrip_ok=roundtrip, mismatch=mismatch, version=__version__,
    )


def measure_ii(ir: DatapathIR, spacing: int = 1, seed: int = 0, count: int | None = None) -> int | None:
    """Output spacing with distinct vectors applied every ``spacing`` cycles
    for 3x latency cycles; every output is checked against the golden model."""
    params = ir.params
    if count is None:
        count = max(2, -(-3 * max(ir.latency, 1) // spacing))
    rng = np.random.default_rng(seed)
    vecs = rng.integers(0, params.Q, size=(count, params.N)).tolist()
    modes = [k % 2 for k in range(count)]
    run = simulate(ir, make_stream(vecs, modes, spacing))
    expected = [golden(v, m, params) for v, m in zip(vecs, modes)]
    if [list(v) for _, v in run.observed] != expected:
        raise SimError("outputs disagree with the golden model during II measurement")
    return run.ii_measured


# -- vector files -------------------------------------------------------------

def format_vectors(vectors, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [" ".join(f"{int(x):x}" for x in v) for v in vectors]
    return "\n".join(lines) + "\n"


def parse_vectors(text: str, N: int | None = None) -> list[list[int]]:
    out = []
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = [int(tok, 16) for tok in line.split()]
        except ValueError:
            raise ValueError(f"line {k}: not a hex vector") from None
        if N is not None and len(v) != N:
            raise ValueError(f"line {k}: expected {N} values, got {len(v)}")
        out.append(v)
    return out


def write_vectors(path, vectors, comments=()) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(format_vectors(vectors, comments))
    os.replace(tmp, path)


def read_vectors(path, N: int | None = None) -> list[list[int]]:
    with open(path) as fh:
        return parse_vectors(fh.read(), N)
