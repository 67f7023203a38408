import random

import pytest
from hypothesis import given, strategies as st

from nttforge.barrett import (
    barrett_reduce, boundary_bands, butterfly_ct, correction_bound, format_trace, max_corrections,
    ntt_forward_barrett, parse_trace,
)
from nttforge.ring import derive_params, ntt_forward, preset

TOY = derive_params(17, 8)
KYBER = preset("kyber")
DILITHIUM = preset("dilithium")


@given(st.integers(0, 3329 ** 2 - 1))
def test_kyber_reduce_property(x):
    tr = barrett_reduce(x, KYBER)
    assert tr.r == x % 3329
    assert tr.t == (x * 5039) >> 24
    assert 0 <= tr.corrections <= 2


@given(st.integers(0, 8380417 ** 2 - 1))
def test_dilithium_reduce_property(x):
    tr = barrett_reduce(x, DILITHIUM)
    assert tr.r == x % 8380417
    assert tr.r_raw == x - tr.t * 8380417 >= 0


def test_reduce_rejects_out_of_range():
    for x in (-1, 17 * 17):
        with pytest.raises(ValueError):
            barrett_reduce(x, TOY)


def test_toy_exhaustive_by_hand():
    worst = 0
    for x in range(17 * 17):
        tr = barrett_reduce(x, TOY)
        assert tr.r == x % 17
        worst = max(worst, tr.corrections)
    assert worst == max_corrections(TOY) == 1


@given(st.integers(0, 3328), st.integers(0, 3328), st.integers(1, 3328))
def test_butterfly_matches_direct(A, B, w):
    res = butterfly_ct(A, B, w, KYBER)
    assert res.a_out == (A + B * w) % 3329
    assert res.b_out == (A - B * w) % 3329


def test_butterfly_rejects_unreduced():
    with pytest.raises(ValueError):
        butterfly_ct(3329, 0, 1, KYBER)


def test_barrett_forward_equals_golden():
    rng = random.Random(5)
    for p in (KYBER, DILITHIUM):
        a = [rng.randrange(p.Q) for _ in range(p.N)]
        assert ntt_forward_barrett(a, p) == ntt_forward(a, p)


@pytest.mark.parametrize("name", ["kyber", "dilithium", "falcon512", "falcon1024"])
def test_correction_bound_is_one(name):
    assert correction_bound(preset(name)) == 1


def test_correction_bound_small_ranges():
    assert correction_bound(KYBER, -1) == 0
    assert correction_bound(KYBER, 3328) == 0
    assert correction_bound(KYBER, 2 * 3329) <= 1


def test_kyber_exhaustive_max():
    assert max_corrections(KYBER, "exhaustive") == 1


def test_falcon_exhaustive_max():
    assert max_corrections(preset("falcon512"), "exhaustive") == 1


def test_dilithium_sampled_small():
    # the full 10^7 run lives in the acceptance suite
    assert max_corrections(DILITHIUM, "sampled", samples=10 ** 5, seed=3, band=10 ** 6) <= 1


def test_exhaustive_refuses_huge_domain():
    with pytest.raises(ValueError):
        max_corrections(DILITHIUM, "exhaustive")


def test_boundary_band():
    lo, hi = boundary_bands(KYBER)
    assert hi == 3329 ** 2 and hi - lo == 2 * 12 * 3329


def test_trace_text_roundtrip():
    tr = barrett_reduce(123456, KYBER)
    assert parse_trace(format_trace([tr])) == [tr]
