import pytest
from hypothesis import given, strategies as st

from nttforge.mcm import binary_cost, csd_cost, csd_recode, odd_part
from nttforge.mcm.csd import csd_weight

from oracles import min_signed_digits


def value_of(digits: str) -> int:
    v = 0
    for d in digits:
        v = 2 * v + {"+": 1, "0": 0, "-": -1}[d]
    return v


def test_thirteen():
    f = csd_recode(13)
    assert f.digits == "+0-0+"
    assert f.nonzero == 3 and f.adders == 2


def test_seven_beats_binary():
    assert csd_recode(7).digits == "+00-"
    assert csd_recode(7).adders == 1 < binary_cost(7) == 2


@pytest.mark.parametrize("k", [0, 1, 5, 23])
def test_powers_of_two(k):
    f = csd_recode(1 << k)
    assert f.digits == "+" + "0" * k and f.adders == 0


@pytest.mark.parametrize("c", [0, -3])
def test_rejects_nonpositive(c):
    with pytest.raises(ValueError):
        csd_recode(c)


@given(st.integers(1, 1 << 40))
def test_csd_properties(c):
    f = csd_recode(c)
    assert value_of(f.digits) == c == f.value
    assert "++" not in f.digits and "--" not in f.digits and "+-" not in f.digits and "-+" not in f.digits
    assert f.nonzero <= bin(c).count("1")
    assert f.nonzero == csd_weight(c)
    assert csd_cost(c) <= binary_cost(c)


@given(st.integers(1, 1 << 16))
def test_csd_is_minimal_signed_digit(c):
    assert csd_recode(c).nonzero == min_signed_digits(c)


def test_terms_order():
    assert csd_recode(13).terms() == [(1, 4), (-1, 2), (1, 0)]


@given(st.integers(1, 1 << 50))
def test_odd_part(c):
    o, s = odd_part(c)
    assert o % 2 == 1 and o << s == c
