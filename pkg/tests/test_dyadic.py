from fractions import Fraction

import pytest
from hypothesis import given
import hypothesis.strategies as st
from mpmath import mp

from disccert.dyadic import DyadicRational, RealSample, truncate_to_bits
from disccert.errors import GuardInsufficient


dyadics = st.builds(
    DyadicRational,
    st.integers(min_value=-(2**80), max_value=2**80),
    st.integers(min_value=0, max_value=90),
)


def test_canonical_form():
    x = DyadicRational(6, 3)
    assert (x.numerator, x.exponent) == (3, 2)
    assert DyadicRational(0, 17) == DyadicRational(0, 0)
    assert DyadicRational(-8, 3) == DyadicRational(-1, 0)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        DyadicRational(1, -1)


@given(dyadics, dyadics)
def test_ring_ops_match_fractions(a, b):
    assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()
    assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()
    assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()
    assert (a < b) == (a.as_fraction() < b.as_fraction())
    assert (a <= b) == (a.as_fraction() <= b.as_fraction())


@given(dyadics, dyadics)
def test_add_sub_round_trip(a, b):
    assert ((a + b) - b) == a


@given(dyadics, st.integers(min_value=-40, max_value=40))
def test_pow2_scaling(a, k):
    assert a.scaled_pow2(k).as_fraction() == a.as_fraction() * Fraction(2) ** k


def test_power_of_two_helpers():
    d = DyadicRational.power_of_two(-5)
    assert d.as_fraction() == Fraction(1, 32)
    assert d.is_power_of_two() and d.log2() == -5
    assert DyadicRational.power_of_two(3).log2() == 3
    assert not DyadicRational(3, 1).is_power_of_two()


@given(dyadics)
def test_encode_decode_round_trip(a):
    assert DyadicRational.decode(a.encode()) == a


# ------------------------------------------------------------ truncation


def test_truncate_exact_values():
    assert truncate_to_bits(RealSample.exact_value(0), 8) == DyadicRational(0, 8)
    assert truncate_to_bits(RealSample.exact_value(Fraction(-7, 4)), 1).as_fraction() == Fraction(-3, 2)


def test_truncate_pi_ten_bits():
    # independent high-precision evaluation: floor(pi * 2^10) = 3216
    with mp.workprec(300):
        mant = int(mp.floor(mp.pi * 2**200))
    sample = RealSample(mant, 200)
    got = truncate_to_bits(sample, 10)
    assert got.as_fraction() == Fraction(3216, 1024)
    # truncation never exceeds the true magnitude
    assert got.as_fraction() <= Fraction(mant, 2**200)


@given(
    st.integers(min_value=-(2**90), max_value=2**90),
    st.integers(min_value=0, max_value=16),
)
def test_truncate_magnitude_and_error(mant, b):
    x = RealSample(mant, 90)
    try:
        t = truncate_to_bits(x, b)
    except GuardInsufficient:
        return
    xf = Fraction(mant, 2**90)
    assert abs(t.as_fraction()) <= abs(xf) + Fraction(1, 2**90)
    assert abs(xf - t.as_fraction()) < Fraction(1, 2**b) + Fraction(1, 2**90)
    assert t.exponent <= b


def test_truncate_guard_checks():
    with pytest.raises(ValueError):
        truncate_to_bits(RealSample(12345, 40), 10)  # only 30 guard bits
    # a sample sitting exactly on a bit boundary cannot be settled
    with pytest.raises(GuardInsufficient):
        truncate_to_bits(RealSample(1 << 70, 80), 10)


def test_truncate_toward_zero_negative():
    # -1.9... truncates to -1.5 at one fractional bit, not -2
    s = RealSample.exact_value(Fraction(-15, 8))
    assert truncate_to_bits(s, 1).as_fraction() == Fraction(-3, 2)
