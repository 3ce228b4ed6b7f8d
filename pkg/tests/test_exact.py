"""Field arithmetic in Q(sqrt2) and dyadic rationals."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from walshtf import ONE, SQRT2, ZERO, DyadicRational, QuadScalar, inv_sqrt_pow2, pow2_fraction
from walshtf.errors import NotDyadicError

small_fractions = st.fractions(
    min_value=-8, max_value=8, max_denominator=64
)
scalars = st.builds(QuadScalar, small_fractions, small_fractions)


@given(scalars, scalars, scalars)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a + ZERO == a
    assert a * ONE == a
    assert a - a == ZERO


@given(scalars)
def test_division_inverts_multiplication(a):
    if a.is_zero:
        return
    assert (ONE / a) * a == ONE
    assert (a * a) / a == a


def test_sqrt2_squares_to_two():
    assert SQRT2 * SQRT2 == QuadScalar(2)
    assert SQRT2.square() == QuadScalar(2)


@given(scalars)
def test_sqrt2_shifts_invert(a):
    assert a.mul_sqrt2().div_sqrt2() == a
    assert a.div_sqrt2().mul_sqrt2() == a
    assert a.mul_sqrt2() == a * SQRT2


@given(scalars)
def test_conjugate_norm_is_rational(a):
    norm = a * a.conjugate()
    assert norm.is_rational
    assert norm.rat == a.rat**2 - 2 * a.surd**2


def test_sign_resolves_pell_neighbours():
    # 886731088897^2 - 2 * 627013566048^2 = 1, so the quotient exceeds
    # sqrt2 by roughly 1e-24; double arithmetic only sees cancellation
    # noise there, while the exact sign stays definitive.
    over = QuadScalar(Fraction(886731088897, 627013566048)) - SQRT2
    under = QuadScalar(Fraction(627013566048, 886731088897)) * 2 - SQRT2
    assert abs(float(over)) < 1e-12
    assert over.sign() == 1
    assert under.sign() == -1
    assert abs(over) == over
    assert abs(under) == -under


@given(scalars, scalars)
def test_order_matches_subtraction_sign(a, b):
    diff = (a - b).sign()
    assert (a < b) == (diff < 0)
    assert (a == b) == (diff == 0)
    assert (a > b) == (diff > 0)


@given(scalars)
def test_float_conversion_tracks_components(a):
    expected = float(a.rat) + float(a.surd) * 2**0.5
    assert float(a) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@given(scalars)
def test_text_round_trip(a):
    assert QuadScalar.from_text(a.to_text()) == a


def test_from_text_rejects_garbage():
    with pytest.raises(ValueError):
        QuadScalar.from_text("garbage")
    with pytest.raises(ValueError):
        QuadScalar.from_text("1/4")


@given(scalars, st.integers(min_value=0, max_value=5))
def test_integer_powers(a, n):
    expected = ONE
    for _ in range(n):
        expected = expected * a
    assert a**n == expected


def test_negative_powers_refused():
    with pytest.raises(ValueError):
        QuadScalar(3) ** -1


@given(st.integers(min_value=-10, max_value=10))
def test_inv_sqrt_pow2_square(k):
    value = inv_sqrt_pow2(k)
    assert value.square() == QuadScalar(pow2_fraction(-k))
    assert value.sign() == 1
    if k % 2 == 0:
        assert value.is_rational
    else:
        assert value.rat == 0


def test_pow2_fraction_both_directions():
    assert pow2_fraction(4) == 16
    assert pow2_fraction(0) == 1
    assert pow2_fraction(-3) == Fraction(1, 8)


dyadics = st.builds(
    DyadicRational,
    st.integers(min_value=-64, max_value=64),
    st.integers(min_value=-6, max_value=6),
)


@given(dyadics, dyadics)
def test_dyadic_arithmetic_matches_fractions(a, b):
    assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()
    assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()
    assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()
    assert (a < b) == (a.as_fraction() < b.as_fraction())


@given(dyadics)
def test_dyadic_text_round_trip(a):
    again = DyadicRational.from_text(a.to_text())
    assert again == a
    assert float(again) == float(a.as_fraction())


def test_dyadic_rejects_odd_denominators():
    with pytest.raises(NotDyadicError):
        DyadicRational.from_fraction(Fraction(1, 3))
    assert DyadicRational.from_fraction(Fraction(6, 4)) == DyadicRational(3, -1)


def test_dyadic_normalises_representation():
    assert DyadicRational(4, -2) == DyadicRational(1, 0)
    assert hash(DyadicRational(4, -2)) == hash(DyadicRational(1, 0))


@given(dyadics, small_fractions)
def test_dyadic_compares_against_rationals(a, q):
    assert (a < q) == (a.as_fraction() < q)
    assert (a >= q) == (a.as_fraction() >= q)
