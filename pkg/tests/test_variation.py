"""Variation norms, dual weights and window splits."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_variation_power, brute_sup
from walshtf import QuadScalar, linearize_weights, long_short_split, variation_norm
from walshtf.errors import UnsortedBreakpoints, ZeroVariation
from walshtf.variation import collapse_repeats, sup_norm

short_sequences = st.lists(
    st.fractions(min_value=-4, max_value=4, max_denominator=16),
    min_size=0,
    max_size=8,
)


@settings(max_examples=60)
@given(short_sequences, st.integers(min_value=1, max_value=4))
def test_exact_variation_matches_brute_enumeration(values, r):
    cert = variation_norm(values, r, "exact")
    assert cert.is_exact
    assert cert.power_sum == QuadScalar(brute_variation_power(values, r))


@settings(max_examples=40)
@given(short_sequences)
def test_float_variation_matches_brute_enumeration(values):
    r = 2.5
    cert = variation_norm([float(v) for v in values], r, "float")
    assert not cert.is_exact
    expected = brute_variation_power([float(v) for v in values], r)
    assert cert.power_sum == pytest.approx(expected, rel=1e-12, abs=1e-12)


@given(short_sequences, st.integers(min_value=1, max_value=4))
def test_certificate_chain_attains_the_value(values, r):
    cert = variation_norm(values, r, "exact")
    assert list(cert.indices) == sorted(set(cert.indices))
    total = QuadScalar(0)
    for a, b in zip(cert.indices, cert.indices[1:]):
        total = total + abs(QuadScalar.coerce(values[b] - values[a])) ** r
    assert total == cert.power_sum


@given(short_sequences, st.fractions(min_value=-4, max_value=4, max_denominator=16))
def test_appending_never_decreases_variation(values, extra):
    before = variation_norm(values, 3, "exact").power_sum
    after = variation_norm(values + [extra], 3, "exact").power_sum
    assert after >= before


def test_auto_method_picks_exact_only_when_it_can():
    exact_in = [Fraction(1, 2), Fraction(-1, 3)]
    assert variation_norm(exact_in, 3).is_exact
    assert not variation_norm(exact_in, 2.5).is_exact
    assert not variation_norm([0.5, -0.25], 3).is_exact
    assert not variation_norm(exact_in, 3, "float").is_exact


def test_exact_method_refuses_fractional_exponent():
    with pytest.raises(ValueError):
        variation_norm([Fraction(0), Fraction(1)], 2.5, "exact")


def test_degenerate_sequences():
    for values in ([], [Fraction(7)], [Fraction(1)] * 5):
        cert = variation_norm(values, 3, "exact")
        assert cert.indices == ()
        assert cert.power_sum == QuadScalar(0)
        assert cert.value == 0.0


def test_sup_variation_is_largest_gap():
    values = [Fraction(0), Fraction(3), Fraction(-1), Fraction(2)]
    cert = variation_norm(values, math.inf, "exact")
    assert cert.power_sum == QuadScalar(4)
    assert cert.indices == (1, 2)


@given(short_sequences)
def test_sup_norm_matches_brute(values):
    assert sup_norm(values, "exact") == QuadScalar(brute_sup(values))


@given(short_sequences)
def test_collapse_repeats_preserves_variation(values):
    collapsed = collapse_repeats(values)
    for a, b in zip(collapsed, collapsed[1:]):
        assert a != b
    assert (
        variation_norm(collapsed, 3, "exact").power_sum
        == variation_norm(values, 3, "exact").power_sum
    )


@settings(max_examples=60)
@given(short_sequences, st.sampled_from([2.5, 3.0, 4.0]))
def test_dual_weights_certify_the_variation(values, r):
    floats = [float(v) for v in values]
    cert = variation_norm(floats, r, "float")
    if not cert.indices:
        with pytest.raises(ZeroVariation):
            linearize_weights(floats, r, "float")
        return
    chain, weights = linearize_weights(floats, r, "float")
    assert chain == cert.indices
    paired = sum(
        w * (floats[b] - floats[a])
        for w, (a, b) in zip(weights, zip(chain, chain[1:]))
    )
    assert paired == pytest.approx(cert.value, rel=1e-10, abs=1e-12)
    conj = r / (r - 1.0)
    assert sum(abs(w) ** conj for w in weights) == pytest.approx(1.0, rel=1e-10)


def test_dual_weights_at_sup_exponent_are_signs():
    values = [0.0, 2.0, -1.0]
    chain, weights = linearize_weights(values, math.inf, "float")
    assert all(w in (-1.0, 1.0) for w in weights)
    paired = sum(
        w * (values[b] - values[a])
        for w, (a, b) in zip(weights, zip(chain, chain[1:]))
    )
    assert paired == variation_norm(values, math.inf, "float").value


@settings(max_examples=40)
@given(short_sequences, st.integers(min_value=1, max_value=3))
def test_long_short_split_dominates_the_variation(values, pieces):
    if len(values) < 2:
        return
    step = max(1, len(values) // (pieces + 1))
    breakpoints = list(range(0, len(values), step))
    if breakpoints[-1] != len(values) - 1:
        breakpoints.append(len(values) - 1)
    r = 3.0
    split = long_short_split(values, r, breakpoints)
    full = variation_norm(values, r, "exact").value
    assert split.bound() >= full - 1e-9


def test_long_short_split_rejects_unsorted_breakpoints():
    with pytest.raises(UnsortedBreakpoints):
        long_short_split([1, 2, 3, 4], 3.0, [2, 0])
