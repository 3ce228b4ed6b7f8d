"""Averages, projections, truncation fields and the trilinear form."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from walshtf import (
    DyadicInterval,
    FrequencySet,
    Linearization,
    QuadScalar,
    StepFunction,
    Tile,
    ZERO,
    average,
    freq_projection,
    h_star,
    h_var,
    inner_product,
    inv_sqrt_pow2,
    lambda_form,
    maximal,
    model_terms,
    optimal_linearization,
    partial_sum_field,
    quartile_terms,
    synthesize,
    tilde_inner_product,
    variation_norm,
    wavepacket_step,
)
from walshtf.errors import GridMismatch, ScaleTooCoarse, ScaleTooFine
from walshtf.experiments.random_gen import disjoint_collection, sign_function


def test_average_is_a_conditional_expectation(rng):
    f = sign_function(rng, 2, 3)
    for k in range(-3, 3):
        g = average(f, k)
        width = 1 << (k + 3)
        for start in range(0, len(f.values), width):
            block = f.values[start : start + width]
            mean = sum(block, ZERO) * Fraction(1, width)
            assert all(v == mean for v in g.values[start : start + width])
        assert average(g, k) == g
        assert g.integral() == f.integral()
    assert average(f, -3) == f


def test_average_scale_limits(rng):
    f = sign_function(rng, 2, 3)
    with pytest.raises(ScaleTooCoarse):
        average(f, 3)
    with pytest.raises(ScaleTooFine):
        average(f, -4)


def test_maximal_dominates_every_dyadic_average(rng):
    for q in (1.0, 2.0):
        f = sign_function(rng, 2, 3)
        M = maximal(f, q)
        cells = np.abs(np.array([float(v) for v in f.values])) ** q
        for cell in range(len(cells)):
            best = 0.0
            for k in range(-3, 3):
                width = 1 << (k + 3)
                start = (cell // width) * width
                best = max(best, cells[start : start + width].mean() ** (1.0 / q))
            assert M.values[cell] == pytest.approx(best, rel=1e-12, abs=1e-12)


def test_maximal_grows_with_the_exponent(rng):
    f = sign_function(rng, 3, 4)
    lo, hi = maximal(f, 1.0), maximal(f, 2.0)
    assert (hi.values >= lo.values - 1e-12).all()


def test_freq_projection_keeps_and_kills_packets():
    tile = Tile(DyadicInterval(1, 0), DyadicInterval(5, 0))
    f = wavepacket_step(tile, 2, 3)
    inside = FrequencySet([Fraction(11, 2)])
    outside = FrequencySet([Fraction(3)])
    assert freq_projection(f, inside, 0) == f
    assert freq_projection(f, outside, 0) == StepFunction.zero(2, 3)
    doubled = FrequencySet([Fraction(11, 2), Fraction(21, 4)])
    assert freq_projection(f, doubled, 0) == f


def test_freq_projection_is_idempotent(rng):
    f = sign_function(rng, 2, 3)
    freqs = FrequencySet([Fraction(1, 2), Fraction(5), Fraction(13, 4)])
    for scale in (-2, 0, 1):
        once = freq_projection(f, freqs, scale)
        assert freq_projection(once, freqs, scale) == once


def test_frequency_set_bookkeeping():
    freqs = FrequencySet([Fraction(11, 2), Fraction(21, 4), Fraction(1)])
    assert freqs.count_at(0) == 2
    assert freqs.covering(0) == [DyadicInterval(1, 0), DyadicInterval(5, 0)]
    assert FrequencySet([1, 4]).min_gap() == 3


def test_partial_sum_rows_accumulate_coarser_scales(rng):
    coll = disjoint_collection(rng, 6, 2, 3)
    f1, f2 = sign_function(rng, 2, 3), sign_function(rng, 2, 3)
    terms = model_terms(f1, f2, coll)
    field = partial_sum_field(terms, 3, 2, 3)
    for k in range(-3, 3):
        expected = synthesize(
            [(q.tile(3), c) for q, c in terms if q.time.scale > k], 2, 3
        )
        assert field.row_at(k) == expected
    assert field.row_at(field.scale_max) == StepFunction.zero(2, 3)


def test_model_terms_carry_the_packet_normalisation(rng):
    coll = disjoint_collection(rng, 5, 2, 3)
    f1, f2 = sign_function(rng, 2, 3), sign_function(rng, 2, 3)
    raw = dict(quartile_terms(f1, f2, coll))
    for q, c in model_terms(f1, f2, coll):
        assert c == inv_sqrt_pow2(q.time.scale) * raw[q]
        assert raw[q] == inner_product(f1, q.tile(1)) * inner_product(f2, q.tile(2))


def test_quartile_terms_reject_mixed_grids(rng):
    coll = disjoint_collection(rng, 3, 2, 3)
    with pytest.raises(GridMismatch):
        quartile_terms(sign_function(rng, 2, 3), sign_function(rng, 2, 4), coll)


def test_h_operators_match_per_cell_recompute(rng):
    coll = disjoint_collection(rng, 6, 2, 3)
    f1, f2 = sign_function(rng, 2, 3), sign_function(rng, 2, 3)
    terms = model_terms(f1, f2, coll)
    field = partial_sum_field(terms, 3, 2, 3)
    star = h_star(terms, 3, 2, 3)
    var = h_var(terms, 3, 3.0, 2, 3)
    rows = [field.row_at(k) for k in range(-3, field.scale_max + 1)]
    for cell in range(1 << 5):
        column = [row.values[cell] for row in rows]
        sups = max((abs(v) for v in column), default=ZERO)
        assert star.values[cell] == sups
        expected = variation_norm(column, 3, "exact").value
        assert var.values[cell] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_lambda_form_with_trivial_linearization(rng):
    coll = disjoint_collection(rng, 5, 2, 3)
    f1, f2, f3 = (sign_function(rng, 2, 3) for _ in range(3))
    direct = ZERO
    for q in coll:
        c = inv_sqrt_pow2(q.time.scale)
        for i, fi in ((1, f1), (2, f2), (3, f3)):
            c = c * inner_product(fi, q.tile(i))
        direct = direct + c
    assert lambda_form(coll, f1, f2, f3) == direct
    triv = Linearization.trivial(2, 3)
    assert lambda_form(coll, f1, f2, f3, triv) == direct


def test_lambda_form_threads_the_linearization(rng):
    coll = disjoint_collection(rng, 5, 2, 3)
    f1, f2, f3 = (sign_function(rng, 2, 3) for _ in range(3))
    L = optimal_linearization(model_terms(f1, f2, coll), 3, 3.0, 2, 3)
    expected = ZERO
    for q in coll:
        c = (
            inv_sqrt_pow2(q.time.scale)
            * inner_product(f1, q.tile(1))
            * inner_product(f2, q.tile(2))
        )
        expected = expected + c * tilde_inner_product(f3, q, L)
    assert lambda_form(coll, f1, f2, f3, L) == expected


def test_tilde_pairing_reduces_to_plain_for_trivial_weights(rng):
    coll = disjoint_collection(rng, 4, 2, 3)
    f = sign_function(rng, 2, 3)
    triv = Linearization.trivial(2, 3)
    for q in coll:
        assert tilde_inner_product(f, q, triv) == inner_product(f, q.tile(3))


def test_optimal_linearization_has_admissible_weights(rng):
    for r in (3.0, 4.0):
        coll = disjoint_collection(rng, 6, 2, 3)
        f1, f2 = sign_function(rng, 2, 3), sign_function(rng, 2, 3)
        L = optimal_linearization(model_terms(f1, f2, coll), 3, r, 2, 3)
        conj = r / (r - 1.0)
        assert L.dual_power(conj) <= 1.0 + 1e-9


def test_grid_refinement_leaves_the_form_unchanged(rng):
    # The same quartiles and functions on a finer grid give the same
    # exact trilinear value; every pairing is resolution independent.
    coll = disjoint_collection(rng, 4, 2, 3)
    fs = [sign_function(rng, 2, 3) for _ in range(3)]
    coarse = lambda_form(coll, *fs)
    refined = [
        StepFunction(2, 4, [v for v in f.values for _ in range(2)]) for f in fs
    ]
    assert lambda_form(coll, *refined) == coarse
