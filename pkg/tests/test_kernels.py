"""Array kernels against their exact counterparts."""

from __future__ import annotations

import math

import numpy as np
import pytest

from walshtf import (
    DyadicInterval,
    Tile,
    h_star,
    h_var,
    inner_product,
    model_terms,
    partial_sum_field,
    variation_norm,
    wavepacket_step,
)
from walshtf.errors import KernelUnsupported, ResolutionTooCoarse
from walshtf.experiments.random_gen import disjoint_collection, sign_function
from walshtf.kernels import (
    batch_sup,
    batch_variation,
    render_packet_row,
    render_partial_sum_field,
    walsh_tables,
)


def _random_tile(rng, domain_exp, resolution_exp):
    scale = rng.randint(-resolution_exp, domain_exp)
    time = DyadicInterval(rng.randrange(1 << (domain_exp - scale)), scale)
    freq = DyadicInterval(rng.randrange(1 << (resolution_exp + scale)), -scale)
    return Tile(time, freq)


def test_walsh_tables_agree_with_direct_pairings(rng):
    f = sign_function(rng, 3, 4)
    tables = walsh_tables(f)
    for _ in range(120):
        tile = _random_tile(rng, 3, 4)
        assert tables.coefficient(tile) == inner_product(f, tile)


def test_walsh_tables_reject_out_of_range_tiles(rng):
    f = sign_function(rng, 2, 3)
    tables = walsh_tables(f)
    outside = Tile(DyadicInterval(4, 0), DyadicInterval(0, 0))
    with pytest.raises(KernelUnsupported):
        tables.coefficient(outside)
    too_wiggly = Tile(DyadicInterval(0, -4), DyadicInterval(1 << 5, 4))
    with pytest.raises((KernelUnsupported, ResolutionTooCoarse)):
        tables.coefficient(too_wiggly)


def test_render_packet_row_matches_exact_packet(rng):
    for _ in range(25):
        tile = _random_tile(rng, 3, 4)
        row = render_packet_row(tile, 3, 4)
        exact = wavepacket_step(tile, 3, 4)
        expected = np.array([float(v) for v in exact.values])
        assert np.allclose(row, expected, rtol=1e-12, atol=1e-12)


def test_render_partial_sum_field_matches_exact_rows(rng):
    coll = disjoint_collection(rng, 8, 3, 4)
    f1, f2 = sign_function(rng, 3, 4), sign_function(rng, 3, 4)
    terms = model_terms(f1, f2, coll)
    exact = partial_sum_field(terms, 3, 3, 4).to_array()
    float_terms = [(q, float(c)) for q, c in terms]
    rendered = render_partial_sum_field(float_terms, 3, 3, 4)
    assert rendered.shape == exact.shape
    assert np.allclose(rendered, exact, rtol=1e-9, atol=1e-12)


def test_batch_variation_matches_per_cell_dp(rng):
    # Rows run over scales, columns over cells.
    field = np.array(
        [[rng.uniform(-2, 2) for _ in range(12)] for _ in range(6)]
    )
    for r in (2.5, 3.0):
        out = batch_variation(field, r)
        assert out.shape == (field.shape[1],)
        for cell in range(field.shape[1]):
            expected = variation_norm(field[:, cell], r, "float").value
            assert out[cell] == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_batch_sup_is_the_columnwise_maximum(rng):
    field = np.array(
        [[rng.uniform(-2, 2) for _ in range(10)] for _ in range(5)]
    )
    out = batch_sup(field)
    assert np.allclose(out, np.abs(field).max(axis=0))


def test_h_operators_agree_with_rendered_field(rng):
    # The exact h-operators and a float pipeline through the rendered
    # field tell the same story up to rounding.
    coll = disjoint_collection(rng, 8, 3, 4)
    f1, f2 = sign_function(rng, 3, 4), sign_function(rng, 3, 4)
    terms = model_terms(f1, f2, coll)
    star = h_star(terms, 3, 3, 4)
    var = h_var(terms, 3, 3.0, 3, 4)
    float_terms = [(q, float(c)) for q, c in terms]
    rendered = render_partial_sum_field(float_terms, 3, 3, 4)
    assert np.allclose(
        batch_sup(rendered),
        np.array([float(v) for v in star.values]),
        rtol=1e-9,
        atol=1e-12,
    )
    assert np.allclose(
        batch_variation(rendered, 3.0),
        var.values,
        rtol=1e-9,
        atol=1e-12,
    )
