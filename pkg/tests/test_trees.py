"""Sizes, tree selection, counting functions and jump times."""

from __future__ import annotations

from fractions import Fraction

import pytest

from oracles import brute_size_sq
from walshtf import (
    DyadicInterval,
    FrequencySet,
    QuadScalar,
    Quartile,
    SelectionResult,
    StepFunction,
    Tree,
    ZERO,
    counting_profile,
    inner_product,
    jn_quantities,
    jump_times,
    restricted_trees,
    select_trees,
    size,
    tiles_disjoint,
)
from walshtf.errors import PreconditionViolated
from walshtf.experiments.random_gen import (
    disjoint_collection,
    frequency_set,
    sign_function,
)
from walshtf.kernels import walsh_tables


def test_singleton_size_worked_example():
    # One quartile over [0,1) with full frequency band [0,4); pairing an
    # indicator against the flat first packet gives coefficient one, so
    # the size in slot one is one, witnessed through the second band.
    q = Quartile(DyadicInterval(0, 0), DyadicInterval(0, 2))
    f = StepFunction.indicator(DyadicInterval(0, 0), 2, 3)
    report = size([q], f, 1, 2)
    assert report.value_sq == QuadScalar(1)
    assert report.value == 1.0
    assert report.overlap_index != 1
    assert set(report.tree.quartiles) == {q}
    # The third packet oscillates inside [0,1), so the indicator does
    # not see it at all.
    assert size([q], f, 3, 2).value_sq == ZERO


def test_size_matches_subset_enumeration(rng):
    for trial in range(30):
        coll = disjoint_collection(rng, rng.randint(1, 5), 2, 3)
        f = sign_function(rng, 2, 3)
        slot = 1 + trial % 4
        report = size(coll, f, slot, 2)
        assert report.value_sq == brute_size_sq(coll, f, slot, 2)


def test_size_is_monotone_in_the_collection(rng):
    coll = disjoint_collection(rng, 6, 3, 4)
    f = sign_function(rng, 3, 4)
    part = coll[:3]
    for slot in (1, 2, 3, 4):
        assert size(part, f, slot, 3).value_sq <= size(coll, f, slot, 3).value_sq


def test_size_witness_is_a_pinned_subtree(rng):
    for trial in range(10):
        coll = disjoint_collection(rng, 8, 3, 4)
        f = sign_function(rng, 3, 4)
        slot = 1 + trial % 4
        report = size(coll, f, slot, 3)
        if report.value_sq == ZERO:
            continue
        tree = report.tree
        assert set(tree.quartiles) <= set(coll)
        assert report.overlap_index != slot
        xi = tree.top_freq.as_fraction()
        mass = ZERO
        for q in tree.quartiles:
            assert q.grandchild_of(xi) == report.overlap_index
            mass = mass + inner_product(f, q.tile(slot)).square()
        assert mass * (Fraction(1) / tree.top_interval.length) == report.value_sq


def test_size_accepts_precomputed_coefficients(rng):
    coll = disjoint_collection(rng, 8, 3, 4)
    f = sign_function(rng, 3, 4)
    tables = walsh_tables(f)
    for slot in (1, 2, 3, 4):
        coeffs = {q: tables.coefficient(q.tile(slot)) for q in coll}
        direct = size(coll, f, slot, 3)
        cached = size(coll, f, slot, 3, coefficients=coeffs)
        assert cached.value_sq == direct.value_sq
        assert cached.overlap_index == direct.overlap_index
    with pytest.raises(KeyError):
        size(coll, f, 1, 3, coefficients={coll[0]: QuadScalar(1)})


def test_size_of_an_empty_collection_is_degenerate(rng):
    report = size([], sign_function(rng, 2, 3), 1, 2)
    assert report.value_sq == ZERO
    assert report.overlap_index is None
    assert report.tree is None


def _check_selection_contract(coll, f, slot, alpha, domain_exp):
    sel = select_trees(coll, f, slot, alpha, domain_exp)
    grabbed = set()
    for grab in sel.grabs:
        assert grab.pass_slot != slot
        assert set(grab.seed.quartiles) <= set(grab.full.quartiles)
        assert set(grab.full.quartiles) <= set(coll)
        assert not (set(grab.full.quartiles) & grabbed)
        grabbed |= set(grab.full.quartiles)
    assert grabbed | set(sel.residual) == set(coll)
    assert not (grabbed & set(sel.residual))
    # Residual smallness re-checked through an independent size call.
    if len(sel.residual):
        assert size(sel.residual, f, slot, domain_exp).value_sq <= alpha * Fraction(1, 4)
    # Seed trees from one pass stamp disjoint tiles in the pass slot.
    for p in (1, 2, 3, 4):
        stamps = []
        for grab in sel.grabs_in_pass(p):
            stamps.extend(q.tile(p) for q in grab.seed.quartiles)
        for i in range(len(stamps)):
            for j in range(i + 1, len(stamps)):
                assert tiles_disjoint(stamps[i], stamps[j])
    return sel


def test_selection_contract_small_grid(rng):
    for trial in range(12):
        coll = disjoint_collection(rng, rng.randint(2, 8), 3, 4)
        f = sign_function(rng, 3, 4)
        slot = 1 + trial % 4
        alpha = size(coll, f, slot, 3).value_sq
        if alpha == ZERO:
            continue
        _check_selection_contract(coll, f, slot, alpha, 3)


def test_selection_with_cached_coefficients_is_identical(rng):
    coll = disjoint_collection(rng, 8, 3, 4)
    f = sign_function(rng, 3, 4)
    tables = walsh_tables(f)
    alpha = size(coll, f, 2, 3).value_sq
    if alpha == ZERO:
        pytest.skip("degenerate draw")
    coeffs = {q: tables.coefficient(q.tile(2)) for q in coll}
    a = select_trees(coll, f, 2, alpha, 3)
    b = select_trees(coll, f, 2, alpha, 3, coefficients=coeffs)
    assert a.to_json() == b.to_json()


def test_selection_requires_the_size_bound(rng):
    coll = disjoint_collection(rng, 6, 3, 4)
    f = sign_function(rng, 3, 4)
    alpha = size(coll, f, 1, 3).value_sq
    if alpha == ZERO:
        pytest.skip("degenerate draw")
    with pytest.raises(PreconditionViolated):
        select_trees(coll, f, 1, alpha * Fraction(1, 64), 3)


def test_selection_top_length_and_json_round_trip(rng):
    coll = disjoint_collection(rng, 8, 3, 4)
    f = sign_function(rng, 3, 4)
    alpha = size(coll, f, 3, 3).value_sq
    if alpha == ZERO:
        pytest.skip("degenerate draw")
    sel = select_trees(coll, f, 3, alpha, 3)
    expected = sum((g.full.top_interval.length for g in sel.grabs), Fraction(0))
    assert sel.top_length() == expected
    again = SelectionResult.from_json(sel.to_json())
    assert again.slot == sel.slot
    assert again.alpha == sel.alpha
    assert again.residual == sel.residual
    assert [g.full for g in again.grabs] == [g.full for g in sel.grabs]
    assert again.to_json() == sel.to_json()


def test_john_nirenberg_quantities_on_a_singleton():
    q = Quartile(DyadicInterval(0, 0), DyadicInterval(0, 2))
    w = QuadScalar(Fraction(3, 4))
    rep = jn_quantities([(q, w)], 3, 2, 3)
    assert rep.a2_sq == w.square()
    assert rep.weak == pytest.approx(0.75)
    assert rep.a2_witness == DyadicInterval(0, 0)


def test_jump_times_are_sparse(rng):
    for _ in range(40):
        count = rng.randint(0, 24)
        freqs = frequency_set(rng, count, 5, 3)
        jumps = jump_times(freqs)
        if count < 2:
            assert jumps == ()
            continue
        assert len(jumps) <= 8 * count
        assert list(jumps) == sorted(set(jumps))


def test_counting_profile_layers(rng):
    from walshtf.trees import counting_cells

    intervals = [
        DyadicInterval(rng.randrange(1 << (3 - s)), s)
        for s in (0, 0, 0, 1, 1, 2, 3)
    ]
    profile = counting_profile(intervals)
    assert profile.total_length == sum((iv.length for iv in intervals), Fraction(0))
    # Layers peel off the currently outermost intervals, so no layer
    # member contains another, and the layer count is the deepest stack.
    for layer in profile.layers:
        for a in layer:
            for b in layer:
                if a != b:
                    assert not a.contains(b)
    assert sum(len(layer) for layer in profile.layers) == len(intervals)
    counts = counting_cells(intervals, 3, 4)
    assert len(profile.layers) == counts.max()


def _stacked_trees(rng, count, domain_exp, resolution_exp):
    trees = []
    for _ in range(count):
        scale = rng.randint(0, domain_exp)
        top = DyadicInterval(rng.randrange(1 << (domain_exp - scale)), scale)
        freq_scale = -scale
        freq = DyadicInterval(
            rng.randrange(1 << (resolution_exp + scale)), freq_scale
        )
        member_time = top if scale == 0 else DyadicInterval(top.index << 1, scale - 1)
        member = Quartile(
            member_time, freq.ancestor_at(2 - member_time.scale)
        )
        trees.append(Tree([member], top, freq.left))
    return trees


def test_restricted_trees_cap_the_counting_function(rng):
    for trial in range(40):
        trees = _stacked_trees(rng, rng.randint(1, 30), 3, 4)
        lam = Fraction(rng.randint(1, 4), rng.choice((1, 2)))
        level = trial % 3
        kept = restricted_trees(trees, lam, level, 3, 4)
        assert set(kept) <= set(trees)
        if kept:
            from walshtf.trees import counting_cells

            counts = counting_cells([t.top_interval for t in kept], 3, 4)
            assert counts.max() <= (1 << (level + 1)) * lam
