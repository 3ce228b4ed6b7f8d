"""Dyadic intervals, tiles, quartiles and trees."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from walshtf import (
    DyadicInterval,
    IntervalRelation,
    Quartile,
    QuartileCollection,
    Tile,
    Tree,
    containing_interval,
    lacunary_tiles_disjoint,
    maximal_tree,
    tiles_disjoint,
)
from walshtf.errors import InvalidTree
from walshtf.experiments.random_gen import disjoint_collection, pinned_tree


@st.composite
def intervals(draw):
    scale = draw(st.integers(min_value=-5, max_value=4))
    index = draw(st.integers(min_value=0, max_value=40))
    return DyadicInterval(index, scale)


@given(intervals())
def test_interval_endpoints(iv):
    assert iv.left == iv.index * Fraction(2) ** iv.scale
    assert iv.right - iv.left == iv.length
    assert iv.length == Fraction(2) ** iv.scale


@given(intervals())
def test_half_open_membership(iv):
    assert iv.contains_point(iv.left)
    assert not iv.contains_point(iv.right)
    assert iv.contains_point((iv.left + iv.right) / 2)


@given(intervals())
def test_children_partition_parent(iv):
    lo, hi = iv.left_child, iv.right_child
    assert lo.parent == iv and hi.parent == iv
    assert lo.right == hi.left
    assert lo.left == iv.left and hi.right == iv.right
    assert iv.contains(lo) and iv.contains(hi)
    assert not lo.intersects(hi)


@given(intervals(), intervals())
def test_nested_or_disjoint(a, b):
    rel = a.relation(b)
    if rel is IntervalRelation.DISJOINT:
        assert a.right <= b.left or b.right <= a.left
        assert not a.intersects(b)
    else:
        assert a.intersects(b)
        if rel is IntervalRelation.EQUAL:
            assert a == b
        elif rel is IntervalRelation.A_CONTAINS_B:
            assert a.contains(b) and not b.contains(a)
        else:
            assert b.contains(a) and not a.contains(b)
    flipped = b.relation(a)
    swap = {
        IntervalRelation.A_CONTAINS_B: IntervalRelation.B_CONTAINS_A,
        IntervalRelation.B_CONTAINS_A: IntervalRelation.A_CONTAINS_B,
    }
    assert flipped == swap.get(rel, rel)


@given(intervals(), st.integers(min_value=0, max_value=8))
def test_ancestors_contain(iv, up):
    anc = iv.ancestor_at(iv.scale + up)
    assert anc.contains(iv)
    assert anc.scale == iv.scale + up


@given(st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=30))
def test_cell_range_width(scale, index):
    iv = DyadicInterval(index, scale)
    lo, hi = iv.cell_range(4)
    assert hi - lo == 1 << (scale + 4)
    assert lo == index << (scale + 4)


@given(st.fractions(min_value=0, max_value=15, max_denominator=32),
       st.integers(min_value=-5, max_value=4))
def test_containing_interval_is_tight(x, scale):
    iv = containing_interval(x, scale)
    assert iv.scale == scale
    assert iv.contains_point(x)


@given(intervals())
def test_interval_json_round_trip(iv):
    assert DyadicInterval.from_json(iv.to_json()) == iv


def test_tile_area_enforced():
    with pytest.raises(ValueError):
        Tile(DyadicInterval(0, 1), DyadicInterval(0, 1))
    tile = Tile(DyadicInterval(0, 1), DyadicInterval(3, -1))
    assert tile.time.length * tile.freq.length == 1
    assert Tile.from_json(tile.to_json()) == tile


def test_quartile_area_enforced():
    with pytest.raises(ValueError):
        Quartile(DyadicInterval(0, 0), DyadicInterval(0, 1))
    q = Quartile(DyadicInterval(0, 0), DyadicInterval(1, 2))
    assert Quartile.from_json(q.to_json()) == q


@st.composite
def quartiles(draw):
    scale = draw(st.integers(min_value=-3, max_value=3))
    time = DyadicInterval(draw(st.integers(min_value=0, max_value=20)), scale)
    freq = DyadicInterval(draw(st.integers(min_value=0, max_value=20)), 2 - scale)
    return Quartile(time, freq)


@given(quartiles())
def test_subtiles_partition_quartile(q):
    tiles = q.tiles()
    assert len(tiles) == 4
    assert [q.tile(i) for i in (1, 2, 3, 4)] == list(tiles)
    for t in tiles:
        assert t.time == q.time
        assert q.freq.contains(t.freq)
    lefts = [t.freq.left for t in tiles]
    assert lefts[0] == q.freq.left
    for a, b in zip(tiles, tiles[1:]):
        assert a.freq.right == b.freq.left
    assert tiles[-1].freq.right == q.freq.right


@given(quartiles())
def test_grandchild_positions(q):
    for i in (1, 2, 3, 4):
        sub = q.tile(i).freq
        assert q.grandchild_of(sub.left) == i
        inside = sub.left + sub.length / 3
        assert q.grandchild_of(inside) == i


@st.composite
def tiles(draw):
    scale = draw(st.integers(min_value=-3, max_value=3))
    time = DyadicInterval(draw(st.integers(min_value=0, max_value=12)), scale)
    freq = DyadicInterval(draw(st.integers(min_value=0, max_value=12)), -scale)
    return Tile(time, freq)


@given(tiles(), tiles())
def test_tiles_disjoint_matches_rectangles(a, b):
    brute = not (a.time.intersects(b.time) and a.freq.intersects(b.freq))
    assert tiles_disjoint(a, b) == brute
    assert tiles_disjoint(b, a) == brute


def test_tree_validation():
    q = Quartile(DyadicInterval(0, 0), DyadicInterval(1, 2))
    with pytest.raises(InvalidTree):
        Tree([q], DyadicInterval(1, 0), Fraction(9, 2))
    with pytest.raises(InvalidTree):
        Tree([q], DyadicInterval(0, 1), Fraction(9))
    tree = Tree([q], DyadicInterval(0, 1), Fraction(9, 2))
    assert tree.top_interval == DyadicInterval(0, 1)
    assert tree.top_tile.time == tree.top_interval
    assert tree.omega_top.contains_point(Fraction(9, 2))
    assert tree.omega_top.length * tree.top_interval.length == 1


def test_tree_classification_by_pin():
    top = DyadicInterval(0, 2)
    base = Quartile(DyadicInterval(0, 2), DyadicInterval(0, 0))
    fine = Quartile(DyadicInterval(1, 0), DyadicInterval(1, 2))
    # xi = 1/4 sits in the second grandchild of base ([1/4, 1/2)) and
    # the first of fine ([4, 5) does not contain it), so pick xi = 9/2
    # shared: base freq [0, 4) misses it.  Use separate trees instead.
    overlapping = Tree([base], top, Fraction(1, 4))
    assert overlapping.classify().overlap_indices == frozenset({2})
    assert overlapping.classify().is_overlapping(2)
    assert overlapping.classify().is_lacunary(1)
    assert not overlapping.classify().is_lacunary(2)
    mixed = Tree(
        [
            Quartile(DyadicInterval(0, 0), DyadicInterval(0, 2)),
            Quartile(DyadicInterval(1, 0), DyadicInterval(0, 2)),
        ],
        top,
        Fraction(0),
    )
    assert mixed.classify().overlap_indices == frozenset({1})
    empty = Tree([], top, 0)
    assert empty.classify().overlap_indices == frozenset({1, 2, 3, 4})


def test_tree_json_round_trip():
    members = [
        Quartile(DyadicInterval(0, 0), DyadicInterval(1, 2)),
        Quartile(DyadicInterval(0, 1), DyadicInterval(2, 1)),
    ]
    tree = Tree(members, DyadicInterval(0, 1), Fraction(9, 2))
    again = Tree.from_json(tree.to_json())
    assert again == tree
    assert again.sorted_quartiles() == tree.sorted_quartiles()


def test_maximal_tree_collects_exactly_the_members_under_the_top(rng):
    pool = disjoint_collection(rng, 20, 3, 5)
    top = DyadicInterval(0, 3)
    xi = Fraction(3, 2)
    tree = maximal_tree(pool, top, xi)
    expected = {
        q for q in pool if top.contains(q.time) and q.freq.contains_point(xi)
    }
    assert set(tree.quartiles) == expected


def test_lacunary_tiles_are_disjoint(rng):
    for trial in range(25):
        pin = 1 + trial % 4
        tree = pinned_tree(rng, pin, 3, 5, depth=4, max_per_scale=3)
        for j in (1, 2, 3, 4):
            if j == pin:
                continue
            assert lacunary_tiles_disjoint(tree, j)
            stamps = [q.tile(j) for q in tree.sorted_quartiles()]
            for a in range(len(stamps)):
                for b in range(a + 1, len(stamps)):
                    assert tiles_disjoint(stamps[a], stamps[b])


def test_collection_set_behaviour():
    a = Quartile(DyadicInterval(0, 0), DyadicInterval(1, 2))
    b = Quartile(DyadicInterval(0, 1), DyadicInterval(0, 1))
    coll = QuartileCollection([a, b, a])
    assert len(coll) == 2
    assert a in coll
    assert list(coll) == sorted([a, b], key=lambda q: (q.time.scale, q.time.index, q.freq.index))
    assert coll.filter(lambda q: q.time.scale == 0) == QuartileCollection([a])
    assert coll.time_scales() == [0, 1]
    assert QuartileCollection.from_json(coll.to_json()) == coll
    assert (coll | QuartileCollection([a])) == coll
    assert (coll - QuartileCollection([a])) == QuartileCollection([b])
