"""Sizes of quartile collections and the greedy tree selection built on them.

The size of a collection in one packet slot is the largest square
coefficient mass per unit top length carried by any tree pinned through
one of the other slots.  Selection repeatedly strips the extremal tree
whose density still clears a quarter of the allowance, leaving a thin
residual.  The module also counts tree tops, extracts the level trees
of a counting function, and evaluates John-Nirenberg style quantities
of a weighted family.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PreconditionViolated
from .exact import ZERO, DyadicRational, QuadScalar, ScalarLike, pow2_fraction
from .geometry import (
    DyadicInterval,
    Quartile,
    Tree,
    maximal_tree,
    quartile_sort_key,
)
from .operators import (
    FrequencySet,
    Linearization,
    QuartileCollection,
    tilde_coefficients,
)
from .wavepacket import StepFunction, batch_inner_products

__all__ = [
    "SizeReport",
    "SelectedTree",
    "SelectionResult",
    "size",
    "select_trees",
    "CountingProfile",
    "counting_profile",
    "counting_cells",
    "restricted_trees",
    "jump_times",
    "JNReport",
    "jn_quantities",
]


Stamp = tuple[DyadicInterval, int, int]


@dataclass(frozen=True)
class SizeReport:
    """A size value together with a tree attaining it.

    value_sq is the exact square of the size.  tree is an attaining
    pinned tree and overlap_index the slot it is pinned through; both
    are None for an empty collection.
    """

    value_sq: QuadScalar
    overlap_index: int | None
    tree: Tree | None

    @property
    def value(self) -> float:
        return math.sqrt(self.value_sq.to_float())


def _slot_coefficients(
    members: Sequence[Quartile],
    f: StepFunction,
    slot: int,
    linearization: Linearization | None,
    coefficients: Mapping[Quartile, QuadScalar] | None = None,
) -> Mapping[Quartile, QuadScalar]:
    """Pair f with the slot packet of every member, exactly.

    A linearization reweights slot three only; the other slots ignore
    it.  Precomputed coefficients, when given, are trusted as is; they
    must cover every member.
    """
    if coefficients is not None:
        missing = [q for q in members if q not in coefficients]
        if missing:
            raise KeyError(f"no precomputed coefficient for {missing[0]}")
        return coefficients
    if slot == 3 and linearization is not None:
        return tilde_coefficients(f, members, linearization, 3)
    tiles = [q.tile(slot) for q in members]
    paired = batch_inner_products(f, tiles)
    return {q: paired[t] for q, t in zip(members, tiles)}


def _candidate_freqs(
    members: Sequence[Quartile], pins: Sequence[int]
) -> list[Fraction]:
    """Sorted left endpoints of the pinned subtile frequency bands."""
    ends = {q.tile(j).freq.left for q in members for j in pins}
    return sorted(ends)


def _pinned_incidence(
    members: Sequence[Quartile],
    pins: Sequence[int],
    domain_exp: int,
    freqs: Sequence[Fraction],
) -> dict[Stamp, list[Quartile]]:
    """Members grabbed by each candidate top, keyed by (interval, freq, pin).

    A candidate stamps a member when its interval contains the member
    time interval and its frequency falls in the member's pinned band.
    Scanning band endpoints loses nothing: bands of members under a
    fixed top nest, so every membership pattern already occurs at one
    of the endpoints.
    """
    incidence: dict[Stamp, list[Quartile]] = {}
    for q in members:
        ancestors = [
            q.time.ancestor_at(s) for s in range(q.time.scale, domain_exp + 1)
        ]
        for j in pins:
            band = q.tile(j).freq
            lo = bisect_left(freqs, band.left)
            hi = bisect_left(freqs, band.right)
            for idx in range(lo, hi):
                for interval in ancestors:
                    incidence.setdefault((interval, idx, j), []).append(q)
    return incidence


def _best_candidate(
    members: Sequence[Quartile],
    coeffs: Mapping[Quartile, QuadScalar],
    pins: Sequence[int],
    domain_exp: int,
) -> SizeReport:
    freqs = _candidate_freqs(members, pins)
    incidence = _pinned_incidence(members, pins, domain_exp, freqs)
    mass = {q: c.square() for q, c in coeffs.items()}
    best = ZERO
    best_stamp: Stamp | None = None
    for stamp, grabbed in incidence.items():
        total = ZERO
        for q in grabbed:
            total = total + mass[q]
        density = total * pow2_fraction(-stamp[0].scale)
        if best_stamp is None or density > best:
            best = density
            best_stamp = stamp
    if best_stamp is None:
        return SizeReport(ZERO, None, None)
    interval, idx, j = best_stamp
    witness = Tree(
        incidence[best_stamp], interval, DyadicRational.from_fraction(freqs[idx])
    )
    return SizeReport(best, j, witness)


def size(
    collection: QuartileCollection | Iterable[Quartile],
    f: StepFunction,
    slot: int,
    domain_exp: int | None = None,
    linearization: Linearization | None = None,
    coefficients: Mapping[Quartile, QuadScalar] | None = None,
) -> SizeReport:
    """Largest square slot mass per unit top length over pinned trees.

    Candidate trees overlap uniformly in one of the three other slots,
    while the mass counted is always that of the slot packets, with the
    linearization reweighting them when slot is three.  Tops range over
    ancestors of member times paired with member band endpoints, which
    realises the supremum.  An empty collection has size zero and no
    witness.  Coefficients may be supplied to skip the exact pairings,
    for callers that batch them elsewhere.
    """
    if slot not in (1, 2, 3, 4):
        raise ValueError("packet slot must be 1, 2, 3 or 4")
    members = sorted(set(collection), key=quartile_sort_key)
    if not members:
        return SizeReport(ZERO, None, None)
    if domain_exp is None:
        domain_exp = f.domain_exp
    pins = [j for j in (1, 2, 3, 4) if j != slot]
    coeffs = _slot_coefficients(members, f, slot, linearization, coefficients)
    return _best_candidate(members, coeffs, pins, domain_exp)


@dataclass(frozen=True)
class SelectedTree:
    """One selection grab: a dense pinned tree inside its maximal closure.

    seed collects the members pinned through pass_slot whose mass
    cleared the density bar; full is the maximal tree with the same top
    data among the quartiles alive at grab time, and is what actually
    left the collection.  seed is always contained in full.
    """

    seed: Tree
    full: Tree
    pass_slot: int

    def to_json(self) -> dict:
        return {
            "seed": self.seed.to_json(),
            "full": self.full.to_json(),
            "pass_slot": self.pass_slot,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SelectedTree":
        return cls(
            Tree.from_json(data["seed"]),
            Tree.from_json(data["full"]),
            int(data["pass_slot"]),
        )


def _pass_order(
    incidence: Mapping[Stamp, list[Quartile]],
    freqs: Sequence[Fraction],
    prefer_high: bool,
) -> list[Stamp]:
    """Deterministic processing order of one selection pass.

    The primary key is the left end of the dyadic band of reciprocal
    top length around the candidate frequency, extremal first; ties
    fall to the leftmost then largest top interval, then to the
    extremal raw frequency.
    """

    def band_start(stamp: Stamp) -> Fraction:
        interval, idx, _ = stamp
        width = pow2_fraction(-interval.scale)
        return (freqs[idx] // width) * width

    if prefer_high:
        key = lambda s: (-band_start(s), s[0].left, -s[0].scale, -freqs[s[1]])
    else:
        key = lambda s: (band_start(s), s[0].left, -s[0].scale, freqs[s[1]])
    return sorted(incidence, key=key)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the greedy tree removal.

    Grabs appear in removal order; passes run through the pinning slots
    in increasing order.  Size fields are exact squares, with
    residual_size_sq None when verification was skipped.
    """

    slot: int
    alpha: QuadScalar
    grabs: tuple[SelectedTree, ...]
    residual: QuartileCollection
    initial_size_sq: QuadScalar
    residual_size_sq: QuadScalar | None

    @property
    def seed_trees(self) -> list[Tree]:
        return [g.seed for g in self.grabs]

    @property
    def full_trees(self) -> list[Tree]:
        return [g.full for g in self.grabs]

    def grabs_in_pass(self, pass_slot: int) -> list[SelectedTree]:
        return [g for g in self.grabs if g.pass_slot == pass_slot]

    def top_length(self) -> Fraction:
        return sum((g.full.top_interval.length for g in self.grabs), Fraction(0))

    def to_json(self) -> dict:
        return {
            "slot": self.slot,
            "alpha": self.alpha.to_text(),
            "grabs": [g.to_json() for g in self.grabs],
            "residual": self.residual.to_json(),
            "initial_size_sq": self.initial_size_sq.to_text(),
            "residual_size_sq": (
                None
                if self.residual_size_sq is None
                else self.residual_size_sq.to_text()
            ),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SelectionResult":
        return cls(
            int(data["slot"]),
            QuadScalar.from_text(data["alpha"]),
            tuple(SelectedTree.from_json(item) for item in data["grabs"]),
            QuartileCollection.from_json(data["residual"]),
            QuadScalar.from_text(data["initial_size_sq"]),
            (
                None
                if data["residual_size_sq"] is None
                else QuadScalar.from_text(data["residual_size_sq"])
            ),
        )


def select_trees(
    collection: QuartileCollection | Iterable[Quartile],
    f: StepFunction,
    slot: int,
    alpha: ScalarLike | QuadScalar,
    domain_exp: int | None = None,
    linearization: Linearization | None = None,
    verify: bool = True,
    coefficients: Mapping[Quartile, QuadScalar] | None = None,
) -> SelectionResult:
    """Strip pinned trees of square slot density at least a quarter of alpha.

    One pass runs per pinning slot, in increasing slot order.  Within a
    pass the qualifying candidate top whose frequency band sits extremal
    wins, highest first when the pinning slot lies below the measured
    one and lowest first when above; the maximal tree under the winning
    top is removed and recorded next to its pinned seed.  Masses only
    shrink as quartiles leave, so walking the candidates once in that
    order reproduces repeated extremal extraction.

    Requires the square size of the input to be at most alpha.  The
    residual square size is then at most a quarter of alpha, rechecked
    exactly unless verify is False.
    """
    if slot not in (1, 2, 3, 4):
        raise ValueError("packet slot must be 1, 2, 3 or 4")
    members = sorted(set(collection), key=quartile_sort_key)
    if domain_exp is None:
        domain_exp = f.domain_exp
    alpha = QuadScalar.coerce(alpha)
    quarter = alpha * Fraction(1, 4)
    pins = [j for j in (1, 2, 3, 4) if j != slot]
    coeffs = _slot_coefficients(members, f, slot, linearization, coefficients)
    initial = (
        _best_candidate(members, coeffs, pins, domain_exp)
        if members
        else SizeReport(ZERO, None, None)
    )
    if initial.value_sq > alpha:
        raise PreconditionViolated(
            f"square size {initial.value_sq} exceeds the allowance {alpha}"
        )
    mass = {q: coeffs[q].square() for q in members}
    alive: set[Quartile] = set(members)
    grabs: list[SelectedTree] = []
    if alpha.sign() > 0:
        for j in pins:
            freqs = _candidate_freqs(members, [j])
            incidence = _pinned_incidence(members, [j], domain_exp, freqs)
            for stamp in _pass_order(incidence, freqs, j < slot):
                total = ZERO
                for q in incidence[stamp]:
                    if q in alive:
                        total = total + mass[q]
                interval, idx, _ = stamp
                if total < quarter * interval.length:
                    continue
                xi = freqs[idx]
                seed = Tree(
                    [q for q in incidence[stamp] if q in alive], interval, xi
                )
                full = maximal_tree(alive, interval, xi)
                grabs.append(SelectedTree(seed, full, j))
                alive.difference_update(full.quartiles)
    residual = QuartileCollection(alive)
    residual_size_sq: QuadScalar | None = None
    if verify:
        left = sorted(alive, key=quartile_sort_key)
        report = (
            _best_candidate(left, coeffs, pins, domain_exp)
            if left
            else SizeReport(ZERO, None, None)
        )
        residual_size_sq = report.value_sq
        if residual_size_sq > quarter:
            raise RuntimeError(
                "selection left a residual above a quarter of the allowance; "
                "this is a bug"
            )
    return SelectionResult(
        slot,
        alpha,
        tuple(grabs),
        residual,
        initial.value_sq,
        residual_size_sq,
    )


@dataclass(frozen=True)
class CountingProfile:
    """Layered decomposition of a multiset of intervals.

    Layer zero holds the distinct maximal intervals; each further layer
    repeats the construction after removing one copy of each maximal
    interval.  The number of layers equals the largest overlap count.
    """

    layers: tuple[tuple[DyadicInterval, ...], ...]
    total_length: Fraction

    @property
    def depth(self) -> int:
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)


def counting_profile(intervals: Iterable[DyadicInterval]) -> CountingProfile:
    remaining = Counter(intervals)
    total = sum((iv.length * n for iv, n in remaining.items()), Fraction(0))
    layers: list[tuple[DyadicInterval, ...]] = []
    while remaining:
        keys = list(remaining)
        maximal = [
            iv
            for iv in keys
            if not any(other != iv and other.contains(iv) for other in keys)
        ]
        maximal.sort(key=lambda iv: (iv.left, -iv.scale))
        layers.append(tuple(maximal))
        for iv in maximal:
            remaining[iv] -= 1
            if remaining[iv] == 0:
                del remaining[iv]
    return CountingProfile(tuple(layers), total)


def counting_cells(
    intervals: Iterable[DyadicInterval], domain_exp: int, resolution_exp: int
) -> np.ndarray:
    """How many of the intervals cover each grid cell."""
    total = 1 << (domain_exp + resolution_exp)
    counts = np.zeros(total, dtype=np.int64)
    for iv in intervals:
        lo, hi = iv.cell_range(resolution_exp)
        counts[max(lo, 0) : min(hi, total)] += 1
    return counts


def restricted_trees(
    trees: Sequence[Tree],
    lam: Fraction | int,
    level: int,
    domain_exp: int,
    resolution_exp: int,
) -> list[Tree]:
    """Drop trees whose top sits inside the deep part of the counting pile.

    A tree survives unless its whole top interval lies where more than
    2^(level+1) * lam tops already stack; the survivors' own counting
    function then respects that very bound.
    """
    counts = counting_cells([t.top_interval for t in trees], domain_exp, resolution_exp)
    threshold = Fraction(lam) * (1 << (level + 1))
    kept: list[Tree] = []
    for tree in trees:
        lo, hi = tree.top_interval.cell_range(resolution_exp)
        lo, hi = max(lo, 0), min(hi, len(counts))
        inside = all(
            Fraction(int(counts[c])) > threshold for c in range(lo, hi)
        )
        if not inside:
            kept.append(tree)
    return kept


def jump_times(freqs: FrequencySet, pad: int = 4) -> tuple[int, ...]:
    """Scales where the frequency set resolves into strictly more clumps.

    A scale k is a jump time when the set meets more dyadic intervals
    of length 2^-(k+pad) than of length 2^-(k-pad).  There are at most
    2 * pad jumps per frequency beyond the first, so in particular no
    more than 8 * |set| with the default padding.
    """
    if len(freqs) < 2:
        return ()
    top = max(p.as_fraction() for p in freqs)
    e = 0
    while pow2_fraction(e) <= top:
        e += 1
    start = -e
    k = start
    while freqs.count_at(-k) < len(freqs):
        k += 1
    stop = k
    out = []
    for k in range(start - pad, stop + pad + 1):
        if freqs.count_at(-(k + pad)) > freqs.count_at(-(k - pad)):
            out.append(k)
    return tuple(out)


@dataclass(frozen=True)
class JNReport:
    """Mean square versus weak mean packet mass over pinned trees.

    a2_sq is the exact square of the mean quadratic quantity; the weak
    quantity is evaluated in floating point from the level sets of the
    local square function.  Witnesses name the top interval of the tree
    attaining each quantity.
    """

    a2_sq: QuadScalar
    a2_witness: DyadicInterval | None
    weak: float
    weak_witness: DyadicInterval | None

    @property
    def a2(self) -> float:
        return self.a2_sq.to_float() ** 0.5


def jn_quantities(
    terms: Iterable[tuple[Quartile, ScalarLike]],
    slot: int,
    domain_exp: int,
    resolution_exp: int,
) -> JNReport:
    """Evaluate both John-Nirenberg style quantities of a weighted family.

    Candidate trees are pinned through any slot other than the given
    one, with tops enumerated exactly as for size.  The members of each
    candidate induce a local square function on its top interval; the
    quadratic quantity averages its square, the weak one takes the best
    level of its distribution, both normalised by the top length.
    """
    if slot not in (1, 2, 3, 4):
        raise ValueError("packet slot must be 1, 2, 3 or 4")
    weighted = [(q, QuadScalar.coerce(c)) for q, c in terms]
    if not weighted:
        return JNReport(ZERO, None, 0.0, None)
    weight: dict[Quartile, QuadScalar] = {}
    for q, c in weighted:
        weight[q] = weight.get(q, ZERO) + c
    members = sorted(weight, key=quartile_sort_key)
    pins = [j for j in (1, 2, 3, 4) if j != slot]
    freqs = _candidate_freqs(members, pins)
    incidence = _pinned_incidence(members, pins, domain_exp, freqs)
    best_sq = ZERO
    best_sq_witness: DyadicInterval | None = None
    best_weak = 0.0
    best_weak_witness: DyadicInterval | None = None
    cell_width = pow2_fraction(-resolution_exp)
    seen: set[tuple[DyadicInterval, frozenset[Quartile]]] = set()
    for stamp in sorted(
        incidence, key=lambda s: (s[0].scale, s[0].index, s[2], freqs[s[1]])
    ):
        interval = stamp[0]
        inside = incidence[stamp]
        marker = (interval, frozenset(inside))
        if marker in seen:
            continue
        seen.add(marker)
        mass = ZERO
        for q in inside:
            mass = mass + weight[q].square()
        a2_cand = mass * pow2_fraction(-interval.scale)
        if a2_cand > best_sq:
            best_sq = a2_cand
            best_sq_witness = interval
        lo, hi = interval.cell_range(resolution_exp)
        square = np.zeros(hi - lo, dtype=np.float64)
        for q in inside:
            qlo, qhi = q.time.cell_range(resolution_exp)
            square[qlo - lo : qhi - lo] += weight[q].square().to_float() * float(
                2 ** -q.time.scale
            )
        levels = np.sqrt(square)
        length = float(interval.length)
        for v in np.unique(levels):
            if v <= 0.0:
                continue
            measure = float(np.count_nonzero(levels >= v)) * float(cell_width)
            weak = float(v) * measure / length
            if weak > best_weak:
                best_weak = weak
                best_weak_witness = interval
    return JNReport(best_sq, best_sq_witness, best_weak, best_weak_witness)
