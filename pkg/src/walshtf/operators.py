"""Averaging, projection and truncation operators on grid functions.

The truncation machinery is the heart: packet sums cut at a running
scale give one sequence per grid cell, whose supremum and r-variation
define the maximal and variational operators the experiments probe.
Linearizations turn those per-cell variation certificates back into
weights that can be paired exactly inside the trilinear form.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import GridMismatch, ScaleTooCoarse, ScaleTooFine
from .exact import (
    ONE,
    ZERO,
    DyadicRational,
    QuadScalar,
    ScalarLike,
    _as_fraction,
    inv_sqrt_pow2,
    pow2_fraction,
)
from .geometry import DyadicInterval, Quartile, Tile, containing_interval, quartile_sort_key
from .variation import ScaleSequence, VariationCertificate, linearize_weights, variation_norm
from .wavepacket import (
    RealStepFunction,
    StepFunction,
    batch_inner_products,
    inner_product,
    synthesize,
)

__all__ = [
    "QuartileCollection",
    "FrequencySet",
    "average",
    "maximal",
    "freq_projection",
    "TruncationField",
    "partial_sum_field",
    "h_star",
    "h_var",
    "Linearization",
    "optimal_linearization",
    "tilde_coefficients",
    "tilde_inner_product",
    "lambda_form",
    "model_terms",
    "quartile_terms",
]

TermList = Iterable[tuple[Quartile, ScalarLike]]


class QuartileCollection:
    """An immutable finite set of quartiles, iterated in a fixed order."""

    __slots__ = ("quartiles",)

    def __init__(self, quartiles: Iterable[Quartile]) -> None:
        object.__setattr__(self, "quartiles", frozenset(quartiles))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("QuartileCollection is immutable")

    def __len__(self) -> int:
        return len(self.quartiles)

    def __iter__(self) -> Iterator[Quartile]:
        return iter(sorted(self.quartiles, key=quartile_sort_key))

    def __contains__(self, item: object) -> bool:
        return item in self.quartiles

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuartileCollection):
            return NotImplemented
        return self.quartiles == other.quartiles

    def __hash__(self) -> int:
        return hash(self.quartiles)

    def __or__(self, other: "QuartileCollection") -> "QuartileCollection":
        return QuartileCollection(self.quartiles | other.quartiles)

    def __sub__(self, other: "QuartileCollection") -> "QuartileCollection":
        return QuartileCollection(self.quartiles - other.quartiles)

    def filter(self, keep) -> "QuartileCollection":
        return QuartileCollection(q for q in self.quartiles if keep(q))

    def time_scales(self) -> list[int]:
        return sorted({q.time.scale for q in self.quartiles})

    def time_intervals(self) -> set[DyadicInterval]:
        return {q.time for q in self.quartiles}

    def to_json(self) -> list[dict]:
        return [q.to_json() for q in self]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "QuartileCollection":
        return cls(Quartile.from_json(item) for item in data)

    def __repr__(self) -> str:
        return f"QuartileCollection({len(self.quartiles)} quartiles)"


class FrequencySet:
    """A finite set of dyadic frequencies, kept sorted and deduplicated."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable[Union[DyadicRational, Fraction, int]]) -> None:
        coerced = set()
        for p in points:
            if not isinstance(p, DyadicRational):
                p = DyadicRational.from_fraction(_as_fraction(p))
            if p.as_fraction() < 0:
                raise ValueError("frequencies live on the positive half-line")
            coerced.add(p)
        object.__setattr__(
            self, "points", tuple(sorted(coerced, key=lambda d: d.as_fraction()))
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("FrequencySet is immutable")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[DyadicRational]:
        return iter(self.points)

    def covering(self, scale: int) -> list[DyadicInterval]:
        """Distinct dyadic intervals of the given scale meeting the set."""
        seen = {containing_interval(p.as_fraction(), scale) for p in self.points}
        return sorted(seen, key=lambda iv: iv.index)

    def count_at(self, scale: int) -> int:
        return len(self.covering(scale))

    def min_gap(self) -> Fraction:
        """Smallest spacing between distinct frequencies."""
        if len(self.points) < 2:
            raise ValueError("need two frequencies for a gap")
        fracs = [p.as_fraction() for p in self.points]
        return min(b - a for a, b in zip(fracs, fracs[1:]))

    def __repr__(self) -> str:
        return f"FrequencySet({len(self.points)} points)"


def average(f: StepFunction, scale: int) -> StepFunction:
    """Replace f by its mean on each dyadic interval of length 2^scale.

    Scales finer than the grid cells are meaningless here, and scales
    coarser than the box would average across a boundary the grid
    cannot see, so both are rejected.
    """
    if scale < -f.resolution_exp:
        raise ScaleTooFine(f"no structure below cell width 2^-{f.resolution_exp}")
    if scale > f.domain_exp:
        raise ScaleTooCoarse(f"box only spans 2^{f.domain_exp}")
    block = 1 << (scale + f.resolution_exp)
    weight = Fraction(1, block)
    out: list[QuadScalar] = []
    for start in range(0, f.cell_count, block):
        acc = ZERO
        for j in range(start, start + block):
            v = f.values[j]
            if v:
                acc = acc + v
        out.extend([acc * weight] * block)
    return StepFunction(f.domain_exp, f.resolution_exp, out)


def maximal(
    f: Union[StepFunction, RealStepFunction], q: float = 1.0
) -> RealStepFunction:
    """Dyadic maximal function of |f|^q, then the q-th root.

    At each point this is the largest average of |f|^q over a dyadic
    interval of the grid containing it, raised to 1/q.
    """
    if q <= 0:
        raise ValueError("maximal exponent must be positive")
    if isinstance(f, StepFunction):
        arr = np.abs(f.to_float_array()) ** q
    else:
        arr = np.abs(f.values) ** q
    best = arr.copy()
    for scale in range(-f.resolution_exp + 1, f.domain_exp + 1):
        block = 1 << (scale + f.resolution_exp)
        means = arr.reshape(-1, block).mean(axis=1)
        best = np.maximum(best, np.repeat(means, block))
    return RealStepFunction(f.domain_exp, f.resolution_exp, best ** (1.0 / q))


def freq_projection(
    f: StepFunction, freqs: FrequencySet, scale: int
) -> StepFunction:
    """Project f onto packets at one time scale near the given frequencies.

    For each dyadic frequency interval of length 2^-scale that meets
    the set, the packets over all time intervals of length 2^scale are
    paired with f and resummed.  With the single frequency zero this
    reduces to plain averaging at that scale.
    """
    if scale < -f.resolution_exp:
        raise ScaleTooFine(f"no structure below cell width 2^-{f.resolution_exp}")
    if scale > f.domain_exp:
        raise ScaleTooCoarse(f"box only spans 2^{f.domain_exp}")
    tiles = [
        Tile(DyadicInterval(n, scale), omega)
        for omega in freqs.covering(-scale)
        for n in range(1 << (f.domain_exp - scale))
    ]
    coeffs = batch_inner_products(f, tiles)
    return synthesize(coeffs.items(), f.domain_exp, f.resolution_exp)


class TruncationField:
    """Partial packet sums cut at every scale, one row per cut.

    Row j is the sum of terms whose time interval is strictly longer
    than 2^k, k = scale_min + j; the top row is an empty sum, so every
    per-cell sequence starts life anchored at zero.
    """

    __slots__ = ("scale_min", "rows")

    def __init__(self, scale_min: int, rows: Sequence[StepFunction]) -> None:
        if not rows:
            raise ValueError("a truncation field needs at least one row")
        object.__setattr__(self, "scale_min", scale_min)
        object.__setattr__(self, "rows", tuple(rows))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("TruncationField is immutable")

    @property
    def domain_exp(self) -> int:
        return self.rows[0].domain_exp

    @property
    def resolution_exp(self) -> int:
        return self.rows[0].resolution_exp

    @property
    def scale_max(self) -> int:
        return self.scale_min + len(self.rows) - 1

    def row_at(self, k: int) -> StepFunction:
        if not self.scale_min <= k <= self.scale_max:
            raise ScaleTooCoarse(f"no row at scale {k}")
        return self.rows[k - self.scale_min]

    def sequence_at(self, cell: int) -> ScaleSequence:
        return ScaleSequence(
            self.scale_min, [row.values[cell] for row in self.rows]
        )

    def to_array(self) -> np.ndarray:
        return np.vstack([row.to_float_array() for row in self.rows])

    def sup_field(self) -> StepFunction:
        """Largest |row value| per cell, exactly."""
        cells = self.rows[0].cell_count
        out: list[QuadScalar] = []
        for cell in range(cells):
            best = ZERO
            for row in self.rows:
                a = abs(row.values[cell])
                if a > best:
                    best = a
            out.append(best)
        return StepFunction(self.domain_exp, self.resolution_exp, out)

    def variation_field(self, r: float, method: str = "auto") -> RealStepFunction:
        """Per-cell r-variation across the rows."""
        if method in ("auto", "float"):
            values = kernels.batch_variation(self.to_array(), r)
            return RealStepFunction(self.domain_exp, self.resolution_exp, values)
        cells = self.rows[0].cell_count
        values = np.empty(cells, dtype=np.float64)
        for cell in range(cells):
            values[cell] = self.sequence_at(cell).variation(r, method).value
        return RealStepFunction(self.domain_exp, self.resolution_exp, values)

    def certificates(self, r: float, method: str = "float") -> list[VariationCertificate]:
        return [
            self.sequence_at(cell).variation(r, method)
            for cell in range(self.rows[0].cell_count)
        ]


def partial_sum_field(
    terms: TermList,
    subtile_index: int,
    domain_exp: int,
    resolution_exp: int,
) -> TruncationField:
    """Assemble the truncated sums of packet terms at every cut scale."""
    by_scale: dict[int, list[tuple[Tile, ScalarLike]]] = {}
    for quartile, coeff in terms:
        by_scale.setdefault(quartile.time.scale, []).append(
            (quartile.tile(subtile_index), coeff)
        )
    rows: list[StepFunction] = []
    running = StepFunction.zero(domain_exp, resolution_exp)
    rows.append(running)
    for k in range(domain_exp, -resolution_exp, -1):
        if k in by_scale:
            running = running + synthesize(by_scale[k], domain_exp, resolution_exp)
        rows.append(running)
    rows.reverse()
    return TruncationField(-resolution_exp, rows)


def h_star(
    terms: TermList, subtile_index: int, domain_exp: int, resolution_exp: int
) -> StepFunction:
    """Maximal truncated sum, computed exactly cell by cell."""
    field = partial_sum_field(terms, subtile_index, domain_exp, resolution_exp)
    return field.sup_field()


def h_var(
    terms: TermList,
    subtile_index: int,
    r: float,
    domain_exp: int,
    resolution_exp: int,
    method: str = "auto",
) -> RealStepFunction:
    """r-variation of the truncated sums, cell by cell."""
    field = partial_sum_field(terms, subtile_index, domain_exp, resolution_exp)
    return field.variation_field(r, method)


class Linearization:
    """Per-cell scale windows and weights standing in for a variation sup.

    Each cell stores jump scales k_0 < ... < k_N and N weights; a term
    at time scale k picks up the weight of the window [k_t, k_{t+1})
    containing k, or zero outside all windows.  Weights are dyadic so
    that downstream pairings stay exact.
    """

    __slots__ = ("domain_exp", "resolution_exp", "cell_jumps", "cell_weights")

    def __init__(
        self,
        domain_exp: int,
        resolution_exp: int,
        cell_jumps: Sequence[tuple[int, ...]],
        cell_weights: Sequence[tuple[QuadScalar, ...]],
    ) -> None:
        cells = 1 << (domain_exp + resolution_exp)
        if len(cell_jumps) != cells or len(cell_weights) != cells:
            raise GridMismatch("one jump tuple and one weight tuple per cell")
        for jumps, weights in zip(cell_jumps, cell_weights):
            if len(jumps) != len(weights) + 1:
                raise ValueError("need exactly one more jump than weights")
            if any(a >= b for a, b in zip(jumps, jumps[1:])):
                raise ValueError("jump scales must increase strictly")
        object.__setattr__(self, "domain_exp", domain_exp)
        object.__setattr__(self, "resolution_exp", resolution_exp)
        object.__setattr__(self, "cell_jumps", tuple(cell_jumps))
        object.__setattr__(self, "cell_weights", tuple(cell_weights))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Linearization is immutable")

    @classmethod
    def trivial(cls, domain_exp: int, resolution_exp: int) -> "Linearization":
        """One window covering every usable scale, with weight one."""
        cells = 1 << (domain_exp + resolution_exp)
        jumps = (-resolution_exp, domain_exp + 1)
        return cls(
            domain_exp,
            resolution_exp,
            [jumps] * cells,
            [(ONE,)] * cells,
        )

    def weight_at(self, cell: int, scale: int) -> QuadScalar:
        jumps = self.cell_jumps[cell]
        weights = self.cell_weights[cell]
        for t in range(len(weights)):
            if jumps[t] <= scale < jumps[t + 1]:
                return weights[t]
        return ZERO

    def dual_power(self, conjugate: float) -> float:
        """Largest per-cell l^{conjugate} power of the weights."""
        worst = 0.0
        for weights in self.cell_weights:
            total = sum(abs(w.to_float()) ** conjugate for w in weights)
            worst = max(worst, total)
        return worst

    def __repr__(self) -> str:
        windows = max((len(w) for w in self.cell_weights), default=0)
        return (
            f"Linearization(J={self.domain_exp}, m={self.resolution_exp}, "
            f"max {windows} windows)"
        )


def optimal_linearization(
    terms: TermList,
    subtile_index: int,
    r: float,
    domain_exp: int,
    resolution_exp: int,
    method: str = "float",
    weight_grid_exp: int = 16,
) -> Linearization:
    """Weights realising each cell's r-variation, snapped to a dyadic grid.

    Per cell, the maximising chain of the truncated sums yields dual
    weights; bracketed window sums run against the scale direction, so
    the weights change sign, and each is then rounded toward zero to a
    multiple of 2^-weight_grid_exp.  Rounding toward zero keeps the
    conjugate power of every cell's weights at most one.
    """
    field = partial_sum_field(terms, subtile_index, domain_exp, resolution_exp)
    grid = 1 << weight_grid_exp
    cell_jumps: list[tuple[int, ...]] = []
    cell_weights: list[tuple[QuadScalar, ...]] = []
    cells = 1 << (domain_exp + resolution_exp)
    for cell in range(cells):
        seq = field.sequence_at(cell)
        cert = seq.variation(r, method)
        if not cert.indices:
            cell_jumps.append((field.scale_min,))
            cell_weights.append(())
            continue
        chain, weights = linearize_weights(list(seq), r, method)
        jumps = tuple(field.scale_min + idx + 1 for idx in chain)
        snapped = tuple(
            QuadScalar(Fraction(math.trunc(-w * grid), grid)) for w in weights
        )
        cell_jumps.append(jumps)
        cell_weights.append(snapped)
    return Linearization(domain_exp, resolution_exp, cell_jumps, cell_weights)


def tilde_coefficients(
    f: StepFunction,
    quartiles: Iterable[Quartile],
    linearization: Linearization,
    subtile_index: int = 3,
) -> dict[Quartile, QuadScalar]:
    """Pairings of f with weight-modified packets, grouped per scale.

    The modified packet of a quartile is its packet times the cell-wise
    linearization weight at the quartile's scale; since that weight
    field is shared by all quartiles of one scale, f is reweighted once
    per scale and the packets are then paired in batch.
    """
    by_scale: dict[int, list[Quartile]] = {}
    for q in quartiles:
        by_scale.setdefault(q.time.scale, []).append(q)
    out: dict[Quartile, QuadScalar] = {}
    for k, group in by_scale.items():
        weighted = StepFunction(
            f.domain_exp,
            f.resolution_exp,
            [
                v * linearization.weight_at(cell, k) if v else ZERO
                for cell, v in enumerate(f.values)
            ],
        )
        paired = batch_inner_products(
            weighted, [q.tile(subtile_index) for q in group]
        )
        for q in group:
            out[q] = paired[q.tile(subtile_index)]
    return out


def tilde_inner_product(
    f: StepFunction,
    quartile: Quartile,
    linearization: Linearization,
    subtile_index: int = 3,
) -> QuadScalar:
    return tilde_coefficients(f, [quartile], linearization, subtile_index)[quartile]


def lambda_form(
    quartiles: Iterable[Quartile],
    f1: StepFunction,
    f2: StepFunction,
    f3: StepFunction,
    linearization: Linearization | None = None,
) -> QuadScalar:
    """The trilinear packet form over a quartile collection.

    Each quartile contributes |I|^{-1/2} times the pairing of f1, f2
    and f3 with its first, second and (possibly weight-modified) third
    subtile packet.  Without a linearization the plain third packet is
    used.  Everything is exact.
    """
    quartiles = list(quartiles)
    c1 = batch_inner_products(f1, [q.tile(1) for q in quartiles])
    c2 = batch_inner_products(f2, [q.tile(2) for q in quartiles])
    if linearization is None:
        c3_raw = batch_inner_products(f3, [q.tile(3) for q in quartiles])
        c3 = {q: c3_raw[q.tile(3)] for q in quartiles}
    else:
        c3 = tilde_coefficients(f3, quartiles, linearization, 3)
    total = ZERO
    for q in quartiles:
        a = c1[q.tile(1)]
        b = c2[q.tile(2)]
        c = c3[q]
        if a and b and c:
            total = total + inv_sqrt_pow2(q.time.scale) * a * b * c
    return total


def quartile_terms(
    f1: StepFunction,
    f2: StepFunction,
    quartiles: Iterable[Quartile],
) -> list[tuple[Quartile, QuadScalar]]:
    """Pair each quartile with the product of its first two slot pairings.

    These products are the natural coefficients of the partial sum,
    maximal and variation operators built on a quartile collection.
    The result is sorted by quartile for determinism.
    """
    members = sorted(set(quartiles), key=quartile_sort_key)
    if f1.domain_exp != f2.domain_exp or f1.resolution_exp != f2.resolution_exp:
        raise GridMismatch(
            f"grid ({f1.domain_exp}, {f1.resolution_exp}) vs "
            f"({f2.domain_exp}, {f2.resolution_exp})"
        )
    c1 = batch_inner_products(f1, [q.tile(1) for q in members])
    c2 = batch_inner_products(f2, [q.tile(2) for q in members])
    return [(q, c1[q.tile(1)] * c2[q.tile(2)]) for q in members]


def model_terms(
    f1: StepFunction,
    f2: StepFunction,
    quartiles: Iterable[Quartile],
) -> list[tuple[Quartile, QuadScalar]]:
    """Quartile term products carrying the packet normalisation.

    Multiplying each slot product by the inverse square root of the
    time length makes the resulting partial sums the ones the trilinear
    form pairs against, so a linearization built on these terms is the
    one lambda_form expects.
    """
    return [
        (q, inv_sqrt_pow2(q.time.scale) * c)
        for q, c in quartile_terms(f1, f2, quartiles)
    ]
