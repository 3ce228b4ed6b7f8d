"""Dyadic intervals, tiles, quartiles and trees in the Walsh phase plane.

All intervals are half-open on the right, [n 2^k, (n+1) 2^k) with n >= 0.
A tile is a time-frequency rectangle of area one, a quartile has area
four; the four area-one subtiles of a quartile sit over the same time
interval and split the frequency interval into its dyadic grandchildren,
numbered 1 to 4 from left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .errors import EmptyTree, InvalidTree
from .exact import DyadicRational, _as_fraction, pow2_fraction

PointLike = Union[int, Fraction, DyadicRational]


class IntervalRelation(Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    A_CONTAINS_B = "a_contains_b"
    B_CONTAINS_A = "b_contains_a"


@dataclass(frozen=True)
class DyadicInterval:
    """The interval [index * 2^scale, (index + 1) * 2^scale)."""

    index: int
    scale: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("dyadic intervals live on the positive half-line")

    @property
    def length(self) -> Fraction:
        return pow2_fraction(self.scale)

    @property
    def left(self) -> Fraction:
        return self.index * self.length

    @property
    def right(self) -> Fraction:
        return (self.index + 1) * self.length

    def contains_point(self, x: PointLike) -> bool:
        x = _as_fraction(x)
        return self.left <= x < self.right

    def relation(self, other: "DyadicInterval") -> IntervalRelation:
        if self.scale == other.scale:
            if self.index == other.index:
                return IntervalRelation.EQUAL
            return IntervalRelation.DISJOINT
        if self.scale > other.scale:
            if other.index >> (self.scale - other.scale) == self.index:
                return IntervalRelation.A_CONTAINS_B
            return IntervalRelation.DISJOINT
        if self.index >> (other.scale - self.scale) == other.index:
            return IntervalRelation.B_CONTAINS_A
        return IntervalRelation.DISJOINT

    def contains(self, other: "DyadicInterval") -> bool:
        return self.relation(other) in (
            IntervalRelation.EQUAL,
            IntervalRelation.A_CONTAINS_B,
        )

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.relation(other) is not IntervalRelation.DISJOINT

    @property
    def left_child(self) -> "DyadicInterval":
        return DyadicInterval(2 * self.index, self.scale - 1)

    @property
    def right_child(self) -> "DyadicInterval":
        return DyadicInterval(2 * self.index + 1, self.scale - 1)

    @property
    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.index >> 1, self.scale + 1)

    def ancestor_at(self, scale: int) -> "DyadicInterval":
        if scale < self.scale:
            raise ValueError("an ancestor cannot be finer than the interval")
        return DyadicInterval(self.index >> (scale - self.scale), scale)

    def cell_range(self, resolution_exp: int) -> tuple[int, int]:
        """Cell indices [lo, hi) covered at resolution 2^-resolution_exp."""
        shift = self.scale + resolution_exp
        if shift < 0:
            raise ValueError("interval is finer than the requested resolution")
        return self.index << shift, (self.index + 1) << shift

    def to_json(self) -> dict:
        return {"n": self.index, "k": self.scale}

    @classmethod
    def from_json(cls, data: dict) -> "DyadicInterval":
        return cls(int(data["n"]), int(data["k"]))

    def __str__(self) -> str:
        return f"[{self.left}, {self.right})"


def containing_interval(x: PointLike, scale: int) -> DyadicInterval:
    """The dyadic interval of length 2^scale containing x >= 0."""
    x = _as_fraction(x)
    if x < 0:
        raise ValueError("points live on the positive half-line")
    index = int(x * pow2_fraction(-scale))
    return DyadicInterval(index, scale)


@dataclass(frozen=True)
class Tile:
    """An area-one rectangle: time x freq with |time| * |freq| = 1."""

    time: DyadicInterval
    freq: DyadicInterval

    def __post_init__(self) -> None:
        if self.time.scale + self.freq.scale != 0:
            raise ValueError("tile must have area one")

    @property
    def freq_index(self) -> int:
        """Frequency position in units of |freq| = 1/|time|."""
        return self.freq.index

    def intersects(self, other: "Tile") -> bool:
        return self.time.intersects(other.time) and self.freq.intersects(other.freq)

    def to_json(self) -> dict:
        return {"time": self.time.to_json(), "freq": self.freq.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Tile":
        return cls(
            DyadicInterval.from_json(data["time"]), DyadicInterval.from_json(data["freq"])
        )


def tiles_disjoint(a: Tile, b: Tile) -> bool:
    return not a.intersects(b)


@dataclass(frozen=True)
class Quartile:
    """An area-four rectangle whose four subtiles share the time interval."""

    time: DyadicInterval
    freq: DyadicInterval

    def __post_init__(self) -> None:
        if self.time.scale + self.freq.scale != 2:
            raise ValueError("quartile must have area four")

    @property
    def scale(self) -> int:
        return self.time.scale

    def tile(self, i: int) -> Tile:
        """The i-th subtile, i in {1, 2, 3, 4}, frequency increasing with i."""
        if i not in (1, 2, 3, 4):
            raise ValueError("subtile index must be 1, 2, 3 or 4")
        return Tile(
            self.time,
            DyadicInterval(4 * self.freq.index + (i - 1), self.freq.scale - 2),
        )

    def tiles(self) -> tuple[Tile, Tile, Tile, Tile]:
        return tuple(self.tile(i) for i in (1, 2, 3, 4))  # type: ignore[return-value]

    def grandchild_of(self, xi: PointLike) -> int:
        """Which subtile frequency interval contains xi (0 if none)."""
        xi = _as_fraction(xi)
        if not self.freq.contains_point(xi):
            return 0
        offset = int(xi * pow2_fraction(self.scale)) - 4 * self.freq.index
        return offset + 1

    def to_json(self) -> dict:
        return {"time": self.time.to_json(), "freq": self.freq.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Quartile":
        return cls(
            DyadicInterval.from_json(data["time"]), DyadicInterval.from_json(data["freq"])
        )


def quartile_sort_key(q: Quartile) -> tuple[int, int, int]:
    return (q.time.scale, q.time.index, q.freq.index)


@dataclass(frozen=True)
class TreeKind:
    """The set of subtile indices a tree overlaps uniformly."""

    overlap_indices: frozenset[int]

    def is_overlapping(self, i: int) -> bool:
        return i in self.overlap_indices

    def is_lacunary(self, i: int) -> bool:
        return any(j != i for j in self.overlap_indices)


class Tree:
    """A quartile set with top data (I_T, xi_T).

    Every member P satisfies I_P contained in I_T and xi_T in omega_P.
    """

    __slots__ = ("quartiles", "top_interval", "top_freq")

    def __init__(
        self,
        quartiles: Iterable[Quartile],
        top_interval: DyadicInterval,
        top_freq: DyadicRational | Fraction | int,
    ) -> None:
        members = frozenset(quartiles)
        if not isinstance(top_freq, DyadicRational):
            top_freq = DyadicRational.from_fraction(_as_fraction(top_freq))
        object.__setattr__(self, "quartiles", members)
        object.__setattr__(self, "top_interval", top_interval)
        object.__setattr__(self, "top_freq", top_freq)
        xi = top_freq.as_fraction()
        for member in members:
            if not top_interval.contains(member.time):
                raise InvalidTree(f"member time {member.time} escapes top {top_interval}")
            if not member.freq.contains_point(xi):
                raise InvalidTree(f"top frequency {xi} misses member {member.freq}")

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Tree is immutable")

    def __len__(self) -> int:
        return len(self.quartiles)

    def __iter__(self) -> Iterator[Quartile]:
        return iter(self.sorted_quartiles())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            self.quartiles == other.quartiles
            and self.top_interval == other.top_interval
            and self.top_freq == other.top_freq
        )

    def __hash__(self) -> int:
        return hash((self.quartiles, self.top_interval, self.top_freq))

    def sorted_quartiles(self) -> list[Quartile]:
        return sorted(self.quartiles, key=quartile_sort_key)

    @property
    def omega_top(self) -> DyadicInterval:
        return containing_interval(self.top_freq.as_fraction(), -self.top_interval.scale)

    @property
    def top_tile(self) -> Tile:
        return Tile(self.top_interval, self.omega_top)

    def classify(self) -> TreeKind:
        if not self.quartiles:
            return TreeKind(frozenset({1, 2, 3, 4}))
        xi = self.top_freq.as_fraction()
        positions = {member.grandchild_of(xi) for member in self.quartiles}
        if len(positions) == 1:
            return TreeKind(frozenset(positions))
        return TreeKind(frozenset())

    def to_json(self) -> dict:
        return {
            "quartiles": [q.to_json() for q in self.sorted_quartiles()],
            "top_interval": self.top_interval.to_json(),
            "xi": self.top_freq.to_text(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Tree":
        return cls(
            (Quartile.from_json(item) for item in data["quartiles"]),
            DyadicInterval.from_json(data["top_interval"]),
            DyadicRational.from_text(data["xi"]),
        )

    def __repr__(self) -> str:
        return (
            f"Tree({len(self.quartiles)} quartiles, top={self.top_interval}, "
            f"xi={self.top_freq})"
        )


def classify_tree(tree: Tree) -> TreeKind:
    return tree.classify()


def maximal_tree(
    quartiles: Iterable[Quartile],
    top_interval: DyadicInterval,
    top_freq: DyadicRational | Fraction | int,
) -> Tree:
    """The largest tree with the given top inside the collection."""
    xi = top_freq.as_fraction() if isinstance(top_freq, DyadicRational) else _as_fraction(top_freq)
    members = [
        q
        for q in quartiles
        if top_interval.contains(q.time) and q.freq.contains_point(xi)
    ]
    return Tree(members, top_interval, top_freq)


def lacunary_tiles_disjoint(tree: Tree | Iterable[Quartile], i: int) -> bool:
    """Whether the i-th subtiles are pairwise disjoint.

    Accepts a plain iterable so corrupted inputs (for instance a repeated
    quartile) can be probed; a genuine i-lacunary tree always passes.
    """
    members = list(tree.quartiles) if isinstance(tree, Tree) else list(tree)
    subtiles = [member.tile(i) for member in members]
    for a in range(len(subtiles)):
        for b in range(a + 1, len(subtiles)):
            if subtiles[a].intersects(subtiles[b]):
                return False
    return True


def require_nonempty(tree: Tree) -> None:
    if not tree.quartiles:
        raise EmptyTree("operation requires a nonempty tree")
