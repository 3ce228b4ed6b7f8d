"""Walsh wave packets and exact step functions on a dyadic grid.

A grid is the box [0, 2^J) cut into cells of width 2^-m.  Step functions
carry one exact scalar per cell.  The wave packet of a tile I x omega is
|I|^{-1/2} times a Walsh sign pattern on I; it is representable on the
grid whenever the pattern is constant on cells.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import GridMismatch, ResolutionTooCoarse
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
from .geometry import DyadicInterval, PointLike, Tile

__all__ = [
    "StepFunction",
    "RealStepFunction",
    "walsh_sign_pattern",
    "eval_walsh",
    "eval_wavepacket",
    "wavepacket_pieces",
    "wavepacket_step",
    "inner_product",
    "batch_inner_products",
    "synthesize",
    "tree_sign_step",
]


@lru_cache(maxsize=4096)
def walsh_sign_pattern(freq_index: int) -> tuple[int, ...]:
    """Sign pattern of the Walsh function with the given index.

    Returns 2^s signs (s the bit length of the index) giving the value
    on each piece of [0, 1) of width 2^-s.  Built by the doubling rules:
    appending a zero bit repeats the pattern, appending a one bit
    repeats it negated.
    """
    if freq_index < 0:
        raise ValueError("frequency index must be nonnegative")
    pattern = [1]
    for position in range(freq_index.bit_length() - 1, -1, -1):
        if (freq_index >> position) & 1:
            pattern = pattern + [-s for s in pattern]
        else:
            pattern = pattern + pattern
    return tuple(pattern)


def eval_walsh(freq_index: int, t: PointLike) -> int:
    """Walsh function value at t in [0, 1), as a product of square waves.

    The j-th square wave is +1 on dyadic intervals of length 2^-(j+1)
    with even index, -1 on the others; the factors used are those picked
    out by the binary digits of the index.
    """
    t = _as_fraction(t)
    if not 0 <= t < 1:
        raise ValueError("Walsh functions are evaluated on [0, 1)")
    sign = 1
    j = 0
    b = freq_index
    while b:
        if b & 1:
            if int(t * (1 << (j + 1))) & 1:
                sign = -sign
        b >>= 1
        j += 1
    return sign


def eval_wavepacket(tile: Tile, x: PointLike) -> QuadScalar:
    """Wave packet value at x, computed by the two-scale recursion.

    Splitting the frequency interval in half corresponds to averaging
    resp. differencing the packets over the two time halves, with a
    1/sqrt(2) to keep the L2 norm.  The recursion bottoms out at the
    lowest frequency over each time interval, a normalised indicator.
    """
    if not tile.time.contains_point(x):
        return ZERO
    b = tile.freq_index
    if b == 0:
        return inv_sqrt_pow2(tile.time.scale)
    coarse_freq = tile.freq.parent
    left = eval_wavepacket(Tile(tile.time.left_child, coarse_freq), x)
    right = eval_wavepacket(Tile(tile.time.right_child, coarse_freq), x)
    if b & 1:
        return (left - right).div_sqrt2()
    return (left + right).div_sqrt2()


def _check_resolvable(tile: Tile, resolution_exp: int) -> int:
    """Bit length of the tile frequency index, or raise if too fine."""
    s = tile.freq_index.bit_length()
    if s > tile.time.scale + resolution_exp:
        raise ResolutionTooCoarse(
            f"tile oscillates below cell width 2^-{resolution_exp}"
        )
    return s


def wavepacket_pieces(
    tile: Tile, domain_exp: int, resolution_exp: int
) -> Iterator[tuple[int, int, int]]:
    """Constant pieces (cell_lo, cell_hi, sign) of a tile's packet.

    Pieces are clipped to the box [0, 2^domain_exp); the packet value on
    a piece is sign * 2^(-k/2) with k the time scale.
    """
    s = _check_resolvable(tile, resolution_exp)
    pattern = walsh_sign_pattern(tile.freq_index)
    lo, hi = tile.time.cell_range(resolution_exp)
    width = 1 << (tile.time.scale + resolution_exp - s)
    total = 1 << (domain_exp + resolution_exp)
    for u, sigma in enumerate(pattern):
        a = max(lo + u * width, 0)
        b = min(lo + (u + 1) * width, total)
        if a < b:
            yield a, b, sigma


class StepFunction:
    """An exact step function on the grid [0, 2^J) with cells 2^-m wide.

    Values are quadratic scalars, one per cell, stored left to right.
    Instances are immutable; all arithmetic returns new objects.
    """

    __slots__ = ("domain_exp", "resolution_exp", "values")

    def __init__(
        self,
        domain_exp: int,
        resolution_exp: int,
        values: Sequence[ScalarLike],
    ) -> None:
        cells = 1 << (domain_exp + resolution_exp)
        if domain_exp + resolution_exp < 0:
            raise ValueError("grid must contain at least one cell")
        coerced = tuple(QuadScalar.coerce(v) for v in values)
        if len(coerced) != cells:
            raise GridMismatch(
                f"expected {cells} cell values, got {len(coerced)}"
            )
        object.__setattr__(self, "domain_exp", domain_exp)
        object.__setattr__(self, "resolution_exp", resolution_exp)
        object.__setattr__(self, "values", coerced)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("StepFunction is immutable")

    @classmethod
    def zero(cls, domain_exp: int, resolution_exp: int) -> "StepFunction":
        return cls(
            domain_exp, resolution_exp, [ZERO] * (1 << (domain_exp + resolution_exp))
        )

    @classmethod
    def indicator(
        cls, interval: DyadicInterval, domain_exp: int, resolution_exp: int
    ) -> "StepFunction":
        """Indicator of a dyadic interval, clipped to the grid box."""
        total = 1 << (domain_exp + resolution_exp)
        lo, hi = interval.cell_range(resolution_exp)
        values = [ZERO] * total
        for j in range(max(lo, 0), min(hi, total)):
            values[j] = ONE
        return cls(domain_exp, resolution_exp, values)

    @classmethod
    def from_cells(
        cls, domain_exp: int, resolution_exp: int, cells: Iterable[int]
    ) -> "StepFunction":
        """Indicator of a union of grid cells given by index."""
        total = 1 << (domain_exp + resolution_exp)
        values = [ZERO] * total
        for j in cells:
            if not 0 <= j < total:
                raise GridMismatch(f"cell {j} outside grid of {total} cells")
            values[j] = ONE
        return cls(domain_exp, resolution_exp, values)

    @classmethod
    def sample(
        cls,
        domain_exp: int,
        resolution_exp: int,
        func: Callable[[Fraction], ScalarLike],
    ) -> "StepFunction":
        """Build from a callable evaluated at each cell's left endpoint."""
        width = pow2_fraction(-resolution_exp)
        total = 1 << (domain_exp + resolution_exp)
        return cls(domain_exp, resolution_exp, [func(j * width) for j in range(total)])

    @property
    def cell_count(self) -> int:
        return len(self.values)

    @property
    def cell_width(self) -> Fraction:
        return pow2_fraction(-self.resolution_exp)

    def _require_same_grid(self, other: "StepFunction") -> None:
        if (
            self.domain_exp != other.domain_exp
            or self.resolution_exp != other.resolution_exp
        ):
            raise GridMismatch(
                f"grid ({self.domain_exp}, {self.resolution_exp}) vs "
                f"({other.domain_exp}, {other.resolution_exp})"
            )

    def __add__(self, other: "StepFunction") -> "StepFunction":
        self._require_same_grid(other)
        return StepFunction(
            self.domain_exp,
            self.resolution_exp,
            [a + b for a, b in zip(self.values, other.values)],
        )

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        self._require_same_grid(other)
        return StepFunction(
            self.domain_exp,
            self.resolution_exp,
            [a - b for a, b in zip(self.values, other.values)],
        )

    def __neg__(self) -> "StepFunction":
        return StepFunction(
            self.domain_exp, self.resolution_exp, [-a for a in self.values]
        )

    def __mul__(
        self, other: Union["StepFunction", ScalarLike]
    ) -> "StepFunction":
        if isinstance(other, StepFunction):
            self._require_same_grid(other)
            return StepFunction(
                self.domain_exp,
                self.resolution_exp,
                [a * b for a, b in zip(self.values, other.values)],
            )
        c = QuadScalar.coerce(other)
        return StepFunction(
            self.domain_exp, self.resolution_exp, [a * c for a in self.values]
        )

    def __rmul__(self, other: ScalarLike) -> "StepFunction":
        return self.__mul__(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.domain_exp == other.domain_exp
            and self.resolution_exp == other.resolution_exp
            and self.values == other.values
        )

    def __hash__(self) -> int:
        return hash((self.domain_exp, self.resolution_exp, self.values))

    def value_at(self, x: PointLike) -> QuadScalar:
        x = _as_fraction(x)
        if not 0 <= x < (1 << self.domain_exp):
            return ZERO
        return self.values[int(x * (1 << self.resolution_exp))]

    def restrict(self, interval: DyadicInterval) -> "StepFunction":
        """Zero out everything outside the given interval."""
        total = self.cell_count
        lo, hi = interval.cell_range(self.resolution_exp)
        values = [
            v if max(lo, 0) <= j < min(hi, total) else ZERO
            for j, v in enumerate(self.values)
        ]
        return StepFunction(self.domain_exp, self.resolution_exp, values)

    def support_cells(self) -> list[int]:
        return [j for j, v in enumerate(self.values) if v]

    def integral(self) -> QuadScalar:
        total = ZERO
        for v in self.values:
            total = total + v
        return total * self.cell_width

    def dot(self, other: "StepFunction") -> QuadScalar:
        """The L2 pairing: sum of products weighted by cell width."""
        self._require_same_grid(other)
        total = ZERO
        for a, b in zip(self.values, other.values):
            if a and b:
                total = total + a * b
        return total * self.cell_width

    def l2_norm_sq(self) -> QuadScalar:
        total = ZERO
        for v in self.values:
            if v:
                total = total + v.square()
        return total * self.cell_width

    def dilate(self, shift: int) -> "StepFunction":
        """Precompose with x -> 2^shift x, keeping the same cell values.

        The box [0, 2^J) becomes [0, 2^(J-shift)) at resolution
        m+shift; cells map one to one so values are reused as is.
        """
        return StepFunction(
            self.domain_exp - shift, self.resolution_exp + shift, self.values
        )

    def to_float_array(self) -> np.ndarray:
        return np.array([v.to_float() for v in self.values], dtype=np.float64)

    def integer_lift(self) -> tuple[list[int], list[int], int]:
        """Cell values as integers times a common power of two.

        Returns (rational parts, sqrt2 parts, e) so that each value is
        (r + s sqrt2) * 2^-e.  Requires every denominator to be a power
        of two, which holds for anything built from packets on a grid.
        """
        e = 0
        for v in self.values:
            for part in (v.rat, v.surd):
                d = part.denominator
                if d & (d - 1):
                    raise ValueError("cell value has a non-dyadic denominator")
                e = max(e, d.bit_length() - 1)
        scale = 1 << e
        rat = [int(v.rat * scale) for v in self.values]
        surd = [int(v.surd * scale) for v in self.values]
        return rat, surd, e

    def to_json(self) -> dict:
        return {
            "J": self.domain_exp,
            "m": self.resolution_exp,
            "values": [v.to_text() for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "StepFunction":
        return cls(
            int(data["J"]),
            int(data["m"]),
            [QuadScalar.from_text(s) for s in data["values"]],
        )

    def to_json_text(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json_text(cls, text: str) -> "StepFunction":
        return cls.from_json(json.loads(text))

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(f"# step-function J={self.domain_exp} m={self.resolution_exp}\n")
        writer = csv.writer(out)
        writer.writerow(["cell", "value"])
        for j, v in enumerate(self.values):
            writer.writerow([j, v.to_text()])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# step-function"):
            raise ValueError("missing step-function header line")
        header = dict(
            item.split("=") for item in lines[0].split() if "=" in item
        )
        rows = list(csv.reader(lines[1:]))
        values: dict[int, QuadScalar] = {}
        for row in rows:
            if not row or row[0] == "cell":
                continue
            values[int(row[0])] = QuadScalar.from_text(row[1])
        ordered = [values[j] for j in sorted(values)]
        return cls(int(header["J"]), int(header["m"]), ordered)

    def __repr__(self) -> str:
        return (
            f"StepFunction(J={self.domain_exp}, m={self.resolution_exp}, "
            f"{self.cell_count} cells)"
        )


class RealStepFunction:
    """Float-valued companion of StepFunction, backed by a numpy array."""

    __slots__ = ("domain_exp", "resolution_exp", "values")

    def __init__(
        self, domain_exp: int, resolution_exp: int, values: np.ndarray
    ) -> None:
        arr = np.asarray(values, dtype=np.float64)
        cells = 1 << (domain_exp + resolution_exp)
        if arr.shape != (cells,):
            raise GridMismatch(f"expected shape ({cells},), got {arr.shape}")
        object.__setattr__(self, "domain_exp", domain_exp)
        object.__setattr__(self, "resolution_exp", resolution_exp)
        object.__setattr__(self, "values", arr)
        arr.setflags(write=False)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("RealStepFunction is immutable")

    @classmethod
    def from_exact(cls, f: StepFunction) -> "RealStepFunction":
        return cls(f.domain_exp, f.resolution_exp, f.to_float_array())

    @classmethod
    def zero(cls, domain_exp: int, resolution_exp: int) -> "RealStepFunction":
        return cls(
            domain_exp,
            resolution_exp,
            np.zeros(1 << (domain_exp + resolution_exp)),
        )

    @property
    def cell_count(self) -> int:
        return self.values.shape[0]

    @property
    def cell_width(self) -> float:
        return 2.0 ** -self.resolution_exp

    def _require_same_grid(self, other: "RealStepFunction") -> None:
        if (
            self.domain_exp != other.domain_exp
            or self.resolution_exp != other.resolution_exp
        ):
            raise GridMismatch("grids differ")

    def __add__(self, other: "RealStepFunction") -> "RealStepFunction":
        self._require_same_grid(other)
        return RealStepFunction(
            self.domain_exp, self.resolution_exp, self.values + other.values
        )

    def __sub__(self, other: "RealStepFunction") -> "RealStepFunction":
        self._require_same_grid(other)
        return RealStepFunction(
            self.domain_exp, self.resolution_exp, self.values - other.values
        )

    def __mul__(self, other: Union["RealStepFunction", float, int]) -> "RealStepFunction":
        if isinstance(other, RealStepFunction):
            self._require_same_grid(other)
            return RealStepFunction(
                self.domain_exp, self.resolution_exp, self.values * other.values
            )
        return RealStepFunction(
            self.domain_exp, self.resolution_exp, self.values * float(other)
        )

    def __rmul__(self, other: Union[float, int]) -> "RealStepFunction":
        return self.__mul__(other)

    def value_at(self, x: float) -> float:
        if not 0 <= x < 2.0 ** self.domain_exp:
            return 0.0
        return float(self.values[int(x * 2.0 ** self.resolution_exp)])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.cell_count else 0.0

    def lp_norm(self, p: float) -> float:
        if p == np.inf:
            return self.sup_norm()
        return float(
            (np.sum(np.abs(self.values) ** p) * self.cell_width) ** (1.0 / p)
        )

    def l2_norm(self) -> float:
        return self.lp_norm(2.0)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_width)

    def support_measure(self) -> float:
        return float(np.count_nonzero(self.values) * self.cell_width)

    def __repr__(self) -> str:
        return (
            f"RealStepFunction(J={self.domain_exp}, m={self.resolution_exp}, "
            f"{self.cell_count} cells)"
        )


def wavepacket_step(
    tile: Tile, domain_exp: int, resolution_exp: int
) -> StepFunction:
    """Render a tile's wave packet on the grid, clipped to the box."""
    amp = inv_sqrt_pow2(tile.time.scale)
    values = [ZERO] * (1 << (domain_exp + resolution_exp))
    for a, b, sigma in wavepacket_pieces(tile, domain_exp, resolution_exp):
        v = amp if sigma > 0 else -amp
        for j in range(a, b):
            values[j] = v
    return StepFunction(domain_exp, resolution_exp, values)


def inner_product(f: StepFunction, tile: Tile) -> QuadScalar:
    """Exact pairing of a step function with a tile's wave packet.

    Cells are grouped into the packet's constant pieces so that the
    irrational amplitude multiplies a single signed block sum.
    """
    block = ZERO
    for a, b, sigma in wavepacket_pieces(
        tile, f.domain_exp, f.resolution_exp
    ):
        piece = ZERO
        for j in range(a, b):
            v = f.values[j]
            if v:
                piece = piece + v
        block = block + piece if sigma > 0 else block - piece
    return block * (inv_sqrt_pow2(tile.time.scale) * f.cell_width)


def _paley_block(f: StepFunction, cell_lo: int, levels: int) -> list[QuadScalar]:
    """Packet coefficients for every frequency over one time interval.

    The time interval covers cells [cell_lo, cell_lo + 2^levels); entry
    b of the result pairs f with the packet of frequency index b there.
    Runs the butterfly that mirrors the two-scale recursion, so a block
    of size n costs n log n scalar operations instead of n^2.
    """
    if levels == 0:
        return [f.values[cell_lo] * inv_sqrt_pow2(f.resolution_exp)]
    half = 1 << (levels - 1)
    left = _paley_block(f, cell_lo, levels - 1)
    right = _paley_block(f, cell_lo + half, levels - 1)
    out: list[QuadScalar] = [ZERO] * (2 * half)
    for c in range(half):
        lc, rc = left[c], right[c]
        out[2 * c] = (lc + rc).div_sqrt2()
        out[2 * c + 1] = (lc - rc).div_sqrt2()
    return out


def batch_inner_products(
    f: StepFunction, tiles: Iterable[Tile]
) -> dict[Tile, QuadScalar]:
    """Pair f with many packets, sharing work across equal time intervals.

    Tiles over a common time interval inside the box are handled by one
    butterfly pass when the group is large enough to amortise it; stray
    tiles fall back to the direct block sum.
    """
    groups: dict[DyadicInterval, list[Tile]] = {}
    for tile in tiles:
        groups.setdefault(tile.time, []).append(tile)
    out: dict[Tile, QuadScalar] = {}
    box = DyadicInterval(0, f.domain_exp)
    for time, group in groups.items():
        levels = time.scale + f.resolution_exp
        if levels >= 0 and box.contains(time) and len(group) > max(levels, 1):
            for tile in group:
                _check_resolvable(tile, f.resolution_exp)
            lo, _ = time.cell_range(f.resolution_exp)
            coeffs = _paley_block(f, lo, levels)
            for tile in group:
                out[tile] = coeffs[tile.freq_index]
        else:
            for tile in group:
                out[tile] = inner_product(f, tile)
    return out


def synthesize(
    terms: Iterable[tuple[Tile, ScalarLike]],
    domain_exp: int,
    resolution_exp: int,
) -> StepFunction:
    """Sum of coefficient times wave packet, rendered on the grid."""
    values = [ZERO] * (1 << (domain_exp + resolution_exp))
    for tile, coeff in terms:
        c = QuadScalar.coerce(coeff)
        if not c:
            continue
        scaled = c * inv_sqrt_pow2(tile.time.scale)
        for a, b, sigma in wavepacket_pieces(tile, domain_exp, resolution_exp):
            v = scaled if sigma > 0 else -scaled
            for j in range(a, b):
                values[j] = values[j] + v
    return StepFunction(domain_exp, resolution_exp, values)


def tree_sign_step(
    top_tile: Tile, domain_exp: int, resolution_exp: int
) -> StepFunction:
    """The sign of a top tile's packet: +-1 on its time interval, else 0."""
    values = [ZERO] * (1 << (domain_exp + resolution_exp))
    for a, b, sigma in wavepacket_pieces(top_tile, domain_exp, resolution_exp):
        v = ONE if sigma > 0 else -ONE
        for j in range(a, b):
            values[j] = v
    return StepFunction(domain_exp, resolution_exp, values)
