"""Vectorised kernels backing the exact layer.

Two lanes live here.  The integer lane runs the Walsh butterfly over
int64 planes (one for the rational part, one for the sqrt2 part of each
cell value) and reads packet coefficients back off exactly, since the
butterfly only ever adds and subtracts.  The float lane assembles
truncated partial-sum fields and batches the variation recursion over
all grid cells at once; it trades exactness for speed and is meant for
experiments, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import KernelUnsupported, ResolutionTooCoarse
from .exact import QuadScalar
from .geometry import Quartile, Tile
from .wavepacket import StepFunction, walsh_sign_pattern

__all__ = [
    "IntegerField",
    "integer_field",
    "WalshTables",
    "walsh_tables",
    "render_packet_row",
    "render_partial_sum_field",
    "batch_variation",
    "batch_sup",
]

_INT64_GUARD = 62


@dataclass(frozen=True)
class IntegerField:
    """Cell values of a step function as two int64 planes times 2^-exponent."""

    rat: np.ndarray
    surd: np.ndarray
    exponent: int
    domain_exp: int
    resolution_exp: int


def integer_field(f: StepFunction) -> IntegerField:
    """Lift a step function to integer planes, or refuse if it cannot fit.

    The butterfly doubles magnitudes once per level, so headroom for
    J + m doublings inside int64 is required up front.
    """
    try:
        rat, surd, e = f.integer_lift()
    except ValueError as exc:
        raise KernelUnsupported(str(exc)) from exc
    levels = f.domain_exp + f.resolution_exp
    limit = 1 << (_INT64_GUARD - levels)
    if any(abs(v) >= limit for v in rat) or any(abs(v) >= limit for v in surd):
        raise KernelUnsupported("cell values too large for int64 butterflies")
    return IntegerField(
        np.array(rat, dtype=np.int64),
        np.array(surd, dtype=np.int64),
        e,
        f.domain_exp,
        f.resolution_exp,
    )


def _butterfly_levels(plane: np.ndarray, levels: int) -> list[np.ndarray]:
    """All butterfly stages of one integer plane.

    Stage t lays out, for each time interval of 2^t cells, the
    unnormalised pairings with every packet over that interval: entry
    n 2^t + b belongs to interval n and frequency index b.  Sums go to
    even slots and differences to odd ones, matching the doubling rules
    for Walsh indices.
    """
    tables = [plane.copy()]
    current = plane
    for t in range(levels):
        block = 1 << t
        pairs = current.reshape(-1, 2, block)
        nxt = np.empty((pairs.shape[0], 2 * block), dtype=np.int64)
        nxt[:, 0::2] = pairs[:, 0, :] + pairs[:, 1, :]
        nxt[:, 1::2] = pairs[:, 0, :] - pairs[:, 1, :]
        current = nxt.reshape(-1)
        tables.append(current)
    return tables


class WalshTables:
    """Exact packet coefficients of one step function, all at once."""

    __slots__ = ("field", "rat_tables", "surd_tables")

    def __init__(self, field: IntegerField) -> None:
        levels = field.domain_exp + field.resolution_exp
        object.__setattr__(self, "field", field)
        object.__setattr__(
            self, "rat_tables", _butterfly_levels(field.rat, levels)
        )
        object.__setattr__(
            self, "surd_tables", _butterfly_levels(field.surd, levels)
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("WalshTables is immutable")

    def coefficient(self, tile: Tile) -> QuadScalar:
        """Read one packet pairing back as an exact scalar."""
        field = self.field
        t = tile.time.scale + field.resolution_exp
        if not 0 <= t <= field.domain_exp + field.resolution_exp:
            raise KernelUnsupported("tile time scale outside the table range")
        if tile.time.index >= 1 << (field.domain_exp - tile.time.scale):
            raise KernelUnsupported("tile sits outside the grid box")
        b = tile.freq_index
        if b.bit_length() > t:
            raise ResolutionTooCoarse("tile oscillates below the cell width")
        slot = (tile.time.index << t) + b
        u_r = int(self.rat_tables[t][slot])
        u_s = int(self.surd_tables[t][slot])
        half = field.resolution_exp + t
        if half % 2 == 0:
            unit = Fraction(1, 1 << (field.exponent + half // 2))
            return QuadScalar(u_r * unit, u_s * unit)
        unit = Fraction(1, 1 << (field.exponent + (half + 1) // 2))
        return QuadScalar(2 * u_s * unit, u_r * unit)


def walsh_tables(f: StepFunction) -> WalshTables:
    return WalshTables(integer_field(f))


def render_packet_row(
    tile: Tile, domain_exp: int, resolution_exp: int
) -> np.ndarray:
    """Float samples of a tile's packet on the grid cells."""
    s = tile.freq_index.bit_length()
    if s > tile.time.scale + resolution_exp:
        raise ResolutionTooCoarse("tile oscillates below the cell width")
    total = 1 << (domain_exp + resolution_exp)
    out = np.zeros(total, dtype=np.float64)
    pattern = np.array(walsh_sign_pattern(tile.freq_index), dtype=np.float64)
    width = 1 << (tile.time.scale + resolution_exp - s)
    lo, hi = tile.time.cell_range(resolution_exp)
    row = np.repeat(pattern, width) * 2.0 ** (-tile.time.scale / 2.0)
    a, b = max(lo, 0), min(hi, total)
    out[a:b] = row[a - lo : b - lo]
    return out


def render_partial_sum_field(
    terms: Iterable[tuple[Quartile, float]],
    subtile_index: int,
    domain_exp: int,
    resolution_exp: int,
) -> np.ndarray:
    """Truncated sums of packet terms, one row per truncation scale.

    Row j holds the sum of all terms whose quartile time interval is
    strictly longer than 2^k, k = j - resolution_exp; the last row
    (k = domain_exp) is identically zero and anchors variation chains.
    """
    n_scales = domain_exp + resolution_exp + 1
    total = 1 << (domain_exp + resolution_exp)
    per_scale = np.zeros((n_scales, total), dtype=np.float64)
    for quartile, coeff in terms:
        c = float(coeff)
        if c == 0.0:
            continue
        row = quartile.time.scale + resolution_exp
        per_scale[row] += c * render_packet_row(
            quartile.tile(subtile_index), domain_exp, resolution_exp
        )
    suffix = np.cumsum(per_scale[::-1], axis=0)[::-1]
    field = np.vstack([suffix[1:], np.zeros((1, total))])
    return field


def batch_variation(field: np.ndarray, r: float) -> np.ndarray:
    """r-variation down each column of a (scales, cells) field.

    The chain recursion runs vectorised over all cells; quadratic in
    the number of scales, which stays small on any usable grid.
    """
    t, _ = field.shape
    if r == math.inf:
        return np.max(field, axis=0) - np.min(field, axis=0)
    if r < 1:
        raise ValueError("variation exponent must be at least 1")
    suffix = np.zeros_like(field)
    for i in range(t - 2, -1, -1):
        gains = np.abs(field[i + 1 :] - field[i]) ** r + suffix[i + 1 :]
        suffix[i] = np.max(gains, axis=0)
    powers = np.max(suffix, axis=0)
    return powers ** (1.0 / r)


def batch_sup(field: np.ndarray) -> np.ndarray:
    """Largest |entry| down each column of a (scales, cells) field."""
    return np.max(np.abs(field), axis=0)
