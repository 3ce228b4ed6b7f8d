"""Report containers and the deterministic CSV they serialize to."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ..exact import DyadicRational, QuadScalar


def format_value(value) -> str:
    """Render one cell deterministically.

    Floats go through repr, which is the shortest round-trip form and
    stable across platforms; exact scalars use their text form.
    """
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (QuadScalar, DyadicRational)):
        return value.to_text()
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def median(values: Sequence[float]) -> float:
    if not values:
        return math.nan
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def trend_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least squares slope of ys against xs; zero for degenerate input."""
    n = len(xs)
    if n != len(ys) or n < 2:
        return 0.0
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        return 0.0
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


@dataclass(frozen=True)
class ExperimentReport:
    """Per-trial rows plus an ordered summary, reproducible from the seed.

    A column named "ok" marks pass/fail rows; failure_count counts the
    rows where it is falsy.  Reports with identical inputs serialize to
    identical bytes.
    """

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    summary: tuple[tuple[str, object], ...] = ()

    @property
    def failure_count(self) -> int:
        if "ok" not in self.columns:
            return 0
        at = self.columns.index("ok")
        return sum(1 for row in self.rows if not row[at])

    def column(self, name: str) -> list:
        at = self.columns.index(name)
        return [row[at] for row in self.rows]

    def summary_value(self, key: str):
        for k, v in self.summary:
            if k == key:
                return v
        raise KeyError(key)

    def to_csv(self) -> str:
        lines = [f"# report: {self.name}"]
        for key, value in self.summary:
            lines.append(f"# {key} = {format_value(value)}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())
