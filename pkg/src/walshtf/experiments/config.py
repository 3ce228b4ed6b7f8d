"""Run configuration shared by every experiment driver."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ..errors import ConfigError

_REL_TOL = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """Exponents, grid shape and trial budget of one experiment run.

    r drives the variation norms and must exceed 2.  p1, p2 and q are
    the outer Lebesgue exponents, tied by 1/q = 1/p1 + 1/p2 with q
    above 2/3.  maximal_exp is the exponent of the maximal averages
    used to carve exceptional sets and cap sizes; it must exceed 1 and
    sit close to it for the restricted runs to make sense.  beta is the
    triple steering the per-function selection thresholds, each entry
    in [0, 1] and the sum above twice maximal_exp.  grid_j and grid_m
    fix the dyadic box [0, 2^grid_j) at cell width 2^-grid_m.
    """

    r: float = 3.0
    p1: float = 4.0
    p2: float = 4.0
    q: float = 2.0
    maximal_exp: float = 1.25
    epsilon: float = 0.5
    beta: tuple[float, float, float] = (1.0, 1.0, 0.75)
    trials: int = 100
    seed: int = 0
    grid_j: int = 3
    grid_m: int = 5

    def __post_init__(self) -> None:
        if self.r <= 2:
            raise ConfigError(f"variation exponent r must exceed 2, got {self.r}")
        if min(self.p1, self.p2) <= 0:
            raise ConfigError("p1 and p2 must be positive")
        if not 2.0 / 3.0 < self.q:
            raise ConfigError(f"q must exceed 2/3, got {self.q}")
        relation = 1.0 / self.p1 + 1.0 / self.p2
        if abs(relation - 1.0 / self.q) > _REL_TOL * max(1.0, abs(relation)):
            raise ConfigError(
                f"exponents must satisfy 1/q = 1/p1 + 1/p2; "
                f"got 1/q = {1.0 / self.q}, 1/p1 + 1/p2 = {relation}"
            )
        if self.maximal_exp <= 1:
            raise ConfigError(
                f"maximal exponent must exceed 1, got {self.maximal_exp}"
            )
        if len(self.beta) != 3 or any(not 0 <= b <= 1 for b in self.beta):
            raise ConfigError("beta must be three entries in [0, 1]")
        if sum(self.beta) <= 2 * self.maximal_exp:
            raise ConfigError(
                f"beta entries must sum above {2 * self.maximal_exp}, "
                f"got {sum(self.beta)}"
            )
        if self.trials < 1:
            raise ConfigError("at least one trial is required")
        if self.grid_j < 0 or self.grid_m < 2:
            raise ConfigError("grid needs grid_j >= 0 and grid_m >= 2")
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def gammas(self) -> tuple[float, float, float]:
        """Selection threshold exponents derived from beta."""
        total = sum(self.beta)
        return tuple(2 * self.maximal_exp * b / total for b in self.beta)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        """A copy with the given fields replaced; the copy revalidates."""
        return replace(self, **kwargs)

    def to_json(self) -> dict:
        data = asdict(self)
        data["beta"] = list(self.beta)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "beta" in known:
            known["beta"] = tuple(known["beta"])
        return cls(**known)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(data)
