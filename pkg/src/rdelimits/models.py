"""Graph models and the branching structure they induce on local trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Offspring:
    """Number of children per tree node: a fixed count or ``Poisson(rate)``."""

    poisson: bool
    value: float

    @classmethod
    def fixed(cls, k: int) -> "Offspring":
        if k < 0 or int(k) != k:
            raise ValueError(f"fixed offspring count must be a nonnegative integer, got {k}")
        return cls(False, int(k))

    @classmethod
    def pois(cls, c: float) -> "Offspring":
        if not c > 0:
            raise ValueError(f"Poisson rate must be positive, got {c}")
        return cls(True, float(c))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.poisson:
            return rng.poisson(self.value, n)
        return np.full(n, int(self.value), dtype=np.int64)

    @property
    def mean(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"Poisson({self.value:g})" if self.poisson else f"Fixed({int(self.value)})"


@dataclass(frozen=True)
class Model:
    """``regular`` (param r), ``poisson`` (G(n, c/n), param c) or ``cycle``."""

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("regular", "poisson", "cycle"):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind == "regular" and (self.param < 1 or int(self.param) != self.param):
            raise ValueError(f"regular degree must be a positive integer, got {self.param}")
        if self.kind == "poisson" and not self.param > 0:
            raise ValueError(f"Poisson mean degree must be positive, got {self.param}")

    @property
    def r(self) -> int:
        return 2 if self.kind == "cycle" else int(self.param)

    @property
    def offspring(self) -> Offspring:
        """Children of a non-root node in the local tree."""
        if self.kind == "poisson":
            return Offspring.pois(self.param)
        return Offspring.fixed(self.r - 1)

    @property
    def root_degree(self) -> Offspring:
        if self.kind == "poisson":
            return Offspring.pois(self.param)
        return Offspring.fixed(self.r)

    def __str__(self) -> str:
        if self.kind == "cycle":
            return "cycle"
        if self.kind == "regular":
            return f"regular:{int(self.param)}"
        c = float(self.param)
        return f"poisson:{int(c)}" if c.is_integer() else f"poisson:{c!r}"


def parse_model(text: str) -> Model:
    name, _, arg = text.strip().lower().partition(":")
    if name == "cycle":
        return Model("cycle")
    if name in ("regular", "poisson"):
        if not arg:
            raise ValueError(f"model {name!r} needs a parameter, e.g. {name}:3")
        return Model(name, float(arg))
    raise ValueError(f"unknown model {text!r}")
