"""Weight laws for nodes and edges.

Bernoulli weights are parameterized by ``z``, the probability mass AT ZERO:
``BernoulliAtomAtZero(z)`` puts mass ``z`` on 0 and ``1 - z`` on 1 (times
``scale``).  This is the opposite of the usual "success probability" and is
the convention used by every closed form in :mod:`rdelimits.closedform`.

The population-dynamics engine only needs :func:`sample_weight` and
:func:`sample_max_weight`, so a new law can be added by extending
:class:`WeightKind` and the three functions below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class WeightKind(enum.Enum):
    EXPONENTIAL = "exp"
    BERNOULLI = "bernoulli"
    ONE = "one"
    POINT_MASS = "point"


@dataclass(frozen=True)
class WeightSpec:
    """A weight law ``F_w``.

    ``param`` is ``z`` (mass at zero) for Bernoulli and the atom location for
    point masses; it is ignored otherwise.
    """

    kind: WeightKind = WeightKind.EXPONENTIAL
    param: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind is WeightKind.BERNOULLI and not 0.0 <= self.param <= 1.0:
            raise ValueError(f"Bernoulli mass at zero must lie in [0, 1], got {self.param}")
        if self.kind is WeightKind.POINT_MASS and self.param < 0:
            raise ValueError(f"point mass location must be nonnegative, got {self.param}")

    @classmethod
    def exponential(cls, scale: float = 1.0) -> "WeightSpec":
        return cls(WeightKind.EXPONENTIAL, 0.0, scale)

    @classmethod
    def bernoulli(cls, z: float, scale: float = 1.0) -> "WeightSpec":
        return cls(WeightKind.BERNOULLI, float(z), scale)

    @classmethod
    def one(cls) -> "WeightSpec":
        return cls(WeightKind.ONE)

    @classmethod
    def point_mass(cls, v: float) -> "WeightSpec":
        return cls(WeightKind.POINT_MASS, float(v))

    @property
    def is_continuous(self) -> bool:
        return self.kind is WeightKind.EXPONENTIAL

    def __str__(self) -> str:
        if self.kind is WeightKind.EXPONENTIAL:
            base = "exp"
        elif self.kind is WeightKind.BERNOULLI:
            base = f"bernoulli:{self.param:g}"
        elif self.kind is WeightKind.ONE:
            base = "one"
        else:
            base = f"point:{self.param:g}"
        return base if self.scale == 1.0 else f"{base}*{self.scale:g}"


def parse_weight(text: str) -> WeightSpec:
    """Parse ``exp``, ``bernoulli:0.25``, ``one`` or ``point:2``, optionally ``*scale``."""
    text = text.strip().lower()
    scale = 1.0
    if "*" in text:
        text, s = text.split("*", 1)
        scale = float(s)
    name, _, arg = text.partition(":")
    if name in ("exp", "exponential"):
        return WeightSpec.exponential(scale)
    if name in ("bernoulli", "be"):
        if not arg:
            raise ValueError("bernoulli weight needs a mass at zero, e.g. bernoulli:0.25")
        return WeightSpec.bernoulli(float(arg), scale)
    if name in ("one", "deterministic"):
        return WeightSpec(WeightKind.ONE, 0.0, scale)
    if name == "point":
        return WeightSpec(WeightKind.POINT_MASS, float(arg), scale)
    raise ValueError(f"unknown weight law {text!r}")


def sample_weight(spec: WeightSpec, rng: np.random.Generator, size=None):
    """Draw from ``F_w``; a scalar when ``size`` is None, else an array."""
    shape = () if size is None else size
    if spec.kind is WeightKind.EXPONENTIAL:
        out = rng.standard_exponential(shape)
    elif spec.kind is WeightKind.BERNOULLI:
        out = (rng.random(shape) >= spec.param).astype(float)
    elif spec.kind is WeightKind.ONE:
        out = np.ones(shape)
    else:
        out = np.full(shape, spec.param)
    out = out * spec.scale
    return float(out) if size is None else out


def weight_cdf(spec: WeightSpec, t: float) -> float:
    """Exact ``P(W <= t)``."""
    if t < 0:
        return 0.0
    u = t / spec.scale
    if spec.kind is WeightKind.EXPONENTIAL:
        return -math.expm1(-u)
    if spec.kind is WeightKind.BERNOULLI:
        return 1.0 if u >= 1.0 else spec.param
    if spec.kind is WeightKind.ONE:
        return 1.0 if u >= 1.0 else 0.0
    return 1.0 if t >= spec.param * spec.scale else 0.0


def sample_max_weight(spec: WeightSpec, k, rng: np.random.Generator, size=None):
    """Maximum of ``k`` independent draws, 0 for ``k == 0``.

    ``k`` may be an integer array of the requested ``size`` (one count per
    draw), which is how the Poisson matching bracket ``F_{w,c}`` is sampled.
    """
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("k must be nonnegative")
    if size is None and k_arr.ndim == 0:
        kk = int(k_arr)
        if kk == 0:
            return 0.0
        return float(np.max(sample_weight(spec, rng, kk)))
    shape = size if size is not None else k_arr.shape
    counts = np.broadcast_to(k_arr, shape).ravel()
    total = int(counts.sum())
    draws = sample_weight(spec, rng, total)
    out = np.zeros(counts.size)
    nz = counts > 0
    if total:
        offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
        out[nz] = np.maximum.reduceat(draws, offsets[nz])
    return out.reshape(shape)
