"""Finite sample pools standing in for distributions on ``[0, inf)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Number of quantile levels used by :func:`dominates`.
DOMINANCE_GRID = 1000


@dataclass(frozen=True, eq=False)
class EmpiricalDist:
    """Sorted pool of nonnegative samples.  Build it with :func:`make_pool`."""

    samples: np.ndarray

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @property
    def noise_floor(self) -> float:
        """Kolmogorov sampling-noise scale ``1.36 / sqrt(size)`` (95% one-sample KS)."""
        return 1.36 / math.sqrt(self.size)

    def mean(self) -> float:
        return float(self.samples.mean())

    def cdf(self, t) -> np.ndarray:
        return np.searchsorted(self.samples, t, side="right") / self.size

    def positive_part(self) -> "EmpiricalDist":
        return make_pool(self.samples[self.samples > 0])

    def __len__(self) -> int:
        return self.size

    def to_csv(self, path) -> None:
        Path(path).write_text("".join(f"{x!r}\n" for x in self.samples.tolist()))

    @classmethod
    def from_csv(cls, path) -> "EmpiricalDist":
        return make_pool([float(line) for line in Path(path).read_text().split()])


def make_pool(values) -> EmpiricalDist:
    arr = np.array(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("a pool needs at least one sample")
    if np.isnan(arr).any():
        raise ValueError("pool contains NaN")
    if (arr < 0).any():
        raise ValueError("pool samples must be nonnegative")
    arr.sort()
    arr.flags.writeable = False
    return EmpiricalDist(arr)


def zeros_pool(size: int) -> EmpiricalDist:
    return make_pool(np.zeros(size))


def kolmogorov_distance(a: EmpiricalDist, b: EmpiricalDist) -> float:
    """``sup_t |F_a(t) - F_b(t)|``, evaluated at every sample point of either pool."""
    pts = np.concatenate((a.samples, b.samples))
    return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))


def quantile(a: EmpiricalDist, q) -> float:
    """Lower order-statistic quantile: ``samples[floor(q * (size - 1))]``."""
    q_arr = np.asarray(q, dtype=float)
    if np.any((q_arr < 0) | (q_arr > 1)):
        raise ValueError("quantile level must lie in [0, 1]")
    idx = np.floor(q_arr * (a.size - 1)).astype(int)
    out = a.samples[idx]
    return float(out) if out.ndim == 0 else out


def dominates(a: EmpiricalDist, b: EmpiricalDist, slack: float = 0.0, grid: int = DOMINANCE_GRID) -> bool:
    """True iff ``b`` stochastically dominates ``a`` up to ``slack``.

    Checked on quantiles: ``q_b(u) >= q_a(u) - slack`` for ``grid`` levels
    ``u`` spread over ``[0, 1]``.
    """
    levels = np.linspace(0.0, 1.0, grid)
    return bool(np.all(quantile(b, levels) >= quantile(a, levels) - slack))


def atom_at_zero(a: EmpiricalDist) -> float:
    # samples are sorted and nonnegative, so the zeros form a prefix; written as
    # a complement so that it equals 1 - P(sample > 0) bit for bit
    positive = a.size - int(np.searchsorted(a.samples, 0.0, side="right"))
    return 1.0 - positive / a.size
