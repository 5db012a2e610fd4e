"""Scalar fixed-point equations and limit values for special weight laws.

For exponential weights every fixed point of the bonus recursion is an atom
at zero plus an Exp(1) tail, so the whole distribution is summarised by one
number ``b``.  The functions here solve the resulting scalar equations by
bisection on ``[0, 1]``, decide uniqueness, and evaluate the per-node limits.

Matching limits are evaluated from the expectation form (half the expected
weight of the best edge at a root, over the explicit bonus law) by
quadrature.  The closed two-integral expressions are kept as
``*_two_integral`` functions so their values can be compared; the regular
one gives 64/81 instead of 2/3 at ``r = 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

#: Bisection tolerance on ``[0, 1]``.
XTOL = 1e-12
#: Absolute quadrature tolerance.
QUAD_EPS = 1e-9
ITERATIONS = 20_000
#: Value quoted elsewhere for the r = 4 independent-set limit; the formula gives about 0.5631.
REPORTED_IND_REGULAR_4 = 0.4974


class NonUniqueRegime(ValueError):
    """The requested limit needs a unique fixed point and there is none."""


@dataclass(frozen=True)
class ScalarSolution:
    """Root ``b`` of ``b = f(b)`` on ``[0, 1]``.

    ``cycle`` holds the ends of ``f o f`` iterated from 0 and from 1; when they
    differ, ``companion`` is the upper end (the image of the lower one) and the
    fixed point of ``f o f`` is not unique.
    """

    b: float
    unique: bool
    residual: float
    cycle: tuple = ()
    companion: float | None = None

    @property
    def iteration_gap(self) -> float:
        return abs(self.cycle[1] - self.cycle[0]) if self.cycle else 0.0


@dataclass(frozen=True)
class LimitValues:
    b: float
    weight_limit: float
    cardinality_limit: float


@dataclass(frozen=True)
class KarpSipserConstants:
    gamma_star: float
    gamma_star_star: float
    matching_limit: float
    indset_limit: float | None
    #: ``(2 gamma + gamma^2) / 2``; equals ``indset_limit`` only at ``c = 1``.
    indset_limit_without_c: float | None


@dataclass(frozen=True)
class BernoulliFixedPoint:
    p: float
    unique: bool
    cycle: tuple = ()


def _bisect_fixed_point(f, lo: float = 0.0, hi: float = 1.0) -> float:
    g = lambda x: f(x) - x
    if g(lo) == 0.0:
        return lo
    if g(hi) == 0.0:
        return hi
    return optimize.bisect(g, lo, hi, xtol=XTOL, maxiter=200)


def _iterate_twice(f, x: float, n: int = ITERATIONS) -> float:
    for _ in range(n):
        nxt = f(f(x))
        if abs(nxt - x) < 1e-15:
            return nxt
        x = nxt
    return x


def _solve(f, unique: bool, cycle_tol: float = 1e-6) -> ScalarSolution:
    b = _bisect_fixed_point(f)
    lo = _iterate_twice(f, 0.0)
    hi = _iterate_twice(f, 1.0)
    companion = None
    if not unique and hi - lo > cycle_tol:
        companion = f(lo)
    return ScalarSolution(b, unique, f(b) - b, (lo, hi), companion)


# -- independent sets -------------------------------------------------------


def solve_b_ind_regular(r: int) -> ScalarSolution:
    """Atom at zero of the bonus law on ``r``-regular graphs: ``b = 1 - ((1+b)/2)^(r-1)``."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return _solve(lambda b: 1.0 - ((1.0 + b) / 2.0) ** (r - 1), unique=r <= 4)


def limit_ind_regular(r: int) -> LimitValues:
    sol = solve_b_ind_regular(r)
    if not sol.unique:
        raise NonUniqueRegime(f"no unique fixed point for r = {r} (needs r <= 4)")
    b = sol.b
    weight = (1 - b) * (r - r * b + 2 * b + 2) / 4
    return LimitValues(b, weight, ((1 + b) / 2) ** r)


def solve_b_ind_poisson(c: float) -> ScalarSolution:
    """``1 - b = exp(-c (1 - b) / 2)``; unique iff ``c <= 2e``."""
    if not c > 0:
        raise ValueError("c must be positive")
    return _solve(lambda b: -math.expm1(-c * (1.0 - b) / 2.0), unique=c <= 2 * math.e)


def limit_ind_poisson(c: float) -> LimitValues:
    sol = solve_b_ind_poisson(c)
    if not sol.unique:
        raise NonUniqueRegime(f"no unique fixed point for c = {c} (needs c <= 2e)")
    y = 1.0 - sol.b
    return LimitValues(sol.b, y * (1 + c * y / 4), y)


# -- matchings --------------------------------------------------------------


def _geometric_sum(x: float, r: int) -> float:
    return sum(x**i for i in range(r))


def solve_b_match_regular(r: int) -> ScalarSolution:
    """``b = 1 - (1 - b^r) / (r (1 - b))``; always unique."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return _solve(lambda b: 1.0 - _geometric_sum(b, r) / r, unique=True)


def _quad(fn) -> float:
    val, _ = integrate.quad(fn, 0.0, 1.0, epsabs=QUAD_EPS * 1e-3, epsrel=1e-12, limit=200)
    return val


def _best_edge_weight(p_zero: float, tail, density_u) -> float:
    """``E[W 1{W > B} G(W - B)]`` for ``W ~ Exp(1)`` and an atom-plus-density bonus ``B``.

    Writing ``s = W - B`` and ``u = e^{-s}``, the inner integral splits into
    ``A + B C`` with ``A = int -ln(u) G du`` and ``C = int G du``.  ``tail(u)`` is
    ``G`` at ``s = -ln u``; ``density_u(u)`` is the bonus density times
    ``e^{-t}`` at ``t = -ln u``, divided by ``u`` (the Jacobian).
    """
    a = _quad(lambda u: -math.log(u) * tail(u) if u > 0 else 0.0)
    cc = _quad(tail)
    e1 = p_zero + _quad(lambda u: u * density_u(u))
    e2 = _quad(lambda u: -math.log(u) * u * density_u(u) if u > 0 else 0.0)
    return a * e1 + cc * e2


def limit_match_regular(r: int) -> LimitValues:
    """Per-node maximum-weight matching on ``r``-regular graphs, Exp(1) edge weights."""
    b = solve_b_match_regular(r).b
    x = 1.0 - b
    # P(B <= t) = (1 - x e^{-t})^(r-1); the other r - 1 edges lose iff each margin < s
    tail = lambda u: (1.0 - x * u) ** (r - 1)
    dens = lambda u: (r - 1) * x * (1.0 - x * u) ** (r - 2)
    weight = 0.5 * r * _best_edge_weight(b ** (r - 1), tail, dens)
    return LimitValues(b, weight, 0.5 * (1.0 - b**r))


def limit_match_regular_two_integral(r: int) -> float:
    """The closed two-integral expression ``r (b^{r-1}+1) I_{r-1} - r I_{2r-2}``.

    ``I_k = int_0^inf t e^{-t} (1 - e^{-t}(1-b))^k dt``.  Kept for comparison;
    it does not agree with :func:`limit_match_regular`.
    """
    b = solve_b_match_regular(r).b
    x = 1.0 - b

    def moment(k):
        return _quad(lambda u: -math.log(u) * (1.0 - x * u) ** k if u > 0 else 0.0)

    return r * (b ** (r - 1) + 1) * moment(r - 1) - r * moment(2 * r - 2)


def solve_b_match_poisson(c: float) -> ScalarSolution:
    """``b = 1 - x`` with ``x`` the root in (0, 1) of ``exp(-c x) + c x^2 - 1 = 0``.

    Equivalently ``1 - b`` is the fixed point of ``x -> (1 - e^{-cx}) / (cx)``.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    h = lambda x: math.expm1(-c * x) + c * x * x
    # h < 0 just right of 0 (slope -c + O(x)) and h(1) = e^{-c} + c - 1 > 0
    lo = min(0.5, 1.0 / c) * 1e-3
    while h(lo) >= 0:
        lo /= 2
    x = optimize.bisect(h, lo, 1.0, xtol=XTOL, maxiter=200)
    f = lambda bb: 1.0 - (-math.expm1(-c * (1 - bb)) / (c * (1 - bb)) if bb < 1 else 1.0)
    lo_it = _iterate_twice(f, 0.0)
    hi_it = _iterate_twice(f, 1.0 - 1e-12)
    return ScalarSolution(1.0 - x, True, h(x), (lo_it, hi_it))


def match_poisson_b_variants(c: float) -> dict:
    """Roots of the two competing forms of the Poisson matching equation.

    ``exp_c_one_minus_b``: ``e^{-c(1-b)} + c(1-b)^2 = 1`` (what the fixed point satisfies);
    ``exp_cb``: ``1 - e^{-cb} = c(1-b)^2``.
    """
    alt = lambda b: -math.expm1(-c * b) - c * (1 - b) ** 2
    return {
        "exp_c_one_minus_b": solve_b_match_poisson(c).b,
        "exp_cb": optimize.bisect(alt, 0.0, 1.0, xtol=XTOL),
    }


def limit_match_poisson(c: float) -> LimitValues:
    """Per-node maximum-weight matching on G(n, c/n), Exp(1) edge weights."""
    b = solve_b_match_poisson(c).b
    x = 1.0 - b
    # P(B <= t) = exp(-c x e^{-t}); m - 1 other edges are again Poisson(c)
    tail = lambda u: math.exp(-c * x * u)
    dens = lambda u: c * x * math.exp(-c * x * u)
    weight = 0.5 * c * _best_edge_weight(math.exp(-c * x), tail, dens)
    return LimitValues(b, weight, -0.5 * math.expm1(-c * x))


def limit_match_poisson_two_integral(c: float, b: float | None = None) -> float:
    """``(c/2)(e^{cb-c}+1) int t e^{-t-c(1-b)e^{-t}} - (c/2) int t e^{-t-2c(1-b)e^{-t}+c(1-b)^2 e^{-2t}}``."""
    if b is None:
        b = solve_b_match_poisson(c).b
    x = 1.0 - b
    first = _quad(lambda u: -math.log(u) * math.exp(-c * x * u) if u > 0 else 0.0)
    second = _quad(lambda u: -math.log(u) * math.exp(-2 * c * x * u + c * x * x * u * u) if u > 0 else 0.0)
    return 0.5 * c * (math.exp(c * b - c) + 1) * first - 0.5 * c * second


# -- unweighted / discrete weights -----------------------------------------


def _smallest_fixed_point(h, grid: int = 20_000) -> float:
    xs = np.linspace(0.0, 1.0, grid + 1)
    vals = np.array([h(x) - x for x in xs])
    hit = np.flatnonzero(vals <= 0)
    k = int(hit[0])
    if vals[k] == 0.0:
        return float(xs[k])
    return optimize.bisect(lambda x: h(x) - x, xs[k - 1], xs[k], xtol=XTOL, maxiter=200)


def karp_sipser_constants(c: float) -> KarpSipserConstants:
    """Leaf-removal constants for G(n, c/n).

    ``gamma*`` is the smallest root of ``x = exp(-c exp(-c x))``, ``gamma** = exp(-c gamma*)``.
    The independent-set ratio is only given for ``c <= e``, where the root is
    unique; it is ``1 - matching_limit = (2 gamma + c gamma^2) / 2`` because every
    leaf-removal step covers one matched edge with one node.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    h = lambda x: math.exp(-c * math.exp(-c * x))
    if c <= math.e:
        # the unique root also solves x = e^{-cx}, a simple root; x = h(x) is
        # tangent at c = e and bisection on it loses half the digits
        g1 = _bisect_fixed_point(lambda x: math.exp(-c * x))
    else:
        g1 = _smallest_fixed_point(h)
    g2 = math.exp(-c * g1)
    matching = 1.0 - (g1 + g2 + c * g1 * g2) / 2.0
    ind = ind_plain = None
    if c <= math.e:
        ind = (2 * g1 + c * g1 * g1) / 2.0
        ind_plain = (2 * g1 + g1 * g1) / 2.0
    return KarpSipserConstants(g1, g2, matching, ind, ind_plain)


def bernoulli_fixed_points_r3(z: float) -> BernoulliFixedPoint:
    """Fixed point ``P(B = 0) = p`` on 3-regular graphs with weights 0 w.p. ``z`` and 1 otherwise.

    ``p = (sqrt(5 - 4z) - 1) / (2 (1 - z)) = 2 / (sqrt(5 - 4z) + 1)``, which is
    continuous at ``z = 1`` with ``p = 1``.  Unique iff ``z >= 1/4``.
    """
    if not 0.0 <= z <= 1.0:
        raise ValueError("z must lie in [0, 1]")
    p = 2.0 / (math.sqrt(5.0 - 4.0 * z) + 1.0)
    unique = z >= 0.25
    f = lambda x: 1.0 - (1.0 - z) * x * x
    cycle = () if unique else (_iterate_twice(f, 0.0), _iterate_twice(f, 1.0))
    return BernoulliFixedPoint(p, unique, cycle)


def deterministic_poisson_fixed_point(c: float) -> BernoulliFixedPoint:
    """Unit weights on G(n, c/n): ``1 - p = exp(-c (1 - p))``, unique iff ``c <= e``."""
    if not c > 0:
        raise ValueError("c must be positive")
    f = lambda p: -math.expm1(-c * (1.0 - p))
    p = _bisect_fixed_point(f)
    unique = c <= math.e
    lo, hi = _iterate_twice(f, 0.0), _iterate_twice(f, 1.0)
    return BernoulliFixedPoint(p, unique, (lo, hi))
