"""Asymptotic density evolution of SIC decoding under K-packet reception.

With an infinite frame at load ``G`` the slot degrees seen from an edge are
Poisson, and one SIC iteration maps the probability ``p`` that an edge is
still unresolved to

    p' = 1 - exp(-x) * sum_{k<K} x^k / k!,    x = G * Lambda'(p),

i.e. the probability that a Poisson(x) variable is at least ``K``.
Iterating from ``p = 1`` converges to the largest fixed point ``p*``; the
asymptotic packet loss rate is ``Lambda(p*)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .degree import DegreeDistribution
from .errors import BracketError, ConfigError, DomainError

TOL = 1e-12
MAX_ITERS = 100_000
DECODE_TOL = 1e-6
BISECTION_STEPS = 60
CERT_GRID = 10_000
CERT_REFINE_STEPS = 50


@dataclass(frozen=True)
class EvolutionParams:
    load: float
    K: int
    dist: DegreeDistribution

    def __post_init__(self) -> None:
        if not self.load > 0:
            raise ConfigError(f"load must be positive, got {self.load!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K!r}")


@dataclass(frozen=True)
class EvolutionTrace:
    p_values: tuple[float, ...]
    converged: bool
    iterations: int

    @property
    def final(self) -> float:
        return self.p_values[-1]


@dataclass(frozen=True)
class FixedPointReport:
    p_star: float
    plr: float
    decodable: bool
    converged: bool
    iterations: int


def poisson_tail(x: float, K: int) -> float:
    """P[Poisson(x) >= K], computed without cancellation for small ``x``."""
    if x <= 0.0:
        return 0.0
    if K == 1:
        return -math.expm1(-x)
    if x < K:
        # upper tail as a series: terms decay at least geometrically here
        term = math.exp(-x)
        for k in range(1, K + 1):
            term *= x / k
        total = 0.0
        k = K
        while term > total * 1e-17:
            total += term
            k += 1
            term *= x / k
        return min(total, 1.0)
    term = 1.0
    head = 0.0
    for k in range(K):
        head += term
        term *= x / (k + 1)
    return min(max(1.0 - math.exp(-x) * head, 0.0), 1.0)


def de_step(p: float, params: EvolutionParams) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    x = params.load * params.dist._derivative_unchecked(p)
    return poisson_tail(x, params.K)


def residual(p: float, params: EvolutionParams) -> float:
    """``p - de_step(p)``; positive means SIC keeps making progress at ``p``."""
    return p - de_step(p, params)


def stop_function_k2(p: float, params: EvolutionParams) -> float:
    """Log-form of the K=2 fixed-point equation.

    ``f(p) = x - ln(1 + x) + ln(1 - p)`` with ``x = G Lambda'(p)``. Its sign is
    opposite to that of :func:`residual`, so ``f < 0`` on (0, 1) certifies that
    no nonzero fixed point exists.
    """
    if params.K != 2:
        raise ConfigError(f"stop_function_k2 requires K=2, got K={params.K}")
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p!r}")
    x = params.load * params.dist._derivative_unchecked(p)
    return x - math.log1p(x) + math.log1p(-p)


def run_evolution(params: EvolutionParams, max_iters: int = MAX_ITERS,
                  tol: float = TOL) -> EvolutionTrace:
    if max_iters < 1:
        raise ConfigError("max_iters must be >= 1")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    load, K = params.load, params.K
    dprime = params.dist._derivative_unchecked
    p = 1.0
    values = [p]
    converged = False
    for _ in range(max_iters):
        nxt = poisson_tail(load * dprime(p), K)
        values.append(nxt)
        if abs(nxt - p) < tol:
            converged = True
            p = nxt
            break
        p = nxt
    return EvolutionTrace(tuple(values), converged, len(values) - 1)


def largest_root(params: EvolutionParams, max_iters: int = MAX_ITERS, tol: float = TOL,
                 decode_tol: float = DECODE_TOL) -> FixedPointReport:
    trace = run_evolution(params, max_iters, tol)
    p_star = trace.final
    return FixedPointReport(
        p_star=p_star,
        plr=params.dist.evaluate(p_star),
        decodable=p_star < decode_tol,
        converged=trace.converged,
        iterations=trace.iterations,
    )


def is_decodable(dist: DegreeDistribution, K: int, load: float, **kw) -> bool:
    return largest_root(EvolutionParams(load, K, dist), **kw).decodable


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    lower: float
    upper: float
    steps: int
    iterations_lower: int
    iterations_upper: int


def threshold_bisection(dist: DegreeDistribution, K: int, g_tol: float = 1e-4,
                        g_lo: float = 1e-3, g_hi: float | None = None,
                        max_steps: int = BISECTION_STEPS) -> ThresholdResult:
    """Bisection on the load with decodability as the (monotone) predicate."""
    if not g_tol > 0:
        raise ConfigError("g_tol must be positive")
    hi = float(K) if g_hi is None else float(g_hi)
    lo = float(g_lo)
    if not 0 < lo < hi:
        raise ConfigError(f"invalid bracket [{lo}, {hi}]")
    rep_lo = largest_root(EvolutionParams(lo, K, dist))
    if not rep_lo.decodable:
        raise BracketError(f"not decodable at the lower bracket end G={lo}")
    rep_hi = largest_root(EvolutionParams(hi, K, dist))
    if rep_hi.decodable:
        raise BracketError(f"still decodable at the upper bracket end G={hi}")
    steps = 0
    while hi - lo > g_tol and steps < max_steps:
        mid = 0.5 * (lo + hi)
        rep = largest_root(EvolutionParams(mid, K, dist))
        if rep.decodable:
            lo, rep_lo = mid, rep
        else:
            hi, rep_hi = mid, rep
        steps += 1
    return ThresholdResult(0.5 * (lo + hi), lo, hi, steps, rep_lo.iterations, rep_hi.iterations)


def threshold_search(dist: DegreeDistribution, K: int, g_tol: float = 1e-4, **kw) -> float:
    """Load threshold ``G*`` resolved to ``g_tol``."""
    return threshold_bisection(dist, K, g_tol, **kw).threshold


@dataclass(frozen=True)
class GridCertificate:
    """Outcome of scanning a function for zeros on (0, upper]."""

    min_value: float
    argmin: float
    roots: tuple[float, ...]

    @property
    def certified(self) -> bool:
        return not self.roots and self.min_value > 0


def _bisect_root(fn: Callable[[float], float], a: float, b: float, fa: float,
                 steps: int) -> float:
    for _ in range(steps):
        m = 0.5 * (a + b)
        fm = fn(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def certify_positive(fn: Callable[[float], float], lower: float, upper: float,
                     n: int = CERT_GRID, refine_steps: int = CERT_REFINE_STEPS) -> GridCertificate:
    """Check ``fn > 0`` on a uniform grid of ``n`` points in ``[lower, upper]``.

    Sign changes between neighbours are refined by bisection and reported as roots.
    """
    grid = np.linspace(lower, upper, n)
    values = np.array([fn(float(p)) for p in grid])
    roots = []
    pos = values > 0
    for i in np.flatnonzero(pos[:-1] != pos[1:]):
        roots.append(_bisect_root(fn, float(grid[i]), float(grid[i + 1]), float(values[i]),
                                  refine_steps))
    for i in np.flatnonzero(values == 0):
        roots.append(float(grid[i]))
    i_min = int(np.argmin(values))
    return GridCertificate(float(values[i_min]), float(grid[i_min]), tuple(sorted(set(roots))))


def certify_no_fixed_point(params: EvolutionParams, n: int = CERT_GRID) -> GridCertificate:
    """Grid certificate that ``residual > 0`` on (0, 1], i.e. SIC drives p to 0."""
    return certify_positive(lambda p: residual(p, params), 1.0 / n, 1.0, n)
