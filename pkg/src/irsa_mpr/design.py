"""Exponential-approximation design of transmission distributions.

Replacing ``G Lambda'(p)`` by ``exp(a p) - 1`` in the fixed-point equation
gives a one-parameter surrogate ``tilde_f(p; a)``. The largest ``a`` that keeps
the surrogate strictly negative on (0, 1) is found digit by digit; the
truncated Taylor series of ``exp(a p) - 1`` then yields a distribution on
degrees ``2..L+1`` whose threshold is at least ``sum_{t<=L} a^t/(t+1)!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degree import DegreeDistribution
from .errors import ConfigError, DomainError
from .evolution import threshold_search

A_STAR = 1.73

EXTREMA_GRID = 10_000
EXTREMA_UPPER = 1.0 - 1e-6
EXTREMA_REFINE_STEPS = 60
A_SEARCH_LIMIT = 100.0


def _check_p(p: float) -> None:
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p!r}")


def _partial_exp(y: float, n: int) -> float:
    """``sum_{k<n} y^k / k!``."""
    term, total = 1.0, 0.0
    for k in range(n):
        total += term
        term *= y / (k + 1)
    return total


def tilde_f_general(p: float, a: float, K: int) -> float:
    _check_p(p)
    e = math.exp(a * p)
    return e - math.log(_partial_exp(e - 1.0, K)) + math.log1p(-p) - 1.0


def tilde_f(p: float, a: float, K: int = 2) -> float:
    """Surrogate stop function; the K=2 case has the closed form ``e^{ap} - ap + ln(1-p) - 1``."""
    if K == 2:
        _check_p(p)
        return math.exp(a * p) - a * p + math.log1p(-p) - 1.0
    return tilde_f_general(p, a, K)


def tilde_f_prime_p(p: float, a: float) -> float:
    """d/dp of the K=2 surrogate: ``a e^{ap} - a - 1/(1-p)``."""
    _check_p(p)
    return a * math.exp(a * p) - a - 1.0 / (1.0 - p)


def tilde_f_prime_general(p: float, a: float, K: int) -> float:
    if K == 2:
        return tilde_f_prime_p(p, a)
    _check_p(p)
    e = math.exp(a * p)
    y = e - 1.0
    # d/dp ln S(y) = a e^{ap} S_{K-1}(y) / S_K(y)
    return a * e - a * e * _partial_exp(y, K - 1) / _partial_exp(y, K) - 1.0 / (1.0 - p)


def _tilde_f_vec(p: np.ndarray, a: float, K: int) -> np.ndarray:
    e = np.exp(a * p)
    if K == 2:
        return e - a * p + np.log1p(-p) - 1.0
    y = e - 1.0
    term = np.ones_like(p)
    s = np.zeros_like(p)
    for k in range(K):
        s += term
        term = term * y / (k + 1)
    return e - np.log(s) + np.log1p(-p) - 1.0


def _tilde_f_prime_vec(p: np.ndarray, a: float, K: int) -> np.ndarray:
    e = np.exp(a * p)
    if K == 2:
        return a * e - a - 1.0 / (1.0 - p)
    y = e - 1.0
    term = np.ones_like(p)
    s_lo = np.zeros_like(p)
    s = np.zeros_like(p)
    for k in range(K):
        if k < K - 1:
            s_lo += term
        s += term
        term = term * y / (k + 1)
    return a * e - a * e * s_lo / s - 1.0 / (1.0 - p)


def local_maxima(a: float, K: int = 2, n: int = EXTREMA_GRID) -> list[tuple[float, float]]:
    """Interior local maxima ``(p, tilde_f(p))`` located by a derivative sign scan."""
    grid = np.linspace(0.0, EXTREMA_UPPER, n + 1)[1:]
    d = _tilde_f_prime_vec(grid, a, K)
    maxima = []
    for i in np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0)):
        lo, hi = float(grid[i]), float(grid[i + 1])
        for _ in range(EXTREMA_REFINE_STEPS):
            mid = 0.5 * (lo + hi)
            if tilde_f_prime_general(mid, a, K) > 0:
                lo = mid
            else:
                hi = mid
        p = 0.5 * (lo + hi)
        maxima.append((p, tilde_f(p, a, K)))
    return maxima


def max_local_maximum(a: float, K: int = 2) -> float | None:
    """Largest local-maximum value on (0, 1), or None if the surrogate is monotone there."""
    maxima = local_maxima(a, K)
    if not maxima:
        return None
    return max(v for _, v in maxima)


def violates(a: float, K: int) -> bool:
    # a maximum touching zero counts as a violation
    top = max_local_maximum(a, K)
    return top is not None and top >= 0.0


@dataclass(frozen=True)
class SearchConfig:
    epsilon_target: float = 0.01
    K: int = 2
    epsilon_init: float = 0.1

    def __post_init__(self) -> None:
        if not 0 < self.epsilon_target <= self.epsilon_init:
            raise ConfigError("need 0 < epsilon_target <= epsilon_init")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K!r}")


def find_a_star(config: SearchConfig = SearchConfig()) -> float:
    """Largest ``a`` (truncated to ``epsilon_target``) keeping the surrogate negative.

    Walks ``a`` upward in steps of ``eps`` until the first violation, backs off one
    step, divides ``eps`` by ten and repeats while ``eps >= epsilon_target``.
    """
    # a is tracked as an integer count of the current step to avoid float drift
    units = 0
    level = 0
    step = config.epsilon_init
    while True:
        while True:
            candidate = (units + 1) * step
            if candidate > A_SEARCH_LIMIT:
                raise ConfigError(f"no violation found below a={A_SEARCH_LIMIT}")
            if violates(candidate, config.K):
                break
            units += 1
        nxt = config.epsilon_init / 10 ** (level + 1)
        if nxt < config.epsilon_target * (1 - 1e-9):
            break
        units *= 10
        level += 1
        step = nxt
    return round(units * step, 12)


def load_bound(a_star: float = A_STAR, L: int = 5) -> float:
    """``sum_{t=1}^{L} a^t / (t+1)!``: load up to which the L-term distribution decodes.

    Works unchanged with ``fractions.Fraction`` inputs for exact evaluation.
    """
    if L < 1:
        raise ConfigError("L must be >= 1")
    term = a_star / 2
    total = 0
    for t in range(1, L + 1):
        total += term
        term *= a_star / (t + 2)
    return total


def load_bound_limit(a_star: float = A_STAR) -> float:
    return (math.expm1(a_star) - a_star) / a_star


def exponential_distribution(a_star: float = A_STAR, L: int = 5) -> DegreeDistribution:
    """Distribution with ``Lambda_s proportional to a^{s-1}/s!`` for ``s = 2..L+1``."""
    if L < 1:
        raise ConfigError("L must be >= 1")
    if not a_star > 0:
        raise ConfigError("a_star must be positive")
    weights = {}
    term = a_star / 2
    for s in range(2, L + 2):
        weights[s] = term
        term *= a_star / (s + 1)
    total = math.fsum(weights.values())
    return DegreeDistribution({s: w / total for s, w in weights.items()})


@dataclass(frozen=True)
class DesignOutcome:
    a_star: float
    L: int
    dist: DegreeDistribution
    load_bound: float
    K: int = 2
    threshold: float | None = None

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "a_star": self.a_star,
            "L": self.L,
            "distribution": self.dist.to_json(),
            "mean_degree": self.dist.mean_degree(),
            "load_bound": self.load_bound,
            "threshold": self.threshold,
        }


def design(K: int = 2, epsilon_target: float = 0.01, L: int = 5,
           certify: bool = True, g_tol: float = 1e-4) -> DesignOutcome:
    """Search ``a*``, build the L-term distribution and (optionally) its DE threshold."""
    a = find_a_star(SearchConfig(epsilon_target=epsilon_target, K=K))
    dist = exponential_distribution(a, L)
    threshold = threshold_search(dist, K, g_tol) if certify else None
    return DesignOutcome(a, L, dist, load_bound(a, L), K, threshold)
