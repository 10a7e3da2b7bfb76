"""Energy consumption and efficiency versus the maximum repetition rate ``L``.

For the L-term exponential distribution operated at its load bound
``D_L = sum_{t=1}^{L} a^t/(t+1)!`` (so ``N = M / D_L``), per-user energy per
frame is ``E_L = P_tx (A_L + B_L M P_c / P_tx)`` with ``A_L`` the mean
number of replicas and ``B_L = 1 / D_L``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .design import A_STAR, load_bound
from .errors import ConfigError

L_MAX = 20

# Published ladder values, kept for side-by-side reporting.
PUBLISHED_LADDER = (0.8649, 2.2298, 3.8042, 5.5065, 7.0526, 7.2, 9.0)


class SaturationWarning(UserWarning):
    """The optimal L lies beyond the scanned range."""


@dataclass(frozen=True)
class PowerModel:
    p_tx: float
    p_c: float = 0.1
    noise_power: float = 1.0
    num_users: int = 1000

    def __post_init__(self) -> None:
        if not self.p_tx > 0:
            raise ConfigError("p_tx must be positive")
        if not self.p_c >= 0:
            raise ConfigError("p_c must be non-negative")
        if not self.noise_power > 0:
            raise ConfigError("noise_power must be positive")
        if self.num_users < 1:
            raise ConfigError("num_users must be >= 1")

    @property
    def ratio(self) -> float:
        """``M P_c / P_tx``."""
        return self.num_users * self.p_c / self.p_tx

    @property
    def rate(self) -> float:
        return math.log2(1.0 + self.p_tx / self.noise_power)


@dataclass(frozen=True)
class EnergyProfile:
    L: int
    coeff_a: float
    coeff_b: float
    consumption: float
    efficiency: float
    ratio: float
    is_optimal: bool = False


def _check_L(L: int) -> None:
    if int(L) != L or L < 1:
        raise ConfigError(f"L must be a positive integer, got {L!r}")


def coefficients(L: int, a_star: float = A_STAR) -> tuple[float, float]:
    """``(A_L, B_L)``. Exact when ``a_star`` is a ``Fraction``."""
    _check_L(L)
    term = a_star
    num = 0
    for j in range(1, L + 1):
        num += term
        term *= a_star / (j + 1)
    den = load_bound(a_star, L)
    return num / den, 1 / den


def energy(L: int, model: PowerModel, a_star: float = A_STAR) -> float:
    A, B = coefficients(L, a_star)
    return model.p_tx * (A + B * model.ratio)


def efficiency(L: int, model: PowerModel, a_star: float = A_STAR) -> float:
    return model.rate / energy(L, model, a_star)


def delta_ratio(L: int, a_star: float = A_STAR) -> float:
    """``(A_{L+1} - A_L) / |B_{L+1} - B_L| = sum_{i=1}^{L} a^i (L+1-i)/(i+1)!``."""
    _check_L(L)
    term = a_star / 2
    total = 0
    for i in range(1, L + 1):
        total += term * (L + 1 - i)
        term *= a_star / (i + 2)
    return total


def table1(a_star: float = A_STAR, L_max: int = 7) -> list[float]:
    return [delta_ratio(L, a_star) for L in range(1, L_max + 1)]


def optimal_L(model: PowerModel, a_star: float = A_STAR, L_max: int = L_MAX) -> int:
    """Energy-minimising ``L``: the first rung of the delta-ratio ladder at or
    above ``M P_c / P_tx``. Ties resolve to the smaller ``L``.

    Emits :class:`SaturationWarning` and returns ``L_max`` if the ratio exceeds
    every rung up to ``L_max``.
    """
    _check_L(L_max)
    r = model.ratio
    for L in range(1, L_max + 1):
        if r <= delta_ratio(L, a_star):
            return L
    warnings.warn(f"M*P_c/P_tx = {r:.4g} exceeds the ladder up to L={L_max}",
                  SaturationWarning, stacklevel=2)
    return L_max


def energy_sweep(model: PowerModel, a_star: float = A_STAR,
                 L_max: int = 10) -> list[EnergyProfile]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        best = optimal_L(model, a_star, L_max)
    rows = []
    for L in range(1, L_max + 1):
        A, B = coefficients(L, a_star)
        E = model.p_tx * (A + B * model.ratio)
        rows.append(EnergyProfile(L, A, B, E, model.rate / E, delta_ratio(L, a_star), L == best))
    return rows
