"""Node- and edge-perspective degree distributions.

A transmission distribution ``Lambda(x) = sum_r Lambda_r x^r`` gives the
probability that a user sends ``r`` replicas in a frame. The edge view
``lambda_r = r Lambda_r / Lambda'(1)`` is the probability that a randomly
chosen edge of the user/slot graph hangs off a degree-``r`` user.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DistributionError, DomainError

PROB_TOL = 1e-12
RENORMALIZE_TOL = 1e-6
MAX_DEGREE = 64


def _check_unit(x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    return x


def _clean_entries(entries: Mapping[int, float] | Iterable[tuple[int, float]],
                   what: str) -> dict[int, float]:
    pairs = entries.items() if isinstance(entries, Mapping) else entries
    out: dict[int, float] = {}
    for degree, prob in pairs:
        if isinstance(degree, bool) or int(degree) != degree:
            raise DistributionError(f"{what}: degree {degree!r} is not an integer")
        degree = int(degree)
        prob = float(prob)
        if degree in out:
            raise DistributionError(f"{what}: duplicate degree {degree}")
        if degree < 1:
            raise DistributionError(f"{what}: degree {degree} < 1")
        if degree > MAX_DEGREE:
            raise DistributionError(f"{what}: degree {degree} exceeds the cap {MAX_DEGREE}")
        if not math.isfinite(prob) or prob < 0.0 or prob > 1.0:
            raise DistributionError(f"{what}: probability {prob!r} for degree {degree} outside [0, 1]")
        if prob > 0.0:
            out[degree] = prob
    if not out:
        raise DistributionError(f"{what}: no degree with positive probability")

    total = math.fsum(out.values())
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise DistributionError(f"{what}: probabilities sum to {total!r}, not 1")
    if abs(total - 1.0) > PROB_TOL:
        warnings.warn(f"{what}: probabilities sum to {total!r}; renormalizing", stacklevel=3)
        out = {d: p / total for d, p in out.items()}
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class DegreeDistribution:
    """Node-perspective distribution ``{degree: probability}``.

    Entries are validated on construction: integer degrees in ``[1, 64]``,
    no duplicates, probabilities summing to one. Zero-probability degrees
    are dropped; a sum off by at most 1e-6 is renormalized with a warning.
    """

    entries: Mapping[int, float]
    _degrees: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _probs: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        cleaned = _clean_entries(self.entries, "DegreeDistribution")
        object.__setattr__(self, "entries", cleaned)
        object.__setattr__(self, "_degrees", tuple(cleaned))
        object.__setattr__(self, "_probs", tuple(cleaned.values()))

    @classmethod
    def regular(cls, degree: int) -> "DegreeDistribution":
        return cls({degree: 1.0})

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._degrees

    @property
    def probabilities(self) -> tuple[float, ...]:
        return self._probs

    @property
    def min_degree(self) -> int:
        return self._degrees[0]

    @property
    def max_degree(self) -> int:
        return self._degrees[-1]

    def evaluate(self, x: float) -> float:
        x = _check_unit(x)
        return math.fsum(p * x**d for d, p in zip(self._degrees, self._probs))

    def derivative(self, x: float) -> float:
        x = _check_unit(x)
        return self._derivative_unchecked(x)

    def _derivative_unchecked(self, x: float) -> float:
        # hot path of the density-evolution recursion
        s = 0.0
        for d, p in zip(self._degrees, self._probs):
            s += d * p * x ** (d - 1)
        return s

    def mean_degree(self) -> float:
        return math.fsum(d * p for d, p in zip(self._degrees, self._probs))

    def edge_perspective(self) -> "EdgeView":
        mean = self.mean_degree()
        if mean <= 0.0:
            raise DistributionError("mean degree is zero; edge perspective undefined")
        return EdgeView({d: d * p / mean for d, p in zip(self._degrees, self._probs)})

    def to_json(self) -> dict:
        return {"entries": [{"degree": d, "prob": p} for d, p in self.entries.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "DegreeDistribution":
        """Accepts ``{"entries": [{"degree", "prob"}, ...]}`` or a plain ``{degree: prob}`` map."""
        try:
            if isinstance(obj, dict) and "entries" not in obj:
                pairs = [(int(d), p) for d, p in obj.items()]
            else:
                pairs = [(e["degree"], e["prob"]) for e in obj["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DistributionError(f"malformed distribution object: {exc}") from exc
        return cls(pairs)  # type: ignore[arg-type]

    def __str__(self) -> str:
        return " + ".join(f"{p:.6g}x^{d}" for d, p in self.entries.items())


@dataclass(frozen=True)
class EdgeView:
    """Edge-perspective distribution ``{degree: lambda_r}``."""

    entries: Mapping[int, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _clean_entries(self.entries, "EdgeView"))

    def evaluate(self, x: float) -> float:
        """``lambda(x) = sum_r lambda_r x^(r-1)``."""
        x = _check_unit(x)
        return math.fsum(p * x ** (d - 1) for d, p in self.entries.items())

    def to_node(self, mean_degree: float) -> DegreeDistribution:
        return DegreeDistribution({d: p * mean_degree / d for d, p in self.entries.items()})


def evaluate(dist: DegreeDistribution, x: float) -> float:
    return dist.evaluate(x)


def derivative(dist: DegreeDistribution, x: float) -> float:
    return dist.derivative(x)


def mean_degree(dist: DegreeDistribution) -> float:
    return dist.mean_degree()


def edge_perspective(dist: DegreeDistribution) -> EdgeView:
    return dist.edge_perspective()


def load_distribution(path: str | Path) -> DegreeDistribution:
    """Read a distribution file (``{"entries": [{"degree": .., "prob": ..}, ...]}``).

    Raises OSError for unreadable files and DistributionError for bad content.
    """
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"{path}: invalid JSON ({exc})") from exc
    return DegreeDistribution.from_json(obj)


def save_distribution(dist: DegreeDistribution, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dist.to_json(), indent=2) + "\n")


# Reference distributions for K=2 comparisons.
LAMBDA2 = DegreeDistribution({2: 0.5, 3: 0.28, 8: 0.22})
LAMBDA3 = DegreeDistribution({2: 0.25, 3: 0.60, 8: 0.15})
