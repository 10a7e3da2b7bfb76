"""Frame-level Monte Carlo simulation of IRSA with K-packet reception.

Each of ``M`` users draws a repetition degree from the transmission
distribution and places that many replicas in distinct slots of an
``N``-slot frame, ``N = round(M / G)``. The receiver decodes every packet in
a slot holding at most ``K`` packets, cancels the decoded users' other
replicas, and repeats until no slot becomes decodable.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .degree import DegreeDistribution
from .errors import ConfigError

Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True, eq=False)
class FrameGraph:
    """Bipartite user/slot graph of one frame.

    ``slots`` is an ``(M, d_max)`` int array of slot indices, padded with -1
    for users of degree below ``d_max``.
    """

    num_users: int
    num_slots: int
    slots: np.ndarray

    @classmethod
    def from_assignments(cls, assignments: Sequence[Iterable[int]],
                         num_slots: int) -> "FrameGraph":
        raw = [[int(s) for s in a] for a in assignments]
        rows = [sorted(set(a)) for a in raw]
        for a, r in zip(raw, rows):
            if len(r) != len(a):
                raise ConfigError("a user may place at most one replica per slot")
        width = max((len(r) for r in rows), default=0)
        arr = np.full((len(rows), max(width, 1)), -1, dtype=np.int64)
        for i, r in enumerate(rows):
            if r and (r[0] < 0 or r[-1] >= num_slots):
                raise ConfigError(f"user {i}: slot index outside [0, {num_slots})")
            arr[i, :len(r)] = r
        return cls(len(rows), num_slots, arr)

    @property
    def assignments(self) -> list[tuple[int, ...]]:
        return [tuple(sorted(int(s) for s in row if s >= 0)) for row in self.slots]

    @property
    def degrees(self) -> np.ndarray:
        return (self.slots >= 0).sum(axis=1)

    def slot_degrees(self, active: np.ndarray | None = None) -> np.ndarray:
        rows = self.slots if active is None else self.slots[active]
        flat = rows[rows >= 0]
        return np.bincount(flat, minlength=self.num_slots)


@dataclass(frozen=True)
class DecodeResult:
    decoded: frozenset[int]
    rounds: tuple[frozenset[int], ...]

    @property
    def iterations(self) -> int:
        return len(self.rounds)


def sic_decode_detailed(graph: FrameGraph, K: int) -> DecodeResult:
    """Iterative SIC. One iteration decodes every user that has a replica in a
    slot of current degree <= K, then removes all of those users' replicas."""
    if K < 1:
        raise ConfigError("K must be >= 1")
    slots = graph.slots
    valid = slots >= 0
    safe = np.where(valid, slots, 0)
    active = valid.any(axis=1)  # degree-0 users can never be decoded
    decoded = np.zeros(graph.num_users, dtype=bool)
    rounds = []
    while True:
        deg = graph.slot_degrees(active)
        hit = ((deg[safe] <= K) & valid).any(axis=1) & active
        if not hit.any():
            break
        rounds.append(frozenset(int(i) for i in np.flatnonzero(hit)))
        decoded |= hit
        active &= ~hit
    return DecodeResult(frozenset(int(i) for i in np.flatnonzero(decoded)), tuple(rounds))


def sic_decode(graph: FrameGraph, K: int) -> set[int]:
    return set(sic_decode_detailed(graph, K).decoded)


@dataclass(frozen=True)
class SimConfig:
    dist: DegreeDistribution
    K: int = 2
    num_users: int = 1000
    load: float = 1.0
    trials: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ConfigError("num_users must be >= 1")
        if not self.load > 0:
            raise ConfigError("load must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.num_slots < self.dist.max_degree:
            raise ConfigError(
                f"frame of {self.num_slots} slots cannot hold degree {self.dist.max_degree}")

    @property
    def num_slots(self) -> int:
        return max(1, round(self.num_users / self.load))

    @property
    def realized_load(self) -> float:
        return self.num_users / self.num_slots


def trial_rng(seed: int, load_index: int, trial_index: int) -> np.random.Generator:
    # independent stream per (seed, load, trial); parallel and sequential runs agree
    return np.random.default_rng(np.random.SeedSequence([seed, load_index, trial_index]))


def _sample_slots(rng: np.random.Generator, degrees: np.ndarray, N: int) -> np.ndarray:
    """Draw ``degrees[i]`` distinct slots per user, uniformly without replacement.

    Column j picks the r-th still-unused slot with r uniform on [0, N-j);
    vectorised across users.
    """
    M = degrees.size
    dmax = int(degrees.max())
    out = np.full((M, dmax), -1, dtype=np.int64)
    chosen = np.empty((M, 0), dtype=np.int64)
    for j in range(dmax):
        v = rng.integers(0, N - j, size=M)
        for s in np.sort(chosen, axis=1).T:
            v += v >= s
        out[:, j] = v
        chosen = out[:, :j + 1]
    out[np.arange(dmax)[None, :] >= degrees[:, None]] = -1
    return out


def sample_frame(config: SimConfig, trial_index: int = 0, load_index: int = 0) -> FrameGraph:
    rng = trial_rng(config.seed, load_index, trial_index)
    degs = np.array(config.dist.degrees)
    cdf = np.cumsum(config.dist.probabilities)
    u = rng.random(config.num_users)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), degs.size - 1)
    degrees = degs[idx]
    N = config.num_slots
    return FrameGraph(config.num_users, N, _sample_slots(rng, degrees, N))


def wilson_interval(failures: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    phat = failures / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SimReport:
    load: float
    realized_load: float
    plr: float
    ci_low: float
    ci_high: float
    throughput: float
    undecoded: int
    users_observed: int
    trials: int
    num_users: int
    K: int
    seed: int


def _undecoded_in_trial(config: SimConfig, trial_index: int, load_index: int) -> int:
    graph = sample_frame(config, trial_index, load_index)
    return graph.num_users - len(sic_decode_detailed(graph, config.K).decoded)


def run_trials(config: SimConfig, threads: int = 1, load_index: int = 0) -> SimReport:
    """Monte Carlo PLR estimate with a Wilson 95% interval.

    The result depends only on ``config`` and ``load_index``, not on ``threads``:
    each trial owns its RNG stream and undecoded counts are summed.
    """
    indices = range(config.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda t: _undecoded_in_trial(config, t, load_index), indices))
    else:
        counts = [_undecoded_in_trial(config, t, load_index) for t in indices]
    undecoded = int(sum(counts))
    n = config.num_users * config.trials
    plr = undecoded / n
    lo, hi = wilson_interval(undecoded, n)
    return SimReport(
        load=config.load,
        realized_load=config.realized_load,
        plr=plr,
        ci_low=min(lo, plr),
        ci_high=max(hi, plr),
        throughput=config.load * (1 - plr),
        undecoded=undecoded,
        users_observed=n,
        trials=config.trials,
        num_users=config.num_users,
        K=config.K,
        seed=config.seed,
    )


def plr_curve(template: SimConfig, loads: Sequence[float], threads: int = 1) -> list[SimReport]:
    """One :func:`run_trials` per load, rows sorted by load.

    The load index used for seeding is the position in the sorted list.
    """
    if not loads:
        raise ConfigError("loads must be non-empty")
    ordered = sorted(float(g) for g in loads)
    return [run_trials(replace(template, load=g), threads=threads, load_index=j)
            for j, g in enumerate(ordered)]
