"""Neutral multiple-site model and its site frequency spectrum."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from . import _kernels
from .parallel import AllReplicatesDiscarded, collect_accepted, map_indices
from .process import DEFAULT_MAX_EVENTS, EventCapExceeded
from .seeding import as_generator, replicate_rng
from .twotype import FixedTime, ModelParams, TotalSize


@dataclass(frozen=True)
class MultisiteParams:
    a: float
    b: float
    mu: float
    S: int
    c0: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError("division rate a must be positive")
        if not (math.isfinite(self.b) and self.b >= 0):
            raise ValueError("death rate b must be >= 0")
        if not self.a > self.b:
            raise ValueError(f"supercritical growth needs a > b (a={self.a}, b={self.b})")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be a probability")
        if int(self.S) != self.S or self.S < 1:
            raise ValueError("S must be a positive integer")
        if int(self.c0) != self.c0 or self.c0 < 1:
            raise ValueError("c0 must be a positive integer")

    @property
    def growth_rate(self) -> float:
        return self.a - self.b

    def single_site_model(self) -> ModelParams:
        """Two-type model followed by one site: alpha_A + nu = alpha_B = a, both death rates b."""
        return ModelParams(self.a * (1 - self.mu), self.b, self.a * self.mu, self.a, self.b, self.c0)


MultisiteStop = Union[FixedTime, TotalSize]


@dataclass(frozen=True)
class GenotypePopulation:
    """Genotype classes ``(mask, count)``; bit i of ``mask`` is site i (0-based)."""

    classes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        masks = [m for m, _ in self.classes]
        if len(set(masks)) != len(masks):
            raise ValueError("genotype masks must be distinct")
        if any(c < 1 for _, c in self.classes):
            raise ValueError("class counts must be >= 1")

    @classmethod
    def from_cells(cls, masks: Iterable[int]) -> "GenotypePopulation":
        merged: dict[int, int] = defaultdict(int)
        for m in masks:
            merged[int(m)] += 1
        return cls(tuple(sorted(merged.items())))

    @classmethod
    def from_sets(cls, pairs: Iterable[tuple[Iterable[int], int]]) -> "GenotypePopulation":
        merged: dict[int, int] = defaultdict(int)
        for sites, count in pairs:
            merged[sum(1 << int(s) for s in set(sites))] += int(count)
        return cls(tuple(sorted(merged.items())))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.classes)

    def site_counts(self, S: int) -> np.ndarray:
        """Number of cells carrying each site's mutation."""
        out = np.zeros(S, dtype=np.int64)
        for mask, count in self.classes:
            while mask:
                low = mask & -mask
                s = low.bit_length() - 1
                if s < S:
                    out[s] += count
                mask ^= low
        return out


@dataclass(frozen=True)
class SfsHistogram:
    """``counts[k]`` sites are mutated in exactly k cells."""

    counts: Mapping[int, int]
    S: int

    def __post_init__(self):
        counts = {int(k): int(v) for k, v in sorted(self.counts.items()) if v}
        if sum(counts.values()) != self.S:
            raise ValueError("SFS counts must sum to S")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_site_counts(cls, site_counts: np.ndarray) -> "SfsHistogram":
        ks, n = np.unique(np.asarray(site_counts), return_counts=True)
        return cls(dict(zip(ks.tolist(), n.tolist())), int(len(site_counts)))

    def as_array(self, kmax: int) -> np.ndarray:
        out = np.zeros(kmax + 1)
        for k, v in self.counts.items():
            if k <= kmax:
                out[k] = v
        return out


def sfs_of(pop: GenotypePopulation, S: int) -> SfsHistogram:
    return SfsHistogram.from_site_counts(pop.site_counts(S))


def divide_cell(parent: int, mu: float, S: int, rng=None) -> tuple[int, int]:
    """Daughter masks: every unmutated site mutates with probability mu, in one daughter chosen by a fair coin."""
    rng = as_generator(rng)
    free = [s for s in range(S) if not (parent >> s) & 1]
    d1 = d2 = parent
    if not free or mu == 0:
        return d1, d2
    m = rng.binomial(len(free), mu)
    if m == 0:
        return d1, d2
    sites = rng.choice(np.asarray(free), size=m, replace=False)
    coins = rng.random(m) < 0.5
    for s, first in zip(sites.tolist(), coins.tolist()):
        if first:
            d1 |= 1 << s
        else:
            d2 |= 1 << s
    return d1, d2


@dataclass(frozen=True)
class MultisiteOutcome:
    population: GenotypePopulation
    reached: bool
    stop_time: float | None
    divisions: int
    deaths: int


def _stop_code(stop: MultisiteStop) -> tuple[int, float, int]:
    if isinstance(stop, FixedTime):
        return _kernels.RULE_TIME, float(stop.t), -1
    if isinstance(stop, TotalSize):
        return _kernels.RULE_TOTAL, math.inf, int(stop.n)
    raise TypeError(f"multisite runs stop on FixedTime or TotalSize, got {stop!r}")


def _run_kernel(params: MultisiteParams, stop: MultisiteStop, rng, limit_calibrated: bool, max_events: int):
    rule, t_max, n_target = _stop_code(stop)
    death = params.b * (1.0 - params.mu) if limit_calibrated else params.b
    res = _kernels.multisite(
        rng, float(params.a), float(death), float(params.mu), int(params.S), int(params.c0), rule, t_max, n_target, int(max_events)
    )
    if res[0] == _kernels.STATUS_CAP:
        raise EventCapExceeded(max_events, f"multisite run under {stop!r}")
    return res


def simulate_multisite(
    params: MultisiteParams,
    stop: MultisiteStop,
    rng=None,
    limit_calibrated: bool = False,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> MultisiteOutcome:
    """Exact jump simulation of the multiple-site model.

    ``limit_calibrated`` uses the death rate b(1 - mu) of the small-mutation
    limit setup instead of b.
    """
    rng = as_generator(rng)
    status, t, cells, table, divisions, deaths = _run_kernel(params, stop, rng, limit_calibrated, max_events)
    masks = [sum(int(w) << (64 * i) for i, w in enumerate(row)) for row in table]
    ids, counts = np.unique(cells, return_counts=True)
    merged: dict[int, int] = defaultdict(int)
    for g, c in zip(ids.tolist(), counts.tolist()):
        merged[masks[g]] += c
    reached = status == _kernels.STATUS_REACHED
    return MultisiteOutcome(
        GenotypePopulation(tuple(sorted(merged.items()))),
        reached,
        float(t) if reached else None,
        int(divisions),
        int(deaths),
    )


@dataclass(frozen=True)
class _SiteCountTask:
    params: MultisiteParams
    stop: MultisiteStop
    root_seed: int
    limit_calibrated: bool
    max_events: int

    def __call__(self, index: int) -> tuple[bool, np.ndarray]:
        status, _, cells, table, _, _ = _run_kernel(
            self.params, self.stop, replicate_rng(self.root_seed, index), self.limit_calibrated, self.max_events
        )
        return status == _kernels.STATUS_REACHED, _kernels.site_counts(cells, table, self.params.S)


@dataclass(frozen=True)
class MeanSfs:
    """Replicate-averaged SFS on k = 0..kmax with per-k standard errors.

    ``std_err`` is the sample standard deviation of the per-replicate count
    divided by sqrt(reps), so correlation between sites is accounted for.
    ``zero_cells`` marks k never observed; their ``band`` is 3/reps.
    """

    mean: np.ndarray
    std_err: np.ndarray
    zero_cells: np.ndarray
    reps: int
    discard_count: int
    S: int

    @property
    def kmax(self) -> int:
        return len(self.mean) - 1

    @property
    def band(self) -> np.ndarray:
        return np.where(self.zero_cells, 3.0 / self.reps, self.std_err)

    def padded(self, kmax: int) -> "MeanSfs":
        if kmax <= self.kmax:
            return MeanSfs(self.mean[: kmax + 1], self.std_err[: kmax + 1], self.zero_cells[: kmax + 1], self.reps, self.discard_count, self.S)
        extra = kmax - self.kmax
        return MeanSfs(
            np.concatenate((self.mean, np.zeros(extra))),
            np.concatenate((self.std_err, np.zeros(extra))),
            np.concatenate((self.zero_cells, np.ones(extra, dtype=bool))),
            self.reps,
            self.discard_count,
            self.S,
        )


def summarize_site_counts(samples: list[np.ndarray], S: int, discard_count: int = 0) -> MeanSfs:
    reps = len(samples)
    kmax = max((int(s.max()) for s in samples if len(s)), default=0)
    hist = np.zeros((reps, kmax + 1))
    for i, s in enumerate(samples):
        hist[i] = np.bincount(s, minlength=kmax + 1)
    mean = hist.mean(axis=0)
    sd = hist.std(axis=0, ddof=1) if reps > 1 else np.zeros(kmax + 1)
    return MeanSfs(mean, sd / math.sqrt(reps), hist.sum(axis=0) == 0, reps, discard_count, S)


def mean_sfs_empirical(
    params: MultisiteParams,
    stop: MultisiteStop,
    reps: int,
    root_seed: int,
    conditioning: str = "none",
    count: str = "accepted",
    workers: int | None = 1,
    limit_calibrated: bool = False,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> MeanSfs:
    """Replicate-averaged SFS.

    Under ``conditioning="on_reached"`` replicates that die out before the
    stop rule are discarded; with ``count="accepted"`` (the default) the run
    continues until ``reps`` replicates are kept.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    task = _SiteCountTask(params, stop, int(root_seed), bool(limit_calibrated), int(max_events))
    if conditioning == "on_reached" and count == "accepted":
        kept, attempts = collect_accepted(task, lambda r: r[0], reps, workers)
    elif conditioning in ("none", "on_reached"):
        results = map_indices(task, range(reps), workers)
        attempts = reps
        kept = [r for r in results if r[0]] if conditioning == "on_reached" else results
    else:
        raise ValueError("conditioning must be 'none' or 'on_reached'")
    if not kept:
        raise AllReplicatesDiscarded(attempts, f"conditioning on reaching {stop!r}")
    return summarize_site_counts([sc for _, sc in kept], params.S, attempts - len(kept))
