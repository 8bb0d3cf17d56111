"""Exact simulation of the two-type (wildtype/mutant) birth-death mutation model."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, NamedTuple, Union

import numpy as np

from . import _kernels
from .process import (
    DEFAULT_MAX_EVENTS,
    BirthDeathParams,
    DeterministicExp,
    EventCapExceeded,
    Horizon,
    StochasticBD,
    sample_bd_path,
    sample_cox_times,
)
from .analytics.limits import AtLeast
from .parallel import AllReplicatesDiscarded, collect_accepted, map_indices
from .seeding import as_generator, replicate_rng
from .stats import EmpiricalPmf


@dataclass(frozen=True)
class ModelParams:
    alpha_a: float
    beta_a: float
    nu: float
    alpha_b: float
    beta_b: float
    a0: int = 1

    def __post_init__(self):
        for name in ("alpha_a", "beta_a", "nu", "alpha_b", "beta_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if int(self.a0) != self.a0 or self.a0 < 1:
            raise ValueError("a0 must be a positive integer")

    @property
    def lambda_a(self) -> float:
        return self.alpha_a - self.beta_a

    @property
    def lambda_b(self) -> float:
        return self.alpha_b - self.beta_b

    @property
    def wildtype(self) -> BirthDeathParams:
        return BirthDeathParams(self.alpha_a, self.beta_a)

    @property
    def clone(self) -> BirthDeathParams:
        return BirthDeathParams(self.alpha_b, self.beta_b)

    def require_supercritical(self):
        if not self.lambda_a > 0:
            raise ValueError(f"supercritical wildtype growth required, lambda_a = {self.lambda_a}")


@dataclass(frozen=True)
class FixedTime:
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("FixedTime needs t > 0")


@dataclass(frozen=True)
class WildtypeSize:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("WildtypeSize needs n >= 1")


@dataclass(frozen=True)
class TotalSize:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("TotalSize needs n >= 1")


StopRule = Union[FixedTime, WildtypeSize, TotalSize]


def _rule_code(stop: StopRule) -> tuple[int, float, int]:
    if isinstance(stop, FixedTime):
        return _kernels.RULE_TIME, float(stop.t), -1
    if isinstance(stop, WildtypeSize):
        return _kernels.RULE_WILDTYPE, math.inf, int(stop.n)
    if isinstance(stop, TotalSize):
        return _kernels.RULE_TOTAL, math.inf, int(stop.n)
    raise TypeError(f"unknown stop rule {stop!r}")


@dataclass(frozen=True)
class CloneRecord:
    origin_time: float
    size: int


@dataclass(frozen=True, eq=False)
class TwoTypeOutcome:
    """One realisation observed when the stop rule triggered.

    ``stop_time`` is ``None`` when the rule was never met (``reached`` False);
    the counts are then those at extinction.  Clone data are held as arrays
    (``clone_origins``, ``clone_size_array``) and exposed as ``clones``.
    Extinct clones stay with size 0.
    """

    stop_time: float | None
    wildtype: int
    mutants: int
    clone_origins: np.ndarray
    clone_size_array: np.ndarray
    reached: bool
    seed: int | None = None
    index: int | None = None

    def __post_init__(self):
        origins = np.asarray(self.clone_origins, dtype=float)
        sizes = np.asarray(self.clone_size_array, dtype=np.int64)
        if origins.shape != sizes.shape:
            raise ValueError("clone origins and sizes must have equal length")
        origins.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "clone_origins", origins)
        object.__setattr__(self, "clone_size_array", sizes)

    @property
    def mutation_count(self) -> int:
        return len(self.clone_size_array)

    @property
    def clone_sizes(self) -> np.ndarray:
        return self.clone_size_array

    @property
    def clones(self) -> tuple[CloneRecord, ...]:
        return tuple(CloneRecord(o, s) for o, s in zip(self.clone_origins.tolist(), self.clone_size_array.tolist()))

    @classmethod
    def from_clones(cls, stop_time, wildtype: int, clones, reached: bool, **kw) -> "TwoTypeOutcome":
        clones = list(clones)
        return cls(
            stop_time,
            wildtype,
            sum(c.size for c in clones),
            np.array([c.origin_time for c in clones], dtype=float),
            np.array([c.size for c in clones], dtype=np.int64),
            reached,
            **kw,
        )

    def __eq__(self, other):
        if not isinstance(other, TwoTypeOutcome):
            return NotImplemented
        return self.to_record() == other.to_record()

    def to_record(self) -> dict:
        return {
            "seed": self.seed,
            "index": self.index,
            "reached": self.reached,
            "stop_time": self.stop_time,
            "wildtype": self.wildtype,
            "mutants": self.mutants,
            "mutation_count": self.mutation_count,
            "clones": [[o, s] for o, s in zip(self.clone_origins.tolist(), self.clone_size_array.tolist())],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TwoTypeOutcome":
        clones = rec["clones"]
        return cls(
            stop_time=rec["stop_time"],
            wildtype=int(rec["wildtype"]),
            mutants=int(rec["mutants"]),
            clone_origins=np.array([c[0] for c in clones], dtype=float),
            clone_size_array=np.array([c[1] for c in clones], dtype=np.int64),
            reached=bool(rec["reached"]),
            seed=rec.get("seed"),
            index=rec.get("index"),
        )


def simulate_two_type(
    params: ModelParams,
    stop: StopRule,
    rng=None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> TwoTypeOutcome:
    """Exact jump simulation of (A, B) with per-clone bookkeeping.

    Size rules with ``n <= a0`` stop at time 0.  Under ``WildtypeSize`` the run
    ends unreached as soon as the wildtype dies out; under ``TotalSize`` only
    when both types are gone.
    """
    rng = as_generator(rng)
    rule, t_max, n_target = _rule_code(stop)
    status, t, a, b, origins, sizes, _ = _kernels.two_type(
        rng,
        float(params.alpha_a),
        float(params.beta_a),
        float(params.nu),
        float(params.alpha_b),
        float(params.beta_b),
        int(params.a0),
        rule,
        t_max,
        n_target,
        int(max_events),
    )
    if status == _kernels.STATUS_CAP:
        raise EventCapExceeded(max_events, f"two-type run under {stop!r}")
    reached = status == _kernels.STATUS_REACHED
    return TwoTypeOutcome(float(t) if reached else None, int(a), int(b), origins, sizes, bool(reached))


def simulate_b_tau_yule(params: ModelParams, n: int, rng=None) -> int:
    """Draw B(tau_n) from the Yule representation (no wildtype death, one founder).

    Each of the n-1 wildtype cells present just before tau_n has an
    Exponential(alpha_a) age, a Poisson number of mutations spread uniformly
    over that age, and each clone has the birth-death size of its age.
    """
    if params.beta_a != 0:
        raise ValueError("the Yule representation requires beta_a = 0")
    if params.a0 != 1:
        raise ValueError("the Yule representation is only defined for a0 = 1")
    if params.alpha_a <= 0:
        raise ValueError("alpha_a must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(rng)
    return int(
        _kernels.yule_b_tau(rng, float(params.alpha_a), float(params.nu), float(params.alpha_b), float(params.beta_b), int(n))
    )


def simulate_cox_clones(
    wildtype: StochasticBD | DeterministicExp,
    nu: float,
    clone: BirthDeathParams,
    window: tuple[float, float],
    rng=None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> tuple[CloneRecord, ...]:
    """Clones observed at ``window[1]`` from mutations on ``window``.

    The mutation times are a Cox process with intensity ``nu * A(t)``, built by
    time-rescaling a unit Poisson stream against the wildtype path; clone
    sizes are exact birth-death draws at their ages.  A stochastic wildtype is
    simulated on ``[0, window[1]]``; a deterministic one may start at -inf.
    """
    rng = as_generator(rng)
    t0, t1 = window
    if isinstance(wildtype, StochasticBD):
        path = sample_bd_path(wildtype.params, wildtype.a0, Horizon(time=t1), rng, max_events=max_events)
        times = sample_cox_times(path, nu, (t0, t1), rng)
    else:
        times = sample_cox_times(wildtype, nu, (t0, t1), rng)
    out = []
    for ti in times:
        size = _kernels.sample_bd_size(rng, clone.birth_rate, clone.death_rate, float(t1 - ti))
        out.append(CloneRecord(float(ti), int(size)))
    return tuple(out)


def clone_census(outcome: TwoTypeOutcome, size_set: Callable[[int], bool] | Iterable[int] | range) -> int:
    """Number of clones whose size lies in ``size_set`` (a predicate or a collection)."""
    sizes = outcome.clone_size_array
    if isinstance(size_set, AtLeast):
        return int(np.count_nonzero(sizes >= size_set.k))
    if callable(size_set):
        return sum(1 for s in sizes.tolist() if size_set(s))
    if isinstance(size_set, range) and size_set.step == 1:
        return int(np.count_nonzero((sizes >= size_set.start) & (sizes < size_set.stop)))
    members = np.fromiter((int(j) for j in size_set), dtype=np.int64)
    return int(np.count_nonzero(np.isin(sizes, members)))


def largest_clone(outcome: TwoTypeOutcome) -> int:
    """Largest clone size, 0 when there are no clones."""
    sizes = outcome.clone_size_array
    return int(sizes.max()) if len(sizes) else 0


def write_archive(outcomes: Iterable[TwoTypeOutcome], path) -> None:
    """One JSON record per line, in replicate order."""
    with open(path, "w") as fh:
        for o in outcomes:
            fh.write(json.dumps(o.to_record(), separators=(",", ":")) + "\n")


def read_archive(path) -> list[TwoTypeOutcome]:
    with open(path) as fh:
        return [TwoTypeOutcome.from_record(json.loads(line)) for line in fh if line.strip()]


@dataclass(frozen=True)
class _TwoTypeTask:
    params: ModelParams
    stop: StopRule
    root_seed: int
    max_events: int

    def __call__(self, index: int) -> TwoTypeOutcome:
        out = simulate_two_type(self.params, self.stop, replicate_rng(self.root_seed, index), self.max_events)
        return replace(out, seed=self.root_seed, index=index)


class _Brief(NamedTuple):
    reached: bool
    mutants: int
    value: object


@dataclass(frozen=True)
class _BriefTask:
    """Replicate reduced to (reached, mutants, summary(outcome)) inside the worker."""

    inner: _TwoTypeTask
    summary: Callable[[TwoTypeOutcome], object]

    def __call__(self, index: int) -> _Brief:
        out = self.inner(index)
        return _Brief(out.reached, out.mutants, self.summary(out))


@dataclass(frozen=True)
class ReplicateRun:
    """Mutant-count pmf over kept replicates plus the kept outcomes in index order.

    When a ``summary`` function was given, ``outcomes`` is empty and
    ``summaries`` holds its value for each kept replicate instead.
    """

    pmf: EmpiricalPmf
    outcomes: tuple[TwoTypeOutcome, ...]
    attempts: int
    summaries: tuple = ()

    @property
    def discard_count(self) -> int:
        return self.pmf.discard_count


CONDITIONING = ("none", "on_reached")


def run_replicates(
    params: ModelParams,
    stop: StopRule,
    reps: int,
    root_seed: int,
    conditioning: str = "none",
    count: str = "attempts",
    workers: int | None = 1,
    max_events: int = DEFAULT_MAX_EVENTS,
    summary: Callable[[TwoTypeOutcome], object] | None = None,
) -> ReplicateRun:
    """Independent replicates with per-index seeds.

    With ``conditioning="on_reached"`` replicates whose stop rule was never met
    are discarded.  ``count="attempts"`` runs exactly ``reps`` replicates;
    ``count="accepted"`` keeps going (in index order) until ``reps`` are kept.
    A ``summary`` function (picklable when ``workers > 1``) is applied in the
    worker and only its values are kept, which bounds memory for large runs.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if conditioning not in CONDITIONING:
        raise ValueError(f"conditioning must be one of {CONDITIONING}")
    if count not in ("attempts", "accepted"):
        raise ValueError("count must be 'attempts' or 'accepted'")
    task = _TwoTypeTask(params, stop, int(root_seed), int(max_events))
    if summary is not None:
        task = _BriefTask(task, summary)
    if conditioning == "on_reached" and count == "accepted":
        kept, attempts = collect_accepted(task, lambda o: o.reached, reps, workers)
    else:
        results = map_indices(task, range(reps), workers)
        attempts = reps
        kept = [o for o in results if o.reached] if conditioning == "on_reached" else results
    if not kept:
        raise AllReplicatesDiscarded(attempts, f"conditioning on reaching {stop!r}")
    pmf = EmpiricalPmf.from_values((o.mutants for o in kept), discard_count=attempts - len(kept))
    if summary is not None:
        return ReplicateRun(pmf, (), attempts, tuple(o.value for o in kept))
    return ReplicateRun(pmf, tuple(kept), attempts)


@dataclass(frozen=True)
class _YuleTask:
    params: ModelParams
    n: int
    root_seed: int

    def __call__(self, index: int) -> int:
        return simulate_b_tau_yule(self.params, self.n, replicate_rng(self.root_seed, index))


def run_yule_replicates(params: ModelParams, n: int, reps: int, root_seed: int, workers: int | None = 1) -> EmpiricalPmf:
    """Empirical pmf of B(tau_n) from the Yule-representation sampler."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    values = map_indices(_YuleTask(params, int(n), int(root_seed)), range(reps), workers)
    return EmpiricalPmf.from_values(values)
