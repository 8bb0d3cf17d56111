"""Single linear birth-death processes and Cox mutation-time generation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .seeding import as_generator

DEFAULT_MAX_EVENTS = 10**8

# |lambda * t| below this switches the generating function to its lambda = 0 limit
LAMBDA_ZERO_CUTOFF = 1e-8


class EventCapExceeded(RuntimeError):
    """A path needed more jump events than the configured cap."""

    def __init__(self, cap: int, detail: str = ""):
        self.cap = cap
        msg = f"event cap of {cap} events exceeded"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class BirthDeathParams:
    birth_rate: float
    death_rate: float

    def __post_init__(self):
        for name in ("birth_rate", "death_rate"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def net_rate(self) -> float:
        return self.birth_rate - self.death_rate


@dataclass(frozen=True)
class StochasticBD:
    """Wildtype growing as a linear birth-death process from ``a0`` cells."""

    params: BirthDeathParams
    a0: int

    def __post_init__(self):
        if self.a0 < 1:
            raise ValueError("a0 must be a positive integer")


@dataclass(frozen=True)
class DeterministicExp:
    """Wildtype path ``t -> w0 * exp(growth_rate * t)``."""

    w0: float
    growth_rate: float

    def __post_init__(self):
        if not (self.w0 > 0 and math.isfinite(self.w0)):
            raise ValueError("w0 must be positive")
        if not (self.growth_rate > 0 and math.isfinite(self.growth_rate)):
            raise ValueError("growth_rate must be positive")

    def __call__(self, t):
        return self.w0 * np.exp(self.growth_rate * np.asarray(t, dtype=float))


WildtypeModel = Union[StochasticBD, DeterministicExp]


@dataclass(frozen=True)
class Horizon:
    """When a path stops.  Absorption at 0 always stops a path."""

    time: float | None = None
    size: int | None = None

    def __post_init__(self):
        if self.time is not None and not self.time >= 0:
            raise ValueError("time horizon must be >= 0")
        if self.size is not None and self.size < 0:
            raise ValueError("size horizon must be >= 0")


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-constant jump path.

    ``sizes[m]`` is the size right after the event at ``event_times[m]``;
    ``end_time`` is where observation stopped (the time horizon, or the last
    event for size/absorption stops).
    """

    event_times: np.ndarray
    sizes: np.ndarray
    initial_size: int
    end_time: float = 0.0
    start_time: float = 0.0
    absorbed: bool = field(default=False)

    @property
    def final_size(self) -> int:
        return int(self.sizes[-1]) if len(self.sizes) else int(self.initial_size)

    def value_at(self, t):
        """Size at time(s) ``t`` (right-continuous)."""
        t = np.asarray(t, dtype=float)
        pos = np.searchsorted(self.event_times, t, side="right")
        vals = np.concatenate(([self.initial_size], self.sizes))
        return vals[pos]

    def integral(self, t0: float, t1: float) -> float:
        """Integral of the path over ``[t0, t1]``."""
        knots, levels = self._pieces()
        lo = np.clip(knots[:-1], t0, t1)
        hi = np.clip(knots[1:], t0, t1)
        return float(np.sum(levels * (hi - lo)))

    def _pieces(self):
        knots = np.concatenate(([self.start_time], self.event_times, [max(self.end_time, self.start_time)]))
        levels = np.concatenate(([self.initial_size], self.sizes)).astype(float)
        return knots, levels


def sample_bd_path(
    params: BirthDeathParams,
    init: int,
    horizon: Horizon,
    rng=None,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> Trajectory:
    """Exact Markov-jump path of a linear birth-death process.

    At size ``i`` the holding time is Exponential(i*(birth+death)) and the jump
    is a birth with probability birth/(birth+death).  Raises
    :class:`EventCapExceeded` when the path needs more than ``max_events``.
    """
    if init < 0:
        raise ValueError("init must be >= 0")
    rng = as_generator(rng)
    t_max = math.inf if horizon.time is None else float(horizon.time)
    n_target = -1 if horizon.size is None else int(horizon.size)
    if horizon.time is None and params.birth_rate == 0 and params.death_rate == 0 and init > 0:
        if n_target < 0 or init < n_target:
            raise EventCapExceeded(max_events, "frozen path never meets the horizon")
    status, times, sizes, end = _kernels.bd_path(
        rng, float(params.birth_rate), float(params.death_rate), int(init), t_max, n_target, int(max_events)
    )
    if status == _kernels.STATUS_CAP:
        raise EventCapExceeded(max_events, f"birth-death path from {init} cells")
    absorbed = status == _kernels.STATUS_UNREACHED
    if absorbed and horizon.time is not None:
        end = t_max
    return Trajectory(np.array(times), np.array(sizes), int(init), float(end), 0.0, absorbed)


def sample_bd_size(params: BirthDeathParams, t: float, rng=None) -> int:
    """Exact draw of Y(t) for a birth-death process with Y(0) = 1."""
    rng = as_generator(rng)
    return int(_kernels.sample_bd_size(rng, float(params.birth_rate), float(params.death_rate), float(t)))


def _h_factor(lam: float, t: float) -> float:
    # (1 - exp(-lam t)) / lam, continuous through lam = 0
    x = lam * t
    if abs(x) < LAMBDA_ZERO_CUTOFF:
        return t
    if -x > 700:
        return math.inf
    return -math.expm1(-x) / lam


def bd_pgf(params: BirthDeathParams, t: float, z: float) -> float:
    """E[z^{Y(t)}] for a birth-death process started from a single cell.

    Evaluated as ``(z - h c) / (1 - h c)`` with ``c = alpha z - beta`` and
    ``h = (1 - e^{-lambda t}) / lambda``, which is the textbook ratio divided
    through by lambda and stays finite at lambda = 0.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not 0.0 <= z <= 1.0:
        raise ValueError("z must lie in [0, 1]")
    alpha, beta = params.birth_rate, params.death_rate
    c = alpha * z - beta
    h = _h_factor(alpha - beta, t)
    if math.isinf(h):
        return z if c == 0 else 1.0
    return (z - h * c) / (1.0 - h * c)


def extinction_prob(params: BirthDeathParams) -> float:
    """Ultimate extinction probability from one cell.

    Conventions: no births and positive death rate gives 1; a process with
    both rates zero never changes and gives 0.
    """
    alpha, beta = params.birth_rate, params.death_rate
    if alpha == 0:
        return 1.0 if beta > 0 else 0.0
    return min(1.0, beta / alpha)


def sample_cox_times(path, nu: float, window: tuple[float, float], rng=None) -> np.ndarray:
    """Event times of a Poisson process with intensity ``nu * path(t)`` on ``window``.

    Generated by time rescaling: unit-rate arrivals are mapped back through the
    inverse of the cumulative intensity.  ``path`` is a :class:`Trajectory`
    (inverted exactly piece by piece) or a :class:`DeterministicExp`
    (inverted in closed form; ``window[0]`` may be ``-inf``).
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    t0, t1 = float(window[0]), float(window[1])
    if not t1 >= t0:
        raise ValueError("window must satisfy t0 <= t1")
    rng = as_generator(rng)
    if nu == 0 or t1 == t0:
        return np.empty(0)
    if isinstance(path, DeterministicExp):
        lam, w0 = path.growth_rate, path.w0
        if math.isinf(t1):
            raise ValueError("exponential path needs a finite right end")
        e0 = 0.0 if math.isinf(t0) else math.exp(lam * t0)
        total = nu * w0 * (math.exp(lam * t1) - e0) / lam
        arrivals = _unit_arrivals(total, rng)
        return np.log(e0 + lam * arrivals / (nu * w0)) / lam
    if isinstance(path, Trajectory):
        if math.isinf(t0) or math.isinf(t1):
            raise ValueError("trajectory windows must be finite")
        knots, levels = path._pieces()
        if t0 < knots[0] or t1 > knots[-1] + 1e-12:
            raise ValueError("window lies outside the observed path")
        lo = np.clip(knots[:-1], t0, t1)
        hi = np.clip(knots[1:], t0, t1)
        mass = nu * levels * (hi - lo)
        cum = np.concatenate(([0.0], np.cumsum(mass)))
        arrivals = _unit_arrivals(cum[-1], rng)
        seg = np.searchsorted(cum, arrivals, side="right") - 1
        seg = np.clip(seg, 0, len(mass) - 1)
        # arrivals only land on segments with positive mass
        return lo[seg] + (arrivals - cum[seg]) / (nu * levels[seg])
    raise TypeError(f"unsupported intensity path {type(path).__name__}")


def _unit_arrivals(total: float, rng: np.random.Generator) -> np.ndarray:
    """Arrival times of a unit-rate Poisson process on [0, total]."""
    count = rng.poisson(total)
    return np.sort(rng.uniform(0.0, total, size=count))
