"""Tail constants, almost-sure limit constants and small-mutation limit laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

import numpy as np

from ..process import BirthDeathParams
from .clone import DEFAULT_KMAX, clone_size_pmf
from .compound import bcirc_pmf, bstar_pmf
from .series import Pmf

TAIL_KINDS = ("clone", "bstar", "bcirc", "sfs")


def tail_exponent(lambda_a: float, lambda_b: float) -> float:
    """Exponent 1 + lambda_a/lambda_b of the power-law tail k^-(1 + lambda_a/lambda_b)."""
    return 1.0 + lambda_a / lambda_b


def tail_constant(
    kind: str,
    *,
    lambda_a: float,
    alpha_b: float,
    beta_b: float,
    theta: float | None = None,
    eta: float | None = None,
    a0: int = 1,
    S: int | None = None,
) -> float | None:
    """c with P[X = k] ~ c k^-(1 + lambda_a/lambda_b); ``None`` when lambda_b <= 0.

    ``clone``: (rho)(1 - q)^(1 - rho) Gamma(1 + rho), rho = lambda_a/lambda_b;
    ``bstar`` and ``bcirc`` scale the clone constant by theta/lambda_a and
    a0 eta/lambda_a; ``sfs`` multiplies either one (theta or eta given) by S.
    """
    if kind not in TAIL_KINDS:
        raise ValueError(f"kind must be one of {TAIL_KINDS}")
    lambda_b = alpha_b - beta_b
    if not lambda_b > 0:
        return None
    rho = lambda_a / lambda_b
    q = beta_b / alpha_b
    clone = rho * (1.0 - q) ** (1.0 - rho) * math.gamma(1.0 + rho)
    if kind == "clone":
        return clone
    if kind == "sfs":
        if S is None:
            raise ValueError("sfs tail constant needs S")
        inner = "bstar" if theta is not None else "bcirc"
        return S * tail_constant(inner, lambda_a=lambda_a, alpha_b=alpha_b, beta_b=beta_b, theta=theta, eta=eta, a0=a0)
    if kind == "bstar":
        if theta is None:
            raise ValueError("bstar tail constant needs theta")
        return theta / lambda_a * clone
    if eta is None:
        raise ValueError("bcirc tail constant needs eta")
    return a0 * eta / lambda_a * clone


REGIMES = ("A_dominant", "critical", "B_dominant")


@dataclass(frozen=True)
class LimitRegime:
    """Regime of the almost-sure limits and its deterministic constants.

    ``scaling`` names the normalisation of B(t); ``constant`` multiplies W in
    the limit (``None`` for the random limit V of the B-dominant regime).
    ``extra`` holds the stopping-time constants and E[V].
    """

    regime: str
    scaling: str
    constant: float | None
    extra: dict = field(default_factory=dict)

    @property
    def random_limit(self) -> bool:
        return self.constant is None


def limit_constants(params) -> LimitRegime:
    """Constants of the three growth regimes for ``ModelParams``-like input."""
    la, lb, nu = params.lambda_a, params.lambda_b, params.nu
    if not la > 0:
        raise ValueError("supercritical wildtype required")
    if math.isclose(la, lb, rel_tol=1e-12, abs_tol=1e-15):
        return LimitRegime(
            "critical",
            "t^-1 e^(-lambda_A t) B(t)",
            nu,
            {
                "tau_scaling": "(n log n)^-1 B(tau_n)",
                "tau_constant": nu / la,
                "sigma_scaling": "n^-1 log(n) (n - B(sigma_n))",
                "sigma_constant": la / nu if nu > 0 else math.inf,
                "E_W": float(params.a0),
            },
        )
    if la > lb:
        return LimitRegime(
            "A_dominant",
            "e^(-lambda_A t) B(t)",
            nu / (la - lb),
            {
                "tau_scaling": "n^-1 B(tau_n)",
                "tau_constant": nu / (la - lb),
                "sigma_scaling": "n^-1 B(sigma_n)",
                "sigma_constant": nu / (la - lb + nu),
                "E_W": float(params.a0),
            },
        )
    return LimitRegime(
        "B_dominant",
        "e^(-lambda_B t) B(t)",
        None,
        {"E_V": params.a0 * nu / (lb - la), "E_W": float(params.a0)},
    )


@dataclass(frozen=True)
class MutationTimeLaws:
    """K*(0) ~ Poisson(theta/lambda_A) and the Gumbel law of the first mutation time."""

    poisson_mean: float
    lambda_a: float

    def first_time_survival(self, t: float) -> float:
        """P[T1* >= t] = exp(-(theta/lambda_A) e^{lambda_A t})."""
        return math.exp(-self.poisson_mean * math.exp(self.lambda_a * t))

    def first_time_cdf(self, t: float) -> float:
        return -math.expm1(-self.poisson_mean * math.exp(self.lambda_a * t))

    gumbel_survival = first_time_survival


def mutation_time_laws(theta_over_lambda: float, lambda_a: float) -> MutationTimeLaws:
    if theta_over_lambda < 0 or not lambda_a > 0:
        raise ValueError("need theta/lambda_a >= 0 and lambda_a > 0")
    return MutationTimeLaws(float(theta_over_lambda), float(lambda_a))


@dataclass(frozen=True)
class AtLeast:
    """Size set {j >= k}."""

    k: int

    def __contains__(self, j) -> bool:
        return j >= self.k

    def __call__(self, j) -> bool:
        return j >= self.k


SizeSet = Union[AtLeast, range, Iterable[int], Callable[[int], bool]]


def _set_probability(clone_pmf: Pmf, size_set: SizeSet) -> float:
    if isinstance(size_set, AtLeast):
        return clone_pmf.sf(size_set.k - 1)
    if callable(size_set):
        # predicates are evaluated on the explicit support only
        return float(sum(p for j, p in enumerate(clone_pmf.probs) if size_set(j)))
    members = {int(j) for j in size_set}
    return float(sum(clone_pmf.probs[j] for j in members if 0 <= j <= clone_pmf.kmax))


def largest_clone_cdf(theta: float, lambda_a: float, clone_pmf: Pmf, k: int) -> float:
    """P[M* <= k] = exp(-(theta/lambda_A) P[Y(xi) > k])."""
    return math.exp(-theta / lambda_a * clone_pmf.sf(k))


def clone_census_rate(theta: float, lambda_a: float, clone_pmf: Pmf, size_set: SizeSet) -> float:
    """Poisson mean (theta/lambda_A) P[Y(xi) in I] of the number of clones with size in I."""
    return theta / lambda_a * _set_probability(clone_pmf, size_set)


@dataclass(frozen=True)
class PopulationLimit:
    """Large-population limit at fixed size n with theta = n mu a."""

    theta: float


@dataclass(frozen=True)
class TimeLimit:
    """Large-time limit with eta = mu a e^{lambda t} fixed, from c0 founders."""

    eta: float
    c0: int = 1


def mean_sfs_limit(
    S: int,
    mode: PopulationLimit | TimeLimit,
    a: float,
    b: float,
    kmax: int = DEFAULT_KMAX,
    clone_pmf: Pmf | None = None,
) -> np.ndarray:
    """Expected SFS counts S P[B* = k] or S P[B° = k], k = 0..kmax.

    Neutral calibration: every cell divides at rate a and dies at rate b, so
    wildtype and clones share the growth rate lambda = a - b.
    """
    if S < 0:
        raise ValueError("S must be >= 0")
    lam = a - b
    if not lam > 0:
        raise ValueError("need a > b")
    if S == 0:
        return np.zeros(kmax + 1)
    if clone_pmf is None:
        clone_pmf = clone_size_pmf(BirthDeathParams(a, b), lam, kmax)
    if isinstance(mode, PopulationLimit):
        law = bstar_pmf(mode.theta, lam, clone_pmf, kmax)
    elif isinstance(mode, TimeLimit):
        law = bcirc_pmf(mode.eta, a, b, mode.c0, clone_pmf, kmax)
    else:
        raise TypeError(f"unknown limit mode {mode!r}")
    return S * law.probs
