"""Size law of a clone of exponentially distributed age."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate

from ..process import BirthDeathParams, bd_pgf
from .hypergeom import HypergeometricConvergenceError, HypergeometricDomainError, hyp2f1
from .series import Pmf

log = logging.getLogger(__name__)

DEFAULT_KMAX = 10_000
ROUNDOFF_SLACK = 10.0


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def bd_pmf_vector(alpha: float, beta: float, t: float, kmax: int) -> np.ndarray:
    """P[Y(t) = k], k = 0..kmax, for a birth-death process from one cell."""
    p0, one_minus_b = _bd_transition(alpha, beta, t)
    out = np.empty(kmax + 1)
    out[0] = p0
    if kmax >= 1:
        k = np.arange(kmax)
        with np.errstate(divide="ignore"):
            out[1:] = (1.0 - p0) * one_minus_b * np.exp(k * np.log1p(-one_minus_b))
    return out


def _bd_transition(alpha: float, beta: float, t: float) -> tuple[float, float]:
    """(P[Y(t)=0], 1 - b) with P[Y(t)=k] = (1-P0)(1-b) b^(k-1) for k >= 1."""
    lam = alpha - beta
    x = lam * t
    if abs(x) < 1e-8:
        h = t
        g = t
        eg = 1.0
    elif x > 0:
        h = -math.expm1(-x) / lam
        g = math.expm1(x) / lam if x < 700 else math.inf
        eg = math.exp(x) if x < 700 else math.inf
    else:
        h = -math.expm1(-x) / lam if -x < 700 else math.inf
        g = math.expm1(x) / lam
        eg = math.exp(x)
    p0 = 1.0 if math.isinf(h) else beta * h / (1.0 + beta * h)
    if math.isinf(eg) or math.isinf(g):
        # 1 - b = 1/(e^{x} + beta g) for large x
        one_minus_b = 0.0
        if x > 0:
            one_minus_b = math.exp(-x) / (1.0 + beta * -math.expm1(-x) / lam)
        return p0, one_minus_b
    return p0, 1.0 / (eg + beta * g)


def _power_law_weights(clone: BirthDeathParams, lambda_a: float, kmax: int) -> np.ndarray:
    """Rough per-k magnitude used to scale the quadrature tolerance in the tail."""
    lam_b = clone.net_rate
    if lam_b <= 0:
        return np.ones(kmax + 1)
    rho = lambda_a / lam_b
    q = clone.death_rate / clone.birth_rate
    log_c = math.log(rho) + (1.0 - rho) * math.log1p(-q) + math.lgamma(1.0 + rho)
    k = np.arange(kmax + 1, dtype=float)
    k[0] = 1.0
    w = np.exp(np.minimum(0.0, log_c - (1.0 + rho) * np.log(k)))
    return np.maximum(w, 1e-280)


def clone_size_pmf(clone: BirthDeathParams, lambda_a: float, kmax: int = DEFAULT_KMAX, tol: float = 1e-12) -> Pmf:
    """P[Y(xi) = k] for clone age xi ~ Exponential(lambda_a).

    The birth-death pmf is integrated against the age density in the variable
    u = exp(-lambda_a t) with vector-valued adaptive Gauss-Kronrod quadrature.
    Each component's tolerance is scaled by its expected power-law size, so the
    tail probabilities come out with relative accuracy as well.
    """
    if not lambda_a > 0:
        raise ValueError("lambda_a must be positive")
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    alpha, beta = clone.birth_rate, clone.death_rate
    w = _power_law_weights(clone, lambda_a, kmax)

    def integrand(u):
        if u <= 0.0:
            return np.zeros(kmax + 1)
        t = -math.log(u) / lambda_a
        return bd_pmf_vector(alpha, beta, t, kmax) / w

    # breakpoints where the typical clone size passes 2^j
    points = None
    lam_b = clone.net_rate
    if lam_b > 0 and kmax > 1:
        js = np.arange(1, int(math.log2(kmax)) + 3)
        u = np.exp(-lambda_a * js * math.log(2.0) / lam_b)
        u = u[(u > 1e-300) & (u < 1.0)]
        points = sorted(set(u.tolist())) or None
    res, err, info = integrate.quad_vec(
        integrand, 0.0, 1.0, epsabs=tol, epsrel=0.0, norm="max", limit=20_000, points=points, full_output=True
    )
    _check_quad(info, err, tol, "clone-size")
    probs = np.clip(res * w, 0.0, None)
    return Pmf(probs, max(0.0, 1.0 - float(np.sum(probs))))


def _check_quad(info, err, tol, what):
    # status 2 means the error estimate hit rounding noise; accept it near the target
    if info.success or (info.status == 2 and err <= ROUNDOFF_SLACK * tol):
        return
    raise QuadratureError(
        f"{what} quadrature did not converge: {info.message} (error {err:.3g}, tol {tol:.3g}, {len(info.intervals)} intervals)"
    )


def clone_age_pgf(clone: BirthDeathParams, lambda_a: float, z: float, tol: float = 1e-12) -> float:
    """r(z) = E[z^{Y(xi)}], xi ~ Exponential(lambda_a).

    Closed form 1 - (1 - q) F(1, rho; 1 + rho; (q - z)/(1 - z)) with
    rho = lambda_a/lambda_b, q = beta/alpha, used when lambda_b > 0; otherwise
    (or when the hypergeometric evaluation is out of range) the pgf is
    integrated against the age density.
    """
    if not lambda_a > 0:
        raise ValueError("lambda_a must be positive")
    if not 0.0 <= z < 1.0:
        raise ValueError("z must lie in [0, 1)")
    value, _ = clone_age_pgf_detail(clone, lambda_a, z, tol)
    return value


def clone_age_pgf_detail(clone: BirthDeathParams, lambda_a: float, z: float, tol: float = 1e-12) -> tuple[float, str]:
    """``(r(z), method)`` where method is ``"hypergeometric"`` or ``"quadrature"``."""
    lam_b = clone.net_rate
    if lam_b > 0 and clone.birth_rate > 0:
        q = clone.death_rate / clone.birth_rate
        rho = lambda_a / lam_b
        try:
            return 1.0 - (1.0 - q) * hyp2f1(1.0, rho, 1.0 + rho, (q - z) / (1.0 - z), tol=tol), "hypergeometric"
        except (HypergeometricDomainError, HypergeometricConvergenceError) as err:
            log.info("clone pgf falls back to quadrature: %s", err)
    return _pgf_quadrature(clone, lambda_a, z, tol), "quadrature"


def _pgf_quadrature(clone, lambda_a, z, tol):
    def f(u):
        if u <= 0.0:
            return _pgf_at_infinity(clone, z)
        return bd_pgf(clone, -math.log(u) / lambda_a, z)

    val, err = integrate.quad(f, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=500)
    if err > 100 * tol:
        raise QuadratureError(f"clone pgf quadrature error {err:.3g}")
    return val


def _pgf_at_infinity(clone, z):
    # limit of E[z^{Y(t)}] as t -> infinity
    lam = clone.net_rate
    if lam > 0:
        return clone.death_rate / clone.birth_rate
    if clone.birth_rate == 0 and clone.death_rate == 0:
        return z
    return 1.0
