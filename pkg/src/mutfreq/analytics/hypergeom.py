"""Gauss hypergeometric function 2F1 for real arguments x < 1."""

from __future__ import annotations

import math
import warnings

from scipy import integrate

SERIES_RADIUS = 0.5
MAX_SERIES_TERMS = 100_000


class HypergeometricDomainError(ValueError):
    """Parameters or argument outside the implemented region."""


class HypergeometricConvergenceError(ArithmeticError):
    """The requested tolerance could not be certified."""


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def hyp2f1(a: float, b: float, c: float, x: float, tol: float = 1e-14) -> float:
    """2F1(a, b; c; x) for real x < 1.

    Uses the power series for |x| <= 0.5.  For x < -0.5 a Pfaff transformation
    maps the argument into (1/3, 1); arguments in (0.5, 1) are handled by the
    Euler integral with adaptive quadrature, which needs c > b > 0 (or
    c > a > 0).  Anything else raises :class:`HypergeometricDomainError`.
    """
    if _is_nonpositive_int(c):
        raise HypergeometricDomainError(f"c = {c} is a non-positive integer")
    if not math.isfinite(x):
        raise HypergeometricDomainError("x must be finite")
    if a == 0 or b == 0 or x == 0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _series(a, b, c, x, tol, terminating=True)
    if abs(x) <= SERIES_RADIUS:
        return _series(a, b, c, x, tol)
    if x >= 1:
        raise HypergeometricDomainError(f"x = {x} >= 1 is outside the implemented domain")
    if x > 0:
        return _euler(a, b, c, x, tol)
    # Pfaff: F(a,b;c;x) = (1-x)^(-a) F(a, c-b; c; x/(x-1)), and the a<->b mirror
    w = x / (x - 1.0)
    last = None
    for p, q in ((a, b), (b, a)):
        pref = (1.0 - x) ** (-p)
        try:
            if w <= SERIES_RADIUS:
                return pref * _series(p, c - q, c, w, tol / max(pref, 1.0))
            return pref * _euler(p, c - q, c, w, tol / max(pref, 1.0))
        except HypergeometricDomainError as err:
            last = err
    raise HypergeometricDomainError(f"no convergent representation for x = {x}: {last}")


def _series(a, b, c, x, tol, terminating=False):
    total = 1.0
    term = 1.0
    for k in range(MAX_SERIES_TERMS):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        term *= ratio
        total += term
        if terminating and term == 0.0:
            return total
        if abs(term) <= 0.1 * tol * max(1.0, abs(total)) and abs(ratio) < 0.75:
            return total
    if terminating:
        return total
    raise HypergeometricConvergenceError(f"series did not converge for x = {x}")


def _euler(a, b, c, x, tol):
    # Euler integral needs c > (integration parameter) > 0; F is symmetric in a, b
    for p, q in ((b, a), (a, b)):
        if c > p > 0:
            break
    else:
        raise HypergeometricDomainError(f"Euler integral needs c > a > 0 or c > b > 0 (a={a}, b={b}, c={c})")
    log_coef = math.lgamma(c) - math.lgamma(p) - math.lgamma(c - p)
    coef = math.exp(log_coef)
    target = tol / max(coef, 1e-300)
    with warnings.catch_warnings():
        # convergence is judged from the returned error estimate below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda t: (1.0 - x * t) ** (-q),
            0.0,
            1.0,
            weight="alg",
            wvar=(p - 1.0, c - p - 1.0),
            epsabs=0.5 * target,
            epsrel=0.5 * tol,
            limit=500,
        )
    result = coef * val
    if coef * err > 10 * tol * max(1.0, abs(result)):
        raise HypergeometricConvergenceError(
            f"Euler integral error {coef * err:.3g} exceeds tolerance {tol:.3g} (a={a}, b={b}, c={c}, x={x})"
        )
    return result
