"""Exact finite-n laws: B(sigma_n) without deaths, and B(tau_n) for a pure-birth wildtype."""

from __future__ import annotations

import math

import numpy as np
from mpmath.ctx_iv import MPIntervalContext
from scipy import integrate, special

from ..twotype import ModelParams
from .clone import QuadratureError, _check_quad
from .hypergeom import hyp2f1
from .series import Pmf, PowerSeries

ANGERER_TARGET = 1e-10
ANGERER_MAX_PREC = 1 << 16


class PrecisionError(ArithmeticError):
    """Interval evaluation could not certify the requested accuracy."""


def angerer_pmf(n: int, alpha_a: float, alpha_b: float, kmax: int | None = None, target: float = ANGERER_TARGET) -> Pmf:
    """P[B(sigma_n) = k] for the no-death model with alpha_a + nu = alpha_b.

    P[k] = sum_{i=1}^{n-k} (-1)^{n-i} C(n-k-1, i-1) C(i rho - 1, n-1),
    rho = alpha_a/alpha_b.  The alternating sum cancels badly, so it is
    evaluated in interval arithmetic and the working precision is doubled
    until every interval is narrower than ``target``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (alpha_b > alpha_a > 0):
        raise ValueError("need alpha_b > alpha_a > 0 (nu = alpha_b - alpha_a > 0)")
    kmax = n - 1 if kmax is None else min(int(kmax), n - 1)
    if n == 1:
        return Pmf(np.array([1.0]), 0.0)
    prec = 64 + 2 * n
    while prec <= ANGERER_MAX_PREC:
        probs, width = _angerer_intervals(n, alpha_a, alpha_b, kmax, prec)
        if width <= target:
            tail = max(0.0, 1.0 - float(np.sum(probs)))
            return Pmf(probs, tail if kmax < n - 1 else 0.0)
        prec *= 2
    raise PrecisionError(f"could not certify {target:g} accuracy for n = {n} below {ANGERER_MAX_PREC} bits")


def _angerer_intervals(n, alpha_a, alpha_b, kmax, prec):
    ctx = MPIntervalContext()
    ctx.prec = prec
    rho = ctx.mpf(alpha_a) / ctx.mpf(alpha_b)
    fact = ctx.mpf(math.factorial(n - 1))
    # c_i = C(i rho - 1, n - 1)
    c = [None]
    for i in range(1, n + 1):
        x = i * rho - 1
        prod = ctx.mpf(1)
        for j in range(n - 1):
            prod *= x - j
        c.append(prod / fact)
    probs = np.empty(kmax + 1)
    width = 0.0
    for k in range(kmax + 1):
        m = n - k
        acc = ctx.mpf(0)
        for i in range(1, m + 1):
            term = math.comb(m - 1, i - 1) * c[i]
            acc = acc + term if (n - i) % 2 == 0 else acc - term
        lo, hi = float(acc.a), float(acc.b)
        width = max(width, hi - lo)
        probs[k] = max(0.0, float(acc.mid))
    return probs, width


def b_tau_mean(n: int, nu: float, alpha_a: float, lambda_b: float) -> float:
    """E[B(tau_n)] = (n-1) nu / (alpha_a - lambda_b), or inf when lambda_b >= alpha_a."""
    if nu == 0 or n <= 1:
        return 0.0
    if lambda_b >= alpha_a:
        return math.inf
    return (n - 1) * nu / (alpha_a - lambda_b)


def _check_yule(params: ModelParams):
    if params.beta_a != 0:
        raise ValueError("B(tau_n) laws need beta_a = 0")
    if params.a0 != 1:
        raise ValueError("B(tau_n) laws are for a single founder (a0 = 1)")
    if not params.alpha_a > 0:
        raise ValueError("alpha_a must be positive")


def _g(lam: float, t):
    """(e^{lam t} - 1)/lam, continuous at lam = 0."""
    t = np.asarray(t, dtype=float)
    if lam == 0:
        return t
    return np.expm1(lam * t) / lam


def cell_pgf(params: ModelParams, z: float, method: str = "auto", tol: float = 1e-12) -> float:
    """Mutant offspring pgf of one wildtype cell of Exponential(alpha_a) age.

    ``method="closed"`` uses the hypergeometric form (lambda_b > 0 only);
    ``method="integral"`` integrates (1 + alpha_b (1-z) g(t))^(-nu/alpha_b)
    against the age density, valid for any lambda_b.
    """
    _check_yule(params)
    aa, nu, ab, bb = params.alpha_a, params.nu, params.alpha_b, params.beta_b
    lam_b = ab - bb
    if nu == 0:
        return 1.0
    if method == "auto":
        method = "closed" if lam_b > 0 else "integral"
    if method == "closed":
        if not lam_b > 0:
            raise ValueError("closed form needs lambda_b > 0")
        q = bb / ab
        pref = 1.0 / (1.0 + lam_b * nu / (aa * ab))
        return pref * hyp2f1(1.0, nu / ab, 1.0 + nu / ab + aa / lam_b, (q - z) / (q - 1.0), tol=tol)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")

    def f(u):
        if u <= 0.0:
            return 0.0 if lam_b >= 0 else _cell_pgf_limit(params, z)
        t = -math.log(u) / aa
        g = float(_g(lam_b, t))
        if ab == 0:
            return math.exp(-nu * (1.0 - z) * g)
        return math.exp(-nu / ab * math.log1p(ab * (1.0 - z) * g))

    val, err = integrate.quad(f, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=500)
    if err > 100 * tol:
        raise QuadratureError(f"cell pgf quadrature error {err:.3g}")
    return val


def _cell_pgf_limit(params, z):
    # t -> infinity with lambda_b < 0: g -> 1/|lambda_b|
    ab, nu, lam_b = params.alpha_b, params.nu, params.lambda_b
    g = -1.0 / lam_b
    if ab == 0:
        return math.exp(-nu * (1.0 - z) * g)
    return math.exp(-nu / ab * math.log1p(ab * (1.0 - z) * g))


def b_tau_pgf(n: int, params: ModelParams, z: float, method: str = "auto", tol: float = 1e-12) -> float:
    """E[z^{B(tau_n)}] = phi(z)^(n-1), phi the per-cell pgf (see :func:`cell_pgf`)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= z < 1.0:
        raise ValueError("z must lie in [0, 1)")
    return cell_pgf(params, z, method, tol) ** (n - 1)


def cell_offspring_pmf(params: ModelParams, kmax: int, tol: float = 1e-13) -> Pmf:
    """Law of the mutant descendants of one wildtype cell of Exponential(alpha_a) age.

    Given age t the count is negative binomial with shape nu/alpha_b and odds
    alpha_b g(t) (Poisson(nu g(t)) when alpha_b = 0); this is mixed over the
    age with vector adaptive quadrature in u = exp(-alpha_a t).
    """
    _check_yule(params)
    aa, nu, ab, bb = params.alpha_a, params.nu, params.alpha_b, params.beta_b
    lam_b = ab - bb
    k = np.arange(kmax + 1, dtype=float)
    if nu == 0:
        probs = np.zeros(kmax + 1)
        probs[0] = 1.0
        return Pmf(probs, 0.0)
    shape = nu / ab if ab > 0 else None
    log_coef = special.gammaln(shape + k) - special.gammaln(shape) - special.gammaln(k + 1) if shape else None

    def at_g(g):
        if ab == 0:
            mean = nu * g
            return np.exp(k * math.log(mean) - mean - special.gammaln(k + 1)) if mean > 0 else (k == 0).astype(float)
        y = ab * g
        if y == 0:
            return (k == 0).astype(float)
        return np.exp(log_coef - shape * math.log1p(y) + k * (math.log(y) - math.log1p(y)))

    def integrand(u):
        if u <= 0.0:
            if lam_b < 0:
                return at_g(-1.0 / lam_b)
            return np.zeros(kmax + 1)
        t = -math.log(u) / aa
        return at_g(float(_g(lam_b, t)))

    res, err, info = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=0.0, norm="max", limit=20_000, full_output=True)
    _check_quad(info, err, tol, "cell offspring")
    probs = np.clip(res, 0.0, None)
    return Pmf(probs, max(0.0, 1.0 - float(np.sum(probs))))


def b_tau_pmf(n: int, params: ModelParams, kmax: int, tol: float = 1e-13) -> Pmf:
    """P[B(tau_n) = k], k = 0..kmax, as coefficients of phi(z)^(n-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cell = cell_offspring_pmf(params, kmax, tol)
    series = PowerSeries(cell.probs).power(n - 1)
    probs = np.clip(series.coeffs, 0.0, None)
    return Pmf(probs, max(0.0, 1.0 - float(np.sum(probs))))
