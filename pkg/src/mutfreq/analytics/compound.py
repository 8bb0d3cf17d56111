"""Mutant-count laws in the small-mutation limits.

``B*`` (large population) is compound Poisson with Poisson mean theta/lambda_A
and clone-size summands.  ``B°`` (large time) mixes the Poisson mean over the
wildtype limit W, which gives a rational function of r(z) for its pgf.
"""

from __future__ import annotations

import math

import numpy as np

from .series import Pmf, PowerSeries


def _clone_probs(clone_pmf: Pmf, kmax: int) -> np.ndarray:
    p = np.zeros(kmax + 1)
    n = min(kmax, clone_pmf.kmax) + 1
    p[:n] = clone_pmf.probs[:n]
    return p


def compound_poisson_pmf(mean: float, clone_pmf: Pmf, kmax: int) -> Pmf:
    """Law of a Poisson(mean) sum of i.i.d. draws from ``clone_pmf``.

    Size-biased (Panjer) recursion: P[0] = exp(-mean (1 - p0)),
    P[n] = (mean/n) sum_j j p_j P[n-j].
    """
    if mean < 0:
        raise ValueError("Poisson mean must be >= 0")
    p = _clone_probs(clone_pmf, kmax)
    out = np.zeros(kmax + 1)
    out[0] = math.exp(-mean * (1.0 - p[0]))
    jp = np.arange(kmax + 1) * p
    for n in range(1, kmax + 1):
        out[n] = mean / n * np.dot(jp[1 : n + 1], out[n - 1 :: -1][:n])
    return Pmf(out, max(0.0, 1.0 - float(np.sum(out))))


def bstar_pmf(theta: float, lambda_a: float, clone_pmf: Pmf, kmax: int | None = None) -> Pmf:
    """P[B* = k] with B* compound Poisson(theta/lambda_a) over clone sizes."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if not lambda_a > 0:
        raise ValueError("lambda_a must be positive")
    kmax = clone_pmf.kmax if kmax is None else kmax
    return compound_poisson_pmf(theta / lambda_a, clone_pmf, kmax)


def bstar_pgf(theta: float, lambda_a: float, r_of_z: float) -> float:
    """E[z^{B*}] = exp((theta/lambda_a)(r(z) - 1)) given r(z)."""
    return math.exp(theta / lambda_a * (r_of_z - 1.0))


def bcirc_pgf(eta: float, alpha_a: float, beta_a: float, a0: int, r_of_z: float) -> float:
    """E[z^{B°}] given r(z)."""
    lam = alpha_a - beta_a
    d = r_of_z - 1.0
    return ((lam * lam - beta_a * eta * d) / (lam * lam - alpha_a * eta * d)) ** a0


def bcirc_pmf(eta: float, alpha_a: float, beta_a: float, a0: int, clone_pmf: Pmf, kmax: int | None = None) -> Pmf:
    """P[B° = k] by series arithmetic on the pgf.

    With R = r - 1 as a power series, the pgf is
    ((lambda^2 - beta eta R) / (lambda^2 - alpha eta R))^a0.
    """
    lam = alpha_a - beta_a
    if not lam > 0:
        raise ValueError("supercritical wildtype required (alpha_a > beta_a)")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if int(a0) != a0 or a0 < 1:
        raise ValueError("a0 must be a positive integer")
    kmax = clone_pmf.kmax if kmax is None else kmax
    R = PowerSeries(_clone_probs(clone_pmf, kmax)) - 1.0
    num = lam * lam - beta_a * eta * R
    den = lam * lam - alpha_a * eta * R
    if den.coeffs[0] <= 0:
        raise ZeroDivisionError("denominator series has a non-positive constant term")
    base = num * den.reciprocal()
    series = base.power(int(a0)) if a0 > 1 else base
    probs = np.clip(series.coeffs, 0.0, None)
    return Pmf(probs, max(0.0, 1.0 - float(np.sum(probs))))
