"""Truncated probability mass functions and power-series arithmetic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Pmf:
    """pmf on ``0..kmax`` with the remaining mass reported as ``tail_mass``."""

    probs: np.ndarray
    tail_mass: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if np.any(probs < -1e-12):
            raise ValueError(f"negative probability {probs.min()!r}")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        tail = float(self.tail_mass)
        if tail < -1e-9 or tail > 1 + 1e-12:
            raise ValueError(f"tail_mass out of range: {tail!r}")
        object.__setattr__(self, "tail_mass", min(max(tail, 0.0), 1.0))

    @classmethod
    def from_probs(cls, probs) -> "Pmf":
        """Build from explicit probabilities; the tail is whatever is missing."""
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        return cls(probs, max(0.0, 1.0 - float(np.sum(probs))))

    @property
    def kmax(self) -> int:
        return len(self.probs) - 1

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, k):
        return self.probs[k]

    def normalization_error(self) -> float:
        return abs(float(np.sum(self.probs)) + self.tail_mass - 1.0)

    def mean(self) -> float:
        """Mean of the explicit part (a lower bound when ``tail_mass > 0``)."""
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return float(np.sum(self.probs[: k + 1]))

    def sf(self, k: int) -> float:
        """P[X > k], counting the tail mass."""
        if k < 0:
            return 1.0
        return float(np.sum(self.probs[k + 1 :])) + self.tail_mass

    def pgf(self, z: float) -> float:
        """Truncated generating function sum_k p_k z^k."""
        return float(np.polynomial.polynomial.polyval(z, self.probs))

    def truncate(self, kmax: int) -> "Pmf":
        if kmax >= self.kmax:
            return self
        return Pmf(self.probs[: kmax + 1], self.tail_mass + float(np.sum(self.probs[kmax + 1 :])))


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series; ``coeffs[k]`` multiplies z^k."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a power series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def length(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __add__(self, other):
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[0] += other
            return PowerSeries(c)
        n = min(self.length, other.length)
        return PowerSeries(self.coeffs[:n] + other.coeffs[:n])

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PowerSeries(self.coeffs * other)
        n = min(self.length, other.length)
        return PowerSeries(np.convolve(self.coeffs[:n], other.coeffs[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return PowerSeries(self.coeffs / other)
        return self * other.reciprocal()

    def reciprocal(self) -> "PowerSeries":
        """1/f by the triangular recurrence f * g = 1."""
        f = self.coeffs
        if f[0] == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        n = len(f)
        g = np.zeros(n)
        g[0] = 1.0 / f[0]
        for k in range(1, n):
            g[k] = -np.dot(f[1 : k + 1], g[k - 1 :: -1][:k]) / f[0]
        return PowerSeries(g)

    def power(self, m: float) -> "PowerSeries":
        """f^m.

        Positive integer m uses binary powering (no division, so no error
        growth when f[0] is small); other real m use the J.C.P. Miller
        recurrence, which needs f[0] > 0.
        """
        f = self.coeffs
        if m == 0:
            out = np.zeros(len(f))
            out[0] = 1.0
            return PowerSeries(out)
        if float(m).is_integer() and m > 0:
            return self._int_power(int(m))
        if f[0] <= 0:
            raise ValueError("real powers need a positive constant term")
        n = len(f)
        p = np.zeros(n)
        p[0] = f[0] ** m
        j = np.arange(1, n)
        for k in range(1, n):
            jj = j[:k]
            p[k] = np.dot(((m + 1) * jj - k) * f[1 : k + 1], p[k - 1 :: -1][:k]) / (k * f[0])
        return PowerSeries(p)

    def _int_power(self, m: int) -> "PowerSeries":
        result = None
        base = self
        while m:
            if m & 1:
                result = base if result is None else result * base
            m >>= 1
            if m:
                base = base * base
        return result

    def __call__(self, z: float) -> float:
        return float(np.polynomial.polynomial.polyval(z, self.coeffs))
