"""Empirical pmfs, standard errors and empirical-vs-theory comparison."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .analytics.series import Pmf


@dataclass(frozen=True)
class EmpiricalPmf:
    """Histogram of replicate values; ``discard_count`` counts rejected replicates."""

    counts: Mapping[int, int]
    reps: int
    discard_count: int = 0

    def __post_init__(self):
        counts = {int(k): int(v) for k, v in sorted(self.counts.items()) if v}
        if any(k < 0 or v < 0 for k, v in counts.items()):
            raise ValueError("counts must be non-negative and indexed by k >= 0")
        if sum(counts.values()) != self.reps:
            raise ValueError(f"counts sum to {sum(counts.values())}, expected reps = {self.reps}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_values(cls, values: Iterable[int], discard_count: int = 0) -> "EmpiricalPmf":
        counts = Counter(int(v) for v in values)
        return cls(dict(counts), sum(counts.values()), discard_count)

    @property
    def kmax(self) -> int:
        return max(self.counts, default=0)

    def prob(self, k: int) -> float:
        return self.counts.get(int(k), 0) / self.reps

    def probs(self, kmax: int | None = None) -> np.ndarray:
        """Estimates on 0..kmax; mass above kmax is left out."""
        kmax = self.kmax if kmax is None else kmax
        out = np.zeros(kmax + 1)
        for k, c in self.counts.items():
            if k <= kmax:
                out[k] = c
        return out / self.reps

    def mean(self) -> float:
        return sum(k * c for k, c in self.counts.items()) / self.reps

    def variance(self) -> float:
        m = self.mean()
        return sum(c * (k - m) ** 2 for k, c in self.counts.items()) / self.reps

    def cdf(self, k: int) -> float:
        return sum(c for j, c in self.counts.items() if j <= k) / self.reps

    @property
    def discard_rate(self) -> float:
        return self.discard_count / (self.reps + self.discard_count)


class StdErr(NamedTuple):
    """Standard error of one cell; ``rule_of_three`` marks a degenerate (0 or all) cell."""

    se: float
    rule_of_three: bool
    reps: int

    @property
    def band(self) -> float:
        """SE used for comparisons: 3/reps for degenerate cells."""
        return 3.0 / self.reps if self.rule_of_three else self.se


def per_k_se(emp: EmpiricalPmf, ks: Iterable[int] | None = None) -> dict[int, StdErr]:
    """Binomial standard error sqrt(p(1-p)/reps) per k."""
    ks = range(emp.kmax + 1) if ks is None else ks
    out = {}
    for k in ks:
        c = emp.counts.get(int(k), 0)
        p = c / emp.reps
        # p_hat = 1 is the mirror image of p_hat = 0
        out[int(k)] = StdErr(math.sqrt(p * (1.0 - p) / emp.reps), c == 0 or c == emp.reps, emp.reps)
    return out


def _as_mass(x) -> tuple[dict[int, float], float, int | None]:
    """(explicit masses, tail mass, truncation point or None)."""
    if isinstance(x, Pmf):
        return {k: float(p) for k, p in enumerate(x.probs) if p}, x.tail_mass, x.kmax
    if isinstance(x, EmpiricalPmf):
        return {k: c / x.reps for k, c in x.counts.items()}, 0.0, None
    if isinstance(x, Mapping):
        total = float(sum(x.values()))
        return {int(k): float(v) / total for k, v in x.items() if v}, 0.0, None
    arr = np.asarray(x, dtype=float)
    arr = arr / arr.sum()
    return {k: float(p) for k, p in enumerate(arr) if p}, 0.0, None


def tv_distance(p, q) -> float:
    """Total variation distance; mass beyond a truncated Pmf goes to one sentinel bucket."""
    pm, pt, pk = _as_mass(p)
    qm, qt, qk = _as_mass(q)
    cut = min((k for k in (pk, qk) if k is not None), default=None)
    if cut is not None:
        pt += sum(v for k, v in pm.items() if k > cut)
        qt += sum(v for k, v in qm.items() if k > cut)
        pm = {k: v for k, v in pm.items() if k <= cut}
        qm = {k: v for k, v in qm.items() if k <= cut}
    support = set(pm) | set(qm)
    total = sum(abs(pm.get(k, 0.0) - qm.get(k, 0.0)) for k in support) + abs(pt - qt)
    return min(1.0, 0.5 * total)


def loglog_slope(pmf, kmin: int, kmax: int) -> float:
    """Least-squares slope of log p_k against log k on [kmin, kmax]."""
    probs = pmf.probs if isinstance(pmf, Pmf) else np.asarray(pmf, dtype=float)
    if kmin < 1 or kmax <= kmin or kmax >= len(probs):
        raise ValueError(f"range [{kmin}, {kmax}] not inside 1..{len(probs) - 1}")
    k = np.arange(kmin, kmax + 1)
    p = probs[kmin : kmax + 1]
    if np.any(p <= 0):
        raise ValueError("probabilities must be positive on the fitted range")
    slope, _ = np.polyfit(np.log(k), np.log(p), 1)
    return float(slope)


@dataclass(frozen=True)
class CompareRow:
    k: int
    empirical: float
    theory: float
    se: float
    rule_of_three: bool
    passed: bool

    @property
    def deviation_se(self) -> float:
        band = self.se
        if band == 0:
            return 0.0 if self.empirical == self.theory else math.inf
        return abs(self.empirical - self.theory) / band


@dataclass(frozen=True)
class CompareReport:
    rows: tuple[CompareRow, ...]
    tv: float
    se_multiplier: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def pass_rate(self) -> float:
        return sum(r.passed for r in self.rows) / len(self.rows) if self.rows else 1.0

    @property
    def max_deviation_se(self) -> float:
        return max((r.deviation_se for r in self.rows), default=0.0)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "pass_rate": self.pass_rate,
            "tv": self.tv,
            "max_deviation_se": self.max_deviation_se,
            "se_multiplier": self.se_multiplier,
            **self.meta,
            "rows": [
                {
                    "k": r.k,
                    "empirical": r.empirical,
                    "theory": r.theory,
                    "se": r.se,
                    "rule_of_three": r.rule_of_three,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def table(self) -> str:
        lines = [f"{'k':>5} {'empirical':>12} {'theory':>12} {'se':>10} {'dev/se':>8}  verdict"]
        for r in self.rows:
            flag = "*" if r.rule_of_three else " "
            lines.append(
                f"{r.k:>5} {r.empirical:>12.6g} {r.theory:>12.6g} {r.se:>10.3g}{flag}{r.deviation_se:>8.2f}  "
                + ("pass" if r.passed else "FAIL")
            )
        lines.append(
            f"TV = {self.tv:.4g}; max deviation = {self.max_deviation_se:.2f} SE; "
            f"aggregate {'pass' if self.passed else 'FAIL'}"
        )
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def compare_arrays(
    ks: Iterable[int],
    empirical: np.ndarray,
    se: np.ndarray,
    theory: np.ndarray,
    zero_count: np.ndarray | None = None,
    se_multiplier: float = 3.0,
    tv: float = math.nan,
    meta: dict | None = None,
) -> CompareReport:
    """Per-k band check on pre-computed estimates, standard errors and theory values."""
    rows = []
    for i, k in enumerate(ks):
        r3 = bool(zero_count[i]) if zero_count is not None else False
        band = float(se[i])
        dev = abs(float(empirical[i]) - float(theory[i]))
        # a zero-count cell passes when theory sits under the rule-of-three bound itself
        limit = band if r3 else se_multiplier * band
        rows.append(CompareRow(int(k), float(empirical[i]), float(theory[i]), band, r3, dev <= limit))
    return CompareReport(tuple(rows), tv, se_multiplier, dict(meta or {}))


def compare_report(emp: EmpiricalPmf, theory: Pmf, k_range: Iterable[int], se_multiplier: float = 3.0) -> CompareReport:
    """Check |p_hat - p| <= se_multiplier * SE for each k in ``k_range``.

    Zero-count cells are judged against the rule-of-three bound 3/reps.
    """
    ks = list(k_range)
    ses = per_k_se(emp, ks)
    tprobs = theory.probs if isinstance(theory, Pmf) else np.asarray(theory, dtype=float)
    th = np.array([tprobs[k] if k < len(tprobs) else 0.0 for k in ks])
    return compare_arrays(
        ks,
        np.array([emp.prob(k) for k in ks]),
        np.array([ses[k].band for k in ks]),
        th,
        np.array([ses[k].rule_of_three for k in ks]),
        se_multiplier,
        tv_distance(emp, theory),
        {"reps": emp.reps, "discard_count": emp.discard_count},
    )
