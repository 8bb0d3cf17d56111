"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (collected again in the terminal
summary).  Seeds are fixed constants chosen before any of these runs.
Criteria 1, 2 and 10 compare finite runs (n = 1000, t = 10) against their
n -> oo or t -> oo limits.  When such a comparison fails the test is marked
xfail rather than passed, but only if the simulation agrees with the exact
finite-size expectation, which the verdict line also reports.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from mutfreq.analytics.clone import clone_age_pgf, clone_size_pmf
from mutfreq.analytics.compound import bstar_pmf
from mutfreq.analytics.finite import angerer_pmf
from mutfreq.analytics.limits import AtLeast, PopulationLimit, limit_constants, mean_sfs_limit, tail_constant
from mutfreq.cli import main
from mutfreq.multisite import MultisiteParams, mean_sfs_empirical
from mutfreq.process import BirthDeathParams
from mutfreq.stats import EmpiricalPmf, compare_arrays, loglog_slope, tv_distance
from mutfreq.twotype import (
    FixedTime,
    ModelParams,
    TotalSize,
    WildtypeSize,
    clone_census,
    largest_clone,
    run_replicates,
    run_yule_replicates,
)

from .oracles import brute_compound_poisson, exact_b_sigma

pytestmark = pytest.mark.acceptance


def _drop(outcome):
    return None


def _mutation_count(outcome):
    return outcome.mutation_count


CENSUS_KS = (1, 2, 5, 10)


def _largest_and_census(outcome):
    return largest_clone(outcome), tuple(clone_census(outcome, AtLeast(k)) for k in CENSUS_KS)


def _sfs_vs_limit(verdict, number, mu, seed):
    a, b, S, n, reps = 0.25, 0.18, 50, 1000, 10_000
    params = MultisiteParams(a, b, mu, S, 1)
    start = time.perf_counter()
    sfs = mean_sfs_empirical(params, TotalSize(n), reps, seed, "on_reached", count="accepted", workers=1)
    elapsed = time.perf_counter() - start
    theta = n * mu * a
    ks = np.arange(31)
    sfs = sfs.padded(30)
    theory = mean_sfs_limit(S, PopulationLimit(theta), a, b, kmax=10_000)[:31]
    report = compare_arrays(ks, sfs.mean[:31], sfs.band[:31], theory, sfs.zero_cells[:31])
    # exact finite-n expectation: every site follows the single-site B(sigma_n) law
    m = params.single_site_model()
    exact, _ = exact_b_sigma(n, m.alpha_a, m.beta_a, m.nu, m.alpha_b, m.beta_b)
    finite = compare_arrays(ks, sfs.mean[:31], sfs.band[:31], S * exact[:31], sfs.zero_cells[:31])
    worst = max(report.rows, key=lambda r: r.deviation_se)
    detail = (
        f"theta={theta:g}, lambda={a - b:.2f}, {reps} kept of {reps + sfs.discard_count} runs; "
        f"{sum(r.passed for r in report.rows)}/31 of k<=30 within 3 SE of S*P[B*=k], "
        f"worst k={worst.k} at {worst.deviation_se:.2f} SE; "
        f"vs exact finite-n mean SFS: max {finite.max_deviation_se:.2f} SE"
    )
    verdict(number, report.passed, f"mean SFS at n=1000 vs large-population limit, mu={mu:g}", detail, elapsed)
    if not report.passed:
        # only excusable when the simulator agrees with the exact finite-n law
        assert finite.passed, detail
        pytest.xfail(f"finite-n bias against the n->oo limit ({detail})")


def test_criterion_01_sfs_mu_1e3(verdict):
    _sfs_vs_limit(verdict, 1, 1e-3, 20240601)


def test_criterion_02_sfs_mu_1e2(verdict):
    _sfs_vs_limit(verdict, 2, 1e-2, 20240602)


def test_criterion_03_ld_identity(verdict):
    start = time.perf_counter()
    theta, lam = 0.5, 1.0
    clone = BirthDeathParams(lam, 0.0)
    errs = []
    for z in np.arange(1, 10) / 10:
        r = clone_age_pgf(clone, lam, z)
        lhs = math.exp(theta / lam * (r - 1.0))
        rhs = (1.0 - z) ** (theta / lam * (1.0 / z - 1.0))
        errs.append(abs(lhs - rhs))
    p0 = bstar_pmf(theta, lam, clone_size_pmf(clone, lam, kmax=50))[0]
    p0_err = abs(p0 - math.exp(-theta / lam))
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 1e-10 and p0_err <= 4 * np.spacing(math.exp(-theta / lam))
    verdict(3, ok, "Luria-Delbrueck pgf identity", f"max pgf error {max(errs):.2e}, |P[B*=0] - e^(-theta/lambda)| = {p0_err:.1e}", elapsed)
    assert ok and elapsed < 1.0


def test_criterion_04_pure_birth_clone_law(verdict):
    start = time.perf_counter()
    worst = 0.0
    for lam in (1.0, 0.3):
        pmf = clone_size_pmf(BirthDeathParams(lam, 0.0), lam, kmax=100)
        k = np.arange(1, 101)
        worst = max(worst, float(np.max(np.abs(pmf.probs[1:] - 1.0 / (k * (k + 1))))))
        worst = max(worst, abs(pmf[0]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8
    verdict(4, ok, "pure-birth clone law 1/(k(k+1))", f"max error {worst:.2e} over k<=100 for lambda in (1, 0.3)", elapsed)
    assert ok and elapsed < 1.0


def test_criterion_05_panjer_vs_brute_force(verdict):
    start = time.perf_counter()
    lam_a, kmax = 1.0, 50
    cases = [
        (0.3, BirthDeathParams(1.0, 0.5)),
        (2.0, BirthDeathParams(0.6, 0.0)),
        (0.8, BirthDeathParams(0.9, 0.9)),
        (1.5, BirthDeathParams(0.4, 0.7)),
        (4.0, BirthDeathParams(0.2, 1.0)),
    ]
    tvs = []
    for theta, clone in cases:
        cp = clone_size_pmf(clone, lam_a, kmax)
        fast = bstar_pmf(theta, lam_a, cp, kmax).probs
        slow = brute_compound_poisson(theta / lam_a, cp.probs, kmax)
        tvs.append(0.5 * float(np.abs(fast - slow).sum()))
    elapsed = time.perf_counter() - start
    ok = max(tvs) <= 1e-8
    nets = ", ".join(f"{c.net_rate:+.1f}" for _, c in cases)
    verdict(5, ok, "Panjer recursion vs explicit Poisson mixture", f"lambda_B in ({nets}); max TV {max(tvs):.1e}", elapsed)
    assert ok and elapsed < 10.0


def test_criterion_06_tail_law(verdict):
    start = time.perf_counter()
    theta, lam_a = 1.0, 1.0
    clone = BirthDeathParams(1.0, 0.5)
    pmf = bstar_pmf(theta, lam_a, clone_size_pmf(clone, lam_a, kmax=1000))
    slope = loglog_slope(pmf, 100, 1000)
    c = tail_constant("bstar", lambda_a=lam_a, alpha_b=1.0, beta_b=0.5, theta=theta)
    ratio = 1000**3 * pmf[1000] / c
    elapsed = time.perf_counter() - start
    ok = abs(slope + 3.0) <= 0.05 and abs(ratio - 1.0) <= 0.02
    verdict(6, ok, "B* power-law tail", f"slope {slope:.4f} on [100, 1000]; k^3 P[B*=k]/c at k=1000 is {ratio:.4f}", elapsed)
    assert ok and elapsed < 30.0


def test_criterion_07_angerer_vs_simulation(verdict):
    start = time.perf_counter()
    n, reps = 20, 1_000_000
    params = ModelParams(0.9, 0.0, 0.1, 1.0, 0.0)
    run = run_replicates(params, TotalSize(n), reps, 20240607, summary=_drop)
    theory = angerer_pmf(n, 0.9, 1.0)
    tv = tv_distance(run.pmf, theory)
    two = angerer_pmf(2, 0.9, 1.0)
    elapsed = time.perf_counter() - start
    ok = tv <= 0.01 and abs(two[1] - 0.1) <= 1e-15
    verdict(7, ok, "exact B(sigma_20) law vs simulation", f"TV {tv:.4f} over {reps} runs; n=2: P[1] = {float(two[1])!r}", elapsed)
    assert ok


def test_criterion_08_yule_sampler(verdict):
    start = time.perf_counter()
    n, reps = 50, 100_000
    params = ModelParams(1.0, 0.0, 0.1, 0.2, 0.0)
    yule = run_yule_replicates(params, n, reps, 20240618)
    direct = run_replicates(params, WildtypeSize(n), reps, 20240608, summary=_drop).pmf
    tv = tv_distance(yule, direct)
    target = (n - 1) * params.nu / (params.alpha_a - params.lambda_b)
    se = math.sqrt(yule.variance() / reps)
    dev = abs(yule.mean() - target) / se
    elapsed = time.perf_counter() - start
    ok = tv <= 0.02 and dev <= 3.0
    verdict(8, ok, "Yule sampler vs direct simulation", f"TV {tv:.4f}; Yule mean {yule.mean():.4f} vs {target:.4f} ({dev:.2f} SE)", elapsed)
    assert ok


def test_criterion_09_sigma_tau_cdf_identity(verdict):
    start = time.perf_counter()
    n, k, reps = 10, 3, 100_000
    params = ModelParams(1.0, 0.0, 0.3, 0.9, 0.0)
    sigma = run_replicates(params, TotalSize(n), reps, 20240609, summary=_drop).pmf
    tau = run_replicates(params, WildtypeSize(n - k), reps, 20240619, summary=_drop).pmf
    p1, p2 = sigma.cdf(k), tau.cdf(k)
    pooled = (p1 + p2) / 2
    se = math.sqrt(pooled * (1 - pooled) * 2 / reps)
    dev = abs(p1 - p2) / se
    elapsed = time.perf_counter() - start
    ok = dev <= 3.0
    verdict(9, ok, "P[B(sigma_10)<=3] = P[B(tau_7)<=3]", f"{p1:.4f} vs {p2:.4f}, {dev:.2f} pooled SE", elapsed)
    assert ok


def _scaled_mean(params, t, reps, seed, scale):
    pmf = run_replicates(params, FixedTime(t), reps, seed, summary=_drop).pmf
    return scale * pmf.mean(), scale * math.sqrt(pmf.variance() / reps)


def _mean_b(params, t):
    """E[B(t)] = a0 nu int_0^t e^{lambda_A s} e^{lambda_B (t-s)} ds."""
    la, lb = params.lambda_a, params.lambda_b
    if la == lb:
        return params.a0 * params.nu * t * math.exp(la * t)
    return params.a0 * params.nu * (math.exp(la * t) - math.exp(lb * t)) / (la - lb)


def test_criterion_10_almost_sure_limit_means(verdict):
    start = time.perf_counter()
    reps = 100_000
    parts = []
    # part 1: lambda_A > lambda_B, e^{-lambda_A t} B(t) -> nu/(lambda_A - lambda_B) W
    p1, t1 = ModelParams(1.0, 0.0, 0.1, 0.5, 0.0), 10.0
    reg, scale = limit_constants(p1), math.exp(-p1.lambda_a * t1)
    mean, se = _scaled_mean(p1, t1, reps, 20240610, scale)
    parts.append(("A-dominant", mean, se, reg.constant * reg.extra["E_W"], scale * _mean_b(p1, t1)))
    # critical: t^{-1} e^{-lambda t} B(t) -> nu W
    p2, t2 = ModelParams(1.0, 0.0, 0.1, 1.0, 0.0), 8.0
    reg, scale = limit_constants(p2), math.exp(-p2.lambda_a * t2) / t2
    mean, se = _scaled_mean(p2, t2, reps, 20240620, scale)
    parts.append(("critical", mean, se, reg.constant * reg.extra["E_W"], scale * _mean_b(p2, t2)))
    # part 3: lambda_B > lambda_A, e^{-lambda_B t} B(t) -> V
    p3, t3 = ModelParams(0.5, 0.0, 0.1, 1.0, 0.0), 10.0
    reg, scale = limit_constants(p3), math.exp(-p3.lambda_b * t3)
    mean, se = _scaled_mean(p3, t3, reps, 20240630, scale)
    parts.append(("B-dominant", mean, se, reg.extra["E_V"], scale * _mean_b(p3, t3)))
    elapsed = time.perf_counter() - start
    devs = [abs(m - target) / se for _, m, se, target, _ in parts]
    finite = [abs(m - exact) / se for _, m, se, _, exact in parts]
    ok = max(devs) <= 3.0
    detail = "; ".join(
        f"{name}: {m:.4f} vs {target:.4f} ({d:.2f} SE; exact finite-t mean {exact:.4f}, {f:.2f} SE)"
        for (name, m, _, target, exact), d, f in zip(parts, devs, finite)
    )
    verdict(10, ok, "means of the scaled almost-sure limits", detail, elapsed)
    if not ok:
        assert max(finite) <= 3.0, detail
        pytest.xfail(f"finite-t bias against the t->oo limit ({detail})")


def test_criterion_11_mutation_count_poisson(verdict):
    start = time.perf_counter()
    n, reps = 1000, 100_000
    params = ModelParams(1.0, 0.0, 0.5 / 1000, 1.0, 0.0)
    run = run_replicates(params, WildtypeSize(n), reps, 20240611, summary=_mutation_count)
    ks = np.asarray(run.summaries, dtype=float)
    target = n * params.nu / params.lambda_a
    mean, var = ks.mean(), ks.var(ddof=1)
    se_mean = math.sqrt(var / reps)
    # SE of the sample variance: sqrt((m4 - var^2)/reps)
    m4 = float(np.mean((ks - mean) ** 4))
    se_var = math.sqrt((m4 - var**2) / reps)
    d_mean, d_var = abs(mean - target) / se_mean, abs(var - target) / se_var
    elapsed = time.perf_counter() - start
    ok = d_mean <= 4.0 and d_var <= 4.0
    verdict(11, ok, "mutation count at tau_n is Poisson(n nu/lambda_A)", f"mean {mean:.4f} ({d_mean:.2f} SE), variance {var:.4f} ({d_var:.2f} SE) vs {target}", elapsed)
    assert ok


def test_criterion_12_largest_clone_and_census(verdict):
    start = time.perf_counter()
    n, reps, theta = 10_000, 10_000, 0.3
    params = ModelParams(1.0, 0.0, theta / n, 1.0, 0.0)
    lam = params.lambda_a
    run = run_replicates(params, WildtypeSize(n), reps, 20240612, "on_reached", count="accepted", summary=_largest_and_census)
    largest = np.array([s[0] for s in run.summaries])
    census = np.array([s[1] for s in run.summaries], dtype=float)
    parts, devs = [], []
    for k in CENSUS_KS:
        p_hat = float(np.mean(largest <= k))
        p = math.exp(-theta / (lam * (k + 1)))
        d = abs(p_hat - p) / math.sqrt(p_hat * (1 - p_hat) / reps)
        devs.append(d)
        parts.append(f"P[M<={k}] {p_hat:.4f}/{p:.4f} ({d:.2f} SE)")
    for j, k in enumerate(CENSUS_KS):
        col = census[:, j]
        rate = theta / (lam * k)
        d = abs(col.mean() - rate) / (col.std(ddof=1) / math.sqrt(reps))
        devs.append(d)
        parts.append(f"#{{size>={k}}} {col.mean():.4f}/{rate:.4f} ({d:.2f} SE)")
    elapsed = time.perf_counter() - start
    ok = max(devs) <= 3.0
    verdict(12, ok, "largest clone and clone census", "; ".join(parts), elapsed)
    assert ok


DETERMINISM_CONFIGS = {
    "pmf.csv": """
[model]
kind = two_type
alpha_a = 1
beta_a = 0.3
nu = 0.1
alpha_b = 0.9
beta_b = 0.2

[stop]
rule = wildtype_size
n = 200

[run]
reps = 500
seed = 20240613
conditioning = on_reached
""",
    "sfs.csv": """
[model]
kind = multisite
a = 0.25
b = 0.18
mu = 0.01
S = 50

[stop]
rule = total_size
n = 300

[run]
reps = 200
seed = 20240613
conditioning = on_reached
theory = yes
""",
}


def test_criterion_13_determinism(verdict, tmp_path):
    start = time.perf_counter()
    same = []
    for name, text in DETERMINISM_CONFIGS.items():
        cfg = tmp_path / f"{name}.ini"
        cfg.write_text(text)
        blobs = []
        for i, workers in enumerate(("1", "8", "1", "8")):
            out = tmp_path / f"{name}-{i}"
            assert main(["simulate", str(cfg), "--out-dir", str(out), "--workers", workers]) == 0
            blobs.append((out / name).read_bytes())
        same.append(len(set(blobs)) == 1)
    elapsed = time.perf_counter() - start
    ok = all(same)
    verdict(13, ok, "byte-identical CSV across reruns and worker counts", "two-type pmf and multisite SFS, workers 1/8/1/8", elapsed)
    assert ok
