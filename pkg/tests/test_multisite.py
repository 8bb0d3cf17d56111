from __future__ import annotations

import numpy as np
import pytest

from mutfreq.multisite import (
    GenotypePopulation,
    MultisiteParams,
    SfsHistogram,
    divide_cell,
    mean_sfs_empirical,
    sfs_of,
    simulate_multisite,
)
from mutfreq.seeding import replicate_rng
from mutfreq.stats import EmpiricalPmf, tv_distance
from mutfreq.twotype import FixedTime, TotalSize, run_replicates

from .oracles import exact_b_sigma


def test_params_validation():
    with pytest.raises(ValueError):
        MultisiteParams(0.1, 0.2, 0.01, 5)
    with pytest.raises(ValueError):
        MultisiteParams(1.0, 0.2, 1.5, 5)
    m = MultisiteParams(0.25, 0.18, 0.01, 50).single_site_model()
    assert m.alpha_a + m.nu == pytest.approx(m.alpha_b)
    assert m.beta_a == m.beta_b == 0.18


def test_divide_cell_rules():
    assert divide_cell(0, 0.0, 8, rng=1) == (0, 0)
    d1, d2 = divide_cell(0, 1.0, 8, rng=2)
    assert d1 & d2 == 0 and d1 | d2 == 0xFF
    parent = 0b100
    for i in range(50):
        d1, d2 = divide_cell(parent, 0.3, 8, replicate_rng(3, i))
        assert d1 & parent and d2 & parent


def test_divide_cell_marginals():
    reps, mu = 40_000, 0.2
    hits = np.zeros(2)
    for i in range(reps):
        d1, d2 = divide_cell(0, mu, 1, replicate_rng(4, i))
        hits += (d1, d2)
    assert np.allclose(hits / reps, mu / 2, atol=4 * np.sqrt(0.1 * 0.9 / reps))


def test_sfs_examples():
    assert sfs_of(GenotypePopulation.from_sets([((), 2)]), 3).counts == {0: 3}
    assert sfs_of(GenotypePopulation.from_sets([((0,), 3), ((), 2)]), 4).counts == {3: 1, 0: 3}
    assert sfs_of(GenotypePopulation.from_sets([((0, 1), 1), ((0,), 1)]), 2).counts == {2: 1, 1: 1}


def test_population_classes_distinct():
    with pytest.raises(ValueError):
        GenotypePopulation(((1, 2), (1, 3)))
    pop = GenotypePopulation.from_cells([0, 3, 3, 0, 1])
    assert pop.classes == ((0, 2), (1, 1), (3, 2))


def test_no_mutation_single_class():
    out = simulate_multisite(MultisiteParams(1.0, 0.2, 0.0, 10), TotalSize(100), rng=5)
    assert out.population.classes[0][0] == 0 and len(out.population.classes) <= 1
    sfs = mean_sfs_empirical(MultisiteParams(1.0, 0.2, 0.0, 10), TotalSize(50), 20, 1, "on_reached")
    assert sfs.mean[0] == 10 and sfs.kmax == 0


def test_sfs_sums_to_S_and_no_back_mutation():
    params = MultisiteParams(1.0, 0.3, 0.05, 70, 2)
    for i in range(30):
        out = simulate_multisite(params, TotalSize(200), replicate_rng(6, i))
        sfs = sfs_of(out.population, params.S)
        assert sum(sfs.counts.values()) == params.S
        if out.reached:
            assert out.population.total == 200


def test_pure_growth_accounting():
    for i in range(20):
        out = simulate_multisite(MultisiteParams(1.0, 0.0, 0.1, 5), FixedTime(3.0), replicate_rng(7, i))
        assert out.population.total == out.divisions + 1


def test_single_site_marginal_matches_two_type():
    params, n, reps = MultisiteParams(1.0, 0.3, 0.1, 1), 30, 20_000
    site = []
    for i in range(reps):
        out = simulate_multisite(params, TotalSize(n), replicate_rng(8, i))
        if out.reached:
            site.append(int(out.population.site_counts(1)[0]))
    two = run_replicates(params.single_site_model(), TotalSize(n), reps, 9, conditioning="on_reached").pmf
    assert tv_distance(EmpiricalPmf.from_values(site), two) < 0.03


def test_single_site_matches_exact_chain():
    a, b, mu, n = 1.0, 0.3, 0.1, 15
    exact, _ = exact_b_sigma(n, a * (1 - mu), b, a * mu, a, b)
    sfs = mean_sfs_empirical(MultisiteParams(a, b, mu, 20), TotalSize(n), 3000, 10, "on_reached")
    theory = 20 * exact[: sfs.kmax + 1]
    assert np.all(np.abs(sfs.mean - theory) <= 4 * np.maximum(sfs.std_err, 3 / sfs.reps))


def test_limit_calibrated_changes_death_rate():
    # death rate b(1 - mu) is visibly lower over many runs
    params, reps = MultisiteParams(1.0, 0.5, 0.5, 4), 400
    deaths = np.zeros(2)
    for i in range(reps):
        for j, cal in enumerate((False, True)):
            out = simulate_multisite(params, FixedTime(3.0), replicate_rng(11, i), limit_calibrated=cal)
            deaths[j] += out.deaths / max(out.divisions + out.deaths, 1)
    assert deaths[1] < deaths[0]


def test_mean_sfs_worker_independent():
    params = MultisiteParams(0.25, 0.18, 0.01, 50)
    a = mean_sfs_empirical(params, TotalSize(200), 30, 4, "on_reached", workers=1)
    b = mean_sfs_empirical(params, TotalSize(200), 30, 4, "on_reached", workers=2)
    assert np.array_equal(a.mean, b.mean) and a.discard_count == b.discard_count


def test_histogram_validation():
    with pytest.raises(ValueError):
        SfsHistogram({0: 2}, 3)
