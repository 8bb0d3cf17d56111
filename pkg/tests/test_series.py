from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutfreq.analytics.series import Pmf, PowerSeries


def test_pmf_tail_and_moments():
    p = Pmf.from_probs([0.5, 0.25, 0.125])
    assert p.tail_mass == pytest.approx(0.125)
    assert p.normalization_error() < 1e-15
    assert p.sf(1) == pytest.approx(0.25)
    assert p.cdf(1) == pytest.approx(0.75)
    assert p.mean() == pytest.approx(0.5)
    t = p.truncate(0)
    assert t.kmax == 0 and t.tail_mass == pytest.approx(0.5)


def test_pmf_rejects_negative():
    with pytest.raises(ValueError):
        Pmf(np.array([0.5, -0.1]), 0.0)
    with pytest.raises(ValueError):
        Pmf(np.array([]), 0.0)


def test_series_arithmetic():
    f = PowerSeries([1.0, 2.0, 3.0])
    g = PowerSeries([2.0, -1.0, 0.5])
    assert np.allclose((f * g).coeffs, [2.0, 3.0, 4.5])
    assert np.allclose((f + g).coeffs, [3.0, 1.0, 3.5])
    assert np.allclose((1.0 - f).coeffs, [0.0, -2.0, -3.0])
    assert np.allclose((f / g * g).coeffs, f.coeffs)


def test_geometric_reciprocal():
    # 1/(1 - z) = sum z^k
    r = PowerSeries([1.0, -1.0, 0, 0, 0, 0]).reciprocal()
    assert np.allclose(r.coeffs, 1.0)
    with pytest.raises(ZeroDivisionError):
        PowerSeries([0.0, 1.0]).reciprocal()


@settings(max_examples=50, deadline=None)
@given(
    coeffs=st.lists(st.floats(0.01, 2.0), min_size=1, max_size=12),
    m=st.integers(1, 6),
)
def test_integer_power_matches_convolution(coeffs, m):
    f = PowerSeries(coeffs)
    direct = np.array([1.0])
    for _ in range(m):
        direct = np.convolve(direct, coeffs)[: len(coeffs)]
    assert np.allclose(f.power(m).coeffs, direct, rtol=1e-10, atol=1e-12)


def test_real_power_binomial_series():
    # (1 - z)^(-1/2) has coefficients C(2k, k)/4^k
    from math import comb

    s = PowerSeries([1.0, -1.0] + [0.0] * 10).power(-0.5)
    assert np.allclose(s.coeffs, [comb(2 * k, k) / 4**k for k in range(12)], rtol=1e-13)


def test_zero_constant_integer_power():
    s = PowerSeries([0.0, 1.0, 1.0, 0.0]).power(2)
    assert np.allclose(s.coeffs, [0.0, 0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        PowerSeries([0.0, 1.0]).power(0.5)
    assert np.allclose(PowerSeries([3.0, 1.0]).power(0).coeffs, [1.0, 0.0])


def test_integer_power_small_constant_term():
    f = PowerSeries([0.015625, 1.7656082, 1.5, 1.0, 1.0, 0.125])
    assert np.array_equal(f.power(1).coeffs, f.coeffs)
    direct = np.convolve(np.convolve(f.coeffs, f.coeffs), f.coeffs)[:6]
    assert np.allclose(f.power(3).coeffs, direct, rtol=1e-13)
