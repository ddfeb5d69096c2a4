import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerlab.bounds import (
    asymptotic_moment,
    chebyshev_ratio,
    concentration_bound,
    mean_norm_bound,
    preliminary_bound_chain,
    scan_bound_chain,
    variance_bound,
)
from wignerlab.pathcomb import catalan


def test_asymptotic_moment_values():
    assert asymptotic_moment(2000, 40, 0.5) == pytest.approx(2000 / (math.sqrt(math.pi) * 40**1.5), rel=1e-15)
    assert asymptotic_moment(2000, 40, 0.5) == pytest.approx(4.4603, abs=5e-5)
    assert asymptotic_moment(1, 1, 0.5) == pytest.approx(1 / math.sqrt(math.pi))
    assert asymptotic_moment(1, 1, 0.5) == pytest.approx(0.5642, abs=5e-5)
    assert asymptotic_moment(10, 3, 1.0) == pytest.approx(10 * 2.0**6 / (math.sqrt(math.pi) * 3**1.5))


def _catalan_ratio(s):
    # n C_s sigma^{2s} over the closed form, at sigma = 1/2, with exact integers
    exact = Fraction(catalan(s), 4**s)
    return float(exact) / asymptotic_moment(1, s, 0.5)


def test_catalan_regime_ratio_tends_to_one():
    ratios = [_catalan_ratio(s) for s in (5, 10, 20, 40, 80, 160, 1000)]
    assert all(a < b < 1 for a, b in zip(ratios, ratios[1:]))
    # the gap is 9/(8s) to leading order
    for s in (20, 80, 1000):
        assert 1 - _catalan_ratio(s) == pytest.approx(9 / (8 * s), rel=0.1)
    assert 1 - _catalan_ratio(1000) < 2e-3


def test_catalan_regime_at_s20():
    # the exact ratio at s = 20 is 0.94645, a 5.36% gap; 5% agreement is first reached at s = 22
    assert _catalan_ratio(20) == pytest.approx(0.94645, abs=1e-5)
    assert abs(1 - _catalan_ratio(22)) < 0.05 < abs(1 - _catalan_ratio(21))


def test_variance_bound():
    assert variance_bound(100, 0.5) == 10.0
    assert variance_bound(1, 0.7, const=3.0) == pytest.approx(3.0 * 1.4**4)


def test_chebyshev_ratio():
    assert chebyshev_ratio(1000, 30) == pytest.approx(0.148, abs=5e-4)
    assert chebyshev_ratio(50, 1, const=2.0) == pytest.approx(2.0 / 2500)


def test_chebyshev_ratio_decreasing_on_s_rule():
    values = [chebyshev_ratio(n, n ** (6 / 11 - 0.1)) for n in (10**3, 10**4, 10**5, 10**6)]
    assert all(b < a for a, b in zip(values, values[1:]))
    # exponent -1/11 - 0.35
    slope = math.log(values[-1] / values[0]) / math.log(1e3)
    assert slope == pytest.approx(-1 / 11 - 0.35, abs=1e-12)


def test_concentration_bound():
    assert concentration_bound(0) == 4.0
    assert concentration_bound(8) == pytest.approx(4 * math.exp(-2))
    assert concentration_bound(8) == pytest.approx(0.5413, abs=5e-5)


def test_mean_norm_bound():
    assert mean_norm_bound(1e4, 1.0) == pytest.approx(0.9725, abs=5e-4)
    assert mean_norm_bound(1e30, 1.0) > 0.9999999
    assert mean_norm_bound(100, 2.0) < mean_norm_bound(100, 1.0)
    with pytest.raises(ValueError):
        mean_norm_bound(1, 1.0)


@given(st.floats(2.0, 1e12), st.floats(0.01, 5.0))
def test_mean_norm_bound_below_one(n, c):
    assert mean_norm_bound(n, c) < 1.0


@pytest.mark.parametrize("delta,epsilon", [(0.3, 0.2), (0.3, 0.15), (0.3, 0.3), (0.6, 0.5), (0.0, 0.1)])
def test_chain_rejects_parameters_outside_window(delta, epsilon):
    with pytest.raises(ValueError):
        preliminary_bound_chain(1e6, delta, epsilon)


def test_chain_terms_and_flags():
    rep = preliminary_bound_chain(1e25, 0.3, 0.25)
    assert rep.consistent
    assert set(rep.log_terms) >= {"omega_c", "omega_2", "omega_1_coefficient", "moment_lower", "target"}
    assert any("o(1)" in note for note in rep.notes)
    assert rep.lower_bound > math.exp(rep.log_terms["target"])
    small = preliminary_bound_chain(1e4, 0.3, 0.25)
    assert not small.consistent


@given(st.floats(0.55, 0.95))
def test_chain_independent_of_sigma(sigma):
    a = preliminary_bound_chain(1e22, 0.3, 0.25, sigma=0.5)
    b = preliminary_bound_chain(1e22, 0.3, 0.25, sigma=sigma)
    assert a.lower_bound == b.lower_bound and a.consistent == b.consistent


def test_scan_threshold_and_monotone():
    reports, threshold = scan_bound_chain(0.3, 0.25, log10_n_max=80)
    assert threshold is not None and 1e20 < threshold < 1e23
    flags = [r.consistent for r in reports]
    first = flags.index(True)
    assert all(flags[first:])
    assert reports[first].n == threshold
