import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wignerlab import spectra
from wignerlab.ensemble import make_two_point, sample_matrix
from wignerlab.spectra import (
    EigensolverError,
    Spectrum,
    check_spectrum,
    eigenvalues,
    eigenvalues_array,
    jacobi_eigenvalues,
    spectral_norm,
    trace_power,
    trace_powers,
)

TP = make_two_point(0.8, 0.5)


def _symmetric(n, data):
    return (data + data.T) / 2.0


def test_two_by_two():
    a = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2)
    lam = eigenvalues(a).eigenvalues
    assert lam == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)], abs=1e-15)


def test_zero_matrix():
    assert np.array_equal(eigenvalues(np.zeros((5, 5))).eigenvalues, np.zeros(5))


def test_diagonal_matrix_sorted():
    lam = eigenvalues(np.diag([3.0, -1.0, 2.0, 0.5])).eigenvalues
    assert np.array_equal(lam, [-1.0, 0.5, 2.0, 3.0])


def test_trace_identity_n200():
    m = sample_matrix(TP, 200, seed=11)
    s = eigenvalues(m)
    assert abs(s.eigenvalues.sum() - np.trace(m.entries)) < 1e-8
    check_spectrum(s, m)


def test_check_spectrum_detects_wrong_values():
    m = sample_matrix(TP, 20, seed=1)
    s = eigenvalues(m)
    bad = Spectrum(s.eigenvalues + 1e-3, 20)
    with pytest.raises(AssertionError, match="identities"):
        check_spectrum(bad, m)


@pytest.mark.parametrize("n", [2, 3, 7, 20, 50])
def test_agrees_with_jacobi_reference(n):
    m = sample_matrix(TP, n, seed=n)
    lam = eigenvalues_array(m.entries)
    ref = jacobi_eigenvalues(m)
    assert np.max(np.abs(lam - ref)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=12).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False, width=64))
    )
)
def test_property_matches_jacobi_and_identities(data):
    a = _symmetric(data.shape[0], data)
    lam = eigenvalues_array(a)
    scale = max(np.linalg.norm(a), 1.0)
    assert np.max(np.abs(lam - jacobi_eigenvalues(a))) <= 1e-11 * scale
    assert abs(lam.sum() - np.trace(a)) <= 1e-10 * scale * a.shape[0]
    assert np.all(np.diff(lam) >= 0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-3, 3, allow_nan=False)), st.floats(-5, 5))
def test_shift_and_scale_equivariance(data, c):
    a = _symmetric(6, data)
    lam = eigenvalues_array(a)
    shifted = eigenvalues_array(a + c * np.eye(6))
    assert np.allclose(shifted, lam + c, atol=1e-11 * (1 + abs(c)))
    flipped = eigenvalues_array(-a)
    assert np.allclose(flipped, -lam[::-1], atol=1e-12 * max(1.0, np.abs(lam).max()))


def test_spectral_norm_examples():
    assert spectral_norm(np.array([-0.7, 0.3])) == 0.7
    assert spectral_norm(np.array([-0.70711, 0.70711])) == 0.70711
    assert spectral_norm(np.array([])) == 0.0


@settings(max_examples=50)
@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(-100, 100, allow_nan=False)))
def test_spectral_norm_sign_flip(lam):
    assert spectral_norm(lam) == spectral_norm(-lam)


def test_spectral_norm_matches_numpy():
    m = sample_matrix(TP, 80, seed=5)
    assert spectral_norm(eigenvalues(m)) == pytest.approx(np.linalg.norm(m.entries, 2), rel=1e-12)


def test_trace_power_examples():
    assert trace_power(np.array([-1 / math.sqrt(2), 1 / math.sqrt(2)]), 4) == pytest.approx(0.5, rel=1e-15)
    assert trace_power(np.array([1.0, 1.0, 1.0]), 100) == 3.0
    assert trace_power(np.zeros(4), 6) == 0.0


def test_trace_power_matches_matrix_power():
    m = sample_matrix(TP, 4, seed=3)
    direct = np.trace(np.linalg.matrix_power(m.entries, 4))
    assert trace_power(eigenvalues(m), 4) == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_trace_power_far_outside_float_range():
    # 10**(2*200) overflows a double; the scaled evaluation still returns inf only if the value does
    lam = np.array([10.0, -10.0, 1.0])
    assert math.isinf(trace_power(lam, 400))
    tiny = np.array([1e-3, 5e-4])
    expected = math.exp(200 * math.log(1e-3)) * (1 + 0.5**200)
    assert trace_power(tiny, 200) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50)
@given(
    arrays(np.float64, (3, 5), elements=st.floats(-2, 2, allow_nan=False)),
    st.sampled_from([2, 4, 6, 10, 40]),
)
def test_trace_powers_rowwise(block, two_s):
    rows = trace_powers(block, two_s)
    for row, val in zip(block, rows):
        ref = math.fsum(float(x) ** two_s for x in row)
        assert val == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("two_s", [0, 3, -2])
def test_trace_power_rejects_odd(two_s):
    with pytest.raises(ValueError):
        trace_power(np.ones(3), two_s)


def test_non_square_rejected():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))


def test_qr_failure_names_index(monkeypatch):
    real = spectra.lapack.dsterf

    def failing(d, e, overwrite_e=0):
        vals, _ = real(d, e.copy())
        e[:] = 0.0
        e[2] = 1.0
        return vals, 1

    monkeypatch.setattr(spectra.lapack, "dsterf", failing)
    with pytest.raises(EigensolverError, match="index 2") as info:
        eigenvalues_array(sample_matrix(TP, 6, seed=1).entries)
    assert info.value.index == 2
