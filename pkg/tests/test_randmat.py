import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgechaos import (TANH, c_closed_form, circular_law_discrepancy, eigenvalues,
                       log_abs_det_shifted, sample_matrix, scaled_support_radius,
                       spectral_radius)
from edgechaos.randmat import Spectrum, log_abs_det_shifted_eig


def test_sample_matrix_is_bit_identical_per_seed():
    a = sample_matrix(50, 1.3, seed=42)
    b = sample_matrix(50, 1.3, seed=42)
    np.testing.assert_array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, sample_matrix(50, 1.3, seed=43).entries)
    assert not a.entries.flags.writeable


def test_sample_matrix_rejects_bad_sizes():
    with pytest.raises(ValueError):
        sample_matrix(0, 1.0, 0)
    with pytest.raises(ValueError):
        sample_matrix(3, -1.0, 0)


def test_entry_variance_at_n_1000():
    J = sample_matrix(1000, 1.0, seed=5)
    assert 0.9e-3 <= J.entries.var() <= 1.1e-3
    assert abs(J.entries.mean()) < 1e-3


def test_scalar_entry_variance_over_seeds():
    # 10^5 independent 1x1 draws at sigma = 2: sample variance 4 within 5%
    draws = np.array([sample_matrix(1, 2.0, s).entries[0, 0] for s in range(100_000)])
    assert draws.var(ddof=1) == pytest.approx(4.0, rel=0.05)


def test_eigenvalue_examples():
    np.testing.assert_allclose(eigenvalues(np.eye(3)).eigenvalues, [1, 1, 1])
    ev = np.sort_complex(eigenvalues([[0.0, -1.0], [1.0, 0.0]]).eigenvalues)
    np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-15)
    assert 1.40 <= spectral_radius(sample_matrix(1000, 1.5, seed=1)) <= 1.60


def test_spectral_radius_examples():
    assert spectral_radius(-np.eye(7)) == pytest.approx(1.0)
    assert spectral_radius(np.diag([2.0, -3.0])) == pytest.approx(3.0)
    assert spectral_radius(sample_matrix(2000, 1.0, seed=2)) == pytest.approx(1.0, rel=0.05)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 80), sigma=st.floats(0.1, 3))
def test_spectra_are_conjugate_closed(seed, n, sigma):
    ev = eigenvalues(sample_matrix(n, sigma, seed)).eigenvalues
    assert len(ev) == n
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(ev.conj()), atol=1e-9, rtol=0)


def test_scaled_support_radius():
    assert scaled_support_radius(1.7, np.ones(10)) == pytest.approx(1.7)
    assert scaled_support_radius(1.7, np.zeros(10)) == 0.0
    g = np.random.default_rng(0).uniform(0, 1, 10)
    assert scaled_support_radius(1.2, 0.5 * g) == pytest.approx(0.5 * scaled_support_radius(1.2, g))
    assert scaled_support_radius(1.2, g) == pytest.approx(1.2 * math.sqrt(np.mean(g ** 2)))


def test_scaled_support_radius_against_eigensolver():
    n, sigma = 1000, 1.5
    J = sample_matrix(n, sigma, seed=8)
    g = TANH.deriv(np.random.default_rng(8).uniform(-1, 1, n))
    empirical = spectral_radius(J.entries * g[None, :])
    assert empirical == pytest.approx(scaled_support_radius(sigma, g), rel=0.05)


def test_circular_law_discrepancy():
    sp = eigenvalues(sample_matrix(2000, 1.0, seed=3))
    assert circular_law_discrepancy(sp, 1.0) < 0.05
    assert circular_law_discrepancy(Spectrum(np.zeros(50, complex)), 1.0) == pytest.approx(1.0)
    rotated = Spectrum(sp.eigenvalues * np.exp(0.7j))
    assert circular_law_discrepancy(rotated, 1.0) == pytest.approx(
        circular_law_discrepancy(sp, 1.0), abs=1e-12)


def test_log_abs_det_examples():
    assert log_abs_det_shifted(np.zeros((4, 4))) == pytest.approx(0.0, abs=1e-15)
    assert log_abs_det_shifted(np.diag([3.0, 3.0])) == pytest.approx(math.log(2.0), rel=1e-14)
    with pytest.warns(RuntimeWarning):
        assert log_abs_det_shifted(np.eye(3)) == -math.inf


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(2, 300), sigma=st.floats(0.2, 3))
def test_log_det_factorization_matches_eigen_sum(seed, n, sigma):
    J = sample_matrix(n, sigma, seed)
    a = log_abs_det_shifted(J)
    b = log_abs_det_shifted_eig(J)
    assert a == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_log_det_concentrates_on_closed_form():
    vals = [log_abs_det_shifted(sample_matrix(500, 1.5, seed=s)) for s in range(50)]
    assert abs(np.mean(vals) - c_closed_form(1.5)) < 0.02


def test_spectral_radius_approaches_sigma():
    sigma = 1.2
    dist = []
    for n in (250, 1000):
        radii = [spectral_radius(sample_matrix(n, sigma, seed=1000 * n + s)) for s in range(20)]
        dist.append(abs(np.median(radii) - sigma))
    assert dist[1] <= dist[0]
