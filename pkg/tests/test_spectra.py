"""Eigensolver contract: exact small cases, certification, invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlaw.ensembles import MatrixEnsemble, SpectralSample, sample_matrix
from circlaw.spectra import (
    EigensolverError,
    SpectrumResult,
    certify_spectrum,
    multiset_match_distance,
    spectral_radius,
    spectrum,
)


def _cofactor_det(a):
    # Independent determinant oracle: recursive cofactor expansion, n <= 8.
    n = a.shape[0]
    if n == 1:
        return complex(a[0, 0])
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += ((-1) ** j) * complex(a[0, j]) * _cofactor_det(minor)
    return total


def test_diagonal_matrix():
    vals = spectrum(np.diag([1.0, 2.0j, -3.0])).eigenvalues
    assert multiset_match_distance(vals, np.array([1.0, 2.0j, -3.0])) <= 1e-12


def test_companion_roots_of_unity():
    # Companion matrix of z^4 - 1.
    c = np.zeros((4, 4), dtype=complex)
    c[1:, :3] = np.eye(3)
    c[0, 3] = 1.0
    roots = np.exp(2j * np.pi * np.arange(4) / 4)
    vals = spectrum(c).eigenvalues
    assert multiset_match_distance(vals, roots) <= 1e-10


def test_rotation_block():
    vals = spectrum(np.array([[0.0, 1.0], [-1.0, 0.0]])).eigenvalues
    assert multiset_match_distance(vals, np.array([1j, -1j])) <= 1e-12


def test_nonsquare_and_nonfinite_rejected():
    with pytest.raises(ValueError):
        spectrum(np.zeros((2, 3)))
    bad = np.eye(3)
    bad[1, 1] = np.nan
    with pytest.raises((ValueError, EigensolverError)):
        spectrum(bad)


def test_certify_exact_diagonal():
    a = np.diag([2.0, -1.0, 0.5 + 0.5j])
    res = spectrum(a, certify=True)
    assert res.max_residual <= 1e-14


def test_certify_ginibre_n64():
    n = 64
    x = sample_matrix(MatrixEnsemble("ginibre", n), seed=20260817)
    res = spectrum(x / np.sqrt(n), certify=True)
    assert res.max_residual <= 1e-8


def test_certify_detects_perturbed_eigenvalue():
    # Normal matrix: residual of a tampered eigenvalue is bounded below by
    # sigma_min(A - lam I) / ||A||_F = 0.1 / sqrt(2) ~= 0.071 for any vector.
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    res = spectrum(a)
    tampered = res.eigenvalues.copy()
    tampered[0] += 0.1
    bad = SpectrumResult(eigenvalues=tampered)
    assert certify_spectrum(a, bad) >= 0.05


def test_iterations_sentinel_and_residual_nan_until_certified():
    res = spectrum(np.eye(2))
    assert res.iterations == -1
    assert np.isnan(res.max_residual)


def test_spectral_radius_small_cases():
    zero = SpectralSample(points=np.array([0.0 + 0.0j]), n=1,
                          ensemble="ginibre", seed=0)
    assert spectral_radius(zero) == 0.0
    two = SpectralSample(points=np.array([1.0 + 1.0j, -2.0 + 0.0j]), n=2,
                         ensemble="ginibre", seed=0)
    assert spectral_radius(two) == 2.0


def test_spectral_radius_ginibre_mean():
    n, reps = 256, 20
    vals = []
    for i in range(reps):
        x = sample_matrix(MatrixEnsemble("ginibre", n), seed=40_000 + i)
        eig = spectrum(x / np.sqrt(n)).eigenvalues
        vals.append(np.max(np.abs(eig)))
    assert 0.95 <= np.mean(vals) <= 1.15


def test_trace_identity():
    for n, seed in ((8, 1), (32, 2), (64, 3)):
        x = sample_matrix(MatrixEnsemble("ginibre", n), seed)
        vals = spectrum(x).eigenvalues
        tol = 1e-8 * n * np.linalg.norm(x)
        assert abs(np.sum(vals) - np.trace(x)) <= tol


def test_determinant_identity_small_n():
    for n, seed in ((2, 10), (4, 11), (6, 12), (8, 13)):
        x = sample_matrix(MatrixEnsemble("ginibre", n), seed)
        vals = spectrum(x).eigenvalues
        det_oracle = _cofactor_det(x)
        assert abs(np.prod(vals) - det_oracle) <= 1e-8 * abs(det_oracle)


def test_similarity_invariance():
    rng = np.random.default_rng(99)
    for n in (4, 8, 16):
        x = sample_matrix(MatrixEnsemble("ginibre", n), seed=n)
        p = np.eye(n) + 0.1 * rng.normal(size=(n, n))
        y = p @ x @ np.linalg.inv(p)
        assert multiset_match_distance(spectrum(x).eigenvalues,
                                       spectrum(y).eigenvalues) <= 1e-8


def test_multiset_match_distance_basics():
    a = np.array([1.0, 2.0, 3.0])
    assert multiset_match_distance(a, a[::-1]) == 0.0
    with pytest.raises(ValueError):
        multiset_match_distance(a, a[:2])


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=2, max_value=6))
@settings(max_examples=20)
def test_trace_identity_random(seed, n):
    x = sample_matrix(MatrixEnsemble("real-gaussian", n), seed)
    vals = spectrum(x).eigenvalues
    assert abs(np.sum(vals) - np.trace(x)) <= 1e-8 * n * max(np.linalg.norm(x), 1.0)
