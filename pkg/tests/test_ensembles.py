"""Entry laws, disk point samplers, and the seeding discipline."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlaw import analytics, spectra
from circlaw.ensembles import (
    ENSEMBLE_KINDS,
    MatrixEnsemble,
    SpectralSample,
    replica_seed,
    sample_ginibre_moduli,
    sample_iid_disk,
    sample_matrix,
)


def _pool_entries(kind, n, draws, seed0):
    blocks = [sample_matrix(MatrixEnsemble(kind, n), seed0 + i).ravel()
              for i in range(draws)]
    return np.concatenate(blocks)


def test_zero_dimension_rejected():
    with pytest.raises(ValueError):
        MatrixEnsemble("ginibre", 0)
    with pytest.raises(ValueError):
        sample_iid_disk(0, 1)
    with pytest.raises(ValueError):
        sample_ginibre_moduli(0, 1)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        MatrixEnsemble("circular-unitary", 4)


def test_ginibre_entry_moments():
    # 1e5 iid entries pooled from square draws; same law as repeated 1x1 draws.
    x = _pool_entries("ginibre", 100, 10, seed0=101)
    assert x.size == 100_000
    se_mean = 1.0 / np.sqrt(x.size)
    assert abs(np.mean(x.real)) <= 3 * se_mean
    assert abs(np.mean(x.imag)) <= 3 * se_mean
    m2 = np.abs(x) ** 2
    assert abs(np.mean(m2) - 1.0) <= 3 * np.std(m2) / np.sqrt(x.size)


def test_complex_rademacher_support():
    x = sample_matrix(MatrixEnsemble("complex-rademacher", 2), seed=7)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    assert np.allclose(np.abs(x.real), inv_sqrt2, atol=0, rtol=1e-15)
    assert np.allclose(np.abs(x.imag), inv_sqrt2, atol=0, rtol=1e-15)


def test_trace_second_moment_lln():
    # Mean entry second moment tr(XX*)/n^2 over 100 draws at n=32.
    ens = MatrixEnsemble("ginibre", 32)
    vals = []
    for i in range(100):
        x = sample_matrix(ens, 500 + i)
        vals.append(np.sum(np.abs(x) ** 2).real / 32 ** 2)
    assert abs(np.mean(vals) - 1.0) <= 0.05


@pytest.mark.parametrize("kind", ENSEMBLE_KINDS)
def test_entry_moments_all_ensembles(kind):
    x = _pool_entries(kind, 64, 25, seed0=900)
    assert x.size >= 100_000
    se_mean = np.std(x.real) / np.sqrt(x.size)
    assert abs(np.mean(x.real)) <= 3 * se_mean + 1e-12
    m2 = np.abs(x) ** 2
    se_m2 = np.std(m2) / np.sqrt(x.size)
    assert abs(np.mean(m2) - 1.0) <= 3 * se_m2 + 1e-12


@pytest.mark.parametrize("kind", ENSEMBLE_KINDS)
def test_matrix_determinism(kind):
    ens = MatrixEnsemble(kind, 8)
    a = sample_matrix(ens, 12345)
    b = sample_matrix(ens, 12345)
    assert np.array_equal(a, b)
    c = sample_matrix(ens, 12346)
    assert not np.array_equal(a, c)


def test_iid_disk_support_and_moments():
    for seed in range(50):
        s = sample_iid_disk(1, seed)
        assert abs(s.points[0]) <= 1.0
    pts = sample_iid_disk(100_000, seed=42).points
    r2 = np.abs(pts) ** 2
    assert abs(np.mean(r2) - 0.5) <= 0.01
    assert abs(np.mean(np.abs(pts) <= 0.5) - 0.25) <= 0.01


def test_iid_disk_sample_fields():
    s = sample_iid_disk(16, seed=3)
    assert s.n == 16 and s.points.shape == (16,)
    assert s.ensemble == "iid-disk" and s.seed == 3
    t = sample_iid_disk(16, seed=3)
    assert np.array_equal(s.points, t.points)


def test_sample_shape_validated():
    with pytest.raises(ValueError):
        SpectralSample(points=np.zeros(3, dtype=complex), n=4,
                       ensemble="ginibre", seed=0)


def test_moduli_sorted_nonnegative_deterministic():
    m = sample_ginibre_moduli(64, seed=11)
    assert m.shape == (64,)
    assert np.all(m >= 0.0)
    assert np.all(np.diff(m) >= 0.0)
    assert np.array_equal(m, sample_ginibre_moduli(64, seed=11))


def test_moduli_n1_law():
    # Single modulus has CDF 1 - exp(-rho^2).
    draws = np.array([sample_ginibre_moduli(1, s)[0] for s in range(20_000)])
    for rho in (0.3, 0.7, 1.0, 1.5):
        p = 1.0 - np.exp(-rho ** 2)
        phat = np.mean(draws <= rho)
        se = np.sqrt(p * (1.0 - p) / draws.size)
        assert abs(phat - p) <= 3 * se + 1e-9


def test_moduli_ball_count_matches_closed_form():
    # Mean number of moduli <= 0.5 at n=64 vs n * mean-measure of the ball,
    # where the mean measure is rho^2 minus the radial defect.
    n, rho, draws = 64, 0.5, 10_000
    counts = np.empty(draws)
    for s in range(draws):
        counts[s] = np.count_nonzero(sample_ginibre_moduli(n, 3_000_000 + s) <= rho)
    expected = n * (rho ** 2 - analytics.radial_defect(n, rho))
    se = np.std(counts) / np.sqrt(draws)
    assert abs(np.mean(counts) - expected) <= 3 * se


def test_moduli_agree_with_eigensolve_ks():
    # Pooled modulus samples from both routes at n=64, 200 replicas each.
    n, reps = 64, 200
    fast = np.concatenate([sample_ginibre_moduli(n, 7_000 + i) for i in range(reps)])
    ens = MatrixEnsemble("ginibre", n)
    slow = []
    for i in range(reps):
        x = sample_matrix(ens, 9_000 + i)
        slow.append(np.abs(spectra.spectrum(x / np.sqrt(n)).eigenvalues))
    slow = np.concatenate(slow)
    grid = np.sort(np.concatenate([fast, slow]))
    cdf_fast = np.searchsorted(np.sort(fast), grid, side="right") / fast.size
    cdf_slow = np.searchsorted(np.sort(slow), grid, side="right") / slow.size
    assert np.max(np.abs(cdf_fast - cdf_slow)) <= 0.05


def test_replica_seed_stable_and_distinct():
    s = replica_seed(20260817, 0, 64, 3)
    assert s == replica_seed(20260817, 0, 64, 3)
    assert 0 <= s < 2 ** 64
    seen = {replica_seed(1, tag, n, r)
            for tag in range(4) for n in (8, 16) for r in range(8)}
    assert len(seen) == 4 * 2 * 8


@given(st.integers(min_value=0, max_value=2 ** 32), st.integers(min_value=0, max_value=63))
@settings(max_examples=25)
def test_rademacher_support_any_seed(seed, extra):
    x = sample_matrix(MatrixEnsemble("real-rademacher", 3), replica_seed(seed, extra))
    assert np.all(np.isin(x, (-1.0, 1.0)))


@given(st.integers(min_value=0, max_value=2 ** 60))
@settings(max_examples=20)
def test_iid_disk_in_closed_disk(seed):
    pts = sample_iid_disk(32, seed).points
    assert np.all(np.abs(pts) <= 1.0 + 1e-15)
