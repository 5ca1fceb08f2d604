"""Semi-discrete transport: cells, dual ascent, discrete oracle, certificates."""

import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from circlaw.ensembles import MatrixEnsemble, SpectralSample, sample_matrix
from circlaw.spectra import spectrum
from circlaw.transport import (
    assign_cell,
    cell_masses_and_costs,
    regularize_sample,
    solve_dual,
    tent_dual_lower_bound,
    tessellation_raster,
    w1_discrete_oracle,
    w1_semidiscrete,
)

RES = 512
TOL_INTEGRATOR = 2.0 / RES  # documented half-pixel displacement bound


def _sample(points):
    pts = np.asarray(points, dtype=np.complex128)
    return SpectralSample(points=pts, n=pts.size, ensemble="ginibre", seed=0)


def _ginibre(n, seed):
    x = sample_matrix(MatrixEnsemble("ginibre", n), seed)
    eig = spectrum(x / math.sqrt(n)).eigenvalues
    return SpectralSample(points=eig, n=n, ensemble="ginibre", seed=seed)


def _dual_value(sample, w, resolution=RES):
    masses, costs = cell_masses_and_costs(sample, w, resolution=resolution)
    w = np.asarray(w, dtype=np.float64)
    return float(np.sum(costs) + np.sum(w * (1.0 / sample.n - masses)))


# ---------------------------------------------------------------------------
# cell assignment


def test_assign_cell_zero_weights_is_voronoi():
    s = _sample([-0.5, 0.5])
    assert assign_cell(-0.1, s, [0.0, 0.0]) == 0


def test_assign_cell_weight_overrides_distance():
    s = _sample([-0.5, 0.5])
    assert assign_cell(-0.1, s, [0.0, 0.8]) == 1


def test_assign_cell_tie_breaks_low_index():
    s = _sample([-0.5, 0.5])
    assert assign_cell(0.0, s, [0.0, 0.0]) == 0


def test_assign_cell_weight_count_checked():
    with pytest.raises(ValueError):
        assign_cell(0.0, _sample([0.0, 0.5]), [0.0])


# ---------------------------------------------------------------------------
# masses and costs


def test_single_cell_covers_disk():
    masses, costs = cell_masses_and_costs(_sample([0.0]), [0.0], resolution=1024)
    assert abs(masses[0] - 1.0) <= 1e-9
    assert abs(costs[0] - 2.0 / 3.0) <= 1e-6


def test_masses_partition_unity():
    s = _sample([0.3 + 0.1j, -0.2, 0.5j, -0.4 - 0.4j])
    masses, _ = cell_masses_and_costs(s, np.zeros(4), resolution=1024)
    assert abs(np.sum(masses) - 1.0) <= 1e-9


def test_symmetric_pair_masses():
    masses, _ = cell_masses_and_costs(_sample([-0.5, 0.5]), [0.0, 0.0],
                                      resolution=1024)
    assert abs(masses[0] - 0.5) <= 1e-6
    assert abs(masses[1] - 0.5) <= 1e-6


def test_resolution_floor_enforced():
    s = _sample([0.0])
    with pytest.raises(ValueError):
        cell_masses_and_costs(s, [0.0], resolution=32)
    with pytest.raises(ValueError):
        tessellation_raster(s, [0.0], resolution=32)


# ---------------------------------------------------------------------------
# dual ascent


def test_solve_dual_single_atom():
    state = solve_dual(_sample([0.0]), resolution=256)
    assert state.converged
    assert state.weights.shape == (1,)
    assert state.weights[0] == 0.0
    assert abs(state.masses[0] - 1.0) <= 1e-9


def test_solve_dual_symmetric_pair():
    state = solve_dual(_sample([-0.5, 0.5]), resolution=RES)
    assert state.converged
    tol = max(1e-3 / 2, 2 * 4.0 / (math.pi * RES ** 2))
    assert abs(state.masses[0] - 0.5) <= tol
    assert abs(state.masses[1] - 0.5) <= tol
    # Symmetry forces equal weights; mean-zero normalization makes them 0.
    assert abs(state.weights[0] - state.weights[1]) <= 5e-3
    assert abs(np.mean(state.weights)) <= 1e-12


def test_solve_dual_matches_oracle_n4():
    s = _ginibre(4, seed=77)
    state = solve_dual(s, resolution=1024, tol_mass=1e-3 / 4)
    assert state.converged
    assert state.mass_residual <= 1e-3 / 4
    oracle = w1_discrete_oracle(s, grid_m=200)
    assert abs(state.dual_value - oracle) <= 0.01 * oracle + 2.0 / 200


def test_monotone_ascent_prefixes():
    # Reruns with growing accepted-step caps replay the same trajectory, so
    # the dual value must be nondecreasing along the prefix ordering.
    s = _ginibre(4, seed=3)
    vals = []
    for k in range(1, 9):
        st8 = solve_dual(s, resolution=256, max_iters=k, multires=False)
        vals.append(st8.dual_value)
    for a, b in zip(vals, vals[1:]):
        assert b >= a - 1e-12 * max(1.0, abs(a))


def test_mass_conservation_along_random_weights():
    s = _ginibre(8, seed=5)
    rng = np.random.default_rng(0)
    for _ in range(5):
        w = rng.uniform(-0.2, 0.2, 8)
        masses, _ = cell_masses_and_costs(s, w, resolution=RES)
        assert abs(np.sum(masses) - 1.0) <= 1e-9


def test_coincident_atoms_share_cell_mass():
    s = _sample([0.2 + 0.1j, 0.2 + 0.1j, -0.5, 0.4j])
    state = solve_dual(s, resolution=RES)
    assert state.converged
    assert state.masses.shape == (4,)
    tol = max(1e-3 / 4, 2 * 4.0 / (math.pi * RES ** 2))
    assert np.all(np.abs(state.masses - 0.25) <= tol + 1e-12)
    # The merged pair reports identical weights and split masses.
    assert state.weights[0] == state.weights[1]
    assert state.masses[0] == state.masses[1]


def test_nonconverged_flag_when_capped():
    s = _ginibre(16, seed=9)
    state = solve_dual(s, resolution=256, max_iters=2, multires=False)
    assert not state.converged
    assert state.iterations <= 2


# ---------------------------------------------------------------------------
# w1 values


def test_w1_single_atom_origin():
    res = w1_semidiscrete(_sample([0.0]), resolution=1024)
    assert abs(res.w1 - 2.0 / 3.0) <= 1e-6
    assert res.lower_certificate <= res.w1 + 1e-9


def test_w1_single_atom_outside_disk():
    # Quadrature oracle for the fixed integral (1/pi) int_B1 |z - 2| dz.
    def radial(rho):
        val, _ = scipy.integrate.quad(
            lambda t: math.sqrt(rho * rho + 4.0 - 4.0 * rho * math.cos(t)),
            0.0, math.pi, epsabs=1e-13, limit=200)
        return val / math.pi * 2.0 * rho
    oracle, err = scipy.integrate.quad(radial, 0.0, 1.0, epsabs=1e-12, limit=200)
    assert err < 1e-9
    out = w1_semidiscrete(_sample([2.0]), resolution=1024)
    assert 1.0 < out.w1 < 3.0
    assert abs(out.w1 - oracle) <= 1e-4


@pytest.mark.parametrize("n,seed", [(4, 11), (16, 12), (64, 13)])
def test_w1_lower_bound_rate(n, seed):
    s = _ginibre(n, seed)
    out = w1_semidiscrete(s, resolution=RES)
    assert out.w1 >= 1.0 / (3.0 * math.sqrt(n)) - TOL_INTEGRATOR


def test_w1_certificate_is_consistent():
    s = _ginibre(8, seed=21)
    out = w1_semidiscrete(s, resolution=RES)
    gap = np.max(np.abs(out.dual_state.weights)) * s.n * out.dual_state.mass_residual
    assert out.lower_certificate <= out.w1 + gap + TOL_INTEGRATOR


# ---------------------------------------------------------------------------
# discrete oracle


def test_oracle_single_atom_quantization():
    v = w1_discrete_oracle(_sample([0.0]), grid_m=128)
    assert abs(v - 2.0 / 3.0) <= 2.0 / 128


def test_oracle_cross_validates_solver():
    s = _sample([-0.5, 0.5])
    v = w1_discrete_oracle(s, grid_m=128)
    w = w1_semidiscrete(s, resolution=1024).w1
    assert abs(v - w) <= 0.01 * w + 2.0 / 128


def test_oracle_perturbation_bound():
    base = w1_discrete_oracle(_sample([0.0, 0.6, -0.3j, 0.2 + 0.2j]), grid_m=100)
    moved = w1_discrete_oracle(_sample([0.1, 0.6, -0.3j, 0.2 + 0.2j]), grid_m=100)
    assert abs(moved - base) <= 0.1 / 4 + 1e-9


def test_oracle_guards():
    with pytest.raises(ValueError):
        w1_discrete_oracle(_ginibre(66, seed=1), grid_m=64)
    with pytest.raises(ValueError):
        w1_discrete_oracle(_sample([0.0]), grid_m=300)


@pytest.mark.parametrize("n,seed", [(4, 31), (8, 32)])
def test_oracle_agreement_spot(n, seed):
    s = _ginibre(n, seed)
    sd = w1_semidiscrete(s, resolution=1024)
    oracle = w1_discrete_oracle(s, grid_m=200)
    assert abs(sd.w1 - oracle) <= 0.01 * oracle + 2.0 / 200


# ---------------------------------------------------------------------------
# tent-function dual certificate


def test_tent_bound_single_atom():
    v = tent_dual_lower_bound(_sample([0.0]), resolution=1024)
    assert abs(v - 2.0 / 3.0) <= 1e-5


def test_tent_bound_separated_pair():
    v = tent_dual_lower_bound(_sample([-0.75, 0.75]), resolution=1024)
    assert v >= 1.0 / (3.0 * math.sqrt(2.0)) - 1e-6


@pytest.mark.parametrize("seed", [41, 42, 43])
def test_tent_bound_weak_duality(seed):
    s = _ginibre(8, seed)
    v = tent_dual_lower_bound(s, resolution=RES)
    out = w1_semidiscrete(s, resolution=RES)
    assert v <= out.w1 + TOL_INTEGRATOR


# ---------------------------------------------------------------------------
# regularization


def test_regularize_zero_radius_is_identity():
    s = _ginibre(8, seed=51)
    t = regularize_sample(s, 0.0, seed=1)
    assert np.array_equal(t.points, s.points)


def test_regularize_displacement_is_exact():
    s = _ginibre(8, seed=52)
    for r in (0.01, 0.1):
        t = regularize_sample(s, r, seed=2)
        assert np.all(np.abs(np.abs(t.points - s.points) - r) <= 1e-13)


def test_regularize_deterministic_given_seed():
    s = _ginibre(8, seed=53)
    a = regularize_sample(s, 0.05, seed=7)
    b = regularize_sample(s, 0.05, seed=7)
    assert np.array_equal(a.points, b.points)
    c = regularize_sample(s, 0.05, seed=8)
    assert not np.array_equal(a.points, c.points)


def test_regularized_w1_stays_within_radius():
    s = _ginibre(8, seed=54)
    r = 0.1
    t = regularize_sample(s, r, seed=3)
    a = w1_semidiscrete(s, resolution=RES).w1
    b = w1_semidiscrete(t, resolution=RES).w1
    assert abs(a - b) <= r + 2.0 * TOL_INTEGRATOR


# ---------------------------------------------------------------------------
# tessellation raster


def test_tessellation_single_atom():
    grid = tessellation_raster(_sample([0.0]), [0.0], resolution=128)
    inside = grid >= 0
    assert np.all(grid[inside] == 0)
    assert np.any(~inside)


def test_tessellation_symmetric_split():
    grid = tessellation_raster(_sample([-0.5, 0.5]), [0.0, 0.0], resolution=128)
    h = 2.0 / 128
    centers = -1.0 + (np.arange(128) + 0.5) * h
    xs = np.broadcast_to(centers[:, None], (128, 128))  # axis 0 indexes x
    inside = grid >= 0
    assert np.all(grid[inside & (xs < -h)] == 0)
    assert np.all(grid[inside & (xs > h)] == 1)


def test_tessellation_converged_cells_fill_equally():
    n = 8
    s = _ginibre(n, seed=61)
    state = solve_dual(s, resolution=RES)
    assert state.converged
    grid = tessellation_raster(s, state.weights, resolution=RES)
    counts = np.bincount(grid[grid >= 0].ravel(), minlength=n)
    inside_total = int(np.sum(grid >= 0))
    assert np.all(counts > 0)
    assert np.min(counts) >= 0.9 * inside_total / n


def test_star_domain_rays():
    # Cell membership along a ray from the atom is a prefix interval.
    n = 8
    s = _ginibre(n, seed=62)
    state = solve_dual(s, resolution=RES)
    rng = np.random.default_rng(5)
    rays = 0
    for j in range(n):
        lam = s.points[j]
        if abs(lam) >= 1.0:
            continue
        for _ in range(4):
            theta = rng.uniform(0.0, 2.0 * math.pi)
            d = complex(math.cos(theta), math.sin(theta))
            # Longest t with |lam + t d| <= 1.
            b = (lam.real * d.real + lam.imag * d.imag)
            t_max = -b + math.sqrt(b * b + 1.0 - abs(lam) ** 2)
            ts = np.linspace(1e-9, t_max * (1.0 - 1e-9), 160)
            member = np.array([assign_cell(lam + t * d, s, state.weights) == j
                               for t in ts])
            left = np.count_nonzero(member)
            assert np.all(member[:left]), "membership must be a prefix interval"
            rays += 1
    assert rays >= 16


# ---------------------------------------------------------------------------
# algebraic invariants


def test_shift_invariance_of_assignment():
    s = _ginibre(8, seed=71)
    base = np.round(np.linspace(-0.25, 0.25, 8) * 64) / 64  # dyadic weights
    shifted = base + 0.5
    rng = np.random.default_rng(6)
    z = rng.uniform(-0.9, 0.9, 200) + 1j * rng.uniform(-0.9, 0.9, 200)
    z = z[np.abs(z) < 1.0]
    for zz in z[:100]:
        assert assign_cell(zz, s, base) == assign_cell(zz, s, shifted)
    m1, c1 = cell_masses_and_costs(s, base, resolution=256)
    m2, c2 = cell_masses_and_costs(s, shifted, resolution=256)
    assert np.array_equal(m1, m2)
    assert np.array_equal(c1, c2)
    phi1 = _dual_value(s, base, resolution=256)
    phi2 = _dual_value(s, shifted, resolution=256)
    assert abs(phi1 - phi2) <= 1e-12


@given(st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=8)
def test_weak_duality_random_weights(seed):
    # Any dual vector gives a value below the exact transport cost.
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    pts = (rng.uniform(-0.8, 0.8, n) + 1j * rng.uniform(-0.8, 0.8, n))
    s = _sample(pts)
    w = rng.uniform(-0.3, 0.3, n)
    phi = _dual_value(s, w, resolution=RES)
    oracle = w1_discrete_oracle(s, grid_m=100)
    assert phi <= oracle + 2.0 / 100 + TOL_INTEGRATOR
