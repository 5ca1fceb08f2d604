"""Spectral sampling and optimal-transport distances to the circular law.

Subpackages and modules:
  ensembles   random matrix and point-cloud samplers with derived seeds
  spectra     dense eigensolves with residual certification
  analytics   closed-form Ginibre densities, potentials and energies
  transport   semi-discrete W1 solver, oracle and certificates
  multiscale  dyadic partition distances and Kolmogorov discrepancies
  harness     configuration, experiment runner, figures, CLI, acceptance
"""

from .ensembles import (ENSEMBLE_KINDS, MatrixEnsemble, SpectralSample,
                        replica_seed, sample_ginibre_moduli, sample_iid_disk,
                        sample_matrix)
from .spectra import (EigensolverError, SpectrumResult, certify_spectrum,
                      multiset_match_distance, spectral_radius, spectrum)
from .analytics import (exp_integral_e1, exp_sum_head, exp_sum_tail,
                        log_exp_sum_head, log_exp_sum_tail, log_head_bound,
                        log_tail_bound, mean_density, mean_esd_w1, pair_energy,
                        potential_gap, radial_defect, smoothed_log_kernel,
                        two_point_density, u_cutoff, u_empirical, u_infinity)
from .multiscale import (DiscrepancyReport, box_scan_gap, d_p, d_tilde_p,
                         disk_quadrant_area, kolmogorov_ball, kolmogorov_box,
                         square_disk_area, square_disk_moments)
from .transport import (DiskRaster, DualState, TransportResult, assign_cell,
                        cell_masses_and_costs, disk_raster, regularize_sample,
                        solve_dual, tent_dual_lower_bound, tessellation_raster,
                        w1_discrete_oracle, w1_semidiscrete)
from .harness import (ExperimentConfig, RateFit, ResultStore, RunRecord,
                      acceptance, emit_figures, fit_rate, load_config,
                      run_experiment)

__version__ = "0.1.0"

__all__ = [
    "ENSEMBLE_KINDS", "MatrixEnsemble", "SpectralSample", "replica_seed",
    "sample_ginibre_moduli", "sample_iid_disk", "sample_matrix",
    "EigensolverError", "SpectrumResult", "certify_spectrum",
    "multiset_match_distance", "spectral_radius", "spectrum",
    "exp_integral_e1", "exp_sum_head", "exp_sum_tail", "log_exp_sum_head",
    "log_exp_sum_tail", "log_head_bound", "log_tail_bound", "mean_density",
    "mean_esd_w1", "pair_energy", "potential_gap", "radial_defect",
    "smoothed_log_kernel", "two_point_density", "u_cutoff", "u_empirical",
    "u_infinity",
    "DiscrepancyReport", "box_scan_gap", "d_p", "d_tilde_p",
    "disk_quadrant_area", "kolmogorov_ball", "kolmogorov_box",
    "square_disk_area", "square_disk_moments",
    "DiskRaster", "DualState", "TransportResult", "assign_cell",
    "cell_masses_and_costs", "disk_raster", "regularize_sample", "solve_dual",
    "tent_dual_lower_bound", "tessellation_raster", "w1_discrete_oracle",
    "w1_semidiscrete",
    "ExperimentConfig", "RateFit", "ResultStore", "RunRecord", "acceptance",
    "emit_figures", "fit_rate", "load_config", "run_experiment",
    "__version__",
]
