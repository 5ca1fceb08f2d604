"""Dense nonsymmetric eigensolver interface with a-posteriori certification.

``spectrum`` wraps the LAPACK dense nonsymmetric path (balancing,
Hessenberg reduction, implicitly shifted QR) and returns eigenvalues only,
keeping the hot path at one O(n^3) pass.  ``certify_spectrum`` attaches an
a-posteriori residual bound max_j ||(A - lambda_j I) v_j|| / ||A||_F using
batch eigenvectors, refined by inverse iteration where the batch residual
is not already tiny.  Certification is honest about the reported
eigenvalues: residuals are computed against the values stored in the
result, so a corrupted eigenvalue shows up as a large residual.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .ensembles import SpectralSample


class EigensolverError(RuntimeError):
    """QR iteration failed to converge; carries the offending matrix."""

    def __init__(self, message, matrix=None, lapack_info=None):
        super().__init__(message)
        self.matrix = matrix
        self.lapack_info = lapack_info


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues plus certification state.

    ``max_residual`` is NaN until ``certify_spectrum`` has run.
    ``iterations`` is -1: the LAPACK backend does not expose its QR sweep
    count, only convergence or failure.
    """

    eigenvalues: np.ndarray
    max_residual: float = float("nan")
    iterations: int = -1


def spectrum(matrix: np.ndarray, certify: bool = False) -> SpectrumResult:
    """All eigenvalues of a square matrix (complex128, unordered).

    Raises EigensolverError when the QR iteration does not converge; the
    exception carries the input matrix for post-mortem inspection.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    try:
        vals = scipy.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}", matrix=a) from exc
    result = SpectrumResult(eigenvalues=np.asarray(vals, dtype=np.complex128))
    if certify:
        result = replace(result, max_residual=certify_spectrum(a, result))
    return result


def certify_spectrum(matrix: np.ndarray, result: SpectrumResult,
                     refine_below: float = 1e-10) -> float:
    """Max over reported eigenvalues of ||(A - lambda I) v|| / ||A||_F.

    Eigenvectors come from one batch solve; each reported eigenvalue is
    matched to the nearest batch eigenvalue and its vector is used as v.
    Any residual above ``refine_below`` is retried with inverse iteration
    (one refinement step) before being accepted, so an isolated bad vector
    does not inflate the certificate.
    """
    a = np.asarray(matrix, dtype=np.complex128)
    lam = np.asarray(result.eigenvalues, dtype=np.complex128)
    n = a.shape[0]
    norm_f = np.linalg.norm(a)
    if norm_f == 0.0:
        return float(np.max(np.abs(lam))) if n else 0.0

    try:
        batch_vals, batch_vecs = scipy.linalg.eig(a)
    except np.linalg.LinAlgError:
        batch_vals, batch_vecs = None, None

    residuals = np.full(n, np.inf)
    if batch_vals is not None:
        order = np.argsort(np.abs(lam[:, None] - batch_vals[None, :]), axis=1)
        used = np.zeros(n, dtype=bool)
        match = np.empty(n, dtype=np.intp)
        for j in range(n):
            for cand in order[j]:
                if not used[cand]:
                    match[j] = cand
                    used[cand] = True
                    break
        v = batch_vecs[:, match]
        v = v / np.linalg.norm(v, axis=0, keepdims=True)
        residuals = np.linalg.norm(a @ v - lam[None, :] * v, axis=0) / norm_f

    for j in np.nonzero(residuals > refine_below)[0]:
        residuals[j] = min(residuals[j], _inverse_iteration_residual(a, lam[j], norm_f))
    return float(np.max(residuals)) if n else 0.0


def _inverse_iteration_residual(a: np.ndarray, lam: complex, norm_f: float) -> float:
    """Residual of the reported eigenvalue via shifted inverse iteration."""
    n = a.shape[0]
    # Tiny shift keeps the LU nonsingular when lam is exact.
    eps = 1e-14 * (abs(lam) + norm_f)
    shifted = a - (lam + eps) * np.eye(n, dtype=np.complex128)
    rng = np.random.default_rng(0)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    try:
        lu = scipy.linalg.lu_factor(shifted)
        for _ in range(2):  # one solve plus one refinement step
            v = scipy.linalg.lu_solve(lu, v)
            nv = np.linalg.norm(v)
            if not np.isfinite(nv) or nv == 0.0:
                return np.inf
            v /= nv
    except (np.linalg.LinAlgError, ValueError):
        return np.inf
    return float(np.linalg.norm(a @ v - lam * v) / norm_f)


def spectral_radius(sample: SpectralSample) -> float:
    """Largest modulus among the sample points."""
    return float(np.max(np.abs(sample.points)))


def multiset_match_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy minimal-distance bipartite matching cost between eigenvalue multisets.

    Pairs are taken in ascending distance order, each index used once; the
    return value is the largest matched distance.  Greedy matching is not
    the optimal assignment but upper-bounds it, which is what a multiset
    equality test needs.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise ValueError(f"multisets must have equal size, got {a.shape} vs {b.shape}")
    n = a.size
    if n == 0:
        return 0.0
    dist = np.abs(a[:, None] - b[None, :])
    order = np.argsort(dist, axis=None, kind="stable")
    used_a = np.zeros(n, dtype=bool)
    used_b = np.zeros(n, dtype=bool)
    worst = 0.0
    pairs = 0
    for flat in order:
        i, j = divmod(int(flat), n)
        if used_a[i] or used_b[j]:
            continue
        used_a[i] = True
        used_b[j] = True
        worst = max(worst, float(dist[i, j]))
        pairs += 1
        if pairs == n:
            break
    return worst
