"""Random matrix ensembles with iid entries and reference point samples.

Every ensemble produces an n x n matrix whose entries are independent with
mean zero and unit second moment (E|X_ij|^2 = 1), so that the empirical
spectral distribution of X/sqrt(n) converges to the uniform measure on the
unit disk.  Sampling is deterministic given (kind, n, seed): each call
builds a fresh PCG64 generator from the seed, so replicas can run in any
order or concurrently.

Seed derivation rule for replica streams: ``replica_seed(master_seed, *path)``
feeds the integer tuple ``(master_seed, *path)`` as the entropy of a
``numpy.random.SeedSequence`` and folds its first two output words into one
64-bit integer.  The harness uses path = (n, replica) for primary samples
and path = (n, replica, tag) for auxiliary streams, so streams are
independent across replicas and stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ENSEMBLE_KINDS = (
    "ginibre",
    "real-gaussian",
    "complex-rademacher",
    "real-rademacher",
    "uniform",
)

# Point-sample tags that are not matrix ensembles but appear in SpectralSample.
POINT_SAMPLE_TAGS = ("iid-disk", "ginibre-moduli")

_SQRT3 = np.sqrt(3.0)
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class MatrixEnsemble:
    """A named iid-entry matrix distribution at a fixed dimension."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; choose from {ENSEMBLE_KINDS}")
        if self.n < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {self.n}")


@dataclass(frozen=True)
class SpectralSample:
    """A finite point configuration in the complex plane with provenance.

    ``points`` holds the n points (complex128); ``ensemble`` records how
    they were produced ("ginibre", "iid-disk", ...); ``seed`` is the seed
    that reproduces them.
    """

    points: np.ndarray
    n: int
    ensemble: str
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        object.__setattr__(self, "points", pts)
        if pts.shape != (self.n,):
            raise ValueError(f"expected {self.n} points, got shape {pts.shape}")


def replica_seed(master_seed: int, *path: int) -> int:
    """Fold (master_seed, *path) into a single 64-bit stream seed."""
    words = np.random.SeedSequence([int(master_seed), *[int(p) for p in path]]).generate_state(2)
    return int(words[0]) | (int(words[1]) << 32)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def sample_matrix(ensemble: MatrixEnsemble, seed: int) -> np.ndarray:
    """Draw one matrix from the ensemble; entries have E X = 0, E|X|^2 = 1.

    The caller is responsible for the 1/sqrt(n) normalization of the
    spectrum; this function returns the raw entry matrix.
    """
    rng = _rng(seed)
    n = ensemble.n
    kind = ensemble.kind
    if kind == "ginibre":
        scale = np.sqrt(0.5)
        return rng.normal(0.0, scale, (n, n)) + 1j * rng.normal(0.0, scale, (n, n))
    if kind == "real-gaussian":
        return rng.normal(0.0, 1.0, (n, n)).astype(np.float64)
    if kind == "complex-rademacher":
        # Uniform on {(+-1 +- i)/sqrt(2)}: unit modulus, E X = 0, E X^2 = 0.
        re = rng.integers(0, 2, (n, n)) * 2 - 1
        im = rng.integers(0, 2, (n, n)) * 2 - 1
        return (re + 1j * im) * _INV_SQRT2
    if kind == "real-rademacher":
        return (rng.integers(0, 2, (n, n)) * 2 - 1).astype(np.float64)
    if kind == "uniform":
        return rng.uniform(-_SQRT3, _SQRT3, (n, n))
    raise ValueError(f"unknown ensemble kind {kind!r}")


def sample_iid_disk(n: int, seed: int) -> SpectralSample:
    """n points drawn iid from the uniform measure on the closed unit disk."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = _rng(seed)
    # Radius sqrt(U) makes the area measure uniform.
    rho = np.sqrt(rng.uniform(0.0, 1.0, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    pts = rho * np.exp(1j * theta)
    return SpectralSample(points=pts, n=n, ensemble="iid-disk", seed=int(seed))


def sample_ginibre_moduli(n: int, seed: int) -> np.ndarray:
    """Sorted eigenvalue moduli of the normalized complex Ginibre ensemble.

    The set of moduli of the eigenvalues of X/sqrt(n) is distributed as
    {sqrt(G_k / n)}_{k=1..n} with independent G_k ~ Gamma(k, 1), which
    avoids the O(n^3) eigensolve.  Gamma variates come from the generator's
    exact rejection sampler.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = _rng(seed)
    gammas = rng.gamma(np.arange(1, n + 1, dtype=np.float64))
    return np.sort(np.sqrt(gammas / n))
