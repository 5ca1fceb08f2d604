"""Seeded experiment runner with an append-only JSON-lines result store.

Rows are keyed by (run_id, n, replica, metric); run_id hashes exactly the
config fields that determine metric values (ensemble, master_seed,
resolution, tol_mass, kappa, r_loc), so experiments that differ only in
sizes, replicas, or the metric list share completed rows.  Re-runs are
idempotent: already-present keys are loaded, not recomputed.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import analytics, multiscale, transport
from ..ensembles import (ENSEMBLE_KINDS, POINT_SAMPLE_TAGS, MatrixEnsemble,
                         SpectralSample, replica_seed, sample_iid_disk,
                         sample_ginibre_moduli, sample_matrix)
from ..spectra import EigensolverError, spectrum
from .config import ExperimentConfig

SCHEMA_VERSION = 1

# Canonical ensemble order; the position feeds the seed path so that each
# (ensemble, n, replica) triple draws an independent, reproducible stream.
SEED_TAGS = ENSEMBLE_KINDS + POINT_SAMPLE_TAGS

# Documented integrator tolerance of the raster transport solver: one
# pixel side.  The measured quadrature error is orders of magnitude
# smaller; this is the bound quoted by downstream inequality checks.
def solver_tolerance(resolution: int) -> float:
    return 2.0 / resolution


@dataclass(frozen=True)
class RunRecord:
    """One metric evaluation on one replica."""

    run_id: str
    ensemble: str
    n: int
    replica: int
    seed: int
    metric: str
    value: float | None
    wall_ms: float
    status: str = "ok"
    diagnostics: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION


def run_id_for(config: ExperimentConfig) -> str:
    """Hash of the value-determining config fields."""
    payload = json.dumps({
        "ensemble": config.ensemble,
        "master_seed": config.master_seed,
        "resolution": config.resolution,
        "tol_mass": config.tol_mass,
        "kappa": config.kappa,
        "r_loc": config.r_loc,
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def seed_for(master_seed: int, ensemble: str, n: int, replica: int) -> int:
    """Derived seed for one replica; depends only on these four values."""
    return replica_seed(master_seed, SEED_TAGS.index(ensemble), n, replica)


class ResultStore:
    """Append-only JSON-lines store keyed by (run_id, n, replica, metric)."""

    def __init__(self, path: str):
        self.path = path

    def load(self) -> dict:
        rows = {}
        if not os.path.exists(self.path):
            return rows
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn trailing line from an interrupted run
                rec = RunRecord(**obj)
                rows[(rec.run_id, rec.n, rec.replica, rec.metric)] = rec
        return rows

    def append(self, record: RunRecord) -> None:
        os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _build_sample(ensemble: str, n: int, seed: int):
    """Sample points for one replica; returns (sample, diagnostics)."""
    if ensemble == "iid-disk":
        return sample_iid_disk(n, seed), {}
    if ensemble == "ginibre-moduli":
        moduli = sample_ginibre_moduli(n, seed)
        sample = SpectralSample(points=moduli.astype(np.complex128), n=n,
                                ensemble="ginibre-moduli", seed=seed)
        return sample, {}
    matrix = sample_matrix(MatrixEnsemble(ensemble, n), seed)
    result = spectrum(matrix / math.sqrt(n), certify=True)
    sample = SpectralSample(points=result.eigenvalues, n=n,
                            ensemble=ensemble, seed=seed)
    return sample, {"eig_residual": float(result.max_residual)}


def _metric_value(config: ExperimentConfig, metric: str,
                  sample: SpectralSample, n: int, replica: int):
    """Evaluate one metric; returns (value, diagnostics)."""
    if metric == "w1_sd":
        res = transport.w1_semidiscrete(sample, resolution=config.resolution,
                                        tol_mass=config.tol_mass)
        st = res.dual_state
        gap_bound = float(np.max(np.abs(st.weights))) * n * st.mass_residual \
            if st.weights.size else 0.0
        return res.w1, {
            "iterations": st.iterations,
            "mass_residual": st.mass_residual,
            "mass_sum": float(np.sum(st.masses)),
            "converged": st.converged,
            "lower_certificate": res.lower_certificate,
            "duality_gap_bound": gap_bound,
        }
    if metric == "w1_oracle":
        return transport.w1_discrete_oracle(sample, grid_m=200), {"grid_m": 200}
    if metric == "lower_bound":
        return transport.tent_dual_lower_bound(
            sample, resolution=config.resolution), {}
    if metric == "kolmogorov_ball":
        return multiscale.kolmogorov_ball(sample), {}
    if metric == "d_p":
        report = multiscale.d_p(sample, p=1.0)
        return report.d_p, {
            "w_p_upper": report.w_p_upper,
            "truncation_level": report.truncation_level,
        }
    if metric == "potential_gap":
        r = 1.0 / n
        return analytics.potential_gap(sample, r=r, grid_step=r,
                                       big_r=config.r_loc), {"r": r}
    if metric == "pair_energy":
        partner_seed = replica_seed(config.master_seed,
                                    SEED_TAGS.index(config.ensemble),
                                    n, replica, 1)
        partner, pdiag = _build_sample(config.ensemble, n, partner_seed)
        diag = {"partner_seed": partner_seed, "kappa": config.kappa}
        if "eig_residual" in pdiag:
            diag["partner_eig_residual"] = pdiag["eig_residual"]
        return analytics.pair_energy(sample, partner, kappa=config.kappa), diag
    if metric == "mean_esd_w1":
        return analytics.mean_esd_w1(n), {}
    raise ValueError(f"unknown metric {metric!r}")


def _evaluate(config: ExperimentConfig, n: int, replica: int,
              metrics: tuple) -> list:
    """All requested metric records for one (n, replica)."""
    rid = run_id_for(config)
    seed = seed_for(config.master_seed, config.ensemble, n, replica)
    records = []
    t0 = time.perf_counter()
    try:
        sample, sample_diag = _build_sample(config.ensemble, n, seed)
        sample_err = None
    except EigensolverError as exc:
        sample, sample_diag, sample_err = None, {}, str(exc)
    sample_ms = (time.perf_counter() - t0) * 1000.0
    for metric in metrics:
        t1 = time.perf_counter()
        diag = dict(sample_diag)
        diag["sample_ms"] = round(sample_ms, 3)
        if sample_err is not None:
            records.append(RunRecord(
                run_id=rid, ensemble=config.ensemble, n=n, replica=replica,
                seed=seed, metric=metric, value=None, wall_ms=0.0,
                status="failed", diagnostics={"error": sample_err}))
            continue
        try:
            value, mdiag = _metric_value(config, metric, sample, n, replica)
            value = float(value)
            diag.update(mdiag)
            status = "ok" if _finite(value) else "failed"
            if not _finite(value):
                diag["error"] = f"non-finite value {value!r}"
                value = None
        except Exception as exc:  # recorded, never silently dropped
            value = None
            status = "failed"
            diag["error"] = f"{type(exc).__name__}: {exc}"
        wall = (time.perf_counter() - t1) * 1000.0
        records.append(RunRecord(
            run_id=rid, ensemble=config.ensemble, n=n, replica=replica,
            seed=seed, metric=metric, value=value, wall_ms=round(wall, 3),
            status=status, diagnostics=diag))
    return records


def _task(args):
    config, n, replica, metrics = args
    return _evaluate(config, n, replica, tuple(metrics))


def run_experiment(config: ExperimentConfig, store_path: str | None = None):
    """Evaluate every (n, replica, metric) of the config, reusing the store.

    Returns the complete record list for the config (loaded + newly
    computed), sorted by (n, replica, metric).  mean_esd_w1 depends only
    on n and is evaluated at replica 0 only.
    """
    if store_path is None:
        store_path = os.path.join(config.out_dir, "records.jsonl")
    store = ResultStore(store_path)
    existing = store.load()
    rid = run_id_for(config)
    tasks = []
    for n in config.sizes:
        for replica in range(config.replicas):
            missing = []
            for metric in config.metrics:
                if metric == "mean_esd_w1" and replica > 0:
                    continue
                if (rid, n, replica, metric) not in existing:
                    missing.append(metric)
            if missing:
                tasks.append((config, n, replica, tuple(missing)))
    new_records = []
    if tasks:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for batch in pool.map(_task, tasks):
                    new_records.extend(batch)
        else:
            for t in tasks:
                new_records.extend(_task(t))
        # canonical row order regardless of completion order
        new_records.sort(key=lambda r: (r.n, r.replica, r.metric))
        for rec in new_records:
            store.append(rec)
            existing[(rec.run_id, rec.n, rec.replica, rec.metric)] = rec
    out = []
    for n in config.sizes:
        for replica in range(config.replicas):
            for metric in config.metrics:
                if metric == "mean_esd_w1" and replica > 0:
                    continue
                rec = existing.get((rid, n, replica, metric))
                if rec is not None:
                    out.append(rec)
    return out


def summary_csv(records, path: str) -> None:
    """Per-(ensemble, metric, n) summary: count, mean, sd, stderr."""
    groups = {}
    for rec in records:
        if rec.status != "ok" or rec.value is None:
            continue
        groups.setdefault((rec.ensemble, rec.metric, rec.n), []).append(rec.value)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ensemble,metric,n,count,mean,sd,stderr\n")
        for (ens, metric, n), vals in sorted(groups.items()):
            arr = np.asarray(vals)
            mean = float(np.mean(arr))
            sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
            se = sd / math.sqrt(arr.size) if arr.size > 1 else 0.0
            fh.write(f"{ens},{metric},{n},{arr.size},"
                     f"{mean:.9g},{sd:.9g},{se:.9g}\n")
