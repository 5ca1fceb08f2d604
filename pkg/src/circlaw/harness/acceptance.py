"""Acceptance suite: eleven desk-scale checks of the toolkit's claims.

Each criterion runs against a shared result store keyed by value-determining
config fields, so overlapping experiments (same ensemble, seed, solver
settings) are computed once and reused.  Every criterion reports measured
value, target, wall clock, and a pass flag; the suite exit status is
nonzero when any criterion fails.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import analytics, transport
from .config import ExperimentConfig
from .ratefit import fit_rate
from .runner import (_build_sample, run_experiment, seed_for,
                     solver_tolerance)

MASTER_SEED = 20260817


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    target: str
    wall_s: float


@dataclass
class _Context:
    out_dir: str = "results"
    master_seed: int = MASTER_SEED
    resolution: int = 1024
    records_seen: list = field(default_factory=list)

    def run(self, **kw):
        kw.setdefault("master_seed", self.master_seed)
        kw.setdefault("resolution", self.resolution)
        kw.setdefault("out_dir", self.out_dir)
        config = ExperimentConfig(**kw)
        records = run_experiment(config)
        self.records_seen.extend(records)
        return records


def _ok_values(records, metric, n=None):
    return [r.value for r in records
            if r.metric == metric and r.status == "ok" and r.value is not None
            and (n is None or r.n == n)]


def _mean_se(values):
    arr = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def criterion_1(ctx: _Context) -> CriterionResult:
    """Ginibre W1 window: means under 4/sqrt(n), no sample below the
    certified lower-bound scale 1/(3 sqrt n) - 1e-3."""
    t0 = time.perf_counter()
    records = ctx.run(ensemble="ginibre", sizes=(16, 64, 256), replicas=20,
                      metrics=("w1_sd",))
    ok = True
    parts = []
    for n in (16, 64, 256):
        vals = _ok_values(records, "w1_sd", n)
        if len(vals) != 20:
            ok = False
            parts.append(f"n={n}: {len(vals)}/20 rows")
            continue
        mean = float(np.mean(vals))
        lo = min(vals)
        upper = 4.0 / math.sqrt(n)
        floor = 1.0 / (3.0 * math.sqrt(n)) - 1e-3
        if not (mean <= upper and lo >= floor):
            ok = False
        parts.append(f"n={n}: mean={mean:.4f} (cap {upper:.4f}), "
                     f"min={lo:.4f} (floor {floor:.4f})")
    wall = time.perf_counter() - t0
    if wall > 600.0:
        ok = False
        parts.append(f"over budget: {wall:.0f}s > 600s")
    return CriterionResult(1, "ginibre w1 window", ok, "; ".join(parts),
                           "mean <= 4/sqrt(n), min >= 1/(3 sqrt n)-1e-3, "
                           "<= 10 min", wall)


def criterion_2(ctx: _Context) -> CriterionResult:
    """Convergence-rate slopes on the log-log means."""
    t0 = time.perf_counter()
    sizes = (16, 32, 64, 128, 256)
    gin = ctx.run(ensemble="ginibre", sizes=sizes, replicas=20,
                  metrics=("w1_sd",))
    rad = ctx.run(ensemble="complex-rademacher", sizes=sizes, replicas=20,
                  metrics=("w1_sd",))
    fit_g = fit_rate(gin, "w1_sd")
    fit_r = fit_rate(rad, "w1_sd")
    ok = (-0.62 <= fit_g.slope <= -0.40) and (fit_r.slope <= -0.38)
    wall = time.perf_counter() - t0
    if wall > 1200.0:
        ok = False
    measured = (f"ginibre slope={fit_g.slope:.4f} (r2={fit_g.r_squared:.4f}); "
                f"complex-rademacher slope={fit_r.slope:.4f} "
                f"(r2={fit_r.r_squared:.4f})")
    return CriterionResult(2, "rate slopes", ok, measured,
                           "ginibre in [-0.62,-0.40]; rademacher <= -0.38, "
                           "<= 20 min", wall)


def criterion_3(ctx: _Context) -> CriterionResult:
    """Eigenvalue repulsion beats iid sampling at n = 256."""
    t0 = time.perf_counter()
    gin = ctx.run(ensemble="ginibre", sizes=(256,), replicas=20,
                  metrics=("w1_sd",))
    iid = ctx.run(ensemble="iid-disk", sizes=(256,), replicas=20,
                  metrics=("w1_sd",))
    mg, seg = _mean_se(_ok_values(gin, "w1_sd", 256))
    mi, sei = _mean_se(_ok_values(iid, "w1_sd", 256))
    ok = (mi > mg) and (mi - 2.0 * sei > mg + 2.0 * seg)
    wall = time.perf_counter() - t0
    measured = (f"iid-disk {mi:.4f}+-{2 * sei:.4f} vs "
                f"ginibre {mg:.4f}+-{2 * seg:.4f}")
    return CriterionResult(3, "repulsion separation", ok, measured,
                           "iid mean > ginibre mean, 2SE intervals disjoint",
                           wall)


def criterion_4(ctx: _Context) -> CriterionResult:
    """Mean-ESD distance times 2n approaches 1."""
    t0 = time.perf_counter()
    ok = True
    parts = []
    for n in (32, 128, 512):
        v = analytics.mean_esd_w1(n)
        scaled = 2.0 * n * v
        if not 0.9 <= scaled <= 1.1:
            ok = False
        parts.append(f"n={n}: 2n*value={scaled:.4f}")
    wall = time.perf_counter() - t0
    if wall > 60.0:
        ok = False
    return CriterionResult(4, "mean-esd asymptotic", ok, "; ".join(parts),
                           "2n * mean_esd_w1(n) in [0.9, 1.1], seconds", wall)


def criterion_5(ctx: _Context) -> CriterionResult:
    """Semi-discrete solver agrees with the exact discrete oracle."""
    t0 = time.perf_counter()
    records = ctx.run(ensemble="ginibre", sizes=(4, 8, 16, 32), replicas=5,
                      metrics=("w1_sd", "w1_oracle"))
    by_key = {}
    for r in records:
        if r.status == "ok" and r.value is not None:
            by_key[(r.n, r.replica, r.metric)] = r.value
    ok = True
    worst = 0.0
    count = 0
    for n in (4, 8, 16, 32):
        for rep in range(5):
            w1 = by_key.get((n, rep, "w1_sd"))
            oracle = by_key.get((n, rep, "w1_oracle"))
            if w1 is None or oracle is None:
                ok = False
                continue
            count += 1
            diff = abs(w1 - oracle)
            tol = 0.01 * oracle + 2.0 / 200
            worst = max(worst, diff / tol)
            if diff > tol:
                ok = False
    if count != 20:
        ok = False
    wall = time.perf_counter() - t0
    if wall > 300.0:
        ok = False
    measured = f"{count}/20 pairs, worst |diff|/tol = {worst:.4f}, {wall:.0f}s"
    return CriterionResult(5, "oracle agreement", ok, measured,
                           "|w1 - oracle| <= 0.01 value + 2/200, <= 5 min",
                           wall)


def criterion_6(ctx: _Context) -> CriterionResult:
    """Ring smoothing moves W1 by at most the ring radius."""
    t0 = time.perf_counter()
    n = 8
    tol_extra = 2.0 * solver_tolerance(ctx.resolution)
    ok = True
    worst = 0.0
    for replica in range(10):
        seed = seed_for(ctx.master_seed, "ginibre", n, replica)
        sample, _ = _build_sample("ginibre", n, seed)
        base = transport.w1_semidiscrete(sample, resolution=ctx.resolution).w1
        for r in (0.01, 0.1):
            reg = transport.regularize_sample(sample, r)
            moved = transport.w1_semidiscrete(reg,
                                              resolution=ctx.resolution).w1
            diff = abs(base - moved)
            bound = r + tol_extra
            worst = max(worst, diff / bound)
            if diff > bound:
                ok = False
    wall = time.perf_counter() - t0
    measured = f"worst |diff|/(r + 2 tol) = {worst:.4f} over 10 trials x 2 radii"
    return CriterionResult(6, "ring smoothing inequality", ok, measured,
                           "|W1 - W1(smoothed)| <= r + 2 solver tol", wall)


def criterion_7(ctx: _Context) -> CriterionResult:
    """Dyadic-partition upper bound dominates the computed W1."""
    t0 = time.perf_counter()
    records = ctx.run(ensemble="ginibre", sizes=(4, 8, 16, 32), replicas=5,
                      metrics=("w1_sd", "d_p"))
    w1s = {}
    uppers = {}
    for r in records:
        if r.status != "ok" or r.value is None:
            continue
        if r.metric == "w1_sd":
            w1s[(r.n, r.replica)] = r.value
        elif r.metric == "d_p":
            uppers[(r.n, r.replica)] = r.diagnostics.get("w_p_upper")
    ok = True
    worst = 0.0
    count = 0
    for key, w1 in sorted(w1s.items()):
        upper = uppers.get(key)
        if upper is None:
            ok = False
            continue
        count += 1
        worst = max(worst, w1 / upper)
        if w1 > upper:
            ok = False
    if count != 20:
        ok = False
    wall = time.perf_counter() - t0
    measured = f"{count}/20 samples, worst w1/(12 D1) = {worst:.4f}"
    return CriterionResult(7, "dyadic upper bound", ok, measured,
                           "w1 <= 12 D1 on every criterion-5 sample", wall)


def criterion_8(ctx: _Context) -> CriterionResult:
    """Potential gap concentrates as n grows (cutoff radius 1/n)."""
    t0 = time.perf_counter()
    records = ctx.run(ensemble="ginibre", sizes=(64, 256), replicas=20,
                      metrics=("potential_gap",))
    v64 = _ok_values(records, "potential_gap", 64)
    v256 = _ok_values(records, "potential_gap", 256)
    ok = len(v64) == 20 and len(v256) == 20
    m64 = float(np.mean(v64)) if v64 else math.nan
    m256 = float(np.mean(v256)) if v256 else math.nan
    thr = 256.0 ** (-0.7)
    hits = sum(1 for v in v256 if v <= thr)
    if not (m256 < m64 and hits >= 18):
        ok = False
    wall = time.perf_counter() - t0
    measured = (f"mean(64)={m64:.5f}, mean(256)={m256:.5f}, "
                f"{hits}/20 at n=256 under {thr:.5f}")
    return CriterionResult(8, "potential concentration", ok, measured,
                           "mean(256) < mean(64); >= 18/20 <= 256^-0.7", wall)


def criterion_9(ctx: _Context) -> CriterionResult:
    """Smoothed pair energy matches the incomplete-Gamma leading constant."""
    t0 = time.perf_counter()
    n = 256
    records = ctx.run(ensemble="ginibre", sizes=(n,), replicas=50,
                      metrics=("pair_energy",), kappa=0.25)
    vals = _ok_values(records, "pair_energy", n)
    scaled = n * float(np.mean(vals)) if vals else math.nan
    limit = (analytics.exp_integral_e1(0.25) + math.log(4.0)) / 2.0
    thr = 1.25 * limit
    ok = len(vals) == 50 and 0.0 < scaled <= thr
    wall = time.perf_counter() - t0
    measured = (f"n*mean={scaled:.4f} over {len(vals)}/50 pairs "
                f"(limit const {limit:.4f})")
    return CriterionResult(9, "pair-energy constant", ok, measured,
                           f"in (0, {thr:.4f}]", wall)


def criterion_10(ctx: _Context) -> CriterionResult:
    """Centered-ball Kolmogorov discrepancy decays at the stated rate."""
    t0 = time.perf_counter()
    records = ctx.run(ensemble="ginibre", sizes=(64, 256), replicas=20,
                      metrics=("kolmogorov_ball",))
    ok = True
    parts = []
    for n in (64, 256):
        vals = _ok_values(records, "kolmogorov_ball", n)
        mean = float(np.mean(vals)) if vals else math.nan
        cap = n ** (-0.3)
        if len(vals) != 20 or not mean <= cap:
            ok = False
        parts.append(f"n={n}: mean={mean:.4f} (cap {cap:.4f})")
    wall = time.perf_counter() - t0
    return CriterionResult(10, "kolmogorov ball rate", ok, "; ".join(parts),
                           "mean <= n^(-0.3) at n in {64, 256}", wall)


def criterion_11(ctx: _Context) -> CriterionResult:
    """Numerics backstops across everything the suite computed."""
    t0 = time.perf_counter()
    ok = True
    notes = []
    # eigensolver residuals on every run that carried one
    worst_eig = 0.0
    for rec in ctx.records_seen:
        res = rec.diagnostics.get("eig_residual")
        if res is not None:
            worst_eig = max(worst_eig, res)
        pres = rec.diagnostics.get("partner_eig_residual")
        if pres is not None:
            worst_eig = max(worst_eig, pres)
    if worst_eig > 1e-8:
        ok = False
    notes.append(f"max eig residual {worst_eig:.2e}")
    # incomplete exponential sum majorants across the full grid
    bound_ok = True
    for k in range(1, 12):
        n = 2 ** k
        for rho in (0.1, 0.5, 0.9, 1.0):
            if analytics.log_exp_sum_tail(n, rho) > \
                    analytics.log_tail_bound(n, rho) + 1e-12:
                bound_ok = False
        for rho in (1.0, 1.1, 2.0):
            if analytics.log_exp_sum_head(n, rho) > \
                    analytics.log_head_bound(n, rho) + 1e-12:
                bound_ok = False
    if not bound_ok:
        ok = False
    notes.append(f"sum majorants {'hold' if bound_ok else 'VIOLATED'} "
                 "(n = 2..2048, 6 radii)")
    # mass conservation and weak duality on every transport solve
    worst_mass = 0.0
    worst_gap = -math.inf
    checked = 0
    for rec in ctx.records_seen:
        if rec.metric != "w1_sd" or rec.status != "ok":
            continue
        diag = rec.diagnostics
        checked += 1
        worst_mass = max(worst_mass, abs(diag["mass_sum"] - 1.0))
        slack = diag["duality_gap_bound"] + solver_tolerance(ctx.resolution)
        worst_gap = max(worst_gap,
                        diag["lower_certificate"] - rec.value - slack)
    if worst_mass > 1e-9 or worst_gap > 0.0:
        ok = False
    notes.append(f"mass drift {worst_mass:.2e} over {checked} solves")
    notes.append(f"duality margin {worst_gap:.2e} (must be <= 0)")
    wall = time.perf_counter() - t0
    return CriterionResult(11, "numerics backstops", ok, "; ".join(notes),
                           "residuals <= 1e-8; majorants hold; "
                           "masses sum to 1 +- 1e-9; weak duality", wall)


_CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
             criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
             criterion_11)


def acceptance(out_dir: str = "results", master_seed: int = MASTER_SEED,
               resolution: int = 1024, echo=print):
    """Run all criteria; returns (results, exit_status)."""
    ctx = _Context(out_dir=out_dir, master_seed=master_seed,
                   resolution=resolution)
    results = []
    for fn in _CRITERIA:
        result = fn(ctx)
        results.append(result)
        flag = "PASS" if result.passed else "FAIL"
        echo(f"[{result.number:2d}] {flag}  {result.wall_s:8.1f}s  "
             f"{result.name}: {result.measured}  (target: {result.target})")
    failures = sum(1 for r in results if not r.passed)
    echo(f"acceptance: {len(results) - failures}/{len(results)} criteria passed")
    return results, (1 if failures else 0)
