"""Command-line interface.

Subcommands: sample, w1, rates, figures, analytics, validate.  Global
flags (--config, --seed, --workers, --out-dir, --resolution, --kappa)
override config-file keys, which override CIRCLAW_* environment
variables' fallbacks in reverse: precedence is CLI > environment > config
file > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .. import analytics, transport
from ..ensembles import ENSEMBLE_KINDS, POINT_SAMPLE_TAGS
from .acceptance import acceptance
from .config import METRIC_NAMES, load_config
from .figures import emit_figures
from .ratefit import fit_rate
from .runner import _build_sample, run_experiment, seed_for, summary_csv

_ALL_ENSEMBLES = ENSEMBLE_KINDS + POINT_SAMPLE_TAGS


def _add_global_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, dest="master_seed",
                   help="master seed (config key master_seed)")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--out-dir", dest="out_dir", help="output directory")
    p.add_argument("--resolution", type=int, help="transport raster resolution")
    p.add_argument("--kappa", type=float, help="pair-energy smoothing constant")


def _config_from_args(args, **extra):
    cli = {
        "master_seed": args.master_seed,
        "workers": args.workers,
        "out_dir": args.out_dir,
        "resolution": args.resolution,
        "kappa": args.kappa,
    }
    cli.update(extra)
    return load_config(path=args.config, **cli)


def _make_sample(config, n: int, replica: int):
    seed = seed_for(config.master_seed, config.ensemble, n, replica)
    sample, diag = _build_sample(config.ensemble, n, seed)
    return sample, seed, diag


def _cmd_sample(args) -> int:
    config = _config_from_args(args, ensemble=args.ensemble, sizes=(args.n,))
    sample, seed, _ = _make_sample(config, args.n, args.replica)
    out = sys.stdout if args.out is None else open(args.out, "w",
                                                   encoding="utf-8")
    try:
        out.write("index,re,im\n")
        for i, z in enumerate(sample.points):
            out.write(f"{i},{z.real:.17g},{z.imag:.17g}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"# ensemble={config.ensemble} n={args.n} seed={seed}",
          file=sys.stderr)
    return 0


def _cmd_w1(args) -> int:
    config = _config_from_args(args, ensemble=args.ensemble, sizes=(args.n,))
    sample, seed, diag = _make_sample(config, args.n, args.replica)
    result = transport.w1_semidiscrete(sample, resolution=config.resolution,
                                       tol_mass=config.tol_mass)
    state = result.dual_state
    payload = {
        "ensemble": config.ensemble,
        "n": args.n,
        "seed": seed,
        "w1": result.w1,
        "lower_certificate": result.lower_certificate,
        "iterations": state.iterations,
        "mass_residual": state.mass_residual,
        "converged": state.converged,
        "integrator": result.integrator,
    }
    payload.update({k: v for k, v in diag.items() if k == "eig_residual"})
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_rates(args) -> int:
    sizes = tuple(int(t) for t in args.sizes.split(",")) if args.sizes else None
    metrics = tuple(t.strip() for t in args.metrics.split(",")) \
        if args.metrics else None
    config = _config_from_args(args, ensemble=args.ensemble, sizes=sizes,
                               replicas=args.replicas, metrics=metrics)
    records = run_experiment(config)
    summary_csv(records, f"{config.out_dir}/summary.csv")
    fit = fit_rate(records, args.fit_metric)
    json.dump({
        "ensemble": config.ensemble,
        "metric": args.fit_metric,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points": list(fit.points),
        "std_errors": list(fit.std_errors),
        "records": len(records),
    }, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_figures(args) -> int:
    config = _config_from_args(args, ensemble=args.ensemble, sizes=(args.n,))
    sample, _, _ = _make_sample(config, args.n, args.replica)
    kind = args.kind.replace("-", "_")
    paths = emit_figures(sample, kind, config.out_dir,
                         resolution=min(config.resolution, 512), r=args.r)
    for p in paths:
        print(p)
    return 0


def _cmd_analytics(args) -> int:
    config = _config_from_args(args)
    n = args.n
    rhos = [float(t) for t in args.rho.split(",")]
    out = sys.stdout
    out.write("quantity,argument,value\n")
    for rho in rhos:
        out.write(f"mean_density,{rho:g},{analytics.mean_density(n, rho):.12g}\n")
    for rho in rhos:
        out.write(f"radial_defect,{rho:g},"
                  f"{analytics.radial_defect(n, rho):.12g}\n")
    v = analytics.mean_esd_w1(n)
    out.write(f"mean_esd_w1,n={n},{v:.12g}\n")
    out.write(f"mean_esd_w1_times_2n,n={n},{2 * n * v:.12g}\n")
    x = 4.0 * config.kappa ** 2
    out.write(f"exp_integral_e1,{x:g},{analytics.exp_integral_e1(x):.12g}\n")
    limit = (analytics.exp_integral_e1(x) + math.log(4.0)) / 2.0
    out.write(f"pair_energy_limit_const,kappa={config.kappa:g},{limit:.12g}\n")
    return 0


def _cmd_validate(args) -> int:
    config = _config_from_args(args)
    _, status = acceptance(out_dir=config.out_dir,
                           master_seed=config.master_seed,
                           resolution=config.resolution)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="circlaw",
        description="Spectral transport toolkit: sample non-Hermitian "
                    "ensembles and measure their distance to the circular "
                    "law.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit one point sample as CSV")
    p.add_argument("--ensemble", default="ginibre", choices=_ALL_ENSEMBLES)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("w1", help="one transport solve, JSON to stdout")
    p.add_argument("--ensemble", default="ginibre", choices=_ALL_ENSEMBLES)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--replica", type=int, default=0)
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_w1)

    p = sub.add_parser("rates", help="run an experiment and fit the rate")
    p.add_argument("--ensemble", default="ginibre", choices=_ALL_ENSEMBLES)
    p.add_argument("--sizes", help="comma-separated sizes")
    p.add_argument("--replicas", type=int)
    p.add_argument("--metrics", help=f"comma-separated from {METRIC_NAMES}")
    p.add_argument("--fit-metric", default="w1_sd", choices=METRIC_NAMES)
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("figures", help="emit SVG/CSV figures")
    p.add_argument("--kind", required=True,
                   choices=("scatter", "tessellation", "potential-surface",
                            "potential_surface"))
    p.add_argument("--ensemble", default="ginibre", choices=_ALL_ENSEMBLES)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--r", type=float, help="cutoff radius (default 1/n)")
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_figures)

    p = sub.add_parser("analytics", help="tabulate closed-form quantities")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--rho", default="0.5,0.9,1.0,1.1",
                   help="comma-separated radii")
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_analytics)

    p = sub.add_parser("validate", help="run the acceptance suite")
    _add_global_flags(p)
    p.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
