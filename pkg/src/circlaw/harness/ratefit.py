"""Log-log rate extraction from experiment records."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(mean value) against log n.

    ``points`` holds the fitted (log n, log mean) pairs sorted by n;
    ``std_errors`` the per-size standard errors of the replica means (on
    the raw value scale, aligned with ``points``).
    """

    slope: float
    intercept: float
    r_squared: float
    points: tuple
    std_errors: tuple


def fit_rate(records, metric: str) -> RateFit:
    """Fit value = C * n^slope over the per-size replica means.

    Requires at least 3 distinct sizes with at least one successful
    record each; failed rows are ignored.  The slope is invariant under
    multiplying every value by a positive constant.
    """
    groups: dict = {}
    for rec in records:
        if rec.metric != metric or rec.status != "ok" or rec.value is None:
            continue
        groups.setdefault(rec.n, []).append(rec.value)
    if len(groups) < 3:
        raise ValueError(
            f"rate fit needs >= 3 sizes with data for {metric!r}, "
            f"got {sorted(groups)}")
    sizes = sorted(groups)
    means = []
    errs = []
    for n in sizes:
        vals = np.asarray(groups[n], dtype=np.float64)
        mean = float(np.mean(vals))
        if not mean > 0.0:
            raise ValueError(f"mean value at n={n} is {mean}; log fit needs > 0")
        means.append(mean)
        sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        errs.append(sd / math.sqrt(vals.size) if vals.size > 1 else 0.0)
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(means))
    xbar = float(np.mean(x))
    ybar = float(np.mean(y))
    sxx = float(np.sum((x - xbar) ** 2))
    sxy = float(np.sum((x - xbar) * (y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - ybar) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(slope=slope, intercept=intercept, r_squared=r_squared,
                   points=tuple(zip(x.tolist(), y.tolist())),
                   std_errors=tuple(errs))
