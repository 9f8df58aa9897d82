"""Exponential-rate fitting and trajectory comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory import Trajectory

__all__ = ["FitResult", "fit_exponential", "ComparisonReport", "compare_trajectories"]


@dataclass(frozen=True)
class FitResult:
    """Least-squares line through (t, log y): slope, intercept, diagnostics."""

    slope: float
    intercept: float
    window: tuple[float, float]
    residual_rms: float
    n_points: int


def fit_exponential(t, y, window: tuple[float, float] | None = None) -> FitResult:
    """Fit y ~ exp(intercept + slope * t) by least squares on log y.

    ``window`` restricts the fit to t in [t0, t1].  Requires at least 10
    points and strictly positive y on the window.  The slope is invariant
    under scaling of y (only the intercept moves).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, y = t[keep], y[keep]
    if len(t) < 10:
        raise ValueError(f"too few points for a fit: {len(t)} < 10")
    if np.any(y <= 0):
        raise ValueError("y must be strictly positive on the fit window")
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    resid = logy - (slope * t + intercept)
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        window=(float(t[0]), float(t[-1])),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        n_points=len(t),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Per-column max/RMS deviations between two records, plus a verdict."""

    max_dev: dict[str, float]
    rms_dev: dict[str, float]
    tolerances: dict[str, float]
    passed: bool

    def worst(self) -> tuple[str, float]:
        name = max(self.max_dev, key=lambda k: self.max_dev[k])
        return name, self.max_dev[name]


def compare_trajectories(a: Trajectory, b: Trajectory,
                         tolerances: dict[str, float] | None = None,
                         interpolate: bool = False) -> ComparisonReport:
    """Column-wise deviation report between two trajectory records.

    Time grids must match exactly unless ``interpolate`` is set, in which
    case b's columns are linearly interpolated onto the overlap of the two
    grids.  The verdict checks each named tolerance against the max
    deviation of that column (columns without a stated tolerance are
    reported but not judged).
    """
    cols_a = a.columns()
    cols_b = b.columns()
    ta, tb = cols_a.pop("t"), cols_b.pop("t")
    shared = [k for k in cols_a if k in cols_b]
    if len(ta) == len(tb) and np.array_equal(ta, tb):
        sampled_a = {k: cols_a[k] for k in shared}
        sampled_b = {k: cols_b[k] for k in shared}
    elif interpolate:
        lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
        keep = (ta >= lo) & (ta <= hi)
        if not np.any(keep):
            raise ValueError("the time grids do not overlap")
        sampled_a = {k: cols_a[k][keep] for k in shared}
        sampled_b = {k: np.interp(ta[keep], tb, cols_b[k]) for k in shared}
    else:
        raise ValueError("time grids differ; pass interpolate=True to compare")
    max_dev = {}
    rms_dev = {}
    for k in shared:
        d = np.abs(sampled_a[k] - sampled_b[k])
        max_dev[k] = float(np.max(d)) if len(d) else 0.0
        rms_dev[k] = float(np.sqrt(np.mean(d ** 2))) if len(d) else 0.0
    tolerances = tolerances or {}
    passed = all(max_dev.get(k, 0.0) <= tol for k, tol in tolerances.items())
    return ComparisonReport(max_dev=max_dev, rms_dev=rms_dev,
                            tolerances=dict(tolerances), passed=passed)
