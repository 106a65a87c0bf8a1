"""Normalized forecast error metrics and per-class aggregation.

All percentage metrics normalize by the mean of the observations, so they
are only defined when that mean is safely nonzero.  Two flavors of R^2 are
reported side by side: the squared Pearson correlation (bounded to [0, 1],
blind to bias) and the coefficient-of-determination score form (unbounded
below, penalizes bias), which is the one used for model selection.

This module computes tables only; rendering lives in the report command.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, ZeroMeanObservations, ZeroVariance

ERMAX_DEF = "maxabs_over_meanobs"
METRIC_FIELDS = ("nrmse_pct", "nmbe_pct", "r2_pearson", "r2_score", "mae", "ermax_pct")


def _paired(predictions, observations):
    x = np.asarray(predictions, dtype=float)
    y = np.asarray(observations, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise LengthMismatch(
            f"need equal-length nonempty vectors, got {x.shape} vs {y.shape}")
    return x, y


def _checked_mean(y: np.ndarray) -> float:
    mean = float(y.mean())
    if abs(mean) <= 1e-9:
        raise ZeroMeanObservations(f"observed mean {mean} too close to zero")
    return mean


def nrmse(predictions, observations) -> float:
    """Root-mean-square error as a percentage of the observed mean."""
    x, y = _paired(predictions, observations)
    rmse = float(np.sqrt(np.mean((x - y) ** 2)))
    return 100.0 * rmse / _checked_mean(y)


def nmbe(predictions, observations) -> float:
    """Mean bias error as a percentage of the observed mean."""
    x, y = _paired(predictions, observations)
    return 100.0 * float(np.mean(x - y)) / _checked_mean(y)


def mae(predictions, observations) -> float:
    """Mean absolute error in the units of the inputs."""
    x, y = _paired(predictions, observations)
    return float(np.mean(np.abs(x - y)))


def ermax_pct(predictions, observations) -> float:
    """Largest absolute error as a percentage of the observed mean."""
    x, y = _paired(predictions, observations)
    return 100.0 * float(np.max(np.abs(x - y))) / _checked_mean(y)


def r2_pearson(predictions, observations) -> float:
    """Squared Pearson correlation between predictions and observations."""
    x, y = _paired(predictions, observations)
    if x.std() < 1e-12:
        raise ZeroVariance("predictions")
    if y.std() < 1e-12:
        raise ZeroVariance("observations")
    return float(np.corrcoef(x, y)[0, 1] ** 2)


def r2_score(predictions, observations) -> float:
    """1 - SS_res / SS_tot; can be negative for worse-than-mean models."""
    x, y = _paired(predictions, observations)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot < 1e-24:
        raise ZeroVariance("observations")
    ss_res = float(np.sum((x - y) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class MetricsReport:
    """All metrics for one station/model pair plus bookkeeping flags."""

    station_code: str
    n_points: int
    nrmse_pct: float
    nmbe_pct: float
    r2_pearson: float
    r2_score: float
    mae: float
    ermax_pct: float
    ermax_def: str = ERMAX_DEF
    flags: dict = field(default_factory=dict)


def compute_report(station_code: str, predictions, observations,
                   flags: dict | None = None) -> MetricsReport:
    """Evaluate the full metric set on one prediction/observation pair.

    An undefined Pearson R^2 (constant predictions) is reported as NaN with
    a flag instead of failing the whole report.
    """
    x, y = _paired(predictions, observations)
    all_flags = dict(flags or {})
    try:
        r2p = r2_pearson(x, y)
    except ZeroVariance as exc:
        r2p = float("nan")
        all_flags["r2_pearson_undefined"] = str(exc)
    return MetricsReport(
        station_code=station_code,
        n_points=int(x.size),
        nrmse_pct=nrmse(x, y),
        nmbe_pct=nmbe(x, y),
        r2_pearson=r2p,
        r2_score=r2_score(x, y),
        mae=mae(x, y),
        ermax_pct=ermax_pct(x, y),
        flags=all_flags,
    )


@dataclass(frozen=True)
class FiveNumberSummary:
    median: float
    q1: float
    q3: float
    min: float
    max: float
    count: int

    @classmethod
    def of(cls, values) -> "FiveNumberSummary":
        v = np.asarray(values, dtype=float)
        q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
        return cls(median=float(med), q1=float(q1), q3=float(q3),
                   min=float(v.min()), max=float(v.max()), count=int(v.size))


def aggregate_by_class(reports, class_map: dict) -> dict:
    """Five-number summaries of each metric, grouped by station class.

    class_map sends station codes to class labels; stations without a
    mapping fall into "unknown".  Classes that end up empty simply do not
    appear.  NaN metric values are excluded from their metric's summary.
    """
    groups = {}
    for report in reports:
        label = class_map.get(report.station_code, "unknown")
        groups.setdefault(label, []).append(report)
    out = {}
    for label in sorted(groups):
        members = groups[label]
        summary = {}
        for name in METRIC_FIELDS:
            vals = np.array([getattr(r, name) for r in members], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                continue
            summary[name] = FiveNumberSummary.of(vals)
        out[label] = summary
    return out
