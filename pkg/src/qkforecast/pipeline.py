"""Data ingestion, standardization, and leak-free windowing.

The chronology is strict: the series is split into contiguous train /
validation / test ranges first, features are z-scored with statistics from
the train range only, and sliding windows are cut inside each range so that
no window or its target crosses a boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .errors import (
    EmptyAfterCleaning,
    LeakageError,
    MissingColumn,
    NonMonotonicTime,
    SplitTooShort,
    UnreadableInput,
    ZeroVariance,
)

# Standardized windows flatter than this are treated as constant and
# replaced by the uniform unit vector; occurrences are counted and reported.
_DEGENERATE_NORM = 1e-12


@dataclass
class StationSeries:
    """One station's aligned multivariate series on an integer minute axis."""

    station_code: str
    timestamps: np.ndarray
    features: dict
    target_name: str
    koppen_class: str = ""
    dropped_rows: int = 0
    spacing_violations: int = 0
    scaler: dict | None = None

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.int64)
        self.timestamps = t
        n = t.shape[0]
        for name, vals in self.features.items():
            arr = np.asarray(vals, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"feature {name!r} length {arr.shape} != {n}")
            self.features[name] = arr
        if self.target_name not in self.features:
            raise MissingColumn(self.target_name)
        if n > 1 and not np.all(np.diff(t) > 0):
            raise NonMonotonicTime("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return int(self.timestamps.shape[0])


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split fractions plus window geometry."""

    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    window: int = 32
    stride: int = 1
    horizon: int = 1

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(not 0.0 < f < 1.0 for f in fracs):
            raise ValueError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)}")
        if self.window < 2 or self.window & (self.window - 1):
            raise ValueError(f"window must be a power of two >= 2, got {self.window}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def n_qubits(self) -> int:
        return int(math.log2(self.window))


@dataclass
class WindowSet:
    """Windows, targets, and provenance for one split of one station."""

    split: str
    windows: dict  # feature name -> (num_windows, window) unit-norm rows
    targets: np.ndarray  # standardized units
    start_indices: np.ndarray  # positions in the full series
    scaler: dict  # feature name -> (mean, std) fitted on train
    target_name: str
    degenerate_windows: int = 0

    @property
    def n_windows(self) -> int:
        return int(self.targets.shape[0])

    def targets_original_units(self) -> np.ndarray:
        mean, std = self.scaler[self.target_name]
        return self.targets * std + mean


def ingest_csv(path, feature_columns, target: str, station_code: str = "",
               koppen_class: str = "") -> StationSeries:
    """Read one station CSV into an aligned series.

    The first column is the timestamp, either an integer minute index or an
    ISO-8601 string.  Rows with a missing value in any used column are
    dropped and counted; spacing irregularities left behind by the drops are
    counted rather than interpolated away.
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError) as exc:
        raise UnreadableInput(f"{path}: {exc}") from exc
    if df.shape[1] < 2:
        raise MissingColumn("(no feature columns)")
    ts_col = df.columns[0]
    used = list(dict.fromkeys(list(feature_columns) + [target]))
    for col in used:
        if col not in df.columns:
            raise MissingColumn(col)
    n_before = len(df)
    df = df.dropna(subset=used)
    dropped = n_before - len(df)
    if len(df) == 0:
        raise EmptyAfterCleaning(f"{path}: no rows left after dropping missing values")
    raw_ts = df[ts_col]
    if pd.api.types.is_numeric_dtype(raw_ts):
        minutes = raw_ts.to_numpy(dtype=np.int64)
    else:
        parsed = pd.to_datetime(raw_ts, utc=True)
        minutes = (parsed.astype("int64") // 60_000_000_000).to_numpy()
    diffs = np.diff(minutes)
    if minutes.size > 1 and not np.all(diffs > 0):
        raise NonMonotonicTime(f"{path}: timestamps not strictly increasing")
    violations = 0
    if diffs.size:
        step = int(np.median(diffs))
        violations = int(np.count_nonzero(diffs != step))
    code = station_code or str(getattr(path, "stem", None) or _stem(path))
    return StationSeries(
        station_code=code,
        timestamps=minutes,
        features={c: df[c].to_numpy(dtype=float) for c in used},
        target_name=target,
        koppen_class=koppen_class,
        dropped_rows=int(dropped),
        spacing_violations=violations,
    )


def _stem(path) -> str:
    import os

    return os.path.splitext(os.path.basename(str(path)))[0]


def split_bounds(n_rows: int, spec: SplitSpec):
    """Half-open row ranges for train, validation, and test."""
    t1 = int(n_rows * spec.train_frac)
    t2 = int(n_rows * (spec.train_frac + spec.val_frac))
    return {"train": (0, t1), "val": (t1, t2), "test": (t2, n_rows)}


def standardize(series: StationSeries, spec: SplitSpec):
    """Z-score all features with mean/std fitted on the train range only.

    Returns the scaled series (scaler attached) and the scaler mapping.
    Population std (ddof=0) is used; a constant train slice is an error.
    """
    lo, hi = split_bounds(len(series), spec)["train"]
    scaler = {}
    scaled = {}
    for name, vals in series.features.items():
        train = vals[lo:hi]
        if train.size == 0:
            raise SplitTooShort("train")
        mean = float(train.mean())
        std = float(train.std())
        if std < 1e-12:
            raise ZeroVariance(name)
        scaler[name] = (mean, std)
        scaled[name] = (vals - mean) / std
    out = replace(series, features=scaled)
    out.scaler = scaler
    return out, scaler


def window_starts(lo: int, hi: int, spec: SplitSpec) -> np.ndarray:
    """Window start positions inside [lo, hi) whose target stays inside."""
    last = hi - spec.window - spec.horizon
    if last < lo:
        return np.empty(0, dtype=np.int64)
    return np.arange(lo, last + 1, spec.stride, dtype=np.int64)


def expected_window_count(length: int, spec: SplitSpec) -> int:
    """Closed form for the number of windows a range of given length yields."""
    if length < spec.window + spec.horizon:
        return 0
    return (length - spec.window - spec.horizon) // spec.stride + 1


def make_windows(series: StationSeries, spec: SplitSpec) -> dict:
    """Cut per-split window sets from a (standardized) series.

    Window rows are L2-normalized after standardization; constant windows
    fall back to the uniform unit vector and are counted.  Targets stay in
    standardized units with the scaler attached for inverse transforms.
    """
    bounds = split_bounds(len(series), spec)
    scaler = series.scaler or {name: (0.0, 1.0) for name in series.features}
    target_vals = series.features[series.target_name]
    out = {}
    for split, (lo, hi) in bounds.items():
        starts = window_starts(lo, hi, spec)
        if starts.size == 0:
            raise SplitTooShort(split)
        degenerate = 0
        windows = {}
        for name, vals in series.features.items():
            rows = np.stack([vals[s:s + spec.window] for s in starts])
            norms = np.linalg.norm(rows, axis=1)
            flat = norms < _DEGENERATE_NORM
            if flat.any():
                degenerate += int(flat.sum())
                rows[flat] = 1.0 / math.sqrt(spec.window)
                norms[flat] = 1.0
            windows[name] = rows / norms[:, None]
        targets = target_vals[starts + spec.window - 1 + spec.horizon]
        out[split] = WindowSet(
            split=split,
            windows=windows,
            targets=targets.copy(),
            start_indices=starts,
            scaler=dict(scaler),
            target_name=series.target_name,
            degenerate_windows=degenerate,
        )
    return out


def assert_leak_free(window_sets: dict, spec: SplitSpec) -> None:
    """Raise LeakageError unless every earlier split ends strictly before
    the next split's first window opens (targets included)."""
    order = [s for s in ("train", "val", "test") if s in window_sets]
    for earlier, later in zip(order, order[1:]):
        a = window_sets[earlier].start_indices
        b = window_sets[later].start_indices
        if a.size == 0 or b.size == 0:
            continue
        last_touched = int(a.max()) + spec.window - 1 + spec.horizon
        first_used = int(b.min())
        if last_touched >= first_used:
            raise LeakageError(
                f"{earlier} windows reach index {last_touched}, "
                f"{later} windows start at {first_used}"
            )


def lag1_screen(series: StationSeries, spec: SplitSpec, top_k: int):
    """Rank features by one-step-ahead correlation with the target.

    Pearson correlation of feature[t] against target[t+1] over the train
    range only.  Constant features are skipped and reported, not ranked.
    Returns (ranked list of (feature, correlation), skipped feature names).
    """
    lo, hi = split_bounds(len(series), spec)["train"]
    if hi - lo < 3:
        raise SplitTooShort("train")
    target = series.features[series.target_name][lo + 1:hi]
    if target.std() < 1e-12:
        raise ZeroVariance(series.target_name)
    ranked = []
    skipped = []
    for name, vals in series.features.items():
        lead = vals[lo:hi - 1]
        if lead.std() < 1e-12:
            skipped.append(name)
            continue
        corr = float(np.corrcoef(lead, target)[0, 1])
        ranked.append((name, corr))
    ranked.sort(key=lambda item: abs(item[1]), reverse=True)
    return ranked[:top_k], skipped
