"""Experiment configuration and per-station run orchestration.

A run takes each station through ingestion, standardization, windowing,
Gram assembly per (feature, kernel family), mixture optimization per
family, a final fit, and test-set metrics.  Artifacts land under the
configured output directory: one JSON report and one JSONL optimization
trace per station, plus a metrics CSV across stations and a manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .ckernel import ClassicalKernelParams, classical_gram
from .errors import ConfigError, QkforecastError
from .krr import KernelMatrix, krr_fit, krr_predict, load_kernel_matrix, save_kernel_matrix
from .metrics import ERMAX_DEF, METRIC_FIELDS, compute_report
from .mixopt import OptimizationBudget, add_jitter, mix_kernels, optimize_mixture
from .pipeline import SplitSpec, assert_leak_free, ingest_csv, make_windows, standardize
from .qkernel import build_protective_layout, qft_gram

CACHE_DIR_ENV = "QKFORECAST_CACHE_DIR"
KERNEL_FAMILIES = ("qft", "rbf", "poly")


def _load_schema(name: str) -> dict:
    with resources.files("qkforecast.schemas").joinpath(name).open("r") as fh:
        return json.load(fh)


def load_station_metadata(path=None) -> dict:
    """Map station codes to climate classes, from the bundled table or a
    user-supplied CSV with the same columns."""
    if path is None:
        ref = resources.files("qkforecast.data").joinpath("stations_bsrn.csv")
        with ref.open("r") as fh:
            lines = fh.read().splitlines()
    else:
        with open(path) as fh:
            lines = fh.read().splitlines()
    header = lines[0].split(",")
    code_col = header.index("code")
    koppen_col = header.index("koppen")
    out = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        out[parts[code_col]] = parts[koppen_col]
    return out


@dataclass(frozen=True)
class StationEntry:
    code: str
    path: str
    koppen: str = ""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, immutable view of one experiment configuration file."""

    stations: tuple
    features: tuple
    target: str
    output_dir: str
    metadata_path: str | None = None
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    window: int = 32
    stride: int = 1
    horizon: int = 1
    kernels: tuple = ("qft", "rbf", "poly")
    rbf_gamma: float | None = None
    poly_gamma: float | None = None
    poly_offset: float = 1.0
    poly_degree: int = 3
    outer_calls: int = 20
    alpha_min: float = 1e-6
    alpha_max: float = 1e3
    alpha_count: int = 100
    proposer: str = "gp"
    seed: int = 0
    cache_kernels: bool = True
    jobs: int = 1

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_frac, self.val_frac, self.test_frac,
                         self.window, self.stride, self.horizon)

    def budget(self) -> OptimizationBudget:
        grid = np.logspace(np.log10(self.alpha_min), np.log10(self.alpha_max),
                           self.alpha_count)
        return OptimizationBudget(outer_calls=self.outer_calls,
                                  alpha_grid=grid, seed=self.seed)

    def classical_params(self, family: str) -> ClassicalKernelParams:
        default_gamma = 1.0 / self.window
        if family == "rbf":
            return ClassicalKernelParams("rbf", self.rbf_gamma or default_gamma)
        return ClassicalKernelParams("poly", self.poly_gamma or default_gamma,
                                     offset=self.poly_offset, degree=self.poly_degree)

    def canonical_json(self) -> str:
        doc = asdict(self)
        doc["stations"] = [asdict(StationEntry(**s)) if isinstance(s, dict) else asdict(s)
                           for s in self.stations]
        return json.dumps(doc, sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    """Parse and schema-validate a configuration file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, _load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config failed validation: {exc.message}") from exc
    stations = tuple(StationEntry(**s) for s in doc.pop("stations"))
    doc["features"] = tuple(doc["features"])
    if "kernels" in doc:
        doc["kernels"] = tuple(doc["kernels"])
    try:
        config = ExperimentConfig(stations=stations, **doc)
        config.split_spec()
        config.budget()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if config.target not in config.features:
        raise ConfigError(f"target {config.target!r} must be listed in features")
    if config.alpha_min >= config.alpha_max:
        raise ConfigError("alpha_min must be below alpha_max")
    return config


@dataclass
class GramCache:
    """Content-addressed store for kernel blocks under one directory."""

    directory: str | None
    hits: int = 0
    misses: int = 0

    def _key(self, family: str, params_tag: str, x: np.ndarray, y) -> str:
        h = hashlib.sha256()
        h.update(family.encode())
        h.update(params_tag.encode())
        h.update(x.tobytes())
        h.update(b"|" if y is None else y.tobytes())
        return h.hexdigest()[:32]

    def get_or_compute(self, family: str, params_tag: str, x: np.ndarray, y,
                       kind: str, source: str, compute) -> KernelMatrix:
        if self.directory is None:
            return KernelMatrix(compute(), kind=kind, source=source)
        os.makedirs(self.directory, exist_ok=True)
        path = os.path.join(self.directory,
                            self._key(family, params_tag, x, y) + ".qkrn")
        if os.path.exists(path):
            self.hits += 1
            loaded = load_kernel_matrix(path, source=source)
            return loaded
        self.misses += 1
        block = KernelMatrix(compute(), kind=kind, source=source)
        save_kernel_matrix(path, block)
        return block


def station_grams(config: ExperimentConfig, window_sets: dict, family: str,
                  cache: GramCache, station_code: str, jobs: int = 1):
    """Per-feature kernel blocks for train/train, val/train, test/train."""
    spec = config.split_spec()
    layout = build_protective_layout(spec.n_qubits) if family == "qft" else None
    params = None if family == "qft" else config.classical_params(family)
    params_tag = family if params is None else repr(params)
    train = window_sets["train"].windows
    blocks = {"train": [], "val": [], "test": []}
    for feature in config.features:
        x_train = train[feature]
        for split in ("train", "val", "test"):
            rows = window_sets[split].windows[feature]
            y = None if split == "train" else x_train
            kind = "train_train" if split == "train" else "eval_train"
            if family == "qft":
                compute = (lambda r=rows, yy=y: qft_gram(r, yy, layout, jobs=jobs))
            else:
                compute = (lambda r=rows, yy=y, p=params:
                           classical_gram(r, yy if yy is not None else None, p))
            source = f"{family}:{feature}"
            blocks[split].append(cache.get_or_compute(
                family, params_tag, rows, y, kind, source, compute))
    return blocks


def _model_record(family: str, result, report, val_r2: float) -> dict:
    return {
        "family": family,
        "branch": result.weights.branch,
        "weights": [float(w) for w in result.weights.weights],
        "degenerate_weights": bool(result.weights.degenerate),
        "ridge_lambda": float(result.ridge_lambda),
        "val_r2": float(val_r2),
        "metrics": {name: float(getattr(report, name)) for name in METRIC_FIELDS},
        "n_points": report.n_points,
        "flags": report.flags,
    }


def run_station(config: ExperimentConfig, entry: StationEntry, class_map: dict,
                jobs: int = 1) -> dict:
    """Run the full pipeline for one station; returns the report document."""
    spec = config.split_spec()
    series = ingest_csv(entry.path, config.features, config.target,
                        station_code=entry.code,
                        koppen_class=entry.koppen or class_map.get(entry.code, ""))
    scaled, _scaler = standardize(series, spec)
    window_sets = make_windows(scaled, spec)
    assert_leak_free(window_sets, spec)

    cache_dir = None
    if config.cache_kernels:
        base = os.environ.get(CACHE_DIR_ENV) or os.path.join(config.output_dir, "cache")
        cache_dir = os.path.join(base, config.config_hash())
    cache = GramCache(cache_dir)

    y_train = window_sets["train"].targets
    y_val = window_sets["val"].targets
    y_test_raw = window_sets["test"].targets_original_units()
    mean, std = window_sets["test"].scaler[config.target]

    models = {}
    traces = {}
    timings = {}
    for family in config.kernels:
        started = time.perf_counter()
        blocks = station_grams(config, window_sets, family, cache, entry.code,
                               jobs=jobs)
        branch = "quantum" if family == "qft" else "classical"
        result = optimize_mixture(blocks["train"], blocks["val"], y_train, y_val,
                                  branch, config.budget(), proposer=config.proposer)
        mixed_train = mix_kernels(blocks["train"], result.weights)
        if branch == "classical":
            mixed_train = add_jitter(mixed_train)
        model = krr_fit(mixed_train, y_train, result.ridge_lambda)
        mixed_test = mix_kernels(blocks["test"], result.weights)
        pred_test = krr_predict(model, mixed_test) * std + mean
        flags = {
            "degenerate_windows": window_sets["train"].degenerate_windows,
            "dropped_rows": series.dropped_rows,
            "spacing_violations": series.spacing_violations,
        }
        report = compute_report(entry.code, pred_test, y_test_raw, flags=flags)
        models[family] = _model_record(family, result, report, result.val_r2)
        traces[family] = result.trace
        timings[family] = time.perf_counter() - started

    return {
        "station": entry.code,
        "class": series.koppen_class or class_map.get(entry.code, "unknown") or "unknown",
        "ermax_def": ERMAX_DEF,
        "n_train_windows": window_sets["train"].n_windows,
        "n_val_windows": window_sets["val"].n_windows,
        "n_test_windows": window_sets["test"].n_windows,
        "models": models,
        "_traces": traces,
        "_timings": timings,
        "_cache": {"hits": cache.hits, "misses": cache.misses},
    }


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_trace(path, traces: dict) -> None:
    with open(path, "w") as fh:
        for family, entries in sorted(traces.items()):
            for t in entries:
                fh.write(json.dumps({
                    "family": family,
                    "call_index": t.call_index,
                    "weights": list(t.weights),
                    "lambda": None if np.isnan(t.ridge_lambda) else t.ridge_lambda,
                    "val_r2": t.val_r2 if np.isfinite(t.val_r2) else None,
                    "elapsed_ms": round(t.elapsed_ms, 3),
                }, sort_keys=True) + "\n")


def _write_metrics_csv(path, station_docs) -> None:
    cols = ["station", "class", "model", "n_points", *METRIC_FIELDS, "val_r2"]
    lines = [f"# ermax_def={ERMAX_DEF}", ",".join(cols)]
    for doc in station_docs:
        for family in sorted(doc["models"]):
            rec = doc["models"][family]
            row = [doc["station"], doc["class"], family, str(rec["n_points"])]
            row += [f"{rec['metrics'][m]:.6f}" for m in METRIC_FIELDS]
            row.append(f"{rec['val_r2']:.6f}")
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class RunManifest:
    """What a run produced: artifact paths, timings, cache traffic."""

    config_hash: str
    version: str
    stations: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    def validate_paths(self) -> None:
        for code, record in self.stations.items():
            for label, path in record["paths"].items():
                if not os.path.exists(path):
                    raise FileNotFoundError(
                        f"manifest references missing {label} for {code}: {path}")


def run_experiment(config: ExperimentConfig, jobs: int | None = None) -> RunManifest:
    """Run all stations, write artifacts, and return the manifest.

    Station failures are recorded and skipped; the caller decides whether a
    fully failed run is fatal.  Worker threads parallelize across stations
    first; a single-station run gives its threads to Gram assembly instead.
    """
    n_jobs = jobs or config.jobs
    out_dir = config.output_dir
    reports_dir = os.path.join(out_dir, "reports")
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(reports_dir, exist_ok=True)
    os.makedirs(traces_dir, exist_ok=True)
    class_map = load_station_metadata(config.metadata_path)
    manifest = RunManifest(config_hash=config.config_hash(), version=__version__)

    station_jobs = n_jobs if len(config.stations) == 1 else 1

    def _one(entry: StationEntry):
        return entry.code, run_station(config, entry, class_map, jobs=station_jobs)

    results = []
    if n_jobs <= 1 or len(config.stations) == 1:
        for entry in config.stations:
            try:
                results.append(_one(entry))
            except QkforecastError as exc:
                manifest.failures[entry.code] = f"{type(exc).__name__}: {exc}"
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            futures = {pool.submit(_one, e): e for e in config.stations}
            for future, entry in futures.items():
                try:
                    results.append(future.result())
                except QkforecastError as exc:
                    manifest.failures[entry.code] = f"{type(exc).__name__}: {exc}"

    results.sort(key=lambda item: item[0])
    station_docs = []
    for code, doc in results:
        traces = doc.pop("_traces")
        timings = doc.pop("_timings")
        cache_stats = doc.pop("_cache")
        report_path = os.path.join(reports_dir, f"{code}.json")
        trace_path = os.path.join(traces_dir, f"{code}.jsonl")
        _write_json(report_path, doc)
        _write_trace(trace_path, traces)
        manifest.stations[code] = {
            "paths": {"report": report_path, "trace": trace_path},
            "timings_s": {k: round(v, 3) for k, v in timings.items()},
            "cache": cache_stats,
        }
        station_docs.append(doc)

    if station_docs:
        csv_path = os.path.join(out_dir, "metrics.csv")
        _write_metrics_csv(csv_path, station_docs)
        for code in manifest.stations:
            manifest.stations[code]["paths"]["metrics_csv"] = csv_path

    manifest.validate_paths()
    manifest_path = os.path.join(out_dir, "manifest.json")
    _write_json(manifest_path, {
        "config_hash": manifest.config_hash,
        "version": manifest.version,
        "stations": manifest.stations,
        "failures": manifest.failures,
    })
    return manifest
