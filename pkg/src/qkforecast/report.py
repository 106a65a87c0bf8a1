"""Aggregation of per-station run reports into tables and figures.

Reads the JSON reports a run left behind, groups metrics by climate class,
writes the delimited summaries, renders the distribution figures, and
validates the aggregate document against the bundled schema.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .errors import NoReportsFound
from .metrics import ERMAX_DEF, METRIC_FIELDS, FiveNumberSummary

_FIGURE_METRICS = ("nrmse_pct", "nmbe_pct", "r2_score", "mae", "ermax_pct")


@dataclass
class ReportBundle:
    """Everything cmd_report writes, kept together for the manifest."""

    json_path: str
    station_csv_path: str
    class_csv_path: str
    figure_paths: list


def _read_station_docs(run_dir: str) -> list:
    reports_dir = os.path.join(run_dir, "reports")
    if not os.path.isdir(reports_dir):
        raise NoReportsFound(f"no reports directory under {run_dir}")
    names = sorted(n for n in os.listdir(reports_dir) if n.endswith(".json"))
    if not names:
        raise NoReportsFound(f"no station reports in {reports_dir}")
    docs = []
    for name in names:
        with open(os.path.join(reports_dir, name)) as fh:
            docs.append(json.load(fh))
    return docs


def _station_rows(docs: list, notes: list) -> list:
    all_models = sorted({m for doc in docs for m in doc["models"]})
    rows = []
    for doc in docs:
        for model in all_models:
            rec = doc["models"].get(model)
            if rec is None:
                notes.append(f"station {doc['station']} missing model {model}")
                rows.append({"station": doc["station"], "class": doc["class"],
                             "model": model, "n_points": 0,
                             **{m: None for m in METRIC_FIELDS}, "val_r2": None})
                continue
            row = {"station": doc["station"], "class": doc["class"],
                   "model": model, "n_points": rec["n_points"], "val_r2": rec["val_r2"]}
            for m in METRIC_FIELDS:
                value = rec["metrics"][m]
                row[m] = None if not np.isfinite(value) else value
            rows.append(row)
    # schema forbids n_points = 0; drop placeholder rows but keep the notes
    return [r for r in rows if r["n_points"] > 0]


def _class_rows(rows: list) -> list:
    grouped = {}
    for row in rows:
        grouped.setdefault((row["class"], row["model"]), []).append(row)
    out = []
    for (label, model), members in sorted(grouped.items()):
        for metric in METRIC_FIELDS:
            values = [r[metric] for r in members if r[metric] is not None]
            if not values:
                continue
            s = FiveNumberSummary.of(values)
            out.append({"class": label, "model": model, "metric": metric,
                        "median": s.median, "q1": s.q1, "q3": s.q3,
                        "min": s.min, "max": s.max, "count": s.count})
    return out


def _write_csv(path: str, rows: list, columns: list) -> None:
    lines = [f"# ermax_def={ERMAX_DEF}", ",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row[col]
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(f"{value:.6f}")
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _render_class_boxplots(class_rows: list, out_dir: str) -> list:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    models = sorted({r["model"] for r in class_rows})
    for metric in _FIGURE_METRICS:
        rows = [r for r in class_rows if r["metric"] == metric]
        if not rows:
            continue
        labels = sorted({r["class"] for r in rows})
        fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(labels), 4.0))
        width = 0.8 / max(len(models), 1)
        colors = plt.cm.tab10.colors
        for mi, model in enumerate(models):
            stats = []
            positions = []
            for li, label in enumerate(labels):
                match = [r for r in rows if r["class"] == label and r["model"] == model]
                if not match:
                    continue
                r = match[0]
                stats.append({"med": r["median"], "q1": r["q1"], "q3": r["q3"],
                              "whislo": r["min"], "whishi": r["max"],
                              "label": label})
                positions.append(li + (mi - (len(models) - 1) / 2) * width)
            if not stats:
                continue
            artists = ax.bxp(stats, positions=positions, widths=width * 0.9,
                             showfliers=False, patch_artist=True)
            for box in artists["boxes"]:
                box.set_facecolor(colors[mi % len(colors)])
                box.set_alpha(0.6)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_xlabel("climate class")
        ax.set_ylabel(metric)
        handles = [plt.Rectangle((0, 0), 1, 1, facecolor=colors[i % len(colors)],
                                 alpha=0.6) for i in range(len(models))]
        ax.legend(handles, models, fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"fig_{metric}_by_class.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def _render_station_chart(rows: list, out_dir: str) -> str | None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    usable = [r for r in rows if r["nrmse_pct"] is not None]
    if not usable:
        return None
    stations = sorted({r["station"] for r in usable})
    models = sorted({r["model"] for r in usable})
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(stations) * len(models)), 4.0))
    width = 0.8 / len(models)
    for mi, model in enumerate(models):
        values = []
        for station in stations:
            match = [r for r in usable if r["station"] == station and r["model"] == model]
            values.append(match[0]["nrmse_pct"] if match else np.nan)
        offsets = np.arange(len(stations)) + (mi - (len(models) - 1) / 2) * width
        ax.bar(offsets, values, width=width * 0.9, label=model)
    ax.set_xticks(range(len(stations)))
    ax.set_xticklabels(stations, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("nrmse_pct")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, "fig_station_nrmse.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def build_report(run_dir: str) -> ReportBundle:
    """Aggregate a run directory; writes CSV/JSON tables and PNG figures."""
    docs = _read_station_docs(run_dir)
    notes = []
    station_rows = _station_rows(docs, notes)
    class_rows = _class_rows(station_rows)
    aggregate = {
        "ermax_def": ERMAX_DEF,
        "stations": station_rows,
        "classes": class_rows,
        "notes": sorted(notes),
    }
    with resources.files("qkforecast.schemas").joinpath("report.schema.json").open() as fh:
        schema = json.load(fh)
    jsonschema.validate(aggregate, schema)

    out_dir = os.path.join(run_dir, "report")
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "aggregate.json")
    with open(json_path, "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
        fh.write("\n")
    station_csv = os.path.join(out_dir, "station_metrics.csv")
    _write_csv(station_csv, station_rows,
               ["station", "class", "model", "n_points", *METRIC_FIELDS, "val_r2"])
    class_csv = os.path.join(out_dir, "class_summary.csv")
    _write_csv(class_csv, class_rows,
               ["class", "model", "metric", "median", "q1", "q3", "min", "max", "count"])
    figures = _render_class_boxplots(class_rows, out_dir)
    station_fig = _render_station_chart(station_rows, out_dir)
    if station_fig:
        figures.append(station_fig)
    return ReportBundle(json_path, station_csv, class_csv, figures)
