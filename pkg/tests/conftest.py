"""Shared builders for the test suite."""

import json

import numpy as np

from qkforecast.ckernel import ClassicalKernelParams, classical_gram
from qkforecast.krr import KernelMatrix
from qkforecast.synth import generate_synthetic_station, write_station_csv


def unit_rows(rng, n_dim, count):
    rows = rng.normal(size=(count, n_dim))
    return rows / np.linalg.norm(rows, axis=1)[:, None]


def two_kernel_benchmark(seed, n_train=80, n_val=120, n_dims=4):
    """Informative-vs-noise kernel pair with a noisy nonlinear target.

    The informative kernel sees the features that generate the target; the
    noise kernel sees an independent draw, so it can overfit the train rows
    but carries nothing about validation.  Returns (train_kernels,
    val_kernels, y_train, y_val).
    """
    rng = np.random.default_rng(seed)
    total = n_train + n_val
    f = rng.normal(size=(total, n_dims))
    g = rng.normal(size=(total, n_dims))
    y = (np.sin(3.0 * f[:, 0]) + f[:, 1] ** 2 + 0.5 * f[:, 2]
         + rng.normal(0.0, 0.05, total))
    params = ClassicalKernelParams("rbf", 1.0 / n_dims)
    k_f = classical_gram(f, None, params)
    k_g = classical_gram(g, None, params)
    train = [KernelMatrix(k_f[:n_train, :n_train], "train_train", "informative"),
             KernelMatrix(k_g[:n_train, :n_train], "train_train", "noise")]
    val = [KernelMatrix(k_f[n_train:, :n_train], "eval_train", "informative"),
           KernelMatrix(k_g[n_train:, :n_train], "eval_train", "noise")]
    return train, val, y[:n_train], y[n_train:]


def write_small_experiment(tmp_path, n_steps=1600, seed=4, window=16,
                           stride=4, outer_calls=4, kernels=("qft", "rbf"),
                           **overrides):
    """Write a synthetic station plus a small config; returns the config path.

    Sized so a full run finishes in a few seconds: short series, coarse
    stride, and a small outer budget.
    """
    station_path = tmp_path / "SYN0.csv"
    write_station_csv(station_path, generate_synthetic_station(n_steps, seed=seed))
    doc = {
        "stations": [{"code": "SYN0", "path": str(station_path), "koppen": "Cfa"}],
        "features": ["irradiance", "clear_sky", "cloud_index"],
        "target": "irradiance",
        "output_dir": str(tmp_path / "out"),
        "window": window,
        "stride": stride,
        "outer_calls": outer_calls,
        "kernels": list(kernels),
    }
    doc.update(overrides)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(doc, indent=2) + "\n")
    return config_path
