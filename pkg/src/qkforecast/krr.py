"""Kernel ridge regression and the on-disk kernel matrix cache.

The dual problem (K + lambda I) alpha = y is solved by a positive-definite
Cholesky factorization; anything that defeats the factorization (or leaves
a large residual behind) surfaces as FactorizationFailed so callers can
score the fit as unusable instead of trusting garbage coefficients.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CacheCorrupt, DimensionMismatch, FactorizationFailed

KERNEL_KINDS = ("train_train", "eval_train")

_MAGIC = b"QKRN"
_VERSION = 1
_KIND_CODES = {"train_train": 0, "eval_train": 1}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}
_HEADER = struct.Struct("<4sIBQQ")  # magic, version, kind, rows, cols


@dataclass(frozen=True)
class KernelMatrix:
    """A kernel evaluation block tagged with its role.

    train_train blocks are square and symmetric; eval_train blocks hold
    rows of evaluation points against the training set.
    """

    values: np.ndarray
    kind: str
    source: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise DimensionMismatch(f"kernel matrix must be 2-D, got {vals.ndim}-D")
        if not np.all(np.isfinite(vals)):
            raise ValueError("kernel matrix contains non-finite entries")
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kind must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if self.kind == "train_train":
            if vals.shape[0] != vals.shape[1]:
                raise DimensionMismatch(f"train_train block not square: {vals.shape}")
            if np.max(np.abs(vals - vals.T)) > 1e-10:
                raise ValueError("train_train block not symmetric within 1e-10")
        object.__setattr__(self, "values", vals)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class KrrModel:
    """Fitted dual coefficients plus the ridge strength that produced them."""

    dual_coefficients: np.ndarray
    ridge_lambda: float
    n_train: int


def krr_fit(kernel: KernelMatrix, targets: np.ndarray, ridge_lambda: float) -> KrrModel:
    """Solve (K + lambda I) alpha = y for the dual coefficients."""
    if kernel.kind != "train_train":
        raise DimensionMismatch("krr_fit needs a train_train kernel block")
    y = np.asarray(targets, dtype=float)
    if y.shape != (kernel.rows,):
        raise DimensionMismatch(
            f"targets shape {y.shape} does not match kernel rows {kernel.rows}"
        )
    if ridge_lambda < 0:
        raise ValueError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    system = kernel.values + ridge_lambda * np.eye(kernel.rows)
    try:
        factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
        alpha = scipy.linalg.cho_solve(factor, y, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailed(str(exc)) from exc
    residual = np.linalg.norm(system @ alpha - y)
    if residual > 1e-8 * max(np.linalg.norm(y), 1.0):
        raise FactorizationFailed(f"solution residual {residual} too large")
    return KrrModel(dual_coefficients=alpha, ridge_lambda=float(ridge_lambda),
                    n_train=kernel.rows)


def krr_predict(model: KrrModel, kernel: KernelMatrix) -> np.ndarray:
    """Predictions K_hat @ alpha for evaluation rows against the train set."""
    if kernel.cols != model.dual_coefficients.shape[0]:
        raise DimensionMismatch(
            f"kernel has {kernel.cols} columns, model expects {model.n_train}"
        )
    return kernel.values @ model.dual_coefficients


# --- binary cache --------------------------------------------------------------

def save_kernel_matrix(path, kernel: KernelMatrix) -> None:
    """Write a kernel block: 4-byte magic, u32 version, u8 kind code,
    u64 rows, u64 cols, then row-major float64, all little-endian."""
    header = _HEADER.pack(_MAGIC, _VERSION, _KIND_CODES[kernel.kind],
                          kernel.rows, kernel.cols)
    payload = np.ascontiguousarray(kernel.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_kernel_matrix(path, source: str = "") -> KernelMatrix:
    """Read a kernel block written by save_kernel_matrix."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CacheCorrupt(f"{path}: truncated header")
    magic, version, kind_code, rows, cols = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise CacheCorrupt(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CacheCorrupt(f"{path}: unsupported version {version}")
    if kind_code not in _CODE_KINDS:
        raise CacheCorrupt(f"{path}: unknown kind code {kind_code}")
    expected = _HEADER.size + rows * cols * 8
    if len(blob) != expected:
        raise CacheCorrupt(f"{path}: payload is {len(blob)} bytes, expected {expected}")
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    return KernelMatrix(values=values.copy(), kind=_CODE_KINDS[kind_code], source=source)
