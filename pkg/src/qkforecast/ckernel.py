"""Classical kernels used as fusion partners and baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch


@dataclass(frozen=True)
class ClassicalKernelParams:
    """Parameters for the RBF and polynomial kernels.

    gamma defaults to 1/window_length at the call sites that know the
    window; offset and degree only matter for the polynomial kernel.
    """

    kind: str
    gamma: float
    offset: float = 1.0
    degree: int = 3

    def __post_init__(self):
        if self.kind not in ("rbf", "poly"):
            raise ValueError(f"kind must be 'rbf' or 'poly', got {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")


def rbf_kernel(x: np.ndarray, y: np.ndarray, params: ClassicalKernelParams) -> float:
    """exp(-gamma * ||x - y||^2)."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"shapes differ: {xv.shape} vs {yv.shape}")
    d = xv - yv
    return float(np.exp(-params.gamma * np.dot(d, d)))


def poly_kernel(x: np.ndarray, y: np.ndarray, params: ClassicalKernelParams) -> float:
    """(gamma * <x, y> + offset)^degree."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"shapes differ: {xv.shape} vs {yv.shape}")
    return float((params.gamma * np.dot(xv, yv) + params.offset) ** params.degree)


def classical_gram(x_rows: np.ndarray, y_rows: np.ndarray | None,
                   params: ClassicalKernelParams) -> np.ndarray:
    """Vectorized Gram matrix for either classical kernel.

    Square train Grams (y_rows=None) are symmetrized to wash out the
    last-ulp asymmetry of the distance arithmetic.
    """
    x = np.atleast_2d(np.asarray(x_rows, dtype=float))
    square = y_rows is None
    y = x if square else np.atleast_2d(np.asarray(y_rows, dtype=float))
    if y.shape[1] != x.shape[1]:
        raise LengthMismatch(f"row lengths differ: {x.shape[1]} vs {y.shape[1]}")
    inner = x @ y.T
    if params.kind == "rbf":
        sq = (x * x).sum(axis=1)[:, None] + (y * y).sum(axis=1)[None, :] - 2.0 * inner
        np.clip(sq, 0.0, None, out=sq)
        gram = np.exp(-params.gamma * sq)
    else:
        gram = (params.gamma * inner + params.offset) ** params.degree
    if square:
        gram = 0.5 * (gram + gram.T)
    return gram
