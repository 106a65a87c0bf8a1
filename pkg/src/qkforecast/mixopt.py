"""Convex kernel fusion and surrogate-driven hyperparameter search.

Per-feature kernel matrices are blended with convex weights and fed to
kernel ridge regression.  The outer loop proposes weight vectors under a
fixed evaluation budget; each proposal runs an inner grid search over the
ridge strength on the validation split.  Two weight parameterizations are
supported: a latent softmax box for classical kernels and a raw nonnegative
box (renormalized to the simplex) for quantum kernels, which mirrors the
branch split of degradation-prone vs clean Gram matrices.  Only the
classical branch receives diagonal jitter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import AllFitsFailed, KindMismatch, OutOfBox, ShapeMismatch
from .krr import FactorizationFailed, KernelMatrix, krr_fit, krr_predict
from .metrics import r2_score

BRANCHES = ("classical", "quantum")
_LATENT_BOX = (-4.0, 4.0)
_RAW_BOX = (0.0, 1.0)
_JITTER_SCALE = 1e-6
_ZERO_SUM = 1e-12


@dataclass(frozen=True)
class MixtureWeights:
    """A point on the simplex plus the branch that produced it."""

    weights: np.ndarray
    branch: str
    degenerate: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.branch not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}")
        if w.ndim != 1 or w.size < 1:
            raise ShapeMismatch(f"weights must be a nonempty vector, got {w.shape}")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must be convex coefficients, got {w}")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class OptimizationBudget:
    """Outer call count, inner ridge grid, and the seed that fixes both."""

    outer_calls: int = 20
    alpha_grid: np.ndarray = field(
        default_factory=lambda: np.logspace(-6.0, 3.0, 100))
    seed: int = 0

    def __post_init__(self):
        grid = np.asarray(self.alpha_grid, dtype=float)
        if self.outer_calls < 1:
            raise ValueError("outer_calls must be >= 1")
        if grid.ndim != 1 or grid.size < 1 or np.any(grid <= 0):
            raise ValueError("alpha_grid must be a vector of positive values")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("alpha_grid must be strictly increasing")
        object.__setattr__(self, "alpha_grid", grid)


@dataclass(frozen=True)
class TraceEntry:
    call_index: int
    weights: tuple
    ridge_lambda: float
    val_r2: float
    elapsed_ms: float


@dataclass(frozen=True)
class MixtureResult:
    weights: MixtureWeights
    ridge_lambda: float
    val_r2: float
    trace: tuple


def softmax_weights(latent: np.ndarray, branch: str = "classical") -> MixtureWeights:
    """Map a latent vector in [-4, 4]^k to the simplex via a stable softmax."""
    z = np.asarray(latent, dtype=float)
    if np.any(z < _LATENT_BOX[0] - 1e-12) or np.any(z > _LATENT_BOX[1] + 1e-12):
        raise OutOfBox(f"latent {z} outside {_LATENT_BOX}")
    e = np.exp(z - z.max())
    return MixtureWeights(e / e.sum(), branch)


def renormalize_weights(raw: np.ndarray, branch: str = "quantum") -> MixtureWeights:
    """Map raw coordinates in [0, 1]^k to the simplex by renormalization.

    An all-zero vector has no direction to keep, so it falls back to
    uniform weights with the degenerate flag set.
    """
    r = np.asarray(raw, dtype=float)
    if np.any(r < -1e-12) or np.any(r > 1.0 + 1e-12):
        raise OutOfBox(f"raw weights {r} outside {_RAW_BOX}")
    total = r.sum()
    if total < _ZERO_SUM:
        return MixtureWeights(np.full(r.size, 1.0 / r.size), branch, degenerate=True)
    return MixtureWeights(r / total, branch)


def mix_kernels(kernels, weights: MixtureWeights) -> KernelMatrix:
    """Convex combination of same-shaped, same-kind kernel blocks."""
    if len(kernels) != weights.weights.size:
        raise ShapeMismatch(
            f"{len(kernels)} kernels vs {weights.weights.size} weights")
    first = kernels[0]
    for k in kernels[1:]:
        if k.values.shape != first.values.shape:
            raise ShapeMismatch(
                f"kernel shapes differ: {k.values.shape} vs {first.values.shape}")
        if k.kind != first.kind:
            raise KindMismatch(f"cannot mix {k.kind} with {first.kind}")
    mixed = np.zeros_like(first.values)
    for w, k in zip(weights.weights, kernels):
        mixed += w * k.values
    source = "mix(" + ",".join(k.source or "?" for k in kernels) + ")"
    return KernelMatrix(values=mixed, kind=first.kind, source=source)


def add_jitter(kernel: KernelMatrix) -> KernelMatrix:
    """Add 1e-6 * mean-diagonal jitter to a square block.

    Classical Grams lose positive definiteness to rounding; the quantum
    fidelity Grams do not and must be left untouched.  A zero matrix stays
    unchanged (its trace is zero).
    """
    if kernel.kind != "train_train":
        raise KindMismatch("jitter applies to train_train blocks only")
    eps = _JITTER_SCALE * np.trace(kernel.values) / kernel.rows
    if eps == 0.0:
        return kernel
    return KernelMatrix(values=kernel.values + eps * np.eye(kernel.rows),
                        kind=kernel.kind, source=kernel.source)


def inner_alpha_search(train_kernel: KernelMatrix, val_kernel: KernelMatrix,
                       train_targets: np.ndarray, val_targets: np.ndarray,
                       alpha_grid: np.ndarray):
    """Scan the ridge grid and keep the best validation R^2.

    Grid points whose fit fails score -inf; exact ties go to the larger
    ridge (the grid is ascending, so >= keeps the later point).  If every
    point fails the whole scan fails.
    """
    best_lambda = None
    best_r2 = -np.inf
    for lam in np.asarray(alpha_grid, dtype=float):
        try:
            model = krr_fit(train_kernel, train_targets, lam)
            pred = krr_predict(model, val_kernel)
            score = r2_score(pred, val_targets)
        except FactorizationFailed:
            continue
        if score >= best_r2:
            best_r2 = score
            best_lambda = float(lam)
    if best_lambda is None:
        raise AllFitsFailed("no ridge grid point produced a usable fit")
    return best_lambda, best_r2


def _evaluate_mixture(train_kernels, val_kernels, train_targets, val_targets,
                      weights: MixtureWeights, alpha_grid, jitter: bool):
    mixed_train = mix_kernels(train_kernels, weights)
    if jitter:
        mixed_train = add_jitter(mixed_train)
    mixed_val = mix_kernels(val_kernels, weights)
    return inner_alpha_search(mixed_train, mixed_val, train_targets,
                              val_targets, alpha_grid)


class _RandomProposer:
    """Uniform draws over the box; the budget-parity fallback strategy."""

    def __init__(self, n_dims: int, box, rng: np.random.Generator):
        self.n_dims = n_dims
        self.box = box
        self.rng = rng

    def ask(self, observed_x, observed_y) -> np.ndarray:
        lo, hi = self.box
        return self.rng.uniform(lo, hi, size=self.n_dims)


class _GpEiProposer:
    """Minimal Gaussian-process expected-improvement proposer.

    Squared-exponential kernel on box-normalized inputs with a short
    length-scale grid picked by marginal likelihood; candidates are fresh
    uniform draws plus perturbations of the incumbent.  Everything is
    driven by one seeded generator, so proposals are reproducible.
    """

    _LENGTH_SCALES = (0.1, 0.2, 0.4, 0.8)
    _NUGGET = 1e-8
    _N_UNIFORM = 1024
    _N_LOCAL = 256

    def __init__(self, n_dims: int, box, rng: np.random.Generator):
        self.n_dims = n_dims
        self.box = box
        self.rng = rng

    def _normalize(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.box
        return (x - lo) / (hi - lo)

    @staticmethod
    def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)

    def _fit(self, xn: np.ndarray, y: np.ndarray):
        best = None
        d2 = self._sq_dists(xn, xn)
        for ls in self._LENGTH_SCALES:
            k = np.exp(-0.5 * d2 / ls ** 2) + self._NUGGET * np.eye(len(y))
            try:
                chol = np.linalg.cholesky(k)
            except np.linalg.LinAlgError:
                continue
            alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
            log_like = (-0.5 * y @ alpha
                        - np.log(np.diag(chol)).sum()
                        - 0.5 * len(y) * np.log(2.0 * np.pi))
            if best is None or log_like > best[0]:
                best = (log_like, ls, chol, alpha)
        return best

    def ask(self, observed_x, observed_y) -> np.ndarray:
        lo, hi = self.box
        x = np.asarray(observed_x, dtype=float)
        y = np.asarray(observed_y, dtype=float)
        span = y.max() - y.min()
        if x.shape[0] < 2 or span < 1e-12:
            return self.rng.uniform(lo, hi, size=self.n_dims)
        yc = (y - y.mean()) / y.std()
        xn = self._normalize(x)
        fitted = self._fit(xn, yc)
        if fitted is None:
            return self.rng.uniform(lo, hi, size=self.n_dims)
        _, ls, chol, alpha = fitted
        incumbent = x[int(np.argmin(y))]
        cands = np.vstack([
            self.rng.uniform(lo, hi, size=(self._N_UNIFORM, self.n_dims)),
            np.clip(incumbent + self.rng.normal(
                0.0, 0.1 * (hi - lo), size=(self._N_LOCAL, self.n_dims)), lo, hi),
        ])
        cn = self._normalize(cands)
        cross = np.exp(-0.5 * self._sq_dists(cn, xn) / ls ** 2)
        mu = cross @ alpha
        v = np.linalg.solve(chol, cross.T)
        var = np.clip(1.0 + self._NUGGET - (v ** 2).sum(axis=0), 1e-12, None)
        sigma = np.sqrt(var)
        best_y = yc.min()
        z = (best_y - mu) / sigma
        ei = (best_y - mu) * _norm_cdf(z) + sigma * _norm_pdf(z)
        # keep proposals away from already-evaluated points
        too_close = (self._sq_dists(cn, xn) < 1e-12).any(axis=1)
        ei[too_close] = -np.inf
        if not np.isfinite(ei).any():
            return self.rng.uniform(lo, hi, size=self.n_dims)
        return cands[int(np.argmax(ei))]


def _norm_cdf(z: np.ndarray) -> np.ndarray:
    from scipy.special import ndtr

    return ndtr(z)


def _norm_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z ** 2) / np.sqrt(2.0 * np.pi)


def optimize_mixture(train_kernels, val_kernels, train_targets, val_targets,
                     branch: str, budget: OptimizationBudget,
                     proposer: str = "gp") -> MixtureResult:
    """Search mixture weights and ridge strength within the call budget.

    Runs a space-filling initial design of min(8, budget) points, then
    surrogate-guided proposals (or pure random search with proposer=
    "random").  A single-kernel family short-circuits to one ridge scan.
    Returns the incumbent with the full evaluation trace attached.
    """
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}")
    if len(train_kernels) != len(val_kernels) or not train_kernels:
        raise ShapeMismatch("need matching nonempty train and val kernel lists")
    k = len(train_kernels)
    jitter = branch == "classical"
    y_train = np.asarray(train_targets, dtype=float)
    y_val = np.asarray(val_targets, dtype=float)

    trace = []
    best = None

    def _record(call_index, weights, started):
        nonlocal best
        try:
            lam, score = _evaluate_mixture(train_kernels, val_kernels, y_train,
                                           y_val, weights, budget.alpha_grid,
                                           jitter)
        except AllFitsFailed:
            lam, score = float("nan"), -np.inf
        elapsed_ms = (time.perf_counter() - started) * 1e3
        trace.append(TraceEntry(call_index, tuple(weights.weights), lam,
                                score, elapsed_ms))
        if np.isfinite(score) and (best is None or score > best[2]):
            best = (weights, lam, score)
        return score

    if k == 1:
        w = MixtureWeights(np.ones(1), branch)
        _record(0, w, time.perf_counter())
        if best is None:
            raise AllFitsFailed("single-kernel ridge scan failed everywhere")
        return MixtureResult(best[0], best[1], best[2], tuple(trace))

    box = _LATENT_BOX if branch == "classical" else _RAW_BOX
    to_weights = softmax_weights if branch == "classical" else renormalize_weights
    rng = np.random.default_rng(budget.seed)
    n_init = min(8, budget.outer_calls)
    sampler = qmc.LatinHypercube(d=k, seed=budget.seed)
    initial = box[0] + (box[1] - box[0]) * sampler.random(n_init)
    prop_cls = _GpEiProposer if proposer == "gp" else _RandomProposer
    prop = prop_cls(k, box, rng)

    seen_x = []
    seen_obj = []
    for call_index in range(budget.outer_calls):
        started = time.perf_counter()
        if call_index < n_init:
            z = initial[call_index]
        else:
            z = prop.ask(np.array(seen_x), np.array(seen_obj))
        score = _record(call_index, to_weights(z, branch), started)
        seen_x.append(z)
        # clip so one catastrophic fit cannot flatten the surrogate
        seen_obj.append(float(np.clip(-score, -1.0, 10.0)))

    if best is None:
        raise AllFitsFailed("every proposal in the budget failed to fit")
    return MixtureResult(best[0], best[1], best[2], tuple(trace))
