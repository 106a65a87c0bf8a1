"""QFT feature-map kernel with a protective rotation layer.

A window x of length N = 2^n is amplitude-encoded, Fourier-transformed, and
passed through a data-dependent layer V(x) of single-qubit rotations.  The
kernel between windows x and y is the fidelity

    k(x, y) = | <0| A(x)^H QFT^H V(x)^H V(y) QFT A(y) |0> |^2 .

The layer distributes the N window entries over the n wires by Euclidean
division: with N = a*n + b, each of the first n-1 wires carries a rotations
and the last wire carries a+b, alternating RX, RY, RX, ... down each wire.

Two independent evaluation routes are kept side by side: the circuit
simulation (qft_kernel_value) and a closed-form contraction over per-wire
gate products (trace_formula_kernel).  They must agree to ~1e-9 and are
cross-checked in the verification suite; do not collapse one into the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qsim
from .errors import IndexOutOfRange, LengthMismatch, NotNormalized, ShapeMismatch

# Fixed row-tile edge for Gram assembly.  Tiles are carved identically for
# any worker count so results are bitwise independent of parallelism.
_GRAM_TILE = 256


@dataclass(frozen=True)
class ProtectiveLayout:
    """Static wiring of the protective layer for one register size."""

    n_qubits: int
    gates_per_qubit: int  # rotations on each of the first n-1 wires
    remainder: int  # extra rotations absorbed by the last wire
    per_qubit_gates: tuple  # tuple[tuple[str, ...], ...]
    param_slices: tuple  # tuple[tuple[int, int], ...], half-open into the window

    @property
    def n_params(self) -> int:
        return 2 ** self.n_qubits


def build_protective_layout(n_qubits: int) -> ProtectiveLayout:
    """Distribute 2^n rotations over n wires by Euclidean division."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    n_params = 2 ** n_qubits
    a, b = divmod(n_params, n_qubits)
    counts = [a] * (n_qubits - 1) + [a + b]
    sequences = []
    slices = []
    start = 0
    for count in counts:
        # alternate RX, RY, RX, ... along the wire
        sequences.append(tuple("RX" if r % 2 == 0 else "RY" for r in range(count)))
        slices.append((start, start + count))
        start += count
    assert start == n_params
    return ProtectiveLayout(
        n_qubits=n_qubits,
        gates_per_qubit=a,
        remainder=b,
        per_qubit_gates=tuple(sequences),
        param_slices=tuple(slices),
    )


@dataclass(frozen=True)
class WindowVector:
    """A unit-norm window of 2^n samples tagged with its source feature."""

    feature_id: str
    values: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = vals.shape[0] if vals.ndim == 1 else 0
        if n == 0 or n & (n - 1):
            raise LengthMismatch(f"window length {vals.shape} is not a power of two")
        object.__setattr__(self, "values", vals)
        norm = np.linalg.norm(vals)
        if abs(norm - 1.0) > 1e-8:
            raise NotNormalized(f"window norm {norm} not within 1e-8 of 1")

    @property
    def n_qubits(self) -> int:
        return int(math.log2(self.values.shape[0]))


def _window_values(w) -> np.ndarray:
    """Accept a WindowVector or a raw array of angles."""
    return np.asarray(getattr(w, "values", w), dtype=float)


def _window_rows(windows) -> np.ndarray:
    """Stack windows (an array, or a sequence of arrays or WindowVectors)
    into one 2-D float matrix."""
    if isinstance(windows, np.ndarray):
        return np.atleast_2d(windows.astype(float, copy=False))
    return np.atleast_2d(np.asarray([_window_values(w) for w in windows],
                                    dtype=float))


def _layer_ops(layout: ProtectiveLayout):
    """Flattened (wire, kind, param_index) triples in circuit order."""
    ops = []
    for q in range(layout.n_qubits):
        lo, _hi = layout.param_slices[q]
        for r, kind in enumerate(layout.per_qubit_gates[q]):
            ops.append((q, kind, lo + r))
    return ops


def apply_protective_layer(state, layout: ProtectiveLayout, w, adjoint: bool = False):
    """Apply V(w) (or its adjoint) gate by gate to a statevector.

    The adjoint replays the flattened gate sequence in reverse with negated
    angles, matching the mirrored right half of the kernel circuit.
    """
    values = _window_values(w)
    if layout.n_qubits != state.n_qubits:
        raise ShapeMismatch(
            f"layout is for {layout.n_qubits} qubits, state has {state.n_qubits}"
        )
    if values.shape != (layout.n_params,):
        raise LengthMismatch(
            f"layer needs {layout.n_params} angles, got {values.shape}"
        )
    ops = _layer_ops(layout)
    if adjoint:
        ops = ops[::-1]
    sign = -1.0 if adjoint else 1.0
    for q, kind, idx in ops:
        state = qsim.apply_gate(state, qsim.SingleQubitGate(kind, sign * values[idx], q))
    return state


def qft_kernel_value(x, y, layout: ProtectiveLayout | None) -> float:
    """Fidelity kernel via circuit simulation.

    Simulates QFT + V(y) on the encoded y, then the mirrored V(x)^H and
    inverse QFT.  The closing A(x)^H maps |x> to |0...0>, so the all-zeros
    amplitude it produces is exactly the overlap of the encoded x with the
    running state; the fidelity is read off that overlap.  Pass layout=None
    to drop the protective layer (QFT pair then cancels analytically).
    """
    xv = _window_values(x)
    yv = _window_values(y)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"window shapes differ: {xv.shape} vs {yv.shape}")
    n = int(math.log2(xv.shape[0]))
    ket = qsim.amplitude_encode(yv, n)
    ket = qsim.apply_qft(ket)
    if layout is not None:
        ket = apply_protective_layer(ket, layout, yv)
        ket = apply_protective_layer(ket, layout, xv, adjoint=True)
    ket = qsim.apply_inverse_qft(ket)
    bra = qsim.amplitude_encode(xv, n)
    amp0 = np.vdot(bra.amplitudes, ket.amplitudes)
    return float(min(max(abs(amp0) ** 2, 0.0), 1.0))


# --- closed-form route --------------------------------------------------------

def _rotation_2x2(kind: str, angle: float) -> np.ndarray:
    # Written out independently of qsim.rotation_matrix on purpose: this side
    # must not inherit a sign mistake from the simulator.
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    return np.array([[c, -s], [s, c]], dtype=complex)


def wire_matrix(layout: ProtectiveLayout, qubit: int, w) -> np.ndarray:
    """Ordered 2x2 product of one wire's rotations, last-applied leftmost."""
    values = _window_values(w)
    lo, hi = layout.param_slices[qubit]
    m = np.eye(2, dtype=complex)
    for r, kind in enumerate(layout.per_qubit_gates[qubit]):
        m = _rotation_2x2(kind, values[lo + r]) @ m
    return m


def protective_matrix(layout: ProtectiveLayout, w) -> np.ndarray:
    """Dense V(w) as the Kronecker product of per-wire products."""
    m = np.array([[1.0 + 0j]])
    for q in range(layout.n_qubits):
        m = np.kron(m, wire_matrix(layout, q, w))
    return m


def _dft_vectors(xv: np.ndarray, yv: np.ndarray):
    """Fourier coefficient vectors from explicit DFT matrices.

    The adjoint-side window gets the negative-exponent transform, the
    forward-side window the positive one.  Built densely (no FFT) so this
    route stays independent of the simulator's transform.
    """
    n = xv.shape[0]
    idx = np.arange(n)
    phases = 2j * np.pi * np.outer(idx, idx) / n
    f_minus = np.exp(-phases) / math.sqrt(n)
    f_plus = np.exp(phases) / math.sqrt(n)
    return f_minus @ xv, f_plus @ yv


def trace_formula_kernel(x, y, layout: ProtectiveLayout | None) -> float:
    """Fidelity kernel as a closed-form bilinear contraction.

    k(x, y) = | sum_{p,k} xt_p R_{pk} yf_k |^2 where xt / yf are the DFT
    coefficient vectors of the two windows and R = V(x)^H V(y) is assembled
    per wire and combined by Kronecker product.
    """
    xv = _window_values(x)
    yv = _window_values(y)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"window shapes differ: {xv.shape} vs {yv.shape}")
    xt, yf = _dft_vectors(xv, yv)
    if layout is None:
        s = xt @ yf
    else:
        r = np.array([[1.0 + 0j]])
        for q in range(layout.n_qubits):
            wx = wire_matrix(layout, q, xv)
            wy = wire_matrix(layout, q, yv)
            r = np.kron(r, wx.conj().T @ wy)
        s = xt @ r @ yf
    return float(min(max(abs(s) ** 2, 0.0), 1.0))


def omega_matrix(l: int, v: int, n_dim: int) -> np.ndarray:
    """Phase matrix with entries omega^(v*k - l*p), omega = exp(2*pi*i/N)."""
    if not (0 <= l < n_dim and 0 <= v < n_dim):
        raise IndexOutOfRange(f"indices ({l}, {v}) outside [0, {n_dim})")
    p = np.arange(n_dim)[:, None]
    k = np.arange(n_dim)[None, :]
    return np.exp(2j * np.pi * (v * k - l * p) / n_dim)


def sigma_matrix(x, y) -> np.ndarray:
    """Outer product of the two windows' DFT coefficient vectors.

    Expands elementwise as (1/N) sum_{l,v} x_l y_v omega^(v*k - l*p); the
    test suite reconstructs it from omega_matrix term by term.
    """
    xv = _window_values(x)
    yv = _window_values(y)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"window shapes differ: {xv.shape} vs {yv.shape}")
    xt, yf = _dft_vectors(xv, yv)
    return np.outer(xt, yf)


def omega_expansion_kernel(x, y, layout: ProtectiveLayout | None) -> float:
    """Kernel via the fully expanded phase-matrix sum (slow, oracle only)."""
    xv = _window_values(x)
    yv = _window_values(y)
    n = xv.shape[0]
    if layout is None:
        r = np.eye(n, dtype=complex)
    else:
        r = np.array([[1.0 + 0j]])
        for q in range(layout.n_qubits):
            wx = wire_matrix(layout, q, xv)
            wy = wire_matrix(layout, q, yv)
            r = np.kron(r, wx.conj().T @ wy)
    s = 0j
    for l in range(n):
        for v in range(n):
            beta = xv[l] * yv[v]
            if beta == 0.0:
                continue
            s += beta * np.sum(omega_matrix(l, v, n) * r)
    s /= n
    return float(min(max(abs(s) ** 2, 0.0), 1.0))


# --- batched feature maps and Gram assembly -----------------------------------

def _apply_layer_batch(amps: np.ndarray, layout: ProtectiveLayout,
                       values: np.ndarray, adjoint: bool = False) -> np.ndarray:
    """Apply per-row protective layers to a batch of statevectors.

    amps is (M, 2^n) complex, values is (M, 2^n) with row m supplying the
    angles for row m of amps.  Vectorizes the same gate arithmetic as
    qsim.apply_gate across the batch.
    """
    m, n_dim = amps.shape
    ops = _layer_ops(layout)
    if adjoint:
        ops = ops[::-1]
    sign = -1.0 if adjoint else 1.0
    for q, kind, idx in ops:
        half = 0.5 * sign * values[:, idx]
        c = np.cos(half)[:, None, None]
        s = np.sin(half)[:, None, None]
        a = amps.reshape(m, 2 ** q, 2, -1)
        x0 = a[:, :, 0, :]
        x1 = a[:, :, 1, :]
        out = np.empty_like(a)
        if kind == "RX":
            out[:, :, 0, :] = c * x0 - 1j * s * x1
            out[:, :, 1, :] = -1j * s * x0 + c * x1
        else:
            out[:, :, 0, :] = c * x0 - s * x1
            out[:, :, 1, :] = s * x0 + c * x1
        amps = out.reshape(m, n_dim)
    return amps


def feature_map(windows: np.ndarray, layout: ProtectiveLayout | None) -> np.ndarray:
    """Map unit-norm window rows to their circuit-output statevectors.

    Returns the (M, 2^n) complex matrix of V(x) QFT A(x) |0> rows; the
    kernel between two windows is the squared modulus of the row overlap.
    """
    w = _window_rows(windows)
    n_dim = w.shape[1]
    if n_dim & (n_dim - 1):
        raise LengthMismatch(f"window length {n_dim} is not a power of two")
    amps = np.fft.ifft(w, axis=1) * math.sqrt(n_dim)
    if layout is not None:
        if layout.n_params != n_dim:
            raise ShapeMismatch(
                f"layout expects windows of length {layout.n_params}, got {n_dim}"
            )
        amps = _apply_layer_batch(amps, layout, w)
    return amps


def qft_gram(x_windows: np.ndarray, y_windows: np.ndarray | None,
             layout: ProtectiveLayout | None, jobs: int = 1) -> np.ndarray:
    """Gram matrix of the fidelity kernel over two window stacks.

    y_windows=None computes the square train Gram.  Rows are processed in
    fixed-size tiles handed to a thread pool; tile geometry is independent
    of the worker count, so the result is too.
    """
    x = _window_rows(x_windows)
    phi_x = feature_map(x, layout)
    if y_windows is None:
        phi_y = phi_x
    else:
        y = _window_rows(y_windows)
        if y.shape[1] != x.shape[1]:
            raise ShapeMismatch(f"window lengths differ: {x.shape[1]} vs {y.shape[1]}")
        phi_y = feature_map(y, layout)
    phi_y_h = phi_y.conj().T
    out = np.empty((phi_x.shape[0], phi_y.shape[0]), dtype=float)

    def _tile(lo: int):
        hi = min(lo + _GRAM_TILE, phi_x.shape[0])
        overlap = phi_x[lo:hi] @ phi_y_h
        out[lo:hi] = np.abs(overlap) ** 2
        return lo

    tiles = range(0, phi_x.shape[0], _GRAM_TILE)
    if jobs <= 1:
        for lo in tiles:
            _tile(lo)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_tile, tiles))
    np.clip(out, 0.0, 1.0, out=out)
    return out
