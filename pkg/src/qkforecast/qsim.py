"""Noiseless statevector simulation on n qubits.

State amplitudes are indexed so that qubit 0 is the most significant bit of
the basis label: |q0 q1 ... q_{n-1}> lives at index q0*2^{n-1} + ... + q_{n-1}.
The QFT of a state vector y is defined with the positive-exponent kernel,

    (QFT y)_k = (1/sqrt(N)) * sum_j y_j exp(+2*pi*i*j*k/N),

which is N-normalized inverse FFT in numpy's convention, so the transform is
delegated to the FFT and scaled.  A dense DFT-matrix oracle for this choice
lives in the test suite, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotNormalized, TargetOutOfRange

GATE_KINDS = ("RX", "RY")


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """2x2 unitary for a single-qubit rotation about the X or Y axis."""
    half = 0.5 * angle
    c = math.cos(half)
    s = math.sin(half)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    raise ValueError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class Statevector:
    """Immutable register state; operations return new instances."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if amps.shape != (2 ** self.n_qubits,):
            raise LengthMismatch(
                f"expected {2 ** self.n_qubits} amplitudes, got {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-6:
            raise NotNormalized(f"statevector norm {norm} too far from 1")

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)


@dataclass(frozen=True)
class SingleQubitGate:
    """A rotation gate bound to a target wire."""

    kind: str
    angle: float
    target: int

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"gate kind must be one of {GATE_KINDS}")
        if self.target < 0:
            raise TargetOutOfRange(f"negative target {self.target}")

    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.kind, self.angle)


def amplitude_encode(values: np.ndarray, n_qubits: int) -> Statevector:
    """Load a unit-norm real vector directly into the amplitudes.

    The entries are taken verbatim (no renormalization) so downstream
    arithmetic sees exactly the caller's numbers.
    """
    x = np.asarray(values, dtype=float)
    if x.shape != (2 ** n_qubits,):
        raise LengthMismatch(f"need {2 ** n_qubits} values, got {x.shape}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > 1e-8:
        raise NotNormalized(f"input norm {norm} not within 1e-8 of 1")
    return Statevector(n_qubits, x.astype(complex))


def apply_qft(state: Statevector) -> Statevector:
    """Apply the QFT (positive-exponent convention) to the full register."""
    n = 2 ** state.n_qubits
    amps = np.fft.ifft(state.amplitudes) * math.sqrt(n)
    return Statevector(state.n_qubits, amps)


def apply_inverse_qft(state: Statevector) -> Statevector:
    """Apply the adjoint of apply_qft."""
    n = 2 ** state.n_qubits
    amps = np.fft.fft(state.amplitudes) / math.sqrt(n)
    return Statevector(state.n_qubits, amps)


def apply_gate(state: Statevector, gate: SingleQubitGate) -> Statevector:
    """Apply a single-qubit gate to its target wire.

    With qubit 0 as the most significant bit, the full-register operator is
    I_{2^t} (x) U (x) I_{2^{n-1-t}}; the amplitude array is reshaped so the
    target axis is contracted against U without building that matrix.
    """
    n = state.n_qubits
    t = gate.target
    if t >= n:
        raise TargetOutOfRange(f"target {t} outside register of {n} qubits")
    u = gate.matrix()
    a = state.amplitudes.reshape(2 ** t, 2, -1)
    out = np.empty_like(a)
    out[:, 0, :] = u[0, 0] * a[:, 0, :] + u[0, 1] * a[:, 1, :]
    out[:, 1, :] = u[1, 0] * a[:, 0, :] + u[1, 1] * a[:, 1, :]
    return Statevector(n, out.reshape(-1))


def fidelity_with_zero(state: Statevector) -> float:
    """Probability of measuring the all-zeros basis state."""
    return float(abs(state.amplitudes[0]) ** 2)
