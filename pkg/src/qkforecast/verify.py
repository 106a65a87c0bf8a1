"""Self-check suites cross-validating the independent computation routes.

Each suite pits one implementation path against a second path derived a
different way (circuit simulation vs closed-form contraction, windowing
arithmetic vs brute enumeration) over seeded random inputs.  The CLI's
verify command runs them all and reports one line per suite; the
acceptance tests reuse the same functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qkernel, qsim
from .errors import LeakageError
from .pipeline import SplitSpec, StationSeries, assert_leak_free, expected_window_count, make_windows


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def random_unit_windows(rng: np.random.Generator, n_dim: int, count: int) -> np.ndarray:
    """Seeded unit-norm rows; rejection keeps norms well away from zero."""
    rows = rng.normal(size=(count, n_dim))
    norms = np.linalg.norm(rows, axis=1)
    while np.any(norms < 1e-6):
        bad = norms < 1e-6
        rows[bad] = rng.normal(size=(int(bad.sum()), n_dim))
        norms = np.linalg.norm(rows, axis=1)
    return rows / norms[:, None]


def oracle_equivalence_suite(n_qubits_range=(1, 2, 3, 4, 5), pairs: int = 200,
                             seed: int = 7, tolerance: float = 1e-9) -> SuiteResult:
    """Circuit simulation vs closed-form contraction on random window pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in n_qubits_range:
        layout = qkernel.build_protective_layout(n)
        xs = random_unit_windows(rng, 2 ** n, pairs)
        ys = random_unit_windows(rng, 2 ** n, pairs)
        for x, y in zip(xs, ys):
            a = qkernel.qft_kernel_value(x, y, layout)
            b = qkernel.trace_formula_kernel(x, y, layout)
            worst = max(worst, abs(a - b))
    return SuiteResult(
        "oracle_equivalence", worst < tolerance,
        f"max |circuit - closed_form| = {worst:.3e} over "
        f"{pairs} pairs x n in {tuple(n_qubits_range)}")


def omega_expansion_suite(n_qubits_range=(1, 2, 3), pairs: int = 50,
                          seed: int = 11, tolerance: float = 1e-10) -> SuiteResult:
    """Phase-matrix expansion vs direct coefficient outer product, plus the
    fully expanded kernel vs the circuit."""
    rng = np.random.default_rng(seed)
    worst_sigma = 0.0
    worst_kernel = 0.0
    for n in n_qubits_range:
        n_dim = 2 ** n
        layout = qkernel.build_protective_layout(n)
        xs = random_unit_windows(rng, n_dim, pairs)
        ys = random_unit_windows(rng, n_dim, pairs)
        for x, y in zip(xs, ys):
            direct = qkernel.sigma_matrix(x, y)
            rebuilt = np.zeros((n_dim, n_dim), dtype=complex)
            for l in range(n_dim):
                for v in range(n_dim):
                    rebuilt += x[l] * y[v] * qkernel.omega_matrix(l, v, n_dim)
            rebuilt /= n_dim
            worst_sigma = max(worst_sigma, float(np.max(np.abs(rebuilt - direct))))
            a = qkernel.omega_expansion_kernel(x, y, layout)
            b = qkernel.qft_kernel_value(x, y, layout)
            worst_kernel = max(worst_kernel, abs(a - b))
    passed = worst_sigma < tolerance and worst_kernel < tolerance
    return SuiteResult(
        "omega_expansion", passed,
        f"max sigma deviation = {worst_sigma:.3e}, "
        f"max kernel deviation = {worst_kernel:.3e}")


def cancellation_suite(n_qubits: int = 5, pairs: int = 100, seed: int = 13,
                       tolerance: float = 1e-10) -> SuiteResult:
    """Without the protective layer the kernel collapses to |<x|y>|^2."""
    rng = np.random.default_rng(seed)
    xs = random_unit_windows(rng, 2 ** n_qubits, pairs)
    ys = random_unit_windows(rng, 2 ** n_qubits, pairs)
    worst = 0.0
    for x, y in zip(xs, ys):
        value = qkernel.qft_kernel_value(x, y, layout=None)
        worst = max(worst, abs(value - float(np.dot(x, y)) ** 2))
    return SuiteResult(
        "cancellation_reduction", worst < tolerance,
        f"max |k - <x,y>^2| = {worst:.3e} with identity layer")


def kernel_validity_suite(n_qubits: int = 5, size: int = 100, seed: int = 17,
                          self_tol: float = 1e-10, sym_tol: float = 1e-12,
                          eig_floor: float = -1e-8) -> SuiteResult:
    """k(x,x)=1, symmetry, and positive semidefiniteness of a seeded Gram."""
    rng = np.random.default_rng(seed)
    layout = qkernel.build_protective_layout(n_qubits)
    windows = random_unit_windows(rng, 2 ** n_qubits, size)
    gram = qkernel.qft_gram(windows, None, layout)
    self_dev = float(np.max(np.abs(np.diag(gram) - 1.0)))
    sym_dev = float(np.max(np.abs(gram - gram.T)))
    min_eig = float(np.linalg.eigvalsh(gram).min())
    passed = self_dev < self_tol and sym_dev < sym_tol and min_eig >= eig_floor
    return SuiteResult(
        "kernel_validity", passed,
        f"|k(x,x)-1| <= {self_dev:.3e}, asym <= {sym_dev:.3e}, "
        f"min eig = {min_eig:.3e}")


def unitarity_suite(trials: int = 1000, seed: int = 23,
                    tolerance: float = 1e-10) -> SuiteResult:
    """Norm preservation through random gate/QFT pipelines."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 6))
        state = qsim.Statevector(n, _random_state(rng, n))
        for _ in range(int(rng.integers(1, 6))):
            kind = "RX" if rng.random() < 0.5 else "RY"
            gate = qsim.SingleQubitGate(kind, float(rng.uniform(-np.pi, np.pi)),
                                        int(rng.integers(0, n)))
            state = qsim.apply_gate(state, gate)
        if rng.random() < 0.5:
            state = qsim.apply_qft(state)
        else:
            state = qsim.apply_inverse_qft(state)
        worst = max(worst, abs(np.linalg.norm(state.amplitudes) - 1.0))
    return SuiteResult(
        "unitarity", worst < tolerance,
        f"max norm drift = {worst:.3e} over {trials} pipelines")


def _random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    z = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return z / np.linalg.norm(z)


def leakage_suite(trials: int = 1000, seed: int = 29) -> SuiteResult:
    """Window counts vs the closed form, and adversarial boundary shifts.

    Every trial randomizes the geometry, checks the per-split window count,
    then shifts the validation windows backwards far enough to provably
    overlap the train range; the checker must object every time.
    """
    rng = np.random.default_rng(seed)
    count_fails = 0
    missed = 0
    for _ in range(trials):
        window = int(2 ** rng.integers(1, 6))
        # fractions must sum to one; draw two and derive the third, keeping
        # the derived test fraction bounded away from zero
        train_frac = float(rng.uniform(0.5, 0.75))
        val_frac = float(rng.uniform(0.1, 0.2))
        spec = SplitSpec(train_frac, val_frac, 1.0 - train_frac - val_frac,
                         window, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        min_len = int(np.ceil((window + spec.horizon) / min(
            train_frac, val_frac, spec.test_frac))) + 3
        length = int(rng.integers(min_len, min_len + 400))
        series = StationSeries(
            station_code="CHK",
            timestamps=np.arange(length, dtype=np.int64),
            features={"f": rng.normal(size=length)},
            target_name="f",
        )
        sets = make_windows(series, spec)
        for split, (lo, hi) in _bounds(length, spec).items():
            if expected_window_count(hi - lo, spec) != sets[split].n_windows:
                count_fails += 1
        try:
            assert_leak_free(sets, spec)
        except LeakageError:
            count_fails += 1  # clean construction must pass
        # adversarial shift: drag the first val window into the train range
        train_last = int(sets["train"].start_indices.max())
        overlap_start = max(0, train_last + spec.window + spec.horizon - 1
                            - int(rng.integers(0, spec.window)))
        shifted = sets["val"].start_indices.copy()
        shifted[0] = overlap_start
        sets["val"].start_indices = shifted
        try:
            assert_leak_free(sets, spec)
            missed += 1
        except LeakageError:
            pass
    passed = count_fails == 0 and missed == 0
    return SuiteResult(
        "leakage", passed,
        f"count mismatches = {count_fails}, undetected leaks = {missed} "
        f"over {trials} trials")


def _bounds(length: int, spec: SplitSpec) -> dict:
    from .pipeline import split_bounds

    return split_bounds(length, spec)


def run_all_suites() -> list:
    return [
        oracle_equivalence_suite(),
        omega_expansion_suite(),
        cancellation_suite(),
        kernel_validity_suite(),
        unitarity_suite(),
        leakage_suite(),
    ]
