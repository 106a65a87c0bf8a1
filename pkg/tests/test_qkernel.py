"""Transform-based kernel tests: layout shapes, dual evaluation routes, Gram."""

import numpy as np
import pytest

from qkforecast import qkernel, qsim
from qkforecast.errors import IndexOutOfRange, LengthMismatch, NotNormalized
from tests.conftest import unit_rows


class TestProtectiveLayout:
    @pytest.mark.parametrize("n_qubits,counts", [
        (1, (2,)),
        (2, (2, 2)),
        (3, (2, 2, 4)),
        (4, (4, 4, 4, 4)),
        (5, (6, 6, 6, 6, 8)),
    ])
    def test_gate_counts(self, n_qubits, counts):
        """2^n parameters split evenly with the remainder on the last wire."""
        layout = qkernel.build_protective_layout(n_qubits)
        assert tuple(len(seq) for seq in layout.per_qubit_gates) == counts
        assert layout.n_params == 2 ** n_qubits

    def test_param_slices_partition(self):
        """Slices tile 0..2^n-1 contiguously in wire order."""
        for n in range(1, 7):
            layout = qkernel.build_protective_layout(n)
            cursor = 0
            for start, stop in layout.param_slices:
                assert start == cursor
                cursor = stop
            assert cursor == 2 ** n

    def test_alternation_starts_rx(self):
        layout = qkernel.build_protective_layout(3)
        ops = qkernel._layer_ops(layout)
        first_wire = [kind for wire, kind, _ in ops if wire == 0]
        assert first_wire == ["RX", "RY"]
        last_wire = [kind for wire, kind, _ in ops if wire == 2]
        assert last_wire == ["RX", "RY", "RX", "RY"]


class TestWindowVector:
    def test_requires_power_of_two(self):
        with pytest.raises(LengthMismatch):
            qkernel.WindowVector("f", np.ones(6) / np.sqrt(6), 0)

    def test_requires_unit_norm(self):
        with pytest.raises(NotNormalized):
            qkernel.WindowVector("f", np.ones(4), 0)

    def test_n_qubits(self):
        w = qkernel.WindowVector("f", np.ones(8) / np.sqrt(8), 3)
        assert w.n_qubits == 3


class TestKernelValue:
    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(30)
        layout = qkernel.build_protective_layout(3)
        for x in unit_rows(rng, 8, 20):
            np.testing.assert_allclose(
                qkernel.qft_kernel_value(x, x, layout), 1.0, atol=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(31)
        layout = qkernel.build_protective_layout(3)
        rows = unit_rows(rng, 8, 10)
        for i in range(0, 10, 2):
            x, y = rows[i], rows[i + 1]
            np.testing.assert_allclose(qkernel.qft_kernel_value(x, y, layout),
                                       qkernel.qft_kernel_value(y, x, layout),
                                       atol=1e-12)

    def test_bounded(self):
        rng = np.random.default_rng(32)
        layout = qkernel.build_protective_layout(2)
        rows = unit_rows(rng, 4, 40)
        for i in range(0, 40, 2):
            v = qkernel.qft_kernel_value(rows[i], rows[i + 1], layout)
            assert 0.0 <= v <= 1.0

    def test_without_layer_reduces_to_plain_overlap(self):
        """layout=None turns the circuit into a bare encode/transform overlap."""
        rng = np.random.default_rng(33)
        for x, y in zip(unit_rows(rng, 8, 10), unit_rows(rng, 8, 10)):
            expected = abs(np.vdot(x.astype(complex), y.astype(complex))) ** 2
            np.testing.assert_allclose(qkernel.qft_kernel_value(x, y, None),
                                       expected, atol=1e-12)

    def test_accepts_window_vectors(self):
        rng = np.random.default_rng(34)
        layout = qkernel.build_protective_layout(2)
        x, y = unit_rows(rng, 4, 2)
        wx = qkernel.WindowVector("ghi", x, 0)
        wy = qkernel.WindowVector("ghi", y, 4)
        np.testing.assert_allclose(qkernel.qft_kernel_value(wx, wy, layout),
                                   qkernel.qft_kernel_value(x, y, layout),
                                   atol=1e-15)


class TestDualRoutes:
    @pytest.mark.parametrize("n_qubits", [1, 2, 3, 4, 5])
    def test_circuit_matches_trace_formula(self, n_qubits):
        """Simulator route and closed-form product route agree to 1e-10."""
        rng = np.random.default_rng(40 + n_qubits)
        layout = qkernel.build_protective_layout(n_qubits)
        n_dim = 2 ** n_qubits
        xs = unit_rows(rng, n_dim, 30)
        ys = unit_rows(rng, n_dim, 30)
        for x, y in zip(xs, ys):
            np.testing.assert_allclose(
                qkernel.qft_kernel_value(x, y, layout),
                qkernel.trace_formula_kernel(x, y, layout),
                atol=1e-10)

    @pytest.mark.parametrize("n_qubits", [1, 2, 3])
    def test_omega_expansion_matches(self, n_qubits):
        """Term-by-term expansion over basis phase matrices agrees too."""
        rng = np.random.default_rng(50 + n_qubits)
        layout = qkernel.build_protective_layout(n_qubits)
        n_dim = 2 ** n_qubits
        for x, y in zip(unit_rows(rng, n_dim, 10), unit_rows(rng, n_dim, 10)):
            np.testing.assert_allclose(
                qkernel.omega_expansion_kernel(x, y, layout),
                qkernel.qft_kernel_value(x, y, layout),
                atol=1e-10)

    def test_adjoint_layer_cancels(self):
        """Applying the layer then its adjoint with the same window is identity."""
        rng = np.random.default_rng(60)
        layout = qkernel.build_protective_layout(3)
        for x in unit_rows(rng, 8, 20):
            state = qsim.amplitude_encode(x, 3)
            state = qkernel.apply_protective_layer(state, layout, x)
            state = qkernel.apply_protective_layer(state, layout, x, adjoint=True)
            np.testing.assert_allclose(state.amplitudes, x.astype(complex),
                                       atol=1e-12)

    def test_routes_are_independent(self, monkeypatch):
        """Corrupting the simulator's gate table breaks only the circuit route."""
        rng = np.random.default_rng(61)
        layout = qkernel.build_protective_layout(2)
        x, y = unit_rows(rng, 4, 2)
        clean_circuit = qkernel.qft_kernel_value(x, y, layout)
        clean_trace = qkernel.trace_formula_kernel(x, y, layout)

        def broken(kind, angle):
            return np.eye(2, dtype=complex)

        monkeypatch.setattr(qsim, "rotation_matrix", broken)
        assert abs(qkernel.qft_kernel_value(x, y, layout) - clean_circuit) > 1e-6
        np.testing.assert_allclose(qkernel.trace_formula_kernel(x, y, layout),
                                   clean_trace, atol=1e-15)


class TestOmegaMatrices:
    def test_entries(self):
        """Entry (p, k) carries phase exp(2i pi (v k - l p) / N)."""
        n_dim = 4
        omega = qkernel.omega_matrix(1, 2, n_dim)
        p, k = 3, 1
        expected = np.exp(2j * np.pi * (2 * k - 1 * p) / n_dim)
        np.testing.assert_allclose(omega[p, k], expected, atol=1e-15)

    def test_index_bounds(self):
        with pytest.raises(IndexOutOfRange):
            qkernel.omega_matrix(4, 0, 4)
        with pytest.raises(IndexOutOfRange):
            qkernel.omega_matrix(0, -1, 4)

    def test_sigma_is_weighted_omega_sum(self):
        """sigma equals (1/N) sum_lv x_l y_v Omega^(l,v)."""
        rng = np.random.default_rng(62)
        n_dim = 4
        x, y = unit_rows(rng, n_dim, 2)
        total = np.zeros((n_dim, n_dim), dtype=complex)
        for l in range(n_dim):
            for v in range(n_dim):
                total += x[l] * y[v] * qkernel.omega_matrix(l, v, n_dim)
        total /= n_dim
        np.testing.assert_allclose(qkernel.sigma_matrix(x, y), total, atol=1e-12)


class TestFeatureMapAndGram:
    def test_feature_map_rows_are_unit(self):
        rng = np.random.default_rng(70)
        layout = qkernel.build_protective_layout(3)
        phi = qkernel.feature_map(unit_rows(rng, 8, 15), layout)
        np.testing.assert_allclose(np.linalg.norm(phi, axis=1), np.ones(15),
                                   atol=1e-10)

    def test_gram_matches_scalar_path(self):
        """Batched Gram equals looping the scalar kernel over all pairs."""
        rng = np.random.default_rng(71)
        layout = qkernel.build_protective_layout(3)
        xs = unit_rows(rng, 8, 12)
        ys = unit_rows(rng, 8, 7)
        gram = qkernel.qft_gram(xs, ys, layout)
        assert gram.shape == (12, 7)
        for i in range(12):
            for j in range(7):
                np.testing.assert_allclose(
                    gram[i, j], qkernel.qft_kernel_value(xs[i], ys[j], layout),
                    atol=1e-12)

    def test_gram_square_properties(self):
        """Square Gram: unit diagonal, symmetric, PSD up to round-off."""
        rng = np.random.default_rng(72)
        layout = qkernel.build_protective_layout(4)
        xs = unit_rows(rng, 16, 40)
        gram = qkernel.qft_gram(xs, xs, layout)
        np.testing.assert_allclose(np.diag(gram), np.ones(40), atol=1e-10)
        np.testing.assert_allclose(gram, gram.T, atol=1e-12)
        eigs = np.linalg.eigvalsh(0.5 * (gram + gram.T))
        assert eigs.min() > -1e-8

    def test_gram_thread_count_invariant(self):
        """Worker count does not change a single bit of the result."""
        rng = np.random.default_rng(73)
        layout = qkernel.build_protective_layout(3)
        xs = unit_rows(rng, 8, 300)
        ys = unit_rows(rng, 8, 64)
        g1 = qkernel.qft_gram(xs, ys, layout, jobs=1)
        g2 = qkernel.qft_gram(xs, ys, layout, jobs=2)
        g4 = qkernel.qft_gram(xs, ys, layout, jobs=4)
        assert np.array_equal(g1, g2)
        assert np.array_equal(g1, g4)

    def test_gram_accepts_window_vectors(self):
        rng = np.random.default_rng(74)
        layout = qkernel.build_protective_layout(2)
        rows = unit_rows(rng, 4, 6)
        wrapped = [qkernel.WindowVector("x", r, i) for i, r in enumerate(rows)]
        np.testing.assert_array_equal(
            qkernel.qft_gram(wrapped, wrapped, layout),
            qkernel.qft_gram(rows, rows, layout))
