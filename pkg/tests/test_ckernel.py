"""Classical reference kernels: scalar formulas and vectorized Gram."""

import numpy as np
import pytest

from qkforecast import ckernel
from qkforecast.errors import LengthMismatch


class TestParams:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            ckernel.ClassicalKernelParams("sigmoid", gamma=1.0)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            ckernel.ClassicalKernelParams("rbf", gamma=0.0)

    def test_rejects_bad_degree(self):
        with pytest.raises(ValueError):
            ckernel.ClassicalKernelParams("poly", gamma=1.0, degree=0)


class TestScalarKernels:
    def test_rbf_identical_points(self):
        x = np.array([0.3, -1.2, 0.7])
        params = ckernel.ClassicalKernelParams("rbf", gamma=2.0)
        assert ckernel.rbf_kernel(x, x, params) == 1.0

    def test_rbf_hand_value(self):
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        params = ckernel.ClassicalKernelParams("rbf", gamma=0.5)
        np.testing.assert_allclose(ckernel.rbf_kernel(x, y, params),
                                   np.exp(-1.0), atol=1e-15)

    def test_poly_hand_value(self):
        x = np.array([1.0, 2.0])
        y = np.array([3.0, 1.0])
        params = ckernel.ClassicalKernelParams("poly", gamma=0.5, offset=1.0,
                                               degree=3)
        # (0.5 * 5 + 1)^3 = 3.5^3
        np.testing.assert_allclose(ckernel.poly_kernel(x, y, params),
                                   3.5 ** 3, atol=1e-12)

    def test_shape_mismatch(self):
        params = ckernel.ClassicalKernelParams("rbf", gamma=1.0)
        with pytest.raises(LengthMismatch):
            ckernel.rbf_kernel(np.ones(3), np.ones(4), params)


class TestGram:
    @pytest.mark.parametrize("params", [
        ckernel.ClassicalKernelParams("rbf", gamma=0.3),
        ckernel.ClassicalKernelParams("poly", gamma=0.2, offset=1.0, degree=3),
    ], ids=["rbf", "poly"])
    def test_matches_scalar_loop(self, params):
        rng = np.random.default_rng(80)
        xs = rng.normal(size=(9, 5))
        ys = rng.normal(size=(6, 5))
        gram = ckernel.classical_gram(xs, ys, params)
        assert gram.shape == (9, 6)
        fn = ckernel.rbf_kernel if params.kind == "rbf" else ckernel.poly_kernel
        for i in range(9):
            for j in range(6):
                np.testing.assert_allclose(gram[i, j], fn(xs[i], ys[j], params),
                                           atol=1e-12)

    def test_square_rbf_gram_is_psd(self):
        rng = np.random.default_rng(81)
        xs = rng.normal(size=(50, 4))
        params = ckernel.ClassicalKernelParams("rbf", gamma=0.7)
        gram = ckernel.classical_gram(xs, None, params)
        np.testing.assert_array_equal(gram, gram.T)
        assert np.linalg.eigvalsh(gram).min() > -1e-10
        np.testing.assert_allclose(np.diag(gram), np.ones(50), atol=1e-12)

    def test_row_length_mismatch(self):
        params = ckernel.ClassicalKernelParams("rbf", gamma=1.0)
        with pytest.raises(LengthMismatch):
            ckernel.classical_gram(np.ones((3, 4)), np.ones((2, 5)), params)
