import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import base_kernel_value, stein_kernel_oracle
from steincv.errors import ConditioningError, InputError
from steincv.kernels import (
    KernelConfig,
    assemble_stein_matrix,
    psi_derivative,
    stein_kernel_cross,
    stein_kernel_eval,
    stein_kernel_matrix,
)
from steincv.samplers import SampleSet

RQ1 = KernelConfig("rq", 1.0)


class TestKernelConfig:
    def test_rejects_bad_lengthscale(self):
        with pytest.raises(InputError):
            KernelConfig("rq", 0.0)
        with pytest.raises(InputError):
            KernelConfig("gaussian", -1.0)

    def test_rejects_unknown_family(self):
        with pytest.raises(InputError):
            KernelConfig("laplace", 1.0)

    def test_matern_smoothness_floor(self):
        with pytest.raises(InputError):
            KernelConfig("matern", 1.0, nu=2.0)
        KernelConfig("matern", 1.0, nu=2.5)  # ceil(2.5) = 3 passes


class TestPsiDerivative:
    def test_rq_first_derivative_at_zero(self):
        assert psi_derivative(RQ1, 0.0, 1) == -1.0

    def test_gaussian_second_derivative(self):
        # frozen from the analytic profile exp(-z); FD oracle cross-check below
        val = psi_derivative(KernelConfig("gaussian", 1.0), 0.5, 2)
        assert_allclose(val, 0.6065306597126334, rtol=1e-12)
        h = 1e-5
        psi = lambda z: np.exp(-z)
        fd = (psi(0.5 + h) - 2 * psi(0.5) + psi(0.5 - h)) / h**2
        assert_allclose(val, fd, atol=5e-6)

    def test_matern_matches_fd_oracle(self):
        cfg = KernelConfig("matern", 1.0, nu=4.5)
        h = 1e-5
        psi = lambda z: base_kernel_value(cfg, np.array([0.0]), np.array([np.sqrt(z)]))
        fd = (psi(1.0 + h) - psi(1.0 - h)) / (2 * h)
        assert_allclose(psi_derivative(cfg, 1.0, 1), fd, rtol=1e-6)

    @pytest.mark.parametrize("family,nu", [("rq", 4.5), ("gaussian", 4.5), ("matern", 4.5)])
    def test_iterated_fd_ladder(self, family, nu):
        # psi^(j) should be the derivative of psi^(j-1) for every family
        cfg = KernelConfig(family, 1.3, nu)
        for j in range(1, 5):
            for z in (0.2, 1.0, 3.0):
                h = 1e-6
                fd = (psi_derivative(cfg, z + h, j - 1) - psi_derivative(cfg, z - h, j - 1)) / (2 * h)
                assert_allclose(psi_derivative(cfg, z, j), fd, rtol=2e-4)

    def test_matern_zero_limit_continuity(self):
        # values just above the z floor approach the returned limits for j <= 2
        cfg = KernelConfig("matern", 1.0, nu=4.5)
        for j in (0, 1, 2):
            assert_allclose(psi_derivative(cfg, 1e-9, j), psi_derivative(cfg, 0.0, j), rtol=1e-3)
        # j in {3, 4} exists (finite) at 0 for nu=4.5 and only enters via z-products
        assert np.isfinite(psi_derivative(cfg, 0.0, 3))
        assert np.isfinite(psi_derivative(cfg, 0.0, 4))

    def test_invalid_order(self):
        with pytest.raises(InputError):
            psi_derivative(RQ1, 0.5, 5)
        with pytest.raises(InputError):
            psi_derivative(RQ1, 0.5, -1)

    def test_negative_z_rejected(self):
        with pytest.raises(InputError):
            psi_derivative(RQ1, -0.1, 1)


class TestSteinKernelEval:
    def test_diagonal_at_origin(self):
        # k0(x,x) = 4(2+d)d psi''(0) - 2 psi'(0) |u|^2 ; RQ lam=1, d=1
        assert stein_kernel_eval(RQ1, [0.0], [0.0], [0.0], [0.0]) == 24.0

    def test_diagonal_with_score(self):
        assert stein_kernel_eval(RQ1, [1.0], [1.0], [-1.0], [-1.0]) == 26.0

    def test_swap_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            d = int(rng.integers(1, 5))
            x, y = rng.standard_normal(d), rng.standard_normal(d)
            ux, uy = rng.standard_normal(d), rng.standard_normal(d)
            assert stein_kernel_eval(RQ1, x, y, ux, uy) == stein_kernel_eval(RQ1, y, x, uy, ux)

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            stein_kernel_eval(RQ1, [np.nan], [0.0], [0.0], [0.0])
        with pytest.raises(InputError):
            stein_kernel_eval(RQ1, [0.0], [0.0], [np.inf], [0.0])

    @pytest.mark.parametrize("family,nu", [("rq", 4.5), ("gaussian", 4.5), ("matern", 4.5)])
    def test_matches_nested_fd_oracle(self, family, nu):
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            cfg = KernelConfig(family, 10 ** rng.uniform(-0.15, 0.3), nu)
            x = rng.standard_normal(d)
            y = x + rng.standard_normal(d) * 0.8 + 0.3
            ux, uy = rng.standard_normal(d), rng.standard_normal(d)
            exact = stein_kernel_eval(cfg, x, y, ux, uy)
            oracle = stein_kernel_oracle(cfg, x, y, ux, uy)
            assert_allclose(exact, oracle, rtol=1e-4, atol=1e-6)

    def test_matern_near_coincident_points(self):
        # the z -> 0 limit convention must keep values finite and continuous
        cfg = KernelConfig("matern", 1.0, nu=4.5)
        u = np.array([0.5])
        at_zero = stein_kernel_eval(cfg, [1.0], [1.0], u, u)
        nearby = stein_kernel_eval(cfg, [1.0], [1.0 + 1e-8], u, u)
        assert np.isfinite(at_zero)
        assert_allclose(at_zero, nearby, rtol=1e-4)


def _zero_mean_quadrature(cfg, y, n_nodes=10_000):
    xs = np.linspace(-10.0, 10.0, n_nodes)
    dens = np.exp(-0.5 * xs**2) / np.sqrt(2 * np.pi)
    vals = np.array([stein_kernel_eval(cfg, [x], [y], [-x], [-y]) for x in xs])
    return float(np.trapezoid(vals * dens, xs))


@pytest.mark.parametrize("y", [-1.0, 0.0, 1.0, 2.0])
def test_zero_mean_against_standard_normal(y):
    # translates of the Stein kernel integrate to zero under the target
    assert abs(_zero_mean_quadrature(RQ1, y)) <= 1e-4


class TestAssembly:
    def test_single_point(self):
        s = SampleSet(points=[[0.5]], gradients=[[-0.5]])
        K = assemble_stein_matrix(RQ1, s)
        assert K.values.shape == (1, 1)
        assert K.values[0, 0] > 0

    def test_matches_pairwise_eval(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((3, 2))
        s = SampleSet(points=X, gradients=-X)
        K = assemble_stein_matrix(RQ1, s)
        for i in range(3):
            for j in range(3):
                assert_allclose(
                    K.values[i, j], stein_kernel_eval(RQ1, X[i], X[j], -X[i], -X[j]), rtol=1e-12
                )

    def test_symmetry_and_positive_diagonal(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((40, 3))
        s = SampleSet(points=X, gradients=-X)
        K = assemble_stein_matrix(RQ1, s)
        assert_allclose(K.values, K.values.T, atol=1e-12)
        assert (np.diag(K.values) > 0).all()

    def test_near_duplicate_triggers_regularization(self):
        X = np.array([[0.0], [1e-12], [1.0]])
        s = SampleSet(points=X, gradients=-X)
        K = assemble_stein_matrix(RQ1, s)
        assert K.regularization_applied
        assert K.jitter > 0
        # factor exists: reconstruct regularized matrix
        assert_allclose(K.cholesky @ K.cholesky.T, K.regularized, atol=1e-8)

    @pytest.mark.parametrize("d", [1, 3, 10])
    def test_psd_after_jitter_random_sets(self, d):
        rng = np.random.default_rng(d)
        X = rng.standard_normal((min(200, 60 + 40 * d), d))
        s = SampleSet(points=X, gradients=-X)
        K = assemble_stein_matrix(RQ1, s)
        # Cholesky succeeded; diagonal of the factor strictly positive
        assert (np.diag(K.cholesky) > 0).all()

    def test_cross_block_consistency(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((8, 2))
        K = stein_kernel_matrix(RQ1, X, -X)
        sub = np.array([1, 4, 6])
        cross = stein_kernel_cross(RQ1, X, -X, X[sub], -X[sub])
        assert_allclose(cross, K[:, sub], rtol=1e-13)

    def test_duplicated_points_rescued_by_jitter(self):
        # identical points give a rank-1 matrix; the schedule must rescue it
        X = np.zeros((3, 1))
        s = SampleSet(points=X, gradients=X)
        K = assemble_stein_matrix(RQ1, s)
        assert K.regularization_applied and K.jitter > 0

    def test_escalation_failure_names_jitter(self):
        from steincv.kernels import regularize_and_factor

        indefinite = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
        with pytest.raises(ConditioningError, match="jitter"):
            regularize_and_factor(indefinite)
