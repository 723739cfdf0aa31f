import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian_monomial_moment
from steincv.errors import InputError, UnisolvencyError
from steincv.estimators import cf_estimate, mc_estimate, secf_estimate, secf_solve, secf_weights, zv_estimate
from steincv.kernels import KernelConfig, assemble_stein_matrix
from steincv.polynomials import enumerate_basis, vandermonde
from steincv.samplers import SampleSet

RQ1 = KernelConfig("rq", 1.0)


def gaussian_samples(n, d, seed=0):
    X = np.random.default_rng(seed).standard_normal((n, d))
    return SampleSet(points=X, gradients=-X)


def kernel_and_design(samples, r):
    K0 = assemble_stein_matrix(RQ1, samples)
    P = vandermonde(enumerate_basis(samples.d, r), samples)
    return K0, P


class TestMC:
    def test_mean(self):
        assert mc_estimate([1.0, 2.0, 3.0]).estimate == 2.0

    def test_constant(self):
        assert mc_estimate([3.3] * 8).estimate == 3.3

    def test_single(self):
        res = mc_estimate([7.5])
        assert res.estimate == 7.5
        assert_allclose(res.weights, [1.0])

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            mc_estimate([])


class TestZV:
    def test_constant_absorbed(self):
        s = gaussian_samples(20, 2, seed=1)
        _, P = kernel_and_design(s, 2)
        res = zv_estimate(P, np.full(20, 4.2))
        assert_allclose(res.estimate, 4.2, atol=1e-12)

    def test_linear_integrand_exact_zero(self):
        s = gaussian_samples(5, 1, seed=2)
        _, P = kernel_and_design(s, 1)
        res = zv_estimate(P, s.points[:, 0])
        assert_allclose(res.estimate, 0.0, atol=1e-10)

    def test_recovers_design_coefficients(self):
        rng = np.random.default_rng(3)
        s = gaussian_samples(30, 3, seed=3)
        _, P = kernel_and_design(s, 2)
        beta = rng.standard_normal(P.shape[1])
        res = zv_estimate(P, P @ beta)
        assert_allclose(res.estimate, beta[0], atol=1e-9)

    def test_weights_satisfy_constraints(self):
        s = gaussian_samples(25, 2, seed=4)
        _, P = kernel_and_design(s, 2)
        res = zv_estimate(P, np.sin(s.points[:, 0]))
        e1 = np.eye(P.shape[1])[:, 0]
        assert_allclose(P.T @ res.weights, e1, atol=1e-8)
        assert_allclose(res.weights.sum(), 1.0, atol=1e-8)
        assert_allclose(res.weights @ np.sin(s.points[:, 0]), res.estimate, atol=1e-10)

    def test_rank_deficient_rejected(self):
        # duplicated single point: columns of P collapse
        X = np.zeros((10, 2))
        s = SampleSet(points=X, gradients=X)
        P = vandermonde(enumerate_basis(2, 2), s)
        with pytest.raises(UnisolvencyError):
            zv_estimate(P, np.ones(10))

    def test_underdetermined_rejected(self):
        s = gaussian_samples(3, 2, seed=5)
        _, P = kernel_and_design(s, 2)  # m = 6 > n = 3
        with pytest.raises(InputError):
            zv_estimate(P, np.ones(3))


class TestCF:
    def test_constant(self):
        s = gaussian_samples(15, 2, seed=6)
        K0, _ = kernel_and_design(s, 0)
        assert_allclose(cf_estimate(K0, np.full(15, -2.5)).estimate, -2.5, atol=1e-9)

    def test_single_point(self):
        s = gaussian_samples(1, 1, seed=7)
        K0, _ = kernel_and_design(s, 0)
        assert_allclose(cf_estimate(K0, np.array([4.0])).estimate, 4.0, atol=1e-12)

    def test_equals_secf_with_constant_basis(self):
        s = gaussian_samples(40, 2, seed=8)
        K0, P0 = kernel_and_design(s, 0)
        f = np.cos(s.points[:, 0]) + s.points[:, 1]
        assert_allclose(
            cf_estimate(K0, f).estimate, secf_estimate(K0, P0, f).estimate, atol=1e-10
        )

    def test_weights_sum_to_one(self):
        s = gaussian_samples(30, 3, seed=9)
        K0, _ = kernel_and_design(s, 0)
        res = cf_estimate(K0, s.points[:, 0] ** 2)
        assert_allclose(res.weights.sum(), 1.0, atol=1e-8)


class TestSECFSolve:
    def test_semi_exact_recovery(self):
        rng = np.random.default_rng(10)
        s = gaussian_samples(40, 2, seed=10)
        K0, P = kernel_and_design(s, 2)
        beta = rng.standard_normal(P.shape[1])
        a, b = secf_solve(K0, P, P @ beta)
        assert np.abs(a).max() <= 1e-8
        assert_allclose(b, beta, atol=1e-8)

    def test_residuals_within_tolerance(self):
        rng = np.random.default_rng(11)
        s = gaussian_samples(60, 3, seed=11)
        K0, P = kernel_and_design(s, 2)
        f = rng.standard_normal(60)
        a, b = secf_solve(K0, P, f)
        scale = np.linalg.norm(f)
        assert np.linalg.norm(K0.regularized @ a + P @ b - f) <= 1e-8 * scale
        assert np.linalg.norm(P.T @ a) <= 1e-8 * scale

    def test_interpolation(self):
        s = gaussian_samples(35, 2, seed=12)
        K0, P = kernel_and_design(s, 1)
        f = np.tanh(s.points[:, 0])
        a, b = secf_solve(K0, P, f)
        interp = K0.values @ a + P @ b
        assert_allclose(interp, f, rtol=1e-8, atol=1e-8 * np.linalg.norm(f))

    def test_direct_matches_schur(self):
        s = gaussian_samples(30, 2, seed=13)
        K0, P = kernel_and_design(s, 2)
        f = np.exp(-s.points[:, 0] ** 2)
        a1, b1 = secf_solve(K0, P, f)
        a2, b2 = secf_solve(K0, P, f, direct=True)
        assert_allclose(a1, a2, atol=1e-8)
        assert_allclose(b1, b2, atol=1e-8)

    def test_unisolvency_failure(self):
        X = np.zeros((6, 2))
        s = SampleSet(points=X, gradients=X)
        K0 = assemble_stein_matrix(RQ1, s)
        P = vandermonde(enumerate_basis(2, 1), s)
        with pytest.raises(UnisolvencyError, match="m="):
            secf_solve(K0, P, np.ones(6))


class TestSECFEstimate:
    def test_exact_on_constructed_family(self):
        rng = np.random.default_rng(14)
        s = gaussian_samples(45, 2, seed=14)
        K0, P = kernel_and_design(s, 2)
        coeffs = rng.standard_normal(P.shape[1] - 1)
        f = 1.0 + P[:, 1:] @ coeffs
        assert_allclose(secf_estimate(K0, P, f).estimate, 1.0, atol=1e-8)

    def test_second_moment_lemma(self):
        s = gaussian_samples(50, 2, seed=15)
        K0, P = kernel_and_design(s, 2)
        res = secf_estimate(K0, P, s.points[:, 0] ** 2)
        assert_allclose(res.estimate, 1.0, atol=1e-6)

    def test_weights_reproduce_estimate(self):
        rng = np.random.default_rng(16)
        s = gaussian_samples(40, 3, seed=16)
        K0, P = kernel_and_design(s, 1)
        f = rng.standard_normal(40)
        res = secf_estimate(K0, P, f)
        assert_allclose(res.weights @ f, res.estimate, atol=1e-8)
        e1 = np.eye(P.shape[1])[:, 0]
        assert_allclose(P.T @ res.weights, e1, atol=1e-8)

    def test_diagnostics_attached(self):
        s = gaussian_samples(30, 2, seed=17)
        K0, P = kernel_and_design(s, 1)
        res = secf_estimate(K0, P, np.sin(s.points[:, 0]))
        assert res.diagnostics is not None
        assert res.diagnostics.bound_product >= 0

    def test_kkt_optimality_of_weights(self):
        # no feasible perturbation of the weights lowers the KSD quadratic form
        rng = np.random.default_rng(18)
        s = gaussian_samples(35, 2, seed=18)
        K0, P = kernel_and_design(s, 2)
        w = secf_weights(K0, P)
        base = w @ K0.regularized @ w
        proj = P @ np.linalg.solve(P.T @ P, P.T)
        for _ in range(100):
            delta = rng.standard_normal(35)
            delta -= proj @ delta
            v = w + delta
            assert v @ K0.regularized @ v >= base - 1e-10

    def test_affine_equivariance(self):
        rng = np.random.default_rng(19)
        s = gaussian_samples(30, 2, seed=19)
        K0, P = kernel_and_design(s, 2)
        f = rng.standard_normal(30)
        base = secf_estimate(K0, P, f).estimate
        shifted = secf_estimate(K0, P, 2.5 * f + 3.0).estimate
        assert_allclose(shifted, 2.5 * base + 3.0, atol=1e-10 * max(1, abs(base)))


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", [1, 2])
def test_polynomial_exactness_all_monomials(d, r):
    # every monomial with |alpha| <= r integrates to its Gaussian moment
    s = gaussian_samples(50, d, seed=100 + d)
    K0, P = kernel_and_design(s, r)
    basis = enumerate_basis(d, r)
    for alpha in ((0,) * d,) + basis.indices:
        f = np.prod(s.points ** np.asarray(alpha), axis=1)
        est = secf_estimate(K0, P, f).estimate
        assert abs(est - gaussian_monomial_moment(alpha)) <= 1e-6


def test_affine_equivariance_all_methods():
    rng = np.random.default_rng(20)
    s = gaussian_samples(25, 2, seed=20)
    K0, P = kernel_and_design(s, 1)
    f = rng.standard_normal(25)
    c, shift = -1.7, 0.9
    for runner in (
        lambda g: mc_estimate(g).estimate,
        lambda g: zv_estimate(P, g).estimate,
        lambda g: cf_estimate(K0, g).estimate,
        lambda g: secf_estimate(K0, P, g).estimate,
    ):
        assert_allclose(runner(c * f + shift), c * runner(f) + shift, atol=1e-10)
