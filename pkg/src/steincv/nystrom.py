"""Scalable approximation of the semi-exact estimator.

Restricting the kernel expansion to a uniformly chosen subset of n0 points
turns the (n+m) saddle system into the (n0+m) normal-equation system

    [K10'K10 + P0 P0'   K10'P ] [a~]   [K10'f]
    [P'K10              P'P   ] [b~] = [P'f  ],

where K10 is the n x n0 cross kernel block and P0 the subset rows of P.
The system is solved either directly or by preconditioned conjugate
gradient started at the point that reproduces the plain Monte Carlo
estimate; the estimate is the constant coefficient b~_1.
"""

import time
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import InputError, NumericalError
from .estimators import EstimatorResult, _as_f
from .kernels import regularize_and_factor, stein_kernel_cross
from .polynomials import vandermonde


@dataclass
class NystromConfig:
    """Subset size, conjugate-gradient controls, and the selection seed.

    ``n0="auto"`` resolves to ceil(sqrt(n)) clipped into [m, n];
    ``cg_max_iters=None`` resolves to 10 * (n0 + m).  ``use_cg=False``
    switches to a direct dense solve of the same system.
    """

    n0: object = "auto"
    cg_tolerance: float = 1e-5
    cg_max_iters: int = None
    seed: int = 0
    use_cg: bool = True

    def resolve_n0(self, n, m):
        if self.n0 == "auto":
            return int(min(n, max(m, ceil(sqrt(n)))))
        n0 = int(self.n0)
        if not m <= n0 <= n:
            raise InputError(f"need m <= n0 <= n, got n0={n0} with m={m}, n={n}")
        return n0


@dataclass
class NystromReport:
    """What the approximate solve actually did."""

    n0: int
    iterations: int
    residual: float
    converged: bool


def select_subset(n, cfg, m=1):
    """Uniform random subset of size n0, without replacement, sorted.

    Deterministic given the config seed; n0 = n returns every index.
    """
    n0 = cfg.resolve_n0(n, m)
    rng = np.random.default_rng(cfg.seed)
    return np.sort(rng.choice(n, size=n0, replace=False))


def asecf_system(K_cross, P, P0, fvals):
    """Assemble the (n0+m) normal-equation system from the kernel cross block.

    ``K_cross`` holds k0(x_i, x_j) for all i and subset j (n x n0); ``P0``
    holds the subset rows of P.  The left-hand side is a Gram matrix, hence
    symmetric positive semi-definite by construction.
    """
    K_cross = np.asarray(K_cross, dtype=float)
    P = np.asarray(P, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    f = _as_f(fvals)
    n, n0 = K_cross.shape
    m = P.shape[1]
    if P.shape[0] != n or P0.shape != (n0, m) or f.shape[0] != n:
        raise InputError("inconsistent block shapes for the reduced system")
    lhs = np.empty((n0 + m, n0 + m))
    lhs[:n0, :n0] = K_cross.T @ K_cross + P0 @ P0.T
    lhs[:n0, n0:] = K_cross.T @ P
    lhs[n0:, :n0] = lhs[:n0, n0:].T
    lhs[n0:, n0:] = P.T @ P
    lhs = 0.5 * (lhs + lhs.T)
    rhs = np.concatenate([K_cross.T @ f, P.T @ f])
    return lhs, rhs


def build_preconditioner(K00, P0, PtP, n, n0):
    """Lower-triangular blocks B1, B2 of the block-diagonal preconditioner.

    B1 B1' = ((n/n0) K00^2 + P0 P0')^{-1} and B2 B2' = (P'P)^{-1}; the
    inverses are formed through jitter-guarded Cholesky factorizations.
    """
    K00 = np.asarray(K00, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    PtP = np.asarray(PtP, dtype=float)

    def inverse_root(M):
        factor, _, _ = regularize_and_factor(M)
        Minv = cho_solve((factor, True), np.eye(M.shape[0]))
        Minv = 0.5 * (Minv + Minv.T)
        root, _, _ = regularize_and_factor(Minv)
        return root

    B1 = inverse_root((n / n0) * (K00 @ K00) + P0 @ P0.T)
    B2 = inverse_root(PtP)
    return B1, B2


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float
    residual_history: list
    converged: bool


def cg_solve(lhs, rhs, x0, tol, max_iters):
    """Plain conjugate gradient on a symmetric PSD system.

    Runs until the relative residual ||lhs x - rhs|| / ||rhs|| drops below
    ``tol`` or ``max_iters`` is reached (reported, not fatal).  NaN in the
    iteration is a hard error.  ``max_iters=0`` returns the start vector,
    whose choice elsewhere reproduces the Monte Carlo estimate.
    """
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    x = np.array(x0, dtype=float).reshape(-1)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        return CGResult(np.zeros_like(rhs), 0, 0.0, [0.0], True)
    r = rhs - lhs @ x
    rel = np.linalg.norm(r) / rhs_norm
    history = [rel]
    p = r.copy()
    rs = float(r @ r)
    iterations = 0
    for _ in range(max_iters):
        if rel <= tol:
            break
        Ap = lhs @ p
        curvature = float(p @ Ap)
        if not np.isfinite(curvature):
            raise NumericalError("conjugate gradient produced a non-finite quantity")
        if curvature <= 0:
            break  # numerical loss of positive definiteness; keep best iterate
        alpha = rs / curvature
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if not np.isfinite(rs_new):
            raise NumericalError("conjugate gradient produced a non-finite residual")
        rel = sqrt(rs_new) / rhs_norm
        history.append(rel)
        iterations += 1
        p = r + (rs_new / rs) * p
        rs = rs_new
    residual = float(np.linalg.norm(lhs @ x - rhs) / rhs_norm)
    return CGResult(x, iterations, residual, history, residual <= tol or rel <= tol)


def asecf_estimate(kernel_cfg, samples, basis, fvals, cfg):
    """Approximate semi-exact control functional estimate b~_1.

    Selects the subset, assembles the reduced system from the n x n0 cross
    block only, solves it (preconditioned CG by default, dense solve with
    ``cfg.use_cg=False``), and reports the subset size, iteration count and
    final relative residual.  Returned coefficients are scattered back to the
    original sample indices.
    """
    start = time.perf_counter()
    f = _as_f(fvals)
    P = vandermonde(basis, samples)
    n, m = P.shape
    if f.shape[0] != n:
        raise InputError(f"integrand has {f.shape[0]} entries for {n} samples")
    idx = select_subset(n, cfg, m)
    n0 = idx.shape[0]
    K_cross = stein_kernel_cross(
        kernel_cfg,
        samples.points,
        samples.gradients,
        samples.points[idx],
        samples.gradients[idx],
    )
    P0 = P[idx]
    lhs, rhs = asecf_system(K_cross, P, P0, f)
    K00 = K_cross[idx, :]
    B1, B2 = build_preconditioner(K00, P0, lhs[n0:, n0:], n, n0)

    if cfg.use_cg:
        B = np.zeros((n0 + m, n0 + m))
        B[:n0, :n0] = B1
        B[n0:, n0:] = B2
        lhs_pc = B.T @ lhs @ B
        lhs_pc = 0.5 * (lhs_pc + lhs_pc.T)
        rhs_pc = B.T @ rhs
        x0 = np.zeros(n0 + m)
        e1_scaled = np.zeros(m)
        e1_scaled[0] = f.mean()
        x0[n0:] = solve_triangular(B2, e1_scaled, lower=True)
        max_iters = cfg.cg_max_iters if cfg.cg_max_iters is not None else 10 * (n0 + m)
        cg = cg_solve(lhs_pc, rhs_pc, x0, cfg.cg_tolerance, max_iters)
        sol = B @ cg.x
        report = NystromReport(n0=n0, iterations=cg.iterations, residual=cg.residual, converged=cg.converged)
    else:
        factor, _, _ = regularize_and_factor(lhs)
        sol = cho_solve((factor, True), rhs)
        resid = float(np.linalg.norm(lhs @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300))
        report = NystromReport(n0=n0, iterations=0, residual=resid, converged=True)

    a_sub, b = sol[:n0], sol[n0:]
    coeff_a = np.zeros(n)
    coeff_a[idx] = a_sub
    return EstimatorResult(
        estimate=float(b[0]),
        method="asecf",
        coeff_a=coeff_a,
        coeff_b=b,
        nystrom=report,
        wall_time=time.perf_counter() - start,
    )
