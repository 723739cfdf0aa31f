"""The direct estimators: plain Monte Carlo, polynomial least squares,
control functional, and the semi-exact control functional.

The semi-exact estimator solves the saddle system

    [K0  P] [a]   [f]
    [P'  0] [b] = [0]

for the interpolant coefficients; the estimate is the constant term b_1 and
the implied cubature weights are w = K0^{-1} P (P' K0^{-1} P)^{-1} e_1.  The
default path factors K0 once and solves the m x m Schur complement; a direct
solve of the full indefinite system is kept behind a flag for cross-checking.
"""

import time
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve

from .diagnostics import DiagnosticReport, error_bound
from .errors import ConditioningError, InputError, UnisolvencyError

if TYPE_CHECKING:
    from .nystrom import NystromReport

_RESIDUAL_RTOL = 1e-8


@dataclass
class EstimatorResult:
    """Estimate plus whatever the method exposes: weights, coefficients,
    diagnostics, and wall time in seconds."""

    estimate: float
    method: str
    weights: np.ndarray = None
    coeff_a: np.ndarray = None
    coeff_b: np.ndarray = None
    diagnostics: DiagnosticReport = None
    nystrom: "NystromReport" = None
    wall_time: float = 0.0


def _as_f(fvals):
    f = np.asarray(fvals, dtype=float).reshape(-1)
    if f.shape[0] == 0:
        raise InputError("empty integrand vector")
    if not np.isfinite(f).all():
        raise InputError("integrand values must be finite")
    return f


def mc_estimate(fvals):
    """Arithmetic mean along the sample path with uniform weights."""
    start = time.perf_counter()
    f = _as_f(fvals)
    n = f.shape[0]
    return EstimatorResult(
        estimate=float(f.mean()),
        method="mc",
        weights=np.full(n, 1.0 / n),
        wall_time=time.perf_counter() - start,
    )


def zv_estimate(P, fvals):
    """Polynomial control variate: constant term of the least-squares fit.

    The estimate is e_1' (P'P)^{-1} P' f; the implied weights
    P (P'P)^{-1} e_1 satisfy P'w = e_1 and hence sum to one.
    """
    start = time.perf_counter()
    f = _as_f(fvals)
    P = np.asarray(P, dtype=float)
    n, m = P.shape
    if n < m:
        raise InputError(f"need at least m={m} samples for the least-squares fit, got {n}")
    coeffs, _, rank, _ = np.linalg.lstsq(P, f, rcond=None)
    if rank < m:
        raise UnisolvencyError(
            f"design matrix is rank deficient ({rank} < {m}); the point set is not "
            "unisolvent for this basis — reduce the polynomial order"
        )
    weights, *_ = np.linalg.lstsq(P.T, np.eye(m)[:, 0], rcond=None)
    return EstimatorResult(
        estimate=float(coeffs[0]),
        method="zv",
        weights=weights,
        coeff_b=coeffs,
        wall_time=time.perf_counter() - start,
    )


def _schur_pieces(K0, P):
    """Factor the m x m Schur complement P' K0^{-1} P, reusing K0's factor."""
    P = np.asarray(P, dtype=float)
    n, m = P.shape
    if K0.n != n:
        raise InputError(f"kernel matrix is {K0.n} x {K0.n} but P has {n} rows")
    if n < m:
        raise InputError(f"need n >= m, got n={n}, m={m}")
    chol = (K0.cholesky, True)
    S = cho_solve(chol, P)  # K0^{-1} P
    A = P.T @ S
    A = 0.5 * (A + A.T)
    try:
        A_chol = cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise UnisolvencyError(
            f"P' K0^{{-1}} P is singular for basis size m={m}; the point set is not "
            "unisolvent — reduce the polynomial order"
        ) from exc
    return chol, S, A_chol


def secf_solve(K0, P, fvals, direct=False):
    """Interpolant coefficients (a, b) of the semi-exact block system.

    Solves K0 a + P b = f subject to P'a = 0 via the Schur complement of the
    (jitter-regularized) kernel matrix, with one step of iterative refinement;
    ``direct=True`` instead solves the full (n+m) indefinite system, kept for
    cross-checking.  Raises if the defining equations cannot be met to
    1e-8 * ||f|| or if the constraint matrix is rank deficient.
    """
    f = _as_f(fvals)
    P = np.asarray(P, dtype=float)
    n, m = P.shape
    K = K0.regularized
    if direct:
        block = np.zeros((n + m, n + m))
        block[:n, :n] = K
        block[:n, n:] = P
        block[n:, :n] = P.T
        rhs = np.concatenate([f, np.zeros(m)])
        sol = solve(block, rhs, assume_a="sym")
        a, b = sol[:n], sol[n:]
    else:
        chol, S, A_chol = _schur_pieces(K0, P)

        def solve_pair(r1, r2):
            # K0 da + P db = r1,  P' da = r2
            t = cho_solve(chol, r1)
            db = cho_solve(A_chol, P.T @ t - r2)
            da = cho_solve(chol, r1 - P @ db)
            return da, db

        a, b = solve_pair(f, np.zeros(m))
        da, db = solve_pair(f - K @ a - P @ b, -P.T @ a)
        a, b = a + da, b + db
    scale = np.linalg.norm(f)
    if scale > 0:
        r_interp = np.linalg.norm(K @ a + P @ b - f)
        r_exact = np.linalg.norm(P.T @ a)
        if r_interp > _RESIDUAL_RTOL * scale or r_exact > _RESIDUAL_RTOL * scale:
            raise ConditioningError(
                "block system solved too inaccurately "
                f"(residuals {r_interp:.2e}, {r_exact:.2e} vs tolerance "
                f"{_RESIDUAL_RTOL * scale:.2e}); the kernel matrix is too ill-conditioned"
            )
    return a, b


def secf_weights(K0, P):
    """Cubature weights w = K0^{-1} P (P' K0^{-1} P)^{-1} e_1."""
    P = np.asarray(P, dtype=float)
    _, S, A_chol = _schur_pieces(K0, P)
    e1 = np.zeros(P.shape[1])
    e1[0] = 1.0
    return S @ cho_solve(A_chol, e1)


def secf_estimate(K0, P, fvals, direct=False, attach_diagnostics=True):
    """Semi-exact control functional estimate: the constant term b_1.

    Also exposes the cubature weights and, unless disabled, the KSD-based
    diagnostic report computed from (w, a).
    """
    start = time.perf_counter()
    a, b = secf_solve(K0, P, fvals, direct=direct)
    w = secf_weights(K0, P)
    result = EstimatorResult(
        estimate=float(b[0]),
        method="secf",
        weights=w,
        coeff_a=a,
        coeff_b=b,
        wall_time=0.0,
    )
    if attach_diagnostics:
        result.diagnostics = error_bound(result, K0)
    result.wall_time = time.perf_counter() - start
    return result


def cf_estimate(K0, fvals, attach_diagnostics=True):
    """Control functional estimate (1' K0^{-1} 1)^{-1} 1' K0^{-1} f.

    Algebraically the semi-exact estimator with the constants-only basis;
    weights are K0^{-1} 1 normalized to sum to one.
    """
    start = time.perf_counter()
    f = _as_f(fvals)
    if K0.n != f.shape[0]:
        raise InputError(f"kernel matrix is {K0.n} x {K0.n} but f has {f.shape[0]} entries")
    chol = (K0.cholesky, True)
    ones = np.ones_like(f)
    s1 = cho_solve(chol, ones)
    sf = cho_solve(chol, f)
    denom = float(ones @ s1)
    if denom <= 0:
        raise ConditioningError("1' K0^{-1} 1 is not positive; kernel matrix unusable")
    estimate = float(ones @ sf) / denom
    result = EstimatorResult(
        estimate=estimate,
        method="cf",
        weights=s1 / denom,
        coeff_a=sf - estimate * s1,
        coeff_b=np.array([estimate]),
        wall_time=0.0,
    )
    if attach_diagnostics:
        result.diagnostics = error_bound(result, K0)
    result.wall_time = time.perf_counter() - start
    return result
