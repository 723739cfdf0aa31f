"""Radial base kernels, their derivatives, and the Stein kernel matrix.

A radial kernel is k(x, y) = psi(z) with z = ||x - y||^2.  Applying the
Langevin Stein operator in both arguments turns k into a new kernel k0 whose
translates integrate to zero under the target density; for radial k this
reduces to an expansion in psi derivatives up to order four and a handful of
pairwise geometric terms.  This module evaluates that expansion pointwise,
assembles the n x n matrix, and guards its Cholesky factorization with an
escalating-jitter schedule.
"""

from dataclasses import dataclass
from math import ceil, gamma, sqrt

import numpy as np
from scipy.linalg import cholesky
from scipy.special import kv

from .errors import ConditioningError, InputError

RATIONAL_QUADRATIC = "rq"
GAUSSIAN = "gaussian"
MATERN = "matern"

_FAMILIES = (RATIONAL_QUADRATIC, GAUSSIAN, MATERN)

# Below this squared distance the Matern terms z*psi3 and z^2*psi4 are taken
# at their z -> 0+ limit (zero).
_MATERN_Z_FLOOR = 1e-12

# Condition-number proxy threshold triggering jitter: 1/(100 * machine eps).
_COND_LIMIT = 1.0 / (100.0 * np.finfo(float).eps)

_JITTER_SCALE = 1e-10
_JITTER_GROWTH = 10.0
_JITTER_RETRIES = 5


@dataclass(frozen=True)
class KernelConfig:
    """Base radial kernel specification.

    Parameters
    ----------
    family : str
        One of ``"rq"`` (rational quadratic), ``"gaussian"``, ``"matern"``.
    lengthscale : float
        Positive lengthscale of the radial profile.
    nu : float
        Matern smoothness; requires ``ceil(nu) > 2`` so the Stein kernel is
        well defined.  Ignored by the other families.
    """

    family: str
    lengthscale: float
    nu: float = 4.5

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}")
        if not np.isfinite(self.lengthscale) or self.lengthscale <= 0:
            raise InputError(f"lengthscale must be a positive real, got {self.lengthscale!r}")
        if self.family == MATERN:
            if not np.isfinite(self.nu) or self.nu <= 0 or ceil(self.nu) <= 2:
                raise InputError(
                    f"Matern smoothness nu={self.nu!r} rejected: ceil(nu) must exceed 2"
                )

    def with_lengthscale(self, lengthscale):
        return KernelConfig(self.family, float(lengthscale), self.nu)


@dataclass
class SteinKernelMatrix:
    """Assembled n x n Stein kernel matrix with its Cholesky factor.

    ``jitter`` is the multiple of the identity that was added (0.0 if none);
    ``cholesky`` is the lower-triangular factor of ``values + jitter * I``.
    """

    values: np.ndarray
    regularization_applied: bool
    jitter: float
    cholesky: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def regularized(self):
        """The matrix that was actually factorized."""
        if self.jitter == 0.0:
            return self.values
        return self.values + self.jitter * np.eye(self.n)


def _psi(cfg, z, j):
    """j-th derivative of the radial profile, vectorized over ``z`` (>= 0)."""
    z = np.asarray(z, dtype=float)
    lam2 = cfg.lengthscale**2
    if cfg.family == RATIONAL_QUADRATIC:
        sign = -1.0 if j % 2 else 1.0
        return sign * lam2 ** (-j) * gamma(j + 1) * (1.0 + z / lam2) ** (-j - 1)
    if cfg.family == GAUSSIAN:
        sign = -1.0 if j % 2 else 1.0
        return sign * lam2 ** (-j) * np.exp(-z / lam2)
    return _psi_matern(cfg, z, j)


def _matern_zero_limit(nu, c, j):
    """Right limit of the j-th Matern profile derivative at z = 0.

    Finite only for nu > j; by convention 0.0 otherwise, because those
    derivatives enter the Stein kernel multiplied by z or z^2, and the
    products vanish in the limit.
    """
    if nu <= j:
        return 0.0
    sign = -1.0 if j % 2 else 1.0
    return sign * (c / 2.0) ** (2 * j) * gamma(nu - j) / gamma(nu)


def _psi_matern(cfg, z, j):
    nu = cfg.nu
    b = 2.0 ** (1.0 - nu) / gamma(nu)
    c = sqrt(2.0 * nu) / cfg.lengthscale
    z = np.asarray(z, dtype=float)
    small = z < _MATERN_Z_FLOOR
    z_safe = np.where(small, 1.0, z)
    r = np.sqrt(z_safe)
    order = nu - j
    sign = -1.0 if j % 2 else 1.0
    vals = sign * b * c ** (nu + j) / 2.0**j * z_safe ** (order / 2.0) * kv(order, c * r)
    return np.where(small, _matern_zero_limit(nu, c, j), vals)


def psi_derivative(cfg, z, j):
    """Evaluate the j-th derivative of the radial profile at z = ||x-y||^2.

    ``j`` must lie in 0..4.  For the Matern family at z below 1e-12 with
    j in {3, 4}, the value returned is the right limit used by the radial
    Stein-kernel formula (zero whenever nu <= j, where the bare derivative
    diverges but its z-weighted combinations vanish).
    """
    if not isinstance(j, (int, np.integer)) or not 0 <= j <= 4:
        raise InputError(f"derivative order j={j!r} must be an integer in 0..4")
    z = float(z)
    if not np.isfinite(z) or z < 0:
        raise InputError(f"z={z!r} must be a non-negative real")
    return float(_psi(cfg, z, j))


def _radial_terms(x, u, y=None, v=None):
    """Pairwise geometric quantities entering the radial Stein expansion.

    Returns (z, bsum, cprod, uu) where, for rows i of (x, u) and j of (y, v),
    z[i,j]    = ||x_i - y_j||^2,
    bsum[i,j] = (u_i - v_j) . (x_i - y_j),
    cprod[i,j]= [u_i . (x_i - y_j)] * [v_j . (x_i - y_j)],
    uu[i,j]   = u_i . v_j.
    Computed so that the symmetric case (y, v) = (x, u) is bitwise symmetric.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
        u = u[:, None]
    if y is None:
        y, v = x, u
    else:
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
            v = v[:, None]
    diff = x[:, None, :] - y[None, :, :]
    z = np.einsum("ijk,ijk->ij", diff, diff)
    a = np.einsum("ik,ijk->ij", u, diff)  # u_i . (x_i - y_j)
    dterm = -np.einsum("jk,ijk->ij", v, diff)  # v_j . (y_j - x_i) = -v_j.(x_i - y_j)
    bsum = a + dterm
    cprod = a * (-dterm)
    uu = u @ v.T
    return z, bsum, cprod, uu


def _stein_kernel_from_terms(cfg, terms, d):
    """Radial Stein-kernel expansion given precomputed pairwise terms."""
    z, bsum, cprod, uu = terms
    psi1 = _psi(cfg, z, 1)
    psi2 = _psi(cfg, z, 2)
    if cfg.family == MATERN:
        small = z < _MATERN_Z_FLOOR
        z_safe = np.where(small, 1.0, z)
        zpsi3 = np.where(small, 0.0, z * _psi(cfg, z_safe, 3))
        z2psi4 = np.where(small, 0.0, z**2 * _psi(cfg, z_safe, 4))
    else:
        zpsi3 = z * _psi(cfg, z, 3)
        z2psi4 = z**2 * _psi(cfg, z, 4)
    k0 = 16.0 * z2psi4 + 16.0 * (2.0 + d) * zpsi3 + 4.0 * (2.0 + d) * d * psi2
    k0 += 4.0 * (2.0 * zpsi3 + (2.0 + d) * psi2) * bsum
    k0 -= 4.0 * psi2 * cprod
    k0 -= 2.0 * psi1 * uu
    return k0


def stein_kernel_eval(cfg, x, y, ux, uy):
    """Evaluate the Stein kernel k0(x, y) for score values ux, uy at x, y.

    ``ux`` and ``uy`` must be the gradients of the log target density at the
    two points; the result is symmetric under swapping (x, ux) <-> (y, uy).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ux = np.atleast_1d(np.asarray(ux, dtype=float))
    uy = np.atleast_1d(np.asarray(uy, dtype=float))
    if not (np.isfinite(x).all() and np.isfinite(y).all() and np.isfinite(ux).all() and np.isfinite(uy).all()):
        raise InputError("stein_kernel_eval requires finite inputs")
    if not x.shape == y.shape == ux.shape == uy.shape:
        raise InputError("x, y, ux, uy must share the same dimension")
    d = x.shape[0]
    terms = _radial_terms(x[None, :], ux[None, :], y[None, :], uy[None, :])
    return float(_stein_kernel_from_terms(cfg, terms, d)[0, 0])


def stein_kernel_matrix(cfg, points, gradients):
    """Dense n x n Stein kernel matrix for sample points and their scores."""
    points = np.asarray(points, dtype=float)
    gradients = np.asarray(gradients, dtype=float)
    d = points.shape[1] if points.ndim > 1 else 1
    return _stein_kernel_from_terms(cfg, _radial_terms(points, gradients), d)


def stein_kernel_cross(cfg, points_a, grads_a, points_b, grads_b):
    """Cross Stein kernel block k0(a_i, b_j) between two point sets."""
    points_a = np.asarray(points_a, dtype=float)
    d = points_a.shape[1] if points_a.ndim > 1 else 1
    terms = _radial_terms(points_a, grads_a, points_b, grads_b)
    return _stein_kernel_from_terms(cfg, terms, d)


def _try_cholesky(matrix):
    try:
        return cholesky(matrix, lower=True)
    except np.linalg.LinAlgError:
        return None


def _condition_proxy(factor):
    """Cheap condition estimate: squared ratio of extreme Cholesky diagonals."""
    diag = np.diag(factor)
    lo = diag.min()
    if lo <= 0:
        return np.inf
    return (diag.max() / lo) ** 2


def regularize_and_factor(matrix):
    """Cholesky-factor a symmetric PSD-in-theory matrix with jitter fallback.

    Adds eps * I with eps = 1e-10 * max(diag), escalating tenfold up to five
    retries, whenever the plain factorization fails or its condition proxy
    exceeds 1/(100 * machine eps).  Returns (factor, jitter, applied).
    """
    matrix = np.asarray(matrix, dtype=float)
    factor = _try_cholesky(matrix)
    if factor is not None and _condition_proxy(factor) <= _COND_LIMIT:
        return factor, 0.0, False
    base = _JITTER_SCALE * max(np.max(np.diag(matrix)), np.finfo(float).tiny)
    eye = np.eye(matrix.shape[0])
    jitter = base
    for _ in range(_JITTER_RETRIES):
        factor = _try_cholesky(matrix + jitter * eye)
        if factor is not None:
            return factor, jitter, True
        jitter *= _JITTER_GROWTH
    raise ConditioningError(
        "Cholesky factorization failed after jitter escalation up to "
        f"{jitter / _JITTER_GROWTH:.3e} (started at {base:.3e}, 5 retries)"
    )


def assemble_stein_matrix(cfg, samples):
    """Assemble the Stein kernel matrix for a (deduplicated) sample set.

    Returns a `SteinKernelMatrix` carrying the raw values, the jitter that
    had to be added for a successful Cholesky factorization, and the factor
    itself.  Raises `ConditioningError` if the escalation schedule runs out.
    """
    values = stein_kernel_matrix(cfg, samples.points, samples.gradients)
    factor, jitter, applied = regularize_and_factor(values)
    return SteinKernelMatrix(values=values, regularization_applied=applied, jitter=jitter, cholesky=factor)
