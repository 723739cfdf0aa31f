"""Built-in target densities with analytic score functions.

Every target exposes an unnormalized log density and its gradient; the
normalization constant is never needed anywhere in the package.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InputError, NumericalError


@dataclass
class TargetModel:
    """An unnormalized log density on R^d together with its gradient."""

    name: str
    dim: int
    log_density: callable
    gradient: callable


def gaussian_target(d):
    """Standard normal on R^d: log p = -|x|^2/2 (constant dropped), score -x."""
    if d < 1:
        raise InputError("dimension must be >= 1")

    def log_density(x):
        x = np.asarray(x, dtype=float)
        return -0.5 * float(x @ x)

    def gradient(x):
        return -np.asarray(x, dtype=float)

    return TargetModel(name="gaussian", dim=d, log_density=log_density, gradient=gradient)


# ---------------------------------------------------------------------------
# Cormack-Jolly-Seber capture-recapture posterior (11 parameters)
# ---------------------------------------------------------------------------
#
# Parameters on the probability scale: x = (phi_1..phi_5, p_2..p_6, phi_6*p_7),
# where phi_j is survival from year j to j+1 and p_j the capture probability
# in year j; only the product phi_6*p_7 is identifiable.  The chain runs in
# logit coordinates with the flat-on-(0,1) prior transformed accordingly.

_N_OCCASIONS = 7
_CJS_DIM = 11


def _cjs_factor_tables():
    """0/1 exponent tables for each first-recapture probability pi_{ik}.

    Row order: (i, k) for i = 1..6, k = i+1..7.  ident[j, l] = 1 when
    coordinate l enters pi_j directly, compl[j, l] = 1 when it enters as
    (1 - x_l).  Coordinate layout: 0..4 survival, 5..9 capture, 10 product.
    """
    pairs = [(i, k) for i in range(1, 7) for k in range(i + 1, 8)]
    ident = np.zeros((len(pairs), _CJS_DIM))
    compl = np.zeros((len(pairs), _CJS_DIM))
    idx_phi = lambda m: m - 1  # phi_m, m = 1..5
    idx_p = lambda m: 3 + m  # p_m,   m = 2..6
    for j, (i, k) in enumerate(pairs):
        if k <= 6:
            ident[j, idx_phi(i)] = 1
            ident[j, idx_p(k)] = 1
            for m in range(i + 1, k):
                ident[j, idx_phi(m)] = 1
                compl[j, idx_p(m)] = 1
        elif i == 6:
            ident[j, 10] = 1
        else:
            ident[j, idx_phi(i)] = 1
            for m in range(i + 1, 6):
                ident[j, idx_phi(m)] = 1
                compl[j, idx_p(m)] = 1
            compl[j, idx_p(6)] = 1
            ident[j, 10] = 1
    release = np.array([i - 1 for i, _ in pairs])  # 0-based release year per row
    return ident, compl, release


def cjs_target(releases, recaptures):
    """Capture-recapture posterior in logit coordinates.

    Parameters
    ----------
    releases : array of 6 release counts D_i (years 1..6).
    recaptures : 6 x 6 array; entry (i, k) is the number of animals released
        in year i+1 and first recaptured in year k+2 (k indexes years 2..7).

    The log posterior includes the Jacobian-adjusted flat prior
    exp(t)/(1+exp(t))^2 per logit coordinate; the gradient is analytic.
    """
    D = np.asarray(releases, dtype=float).reshape(-1)
    y = np.asarray(recaptures, dtype=float)
    if D.shape != (6,) or y.shape != (6, 6):
        raise InputError("expected 6 release counts and a 6 x 6 recapture table")
    if (D < 0).any() or (y < 0).any():
        raise InputError("release and recapture counts must be non-negative")
    never = D - y.sum(axis=1)  # d_i: animals never recaptured
    if (never < 0).any():
        bad = int(np.argmax(never < 0)) + 1
        raise InputError(f"release year {bad}: recaptures exceed the release count")

    ident, compl, release = _cjs_factor_tables()
    # recapture count for table row (i, k): y[i-1, k-2]
    ycounts = np.array([y[i - 1, k - 2] for i in range(1, 7) for k in range(i + 1, 8)])

    def _split(t):
        x = expit(np.asarray(t, dtype=float))
        if x.shape != (_CJS_DIM,):
            raise InputError(f"expected a parameter vector of length {_CJS_DIM}")
        # logs are safe: expit maps into (0, 1) up to floating underflow
        x = np.clip(x, 1e-300, 1.0 - 1e-16)
        pi = np.exp(ident @ np.log(x) + compl @ np.log1p(-x))
        chi = 1.0 - np.array([pi[release == i].sum() for i in range(6)])
        if (chi <= 0).any():
            raise NumericalError("recapture probability mass exceeded one (chi <= 0)")
        return x, pi, chi

    def log_density(t):
        t = np.asarray(t, dtype=float)
        x, pi, chi = _split(t)
        loglik = float(ycounts @ np.log(pi) + never @ np.log(chi))
        logprior = float(np.sum(t - 2.0 * np.logaddexp(0.0, t)))
        return loglik + logprior

    def gradient(t):
        t = np.asarray(t, dtype=float)
        x, pi, chi = _split(t)
        coef = ycounts - never[release] * pi / chi[release]
        grad_x = (ident.T @ coef) / x - (compl.T @ coef) / (1.0 - x)
        return grad_x * x * (1.0 - x) + (1.0 - 2.0 * x)

    return TargetModel(name="cjs", dim=_CJS_DIM, log_density=log_density, gradient=gradient)


# ---------------------------------------------------------------------------
# Bayesian logistic regression posterior
# ---------------------------------------------------------------------------


def logistic_target(X, y, prior_sds):
    """Logistic-regression log posterior with independent normal priors.

    ``X`` is the N x d design (intercept column included by the caller),
    ``y`` the binary response, ``prior_sds`` the per-coordinate prior
    standard deviations.  Uses log(1+exp(t)) = logaddexp(0, t), so extreme
    linear predictors neither overflow nor lose the gradient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InputError("X must be N x d with one response per row")
    if not np.isin(y, (0.0, 1.0)).all():
        raise InputError("responses must be binary (0/1)")
    sds = np.asarray(prior_sds, dtype=float).reshape(-1)
    if sds.shape[0] != X.shape[1] or (sds <= 0).any():
        raise InputError("prior_sds must hold one positive sd per coefficient")
    inv_var = 1.0 / sds**2

    def log_density(beta):
        beta = np.asarray(beta, dtype=float)
        eta = X @ beta
        loglik = float(y @ eta - np.logaddexp(0.0, eta).sum())
        return loglik - 0.5 * float(beta @ (inv_var * beta))

    def gradient(beta):
        beta = np.asarray(beta, dtype=float)
        eta = X @ beta
        return X.T @ (y - expit(eta)) - inv_var * beta

    return TargetModel(name="logistic", dim=X.shape[1], log_density=log_density, gradient=gradient)


def standardize_design(X, target_sd=0.5, intercept_col=0):
    """Scale non-intercept design columns to a common standard deviation.

    Scale-only (no centering), population sd; this is one reading of the
    usual "standardise to sd 0.5" preprocessing and is documented as such.
    Constant columns other than the intercept are rejected.
    """
    X = np.array(X, dtype=float)
    for j in range(X.shape[1]):
        if j == intercept_col:
            continue
        sd = X[:, j].std()
        if sd == 0:
            raise InputError(f"design column {j} is constant and cannot be standardized")
        X[:, j] *= target_sd / sd
    return X
