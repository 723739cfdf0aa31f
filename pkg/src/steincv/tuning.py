"""Kernel lengthscale selection: median heuristic and 5-fold cross-validation.

Cross-validation scores each grid value by fitting the semi-exact interpolant
on four folds and summing squared prediction errors on the held-out fold;
the winner is the grid value with the smallest total, ties (within floating
round-off of the minimum) resolved to the smallest lengthscale.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import pdist

from .errors import InputError, SteinCVError, TuningError
from .kernels import KernelConfig, _radial_terms, _stein_kernel_from_terms, regularize_and_factor
from .polynomials import vandermonde
from .samplers import dedupe

DEFAULT_GRID = tuple(10.0**e for e in (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0))

# CV errors within this relative slack of the minimum count as tied and the
# tie resolves to the smallest lengthscale (exact ties never occur in floats).
_TIE_RTOL = 1e-9


def median_heuristic(points):
    """Lengthscale sqrt(median(squared pairwise distances) / 2).

    The empirical median of an even-length list is the mean of the two
    central order statistics.  All-identical points (zero median) are a
    degenerate input.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 2:
        raise InputError("median heuristic needs at least two points")
    med = float(np.median(pdist(points, metric="sqeuclidean")))
    if med == 0.0:
        raise InputError("median pairwise distance is zero (duplicated points)")
    return float(np.sqrt(0.5 * med))


def _fold_indices(n, folds, seed):
    """Seeded shuffle split into ``folds`` parts, remainder on leading folds."""
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _cv_error(cfg, samples, fvals, basis, fold_sets):
    """Total held-out squared prediction error across folds for one config."""
    total = 0.0
    n = samples.n
    for hold in fold_sets:
        train = np.setdiff1d(np.arange(n), hold)
        assert not np.intersect1d(train, hold).size
        Xt, Ut = samples.points[train], samples.gradients[train]
        terms = _radial_terms(Xt, Ut)
        K = _stein_kernel_from_terms(cfg, terms, samples.d)
        factor, jitter, _ = regularize_and_factor(K)
        P = vandermonde(basis, samples.subset(train))
        S = cho_solve((factor, True), P)
        A = P.T @ S
        A_chol = cho_factor(0.5 * (A + A.T), lower=True)
        f_train = fvals[train]
        b = cho_solve(A_chol, S.T @ f_train)
        a = cho_solve((factor, True), f_train - P @ b)
        cross_terms = _radial_terms(
            samples.points[hold], samples.gradients[hold], Xt, Ut
        )
        K_cross = _stein_kernel_from_terms(cfg, cross_terms, samples.d)
        P_hold = vandermonde(basis, samples.subset(hold))
        pred = P_hold @ b + K_cross @ a
        err = fvals[hold] - pred
        total += float(err @ err)
    return total


def cv_select_lambda(samples, fvals, family, basis, grid=DEFAULT_GRID, folds=5, seed=0, nu=4.5):
    """Grid-search the kernel lengthscale by 5-fold cross-validation.

    Duplicate points are removed before fold assignment.  A grid value whose
    interpolant fails to factorize on some fold is skipped; if every value
    fails, the per-value failures are reported together.
    """
    samples = dedupe(samples)
    fvals = np.asarray(fvals, dtype=float).reshape(-1)
    if fvals.shape[0] != samples.n:
        raise InputError("integrand length does not match the deduplicated sample count")
    grid = [float(g) for g in grid]
    if not grid or any(g <= 0 for g in grid):
        raise InputError("the lengthscale grid must contain positive values")
    if samples.n < folds * (basis.m + 1):
        raise InputError(
            f"need n >= folds*(m+1) = {folds * (basis.m + 1)} samples for "
            f"{folds}-fold cross-validation with m={basis.m}, got {samples.n}"
        )
    fold_sets = _fold_indices(samples.n, folds, seed)
    errors, failures = {}, {}
    for lam in grid:
        cfg = KernelConfig(family, lam, nu)
        try:
            errors[lam] = _cv_error(cfg, samples, fvals, basis, fold_sets)
        except (SteinCVError, np.linalg.LinAlgError) as exc:
            failures[lam] = str(exc)
    if not errors:
        lines = "; ".join(f"lambda={lam:g}: {msg}" for lam, msg in failures.items())
        raise TuningError(f"every grid value failed cross-validation: {lines}")
    best = min(errors.values())
    slack = _TIE_RTOL * (1.0 + float(fvals @ fvals))
    tied = [lam for lam, err in errors.items() if err <= best + slack]
    return min(tied)
