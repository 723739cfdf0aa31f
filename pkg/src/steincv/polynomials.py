"""Polynomial spaces under the Langevin Stein operator.

The parametric part of the estimator uses monomials x^alpha with
0 < |alpha| <= r, mapped through Lg = laplacian(g) + grad(g).score.  The
constant function is excluded from the basis (it is annihilated by the
operator) but reappears as the leading all-ones column of the design matrix.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


def _degree_indices(d, k):
    """Multi-indices of total degree k over d variables, descending lex order."""
    if d == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _degree_indices(d - 1, k - first):
            yield (first,) + rest


@dataclass(frozen=True)
class PolynomialBasis:
    """Monomial multi-index set for a fixed dimension and maximal order.

    ``indices`` are graded-lexicographically ordered and exclude the zero
    index; ``m`` counts the constant column plus one column per index.
    """

    dimension: int
    order: int
    indices: tuple = field(default=None)

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError(f"dimension must be >= 1, got {self.dimension}")
        if self.order < 0:
            raise InputError(f"order must be >= 0, got {self.order}")
        if self.indices is None:
            built = tuple(
                alpha
                for k in range(1, self.order + 1)
                for alpha in _degree_indices(self.dimension, k)
            )
            object.__setattr__(self, "indices", built)

    @property
    def m(self):
        return 1 + len(self.indices)


def enumerate_basis(d, r):
    """All multi-indices alpha with 0 < |alpha| <= r, graded-lex ordered.

    r = 0 yields the empty index set (m = 1), which collapses the semi-exact
    estimator to the plain control functional.
    """
    return PolynomialBasis(dimension=d, order=r)


def stein_poly_eval(alpha, x, u):
    """Apply the Stein operator to the monomial x^alpha at a single point.

    Returns laplacian(x^alpha) + grad(x^alpha) . u with the convention that
    vanishing coefficients kill the negative powers (0 * x^-1 = 0 * x^-2 = 0).
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if sum(alpha) == 0:
        raise InputError("zero multi-index: constants are not part of the Stein basis")
    if len(alpha) != x.shape[0] or x.shape != u.shape:
        raise InputError("alpha, x and u must share the same dimension")
    total = 0.0
    for i, a in enumerate(alpha):
        if a == 0:
            continue
        others = 1.0
        for k, ak in enumerate(alpha):
            if k != i and ak:
                others *= x[k] ** ak
        grad_i = a * x[i] ** (a - 1) if a >= 1 else 0.0
        total += grad_i * others * u[i]
        if a >= 2:
            total += a * (a - 1) * x[i] ** (a - 2) * others
    return float(total)


def vandermonde(basis, samples):
    """The n x m design matrix: ones column, then Stein-mapped monomials.

    ``samples`` must carry gradients; rank deficiency is left for the solvers
    to detect (unisolvency is a property of the point set, checked where the
    matrix is inverted).
    """
    points = np.asarray(samples.points, dtype=float)
    grads = np.asarray(samples.gradients, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
        grads = grads[:, None]
    n, d = points.shape
    if d != basis.dimension:
        raise InputError(f"basis dimension {basis.dimension} != sample dimension {d}")
    P = np.empty((n, basis.m))
    P[:, 0] = 1.0
    for j, alpha in enumerate(basis.indices):
        support = [i for i, a in enumerate(alpha) if a]
        pows = {i: points[:, i] ** alpha[i] for i in support}
        col = np.zeros(n)
        for i in support:
            a = alpha[i]
            others = np.ones(n)
            for k in support:
                if k != i:
                    others = others * pows[k]
            col += a * points[:, i] ** (a - 1) * others * grads[:, i]
            if a >= 2:
                col += a * (a - 1) * points[:, i] ** (a - 2) * others
        P[:, j + 1] = col
    return P
