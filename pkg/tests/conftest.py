"""Shared numerical oracles for the test suite.

The differentiation oracles below are deliberately independent of the
library's analytic formulas: they only touch the base radial profile (for
the kernel) or the log density (for targets) and differentiate numerically
with fourth-order stencils plus Richardson extrapolation.
"""

import numpy as np

from steincv.kernels import _psi


def base_kernel_value(cfg, x, y):
    """k(x, y) = psi(||x - y||^2), the undifferentiated radial kernel."""
    z = float(np.sum((np.asarray(x) - np.asarray(y)) ** 2))
    return float(_psi(cfg, z, 0))


def _d1(f, x, i, h):
    e = np.zeros_like(x)
    e[i] = 1.0
    return (-f(x + 2 * h * e) + 8 * f(x + h * e) - 8 * f(x - h * e) + f(x - 2 * h * e)) / (12 * h)


def _d2(f, x, i, h):
    e = np.zeros_like(x)
    e[i] = 1.0
    return (
        -f(x + 2 * h * e) + 16 * f(x + h * e) - 30 * f(x) + 16 * f(x - h * e) - f(x - 2 * h * e)
    ) / (12 * h**2)


def fd_gradient(f, x, h=1e-5):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    return np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(len(x))])


def fd_laplacian(f, x, h):
    x = np.asarray(x, dtype=float)
    return sum(_d2(f, x, i, h) for i in range(len(x)))


def fd_stein_apply(f, x, u, h=1e-4):
    """Numerically apply the Stein operator: laplacian(f) + grad(f) . u."""
    x = np.asarray(x, dtype=float)
    grad = np.array([_d1(f, x, i, h) for i in range(len(x))])
    return fd_laplacian(f, x, h) + float(grad @ np.asarray(u))


def _nested_stein_kernel(cfg, x, y, ux, uy, h):
    """L_x L_y k evaluated by nesting fourth-order stencils."""

    def inner(xx):
        g = lambda yy: base_kernel_value(cfg, xx, yy)
        grad_y = np.array([_d1(g, y, i, h) for i in range(len(y))])
        return fd_laplacian(g, y, h) + float(grad_y @ uy)

    grad_x = np.array([_d1(inner, x, i, h) for i in range(len(x))])
    return fd_laplacian(inner, x, h) + float(grad_x @ ux)


def stein_kernel_oracle(cfg, x, y, ux, uy):
    """Richardson-extrapolated nested differentiation of the base kernel."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ux = np.asarray(ux, dtype=float)
    uy = np.asarray(uy, dtype=float)
    h = 0.04 * cfg.lengthscale
    coarse = _nested_stein_kernel(cfg, x, y, ux, uy, h)
    fine = _nested_stein_kernel(cfg, x, y, ux, uy, h / 2)
    return (16.0 * fine - coarse) / 15.0


def gaussian_monomial_moment(alpha):
    """E[prod x_i^{a_i}] under a standard normal: product of (a_i - 1)!!."""
    moment = 1.0
    for a in alpha:
        if a % 2 == 1:
            return 0.0
        moment *= float(np.prod(np.arange(a - 1, 0, -2))) if a else 1.0
    return moment
