"""Computable error diagnostics for kernel cubature weights.

The kernel Stein discrepancy of a weight vector, sqrt(w' K0 w), measures the
distance between the weighted empirical measure and the target; multiplying
it by the interpolant semi-norm proxy sqrt(a' K0 a) gives a conservative,
fully computable stand-in for the (unobservable) error bound.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, InputError

_CLAMP_TOL = 1e-8


@dataclass
class DiagnosticReport:
    """KSD of the weights, semi-norm proxy of the interpolant, their product."""

    ksd: float
    seminorm_proxy: float
    bound_product: float


def _matrix(K0):
    return np.asarray(getattr(K0, "values", K0), dtype=float)


def _sqrt_quadratic_form(K, vec, what):
    q = float(vec @ (K @ vec))
    if q < -_CLAMP_TOL:
        raise ConditioningError(
            f"quadratic form for {what} is strongly negative ({q:.3e}); "
            "the kernel matrix is not numerically PSD"
        )
    return np.sqrt(max(q, 0.0))


def ksd_of_weights(K0, w):
    """Kernel Stein discrepancy sqrt(w' K0 w) of a weight vector.

    Tiny negative round-off from jittered matrices is clamped to zero;
    anything beyond -1e-8 is reported as a conditioning failure.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    return _sqrt_quadratic_form(_matrix(K0), w, "weights")


def error_bound(result, K0):
    """Diagnostic report for an estimator result carrying weights and a-coefficients.

    Raises `InputError` for methods (e.g. plain Monte Carlo, least squares)
    that do not produce the kernel interpolant coefficients.
    """
    if getattr(result, "weights", None) is None or getattr(result, "coeff_a", None) is None:
        raise InputError(
            f"method {getattr(result, 'method', '?')!r} does not support the error "
            "diagnostic: it carries no kernel weights/coefficients"
        )
    K = _matrix(K0)
    ksd = _sqrt_quadratic_form(K, np.asarray(result.weights, dtype=float), "weights")
    proxy = _sqrt_quadratic_form(K, np.asarray(result.coeff_a, dtype=float), "coefficients")
    return DiagnosticReport(ksd=ksd, seminorm_proxy=proxy, bound_product=ksd * proxy)
