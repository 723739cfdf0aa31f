"""Variance-reduced posterior expectations from MCMC output.

Post-processes sample points, score-function gradients, and integrand values
into estimates that are exact on a polynomial space mapped through the
Langevin Stein operator and minimum-norm-optimal beyond it.  Classical
comparators (plain Monte Carlo, polynomial least squares, control
functionals), a scalable subset approximation, kernel tuning, and a
computable kernel-Stein-discrepancy error diagnostic are included.
"""

from .benchmarks import (
    EfficiencyReport,
    chain_benchmark,
    gaussian_benchmark,
    gaussian_test_integrand,
    run_estimation,
)
from .diagnostics import DiagnosticReport, error_bound, ksd_of_weights
from .errors import (
    ConditioningError,
    InputError,
    NumericalError,
    SteinCVError,
    TuningError,
    UnisolvencyError,
)
from .estimators import (
    EstimatorResult,
    cf_estimate,
    mc_estimate,
    secf_estimate,
    secf_solve,
    secf_weights,
    zv_estimate,
)
from .io import load_samples, write_result, write_samples
from .kernels import (
    KernelConfig,
    SteinKernelMatrix,
    assemble_stein_matrix,
    psi_derivative,
    stein_kernel_cross,
    stein_kernel_eval,
    stein_kernel_matrix,
)
from .nystrom import NystromConfig, asecf_estimate, asecf_system, build_preconditioner, cg_solve, select_subset
from .polynomials import PolynomialBasis, enumerate_basis, stein_poly_eval, vandermonde
from .samplers import ChainConfig, SampleSet, dedupe, mala_chain, ula_chain
from .targets import TargetModel, cjs_target, gaussian_target, logistic_target, standardize_design
from .tuning import cv_select_lambda, median_heuristic

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ConditioningError",
    "DiagnosticReport",
    "EfficiencyReport",
    "EstimatorResult",
    "InputError",
    "KernelConfig",
    "NumericalError",
    "NystromConfig",
    "PolynomialBasis",
    "SampleSet",
    "SteinCVError",
    "SteinKernelMatrix",
    "TargetModel",
    "TuningError",
    "UnisolvencyError",
    "asecf_estimate",
    "asecf_system",
    "assemble_stein_matrix",
    "build_preconditioner",
    "cf_estimate",
    "cg_solve",
    "chain_benchmark",
    "cjs_target",
    "cv_select_lambda",
    "dedupe",
    "enumerate_basis",
    "error_bound",
    "gaussian_benchmark",
    "gaussian_target",
    "gaussian_test_integrand",
    "ksd_of_weights",
    "load_samples",
    "logistic_target",
    "mala_chain",
    "mc_estimate",
    "median_heuristic",
    "psi_derivative",
    "run_estimation",
    "secf_estimate",
    "secf_solve",
    "secf_weights",
    "select_subset",
    "standardize_design",
    "stein_kernel_cross",
    "stein_kernel_eval",
    "stein_kernel_matrix",
    "stein_poly_eval",
    "ula_chain",
    "vandermonde",
    "write_result",
    "write_samples",
    "zv_estimate",
]
