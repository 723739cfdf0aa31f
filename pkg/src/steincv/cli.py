"""Command-line interface.

Subcommands: ``estimate`` (post-process a samples file), ``sample`` (run a
built-in chain), ``benchmark gaussian`` / ``benchmark chain`` (efficiency
reports), ``diagnose`` (KSD error diagnostic).  Exit codes: 0 success,
2 input/validation error, 3 numerical failure.
"""

import argparse
import json
import sys

import numpy as np

from . import io
from .benchmarks import (
    METHODS,
    chain_benchmark,
    gaussian_benchmark,
    resolve_lengthscale,
    run_estimation,
)
from .errors import InputError, NumericalError
from .kernels import KernelConfig
from .nystrom import NystromConfig
from .polynomials import enumerate_basis
from .samplers import ChainConfig, SampleSet, dedupe, mala_chain, ula_chain
from .targets import cjs_target, gaussian_target, logistic_target, standardize_design

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _kernel_args(parser):
    parser.add_argument("--kernel", choices=("rq", "gaussian", "matern"), default="rq")
    parser.add_argument(
        "--lambda",
        dest="lambda_spec",
        default="auto-cv",
        help="kernel lengthscale: a float, 'auto-cv', or 'auto-median'",
    )
    parser.add_argument("--nu", type=float, default=4.5, help="Matern smoothness")
    parser.add_argument("--order", type=int, default=2, help="polynomial order r")


def _parse_lambda(spec):
    if spec in ("auto-cv", "auto-median"):
        return spec
    try:
        return float(spec)
    except ValueError:
        raise InputError(f"--lambda must be a float, 'auto-cv' or 'auto-median'; got {spec!r}")


def _parse_n0(spec):
    if spec == "auto":
        return "auto"
    try:
        return int(spec)
    except ValueError:
        raise InputError(f"--n0 must be an integer or 'auto'; got {spec!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="steincv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate an integral from a samples CSV")
    est.add_argument("--samples", required=True)
    est.add_argument("--integrand", required=True)
    est.add_argument("--method", choices=METHODS, required=True)
    _kernel_args(est)
    est.add_argument("--n0", default="auto", help="Nystrom subset size or 'auto'")
    est.add_argument("--cg-tol", type=float, default=1e-5)
    est.add_argument("--direct", action="store_true", help="direct solve instead of CG (asecf) or Schur (secf)")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--emit-weights", action="store_true")
    est.add_argument("--out", default=None)

    smp = sub.add_parser("sample", help="run a built-in MCMC chain")
    smp.add_argument("--target", choices=("gaussian", "cjs", "logistic"), required=True)
    smp.add_argument("--data", default=None, help="CSV data file (cjs counts / logistic y,x...)")
    smp.add_argument("--d", type=int, default=4, help="dimension (gaussian target only)")
    smp.add_argument("--sampler", choices=("mala", "ula"), default="mala")
    smp.add_argument("--n", type=int, required=True)
    smp.add_argument("--burn-in", type=int, default=0)
    smp.add_argument("--step", type=float, required=True)
    smp.add_argument("--sigma", default="identity", help="'identity' or a d x d CSV file")
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--no-standardize", action="store_true", help="skip sd-0.5 scaling of predictors")
    smp.add_argument("--out", required=True)

    ben = sub.add_parser("benchmark", help="paired-replicate efficiency benchmarks")
    bensub = ben.add_subparsers(dest="benchmark", required=True)

    bg = bensub.add_parser("gaussian", help="standard-normal benchmark integrand")
    bg.add_argument("--d", type=int, required=True)
    bg.add_argument("--n", type=int, required=True)
    bg.add_argument("--replicates", type=int, required=True)
    bg.add_argument("--methods", required=True, help="comma-separated subset of " + ",".join(METHODS))
    bg.add_argument("--seed", type=int, default=0)
    _kernel_args(bg)
    bg.add_argument("--out", default=None)

    bc = bensub.add_parser("chain", help="MCMC chain benchmark against a gold value")
    bc.add_argument("--target", choices=("gaussian", "cjs", "logistic"), required=True)
    bc.add_argument("--data", default=None)
    bc.add_argument("--d", type=int, default=4)
    bc.add_argument("--sampler", choices=("mala", "ula"), default="mala")
    bc.add_argument("--n", type=int, required=True)
    bc.add_argument("--burn-in", type=int, default=0)
    bc.add_argument("--step", type=float, required=True)
    bc.add_argument("--gold", type=float, required=True)
    bc.add_argument("--replicates", type=int, required=True)
    bc.add_argument("--methods", required=True)
    bc.add_argument("--integrand-coord", type=int, default=1, help="estimate E[x_i] (1-based)")
    bc.add_argument("--seed", type=int, default=0)
    bc.add_argument("--no-standardize", action="store_true")
    _kernel_args(bc)
    bc.add_argument("--out", default=None)

    dia = sub.add_parser("diagnose", help="KSD-based error diagnostic for a samples CSV")
    dia.add_argument("--samples", required=True)
    dia.add_argument("--integrand", required=True)
    _kernel_args(dia)
    dia.add_argument("--seed", type=int, default=0)
    dia.add_argument("--out", default=None)

    return parser


def _emit(doc, out):
    if out:
        io.write_result(doc, out)
    else:
        json.dump(io._jsonable(doc), sys.stdout, indent=2)
        sys.stdout.write("\n")


def _build_target(args):
    if args.target == "gaussian":
        return gaussian_target(args.d)
    if args.data is None:
        raise InputError(f"--data is required for the {args.target} target")
    if args.target == "cjs":
        releases, recaptures = io.load_cjs_counts(args.data)
        return cjs_target(releases, recaptures)
    y, X = io.load_logistic_data(args.data)
    if not getattr(args, "no_standardize", False):
        X = standardize_design(X, target_sd=0.5, intercept_col=None)
    X = np.hstack([np.ones((X.shape[0], 1)), X])
    sds = np.full(X.shape[1], 5.0)
    sds[0] = 20.0
    return logistic_target(X, y, sds)


def _cmd_estimate(args):
    samples = io.load_samples(args.samples)
    lam = _parse_lambda(args.lambda_spec)
    kernel_cfg = None
    if args.method in ("cf", "secf", "asecf"):
        if isinstance(lam, str):
            basis = enumerate_basis(samples.d, 0 if args.method == "cf" else args.order)
            lam = resolve_lengthscale(
                lam, samples, args.kernel, basis, integrand=args.integrand, nu=args.nu, seed=args.seed
            )
        kernel_cfg = KernelConfig(args.kernel, float(lam), args.nu)
    ncfg = NystromConfig(n0=_parse_n0(args.n0), cg_tolerance=args.cg_tol, seed=args.seed, use_cg=not args.direct)
    result = run_estimation(
        samples,
        args.integrand,
        args.method,
        kernel=args.kernel,
        lambda_spec=lam,
        nu=args.nu,
        order=args.order,
        nystrom=ncfg,
        seed=args.seed,
        direct=args.direct,
    )
    doc = io.estimate_document(
        result,
        n=samples.n,
        d=samples.d,
        kernel=kernel_cfg,
        basis_order=args.order if args.method not in ("mc", "cf") else (0 if args.method == "cf" else None),
        seed=args.seed,
        emit_weights=args.emit_weights,
    )
    _emit(doc, args.out)


def _cmd_sample(args):
    target = _build_target(args)
    sigma = None if args.sigma == "identity" else io.load_matrix(args.sigma)
    cfg = ChainConfig(
        sampler=args.sampler,
        step=args.step,
        n=args.n,
        burn_in=args.burn_in,
        seed=args.seed,
        sigma=sigma,
    )
    chain = mala_chain(target, cfg) if args.sampler == "mala" else ula_chain(target, cfg)
    # coordinate integrands (marginal posterior means) so the file is self-contained
    integrands = {f"x{i + 1}": chain.points[:, i] for i in range(target.dim)}
    out = SampleSet(points=chain.points, gradients=chain.gradients, integrands=integrands)
    io.write_samples(out, args.out)


def _cmd_benchmark(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    lam = _parse_lambda(args.lambda_spec)
    if args.benchmark == "gaussian":
        report = gaussian_benchmark(
            args.d,
            args.n,
            args.replicates,
            methods,
            args.seed,
            order=args.order,
            kernel=args.kernel,
            lambda_spec=lam,
            nu=args.nu,
        )
    else:
        target = _build_target(args)
        coord = args.integrand_coord
        if not 1 <= coord <= target.dim:
            raise InputError(f"--integrand-coord must lie in 1..{target.dim}")
        cfg = ChainConfig(
            sampler=args.sampler, step=args.step, n=args.n, burn_in=args.burn_in, seed=args.seed
        )
        report = chain_benchmark(
            target,
            cfg,
            methods,
            lambda pts: pts[:, coord - 1],
            args.gold,
            args.replicates,
            args.seed,
            order=args.order,
            kernel=args.kernel,
            lambda_spec=lam,
            nu=args.nu,
        )
    _emit(report.to_document(), args.out)


def _cmd_diagnose(args):
    samples = dedupe(io.load_samples(args.samples))
    if args.integrand not in samples.integrands:
        raise InputError(f"integrand {args.integrand!r} not found in {args.samples}")
    lam = _parse_lambda(args.lambda_spec)
    result = run_estimation(
        samples,
        args.integrand,
        "secf",
        kernel=args.kernel,
        lambda_spec=lam,
        nu=args.nu,
        order=args.order,
        seed=args.seed,
    )
    _emit(io.diagnostic_document(result.diagnostics), args.out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "estimate": _cmd_estimate,
        "sample": _cmd_sample,
        "benchmark": _cmd_benchmark,
        "diagnose": _cmd_diagnose,
    }
    try:
        handlers[args.command](args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
