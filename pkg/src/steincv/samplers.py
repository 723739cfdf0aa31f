"""Sample containers, duplicate filtering, and Langevin-type MCMC chains.

Both chains use the proposal/update mean x + (h^2/2) * Sigma * grad(log p)(x).
MALA applies a Metropolis-Hastings correction with the asymmetric Gaussian
proposal density; ULA applies none and is therefore biased, which the
downstream estimators tolerate.  Chains are fully determined by their seed.
"""

from dataclasses import dataclass, field

import numpy as np
import numpy.linalg as la
from scipy.linalg import cholesky, solve_triangular

from .errors import InputError, NumericalError

_DIVERGENCE_RADIUS = 1e8


@dataclass
class SampleSet:
    """Points, score gradients, and named integrand values for n samples.

    ``integrands`` maps a name to an n-vector of integrand evaluations; the
    map may be empty (e.g. fresh chain output before integrands are attached).
    """

    points: np.ndarray
    gradients: np.ndarray
    integrands: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.gradients = np.atleast_2d(np.asarray(self.gradients, dtype=float))
        if self.points.shape != self.gradients.shape:
            raise InputError(
                f"points {self.points.shape} and gradients {self.gradients.shape} disagree"
            )
        if not np.isfinite(self.points).all() or not np.isfinite(self.gradients).all():
            raise InputError("sample points and gradients must be finite")
        cleaned = {}
        for name, vals in self.integrands.items():
            vals = np.asarray(vals, dtype=float).reshape(-1)
            if vals.shape[0] != self.n:
                raise InputError(
                    f"integrand {name!r} has {vals.shape[0]} rows, expected {self.n}"
                )
            if not np.isfinite(vals).all():
                raise InputError(f"integrand {name!r} contains non-finite values")
            cleaned[name] = vals
        self.integrands = cleaned

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def subset(self, idx):
        """New SampleSet restricted to the given row indices (order kept)."""
        idx = np.asarray(idx)
        return SampleSet(
            points=self.points[idx],
            gradients=self.gradients[idx],
            integrands={k: v[idx] for k, v in self.integrands.items()},
        )


def dedupe(samples):
    """Drop exactly-repeated point rows, keeping the first occurrence.

    Metropolis-Hastings rejections copy the previous state verbatim, so
    duplicates are detected by exact equality; near-neighbours are kept.
    """
    _, first = np.unique(samples.points, axis=0, return_index=True)
    if first.shape[0] == samples.n:
        return samples
    return samples.subset(np.sort(first))


@dataclass
class ChainConfig:
    """Settings for a Langevin chain.

    ``sigma`` is the d x d symmetric positive-definite preconditioner
    (None means identity), ``step`` the step size h, and ``initial`` the
    starting point (None means the origin).
    """

    sampler: str = "mala"
    step: float = 0.5
    n: int = 1000
    burn_in: int = 0
    seed: int = 0
    sigma: np.ndarray = None
    initial: np.ndarray = None

    def __post_init__(self):
        if self.sampler not in ("mala", "ula"):
            raise InputError(f"sampler must be 'mala' or 'ula', got {self.sampler!r}")
        if not self.step > 0:
            raise InputError(f"step size must be positive, got {self.step!r}")
        if self.n < 1 or self.burn_in < 0:
            raise InputError("need n >= 1 and burn_in >= 0")


def _prepare(target, cfg):
    d = target.dim
    x0 = np.zeros(d) if cfg.initial is None else np.asarray(cfg.initial, dtype=float)
    if x0.shape != (d,):
        raise InputError(f"initial point has shape {x0.shape}, expected ({d},)")
    if cfg.sigma is None:
        sigma = np.eye(d)
    else:
        sigma = np.asarray(cfg.sigma, dtype=float)
        if sigma.shape != (d, d) or not np.allclose(sigma, sigma.T):
            raise InputError("sigma must be a symmetric d x d matrix")
    try:
        root = cholesky(sigma, lower=True)
    except la.LinAlgError as exc:
        raise InputError("sigma preconditioner is not positive definite") from exc
    return x0, sigma, root


def mala_chain(target, cfg):
    """Metropolis-adjusted Langevin chain; returns retained states + scores.

    The proposal is N(x + (h^2/2) Sigma u(x), h^2 Sigma) and acceptance uses
    the full Metropolis-Hastings ratio with the asymmetric proposal density.
    Gradients are recorded at every retained state without re-evaluation.
    """
    x, sigma, root = _prepare(target, cfg)
    h = cfg.step
    rng = np.random.default_rng(cfg.seed)
    logp = target.log_density(x)
    if not np.isfinite(logp):
        raise InputError("log density is not finite at the initial point")
    grad = np.asarray(target.gradient(x), dtype=float)

    def proposal_logq(to, frm, grad_frm):
        mean = frm + 0.5 * h**2 * (sigma @ grad_frm)
        w = solve_triangular(root, to - mean, lower=True)
        return -0.5 * (w @ w) / h**2

    total = cfg.n + cfg.burn_in
    points = np.empty((total, target.dim))
    grads = np.empty((total, target.dim))
    for i in range(total):
        xi = rng.standard_normal(target.dim)
        prop = x + 0.5 * h**2 * (sigma @ grad) + h * (root @ xi)
        logp_prop = target.log_density(prop)
        if np.isfinite(logp_prop):
            grad_prop = np.asarray(target.gradient(prop), dtype=float)
            log_alpha = (
                logp_prop
                + proposal_logq(x, prop, grad_prop)
                - logp
                - proposal_logq(prop, x, grad)
            )
            accept = np.log(rng.random()) < log_alpha
        else:
            rng.random()  # keep the draw sequence aligned on rejected overflows
            accept = False
        if accept:
            x, logp, grad = prop, logp_prop, grad_prop
        points[i] = x
        grads[i] = grad
    keep = slice(cfg.burn_in, total)
    return SampleSet(points=points[keep], gradients=grads[keep])


def ula_chain(target, cfg, noise=None):
    """Unadjusted Langevin chain: drift plus N(0, h^2 Sigma) noise, no MH step.

    ``noise`` optionally overrides the Gaussian increments with an
    (n + burn_in, d) array; passing zeros exposes the bare drift map.
    Aborts if the state norm exceeds 1e8 (divergence).
    """
    x, sigma, root = _prepare(target, cfg)
    h = cfg.step
    rng = np.random.default_rng(cfg.seed)
    total = cfg.n + cfg.burn_in
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (total, target.dim):
            raise InputError(f"noise override must have shape ({total}, {target.dim})")
    points = np.empty((total, target.dim))
    grads = np.empty((total, target.dim))
    grad = np.asarray(target.gradient(x), dtype=float)
    for i in range(total):
        eps = noise[i] if noise is not None else h * (root @ rng.standard_normal(target.dim))
        x = x + 0.5 * h**2 * (sigma @ grad) + eps
        if la.norm(x) > _DIVERGENCE_RADIUS:
            raise NumericalError(f"ULA diverged at step {i}: |x| > {_DIVERGENCE_RADIUS:.0e}")
        grad = np.asarray(target.gradient(x), dtype=float)
        points[i] = x
        grads[i] = grad
    keep = slice(cfg.burn_in, total)
    return SampleSet(points=points[keep], gradients=grads[keep])
