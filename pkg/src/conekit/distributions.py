"""GIG, Wishart and inverse-Wishart laws on symmetric cones.

Densities are unnormalized and taken with respect to Lebesgue measure in the
algebra's coordinates.  GIG laws are sampled by a batched random-walk
Metropolis sampler in log coordinates (exactly on the real line); Wishart laws have exact
samplers on every supported algebra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DomainError, UsageError
from .jordan import Algebra, ConeElement, Kind

ACCEPT_LOW, ACCEPT_HIGH = 0.05, 0.95


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------


def _cone_coords(alg, v, name):
    if isinstance(v, ConeElement):
        if v.algebra != alg:
            raise UsageError(f"{name} belongs to {v.algebra}, expected {alg}")
        v = v.coords
    c = np.array(v, dtype=float)
    if c.shape[-1:] != (alg.dim,):
        raise UsageError(f"{name} must have {alg.dim} coordinates")
    if not np.all(alg.in_cone(c)):
        raise DomainError(f"{name} must lie in the open cone")
    c.flags.writeable = False
    return c


@dataclass(frozen=True, eq=False)
class GigParams:
    """Parameters of ``GIG(p; a, b)``.  ``a`` and ``b`` may be stacked
    ``(k, dim)`` arrays, giving one target per row."""

    algebra: Algebra
    p: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "a", _cone_coords(self.algebra, self.a, "a"))
        object.__setattr__(self, "b", _cone_coords(self.algebra, self.b, "b"))

    @classmethod
    def standard(cls, alg, p, n=1.0):
        """``GIG(p; n e, n e)``."""
        return cls(alg, p, n * alg.identity, n * alg.identity)

    def inverted(self):
        """Parameters of the image law under ``x -> x^-1``."""
        return GigParams(self.algebra, -self.p, self.b, self.a)


@dataclass(frozen=True, eq=False)
class WishartParams:
    """Parameters of the Wishart law ``gamma_{p, a}`` (needs ``p > dim/r - 1``)."""

    algebra: Algebra
    p: float
    a: np.ndarray = None

    def __post_init__(self):
        alg = self.algebra
        p = float(self.p)
        if not p > alg.wishart_threshold:
            raise DomainError(f"Wishart law needs p>\\dim E/r-1 = {alg.wishart_threshold:g}; got p={p:g}")
        object.__setattr__(self, "p", p)
        a = alg.identity if self.a is None else self.a
        object.__setattr__(self, "a", _cone_coords(alg, a, "a"))


@dataclass(frozen=True)
class McmcConfig:
    """Random-walk Metropolis settings.

    ``step_size=None`` starts from a curvature-based guess; the step is tuned
    toward ``adapt_target`` during burn-in and frozen afterwards.  ``chains``
    is the number of parallel chains; ``None`` runs one chain per requested
    sample so that returned draws are independent.
    """

    step_size: float | None = None
    burn_in: int = 5000
    thin: int = 10
    adapt_target: float = 0.3
    chains: int | None = None

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise UsageError("step_size must be positive")
        if self.burn_in < 0 or self.thin < 1:
            raise UsageError("burn_in must be >= 0 and thin >= 1")
        if not 0 < self.adapt_target < 1:
            raise UsageError("adapt_target must lie in (0, 1)")
        if self.chains is not None and self.chains < 1:
            raise UsageError("chains must be >= 1")

    @classmethod
    def from_dict(cls, d):
        return cls(**(d or {}))


@dataclass
class McmcResult:
    """Draws plus sampler diagnostics.

    ``samples`` has shape ``(count, dim)`` for :func:`gig_sample` and
    ``(keep, chains, dim)`` for :func:`gig_mcmc`.
    """

    samples: np.ndarray
    acceptance: float
    step_size: np.ndarray
    warnings: list = field(default_factory=list)

    def metadata(self):
        return {"acceptance": float(self.acceptance),
                "step_size_median": float(np.median(self.step_size)),
                "warnings": list(self.warnings)}


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------


def _logdet_and_mask(alg, x):
    lam = alg.eigvals(x)
    ok = lam.min(axis=-1) > 1e-12 * np.maximum(1.0, np.abs(lam).max(axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        logdet = np.sum(np.log(np.where(ok[..., None], lam, 1.0)), axis=-1)
    return logdet, ok


def gig_logpdf(alg, p, a, b, x):
    """Batched unnormalized GIG log-density; ``-inf`` outside the cone.

    ``(p - dim/r) log det x - (<a, x> + <b, x^-1>) / 2``.
    """
    x = np.asarray(x, dtype=float)
    logdet, ok = _logdet_and_mask(alg, x)
    safe = np.where(ok[..., None], x, alg.identity)
    val = (p - alg.dim_over_rank) * logdet - 0.5 * (alg.inner(a, safe) + alg.inner(b, alg.inv(safe)))
    return np.where(ok, val, -np.inf)


def gig_logdensity_lebesgue(params: GigParams, x) -> float:
    """Unnormalized log-density of ``GIG(p; a, b)`` at ``x`` (``-inf`` off the cone)."""
    alg = params.algebra
    if isinstance(x, ConeElement):
        x = x.coords
    return float(gig_logpdf(alg, params.p, params.a, params.b, x))


def wishart_logpdf(alg, p, x, a=None):
    """Normalized log-density of ``gamma_{p,a}`` w.r.t. coordinate Lebesgue measure."""
    a = alg.identity if a is None else np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    logdet, ok = _logdet_and_mask(alg, x)
    safe = np.where(ok[..., None], x, alg.identity)
    loga = np.sum(np.log(alg.eigvals(a)), axis=-1)
    val = (-alg.rank * p * math.log(2.0) - p * loga - multivariate_gamma(p, alg)
           + (p - alg.dim_over_rank) * logdet - 0.5 * alg.inner(alg.inv(a), safe)
           + alg.coordinate_log_volume())
    return np.where(ok, val, -np.inf)


def multivariate_gamma(p, alg: Algebra) -> float:
    """``log Gamma_Omega(p) = (dim-r)/2 log(2 pi) + sum_j log Gamma(p - (j-1) d/2)``.

    The constant refers to Lebesgue measure built from the trace inner product.
    """
    r, d = alg.rank, alg.degree
    args = [p - (j - 1) * d / 2 for j in range(1, r + 1)]
    if min(args) <= 0:
        raise DomainError(f"multivariate gamma has a pole or is undefined at p={p:g} "
                          f"(needs p>\\dim E/r-1 = {alg.wishart_threshold:g})")
    return 0.5 * (alg.dim - r) * math.log(2 * math.pi) + float(sum(special.gammaln(args)))


# ---------------------------------------------------------------------------
# exact samplers
# ---------------------------------------------------------------------------


def gig_scalar_exact(p, a, b, size, rng):
    """Exact scalar GIG draws, density ``~ x^(p-1) exp(-(a x + b/x)/2)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise UsageError("scalar GIG needs a > 0 and b > 0")
    # scipy draws per element when parameters are arrays, so collapse constants
    if a.size and np.all(a == a.flat[0]):
        a = a.flat[0]
    if b.size and np.all(b == b.flat[0]):
        b = b.flat[0]
    if np.ndim(a) or np.ndim(b):
        a, b = np.broadcast_arrays(a, b)
    return stats.geninvgauss.rvs(p, np.sqrt(a * b), scale=np.sqrt(b / a), size=size,
                                 random_state=rng)


def gig_sample_scalar_exact(p, a, b, rng_stream) -> float:
    """One exact draw of the scalar ``GIG(p; a, b)``."""
    return float(gig_scalar_exact(p, float(a), float(b), None, rng_stream))


def _uniform_sphere(rng, count, k):
    z = rng.standard_normal((count, k))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _lorentz_wishart_standard(alg, p, count, rng):
    """``gamma_{p,e}`` on the Lorentz cone from its eigenvalue law."""
    alpha = p - alg.dim_over_rank
    d = alg.degree
    u = np.empty(count)
    filled = 0
    while filled < count:
        need = count - filled
        cand = rng.beta(alpha + 1, alpha + 1, size=2 * need + 16)
        keep = cand[rng.uniform(size=cand.size) < np.abs(1 - 2 * cand) ** d][:need]
        u[filled:filled + keep.size] = keep
        filled += keep.size
    s = rng.gamma(2 * alpha + d + 2, 2.0, size=count)
    lam1, lam2 = s * u, s * (1 - u)
    direction = _uniform_sphere(rng, count, alg.dim - 1)
    x = np.empty((count, alg.dim))
    x[:, 0] = 0.5 * (lam1 + lam2)
    x[:, 1:] = 0.5 * (lam1 - lam2)[:, None] * direction
    return x


def _bartlett_standard(alg, p, count, rng):
    """``gamma_{p,e}`` on symmetric matrices: Wishart(2p, I) by Bartlett."""
    r = alg.rank
    nu = 2 * p
    low = np.zeros((count, r, r))
    idx = np.arange(r)
    low[:, idx, idx] = np.sqrt(rng.gamma((nu - idx) / 2, 2.0, size=(count, r)))
    il, jl = np.tril_indices(r, -1)
    low[:, il, jl] = rng.standard_normal((count, il.size))
    return alg.from_matrix(low @ np.swapaxes(low, 1, 2))


def wishart_draws(alg, p, count, rng, a=None):
    """``count`` draws of ``gamma_{p,a}`` as a ``(count, dim)`` array."""
    params = WishartParams(alg, p, a)
    if alg.kind is Kind.REAL:
        x = rng.gamma(params.p, 2.0, size=(count, 1))
    elif alg.kind is Kind.SYM_REAL:
        x = _bartlett_standard(alg, params.p, count, rng)
    else:
        x = _lorentz_wishart_standard(alg, params.p, count, rng)
    if np.allclose(params.a, alg.identity):
        return x
    return alg.quad_apply(alg.sqrt(params.a), x)


def wishart_sample(params: WishartParams, count, rng_stream):
    """List of ``count`` :class:`ConeElement` draws from ``gamma_{p,a}``."""
    x = wishart_draws(params.algebra, params.p, count, rng_stream, params.a)
    return [ConeElement(params.algebra, row) for row in x]


def inv_wishart_draws(alg, p, count, rng, a=None):
    return alg.inv(wishart_draws(alg, p, count, rng, a))


def inv_wishart_sample(params: WishartParams, count, rng_stream):
    """Draws from the image of ``gamma_{p,a}`` under inversion."""
    x = inv_wishart_draws(params.algebra, params.p, count, rng_stream, params.a)
    return [ConeElement(params.algebra, row) for row in x]


# ---------------------------------------------------------------------------
# Metropolis-Hastings
# ---------------------------------------------------------------------------


def gig_start(alg, a, b):
    """The point solving ``P(x) a = b``: ``P(a^-1/2) (P(a^1/2) b)^1/2``."""
    ra = alg.sqrt(a)
    return alg.quad_apply(alg.inv(ra), alg.sqrt(alg.quad_apply(ra, b)))


def _log_sinhc(x):
    """``log(sinh(x) / x)`` for ``x >= 0``, stable at both ends."""
    x = np.abs(x)
    small = x < 1e-3
    xs = np.where(small, 1.0, x)
    big = xs + np.log1p(-np.exp(-2.0 * xs)) - math.log(2.0) - np.log(xs)
    return np.where(small, x * x / 6.0, big)


def _log_target_z(alg, p, c, z):
    """Log-density of ``z = log y`` when ``y ~ GIG(p; c, c)``.

    Lebesgue density of ``y`` times the Jacobian of ``exp``, which acts on
    the Peirce space ``E_ij`` of ``z`` by the divided difference
    ``(e^li - e^lj) / (li - lj)`` and on ``E_ii`` by ``e^li``.
    """
    lam, frame = alg.eigh(z)
    cf = alg.inner(c[..., None, :], frame)
    val = (p - alg.dim_over_rank + 1.0) * lam.sum(axis=-1) - np.sum(np.cosh(lam) * cf, axis=-1)
    if alg.rank > 1 and alg.degree > 0:
        i, j = np.triu_indices(alg.rank, 1)
        li, lj = lam[..., i], lam[..., j]
        val = val + alg.degree * np.sum(0.5 * (li + lj) + _log_sinhc(0.5 * (li - lj)), axis=-1)
    return val


def gig_mcmc(alg, p, a, b, chains, keep, cfg: McmcConfig, rng):
    """Run ``chains`` parallel Metropolis chains targeting ``GIG(p; a, b)``.

    With ``x0`` solving ``P(x0) a = b`` and ``s = x0^(1/2)``, the variable
    ``y = P(s^-1) x`` follows ``GIG(p; c, c)`` with ``c = P(s) a``.  Each chain
    runs a Gaussian random walk on ``z = log y`` in trace-orthonormal
    coordinates, so the sampler is insensitive to the location and scale of
    the target.  ``a`` and ``b`` broadcast to ``(chains, dim)`` so every chain
    may have its own target.  Returns an :class:`McmcResult` with samples of
    shape ``(keep, chains, dim)``: draw ``k`` is taken ``thin`` steps after
    draw ``k - 1``, the first one right after burn-in.
    """
    a = np.broadcast_to(np.asarray(a, dtype=float), (chains, alg.dim))
    b = np.broadcast_to(np.asarray(b, dtype=float), (chains, alg.dim))
    s = alg.sqrt(gig_start(alg, a, b))
    c = alg.quad_apply(s, a)
    basis = alg.p_basis("trace")
    z = np.zeros((chains, alg.dim))
    logp = _log_target_z(alg, p, c, z)
    if cfg.step_size is None:
        # inverse square root of the curvature at z = 0
        curv = 1.0 + alg.eigvals(c).max(axis=-1)
        log_step = np.log(2.38 / np.sqrt(alg.dim * curv))
    else:
        log_step = np.full(chains, math.log(cfg.step_size))

    def step(z, logp, log_step):
        prop = z + np.exp(log_step)[:, None] * (rng.standard_normal(z.shape) @ basis)
        lp = _log_target_z(alg, p, c, prop)
        with np.errstate(invalid="ignore"):
            acc = np.log(rng.uniform(size=chains)) < lp - logp
        z = np.where(acc[:, None], prop, z)
        logp = np.where(acc, lp, logp)
        return z, logp, acc

    for k in range(cfg.burn_in):
        z, logp, acc = step(z, logp, log_step)
        log_step = log_step + (acc - cfg.adapt_target) / (k + 1) ** 0.6

    out = np.empty((keep, chains, alg.dim))
    n_acc = np.zeros(chains)
    n_prop = 0
    for j in range(keep):
        for _ in range(cfg.thin if j > 0 else 1):
            z, logp, acc = step(z, logp, log_step)
            n_acc += acc
            n_prop += 1
        out[j] = alg.quad_apply(s, alg.exp(z))
    rate = float(n_acc.sum() / (n_prop * chains))
    notes = []
    if not ACCEPT_LOW <= rate <= ACCEPT_HIGH:
        notes.append(f"acceptance rate {rate:.3f} outside [{ACCEPT_LOW}, {ACCEPT_HIGH}]")
    return McmcResult(out, rate, np.exp(log_step), notes)


def gig_draws(alg, p, a, b, count, rng, cfg: McmcConfig | None = None):
    """``count`` draws of ``GIG(p; a, b)`` as a ``(count, dim)`` array plus
    the sampler result (``None`` for the exact real-line sampler).

    ``a`` and ``b`` may be ``(count, dim)`` to give each draw its own target.
    """
    if alg.kind is Kind.REAL:
        av = np.broadcast_to(np.asarray(a, dtype=float)[..., 0], (count,))
        bv = np.broadcast_to(np.asarray(b, dtype=float)[..., 0], (count,))
        return gig_scalar_exact(p, av, bv, count, rng)[:, None], None
    cfg = cfg or McmcConfig()
    per_row = np.ndim(a) == 2 or np.ndim(b) == 2
    chains = count if (cfg.chains is None or per_row) else min(cfg.chains, count)
    keep = -(-count // chains)
    res = gig_mcmc(alg, p, a, b, chains, keep, cfg, rng)
    res.samples = res.samples.reshape(-1, alg.dim)[:count]
    for msg in res.warnings:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return res.samples, res


def gig_sample(params: GigParams, count, cfg: McmcConfig | None, rng_stream) -> McmcResult:
    """Sample ``GIG(p; a, b)``; ``result.samples`` has shape ``(count, dim)``.

    On the real line the exact sampler is used and the result carries
    acceptance 1.
    """
    if count < 1:
        raise UsageError("count must be >= 1")
    alg = params.algebra
    x, res = gig_draws(alg, params.p, params.a, params.b, count, rng_stream, cfg)
    if res is None:
        return McmcResult(x, 1.0, np.zeros(0), [])
    return res


def as_elements(alg, samples):
    return [ConeElement(alg, row) for row in np.asarray(samples)]


def wishart_normalization(alg, p, count, rng, df=5.0, inflate=1.5):
    """Importance-sampling estimate of the integral of the Wishart density.

    A multivariate t proposal (in trace-orthonormal coordinates) centred at the
    mean ``2p e`` is used.  Returns ``(estimate, standard_error)``.
    """
    basis = alg.p_basis()
    scale = math.sqrt(4 * p) * inflate
    center = 2 * p * alg.identity
    z = stats.multivariate_t.rvs(loc=np.zeros(alg.dim), shape=np.eye(alg.dim) * scale ** 2,
                                 df=df, size=count, random_state=rng).reshape(count, alg.dim)
    x = center + z @ basis
    logq = stats.multivariate_t.logpdf(z, loc=np.zeros(alg.dim), shape=np.eye(alg.dim) * scale ** 2,
                                       df=df) + alg.coordinate_log_volume()
    w = np.exp(wishart_logpdf(alg, p, x) - logq)
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(count))
