"""End-to-end verification experiments.

Each experiment draws from streams keyed by ``(seed, experiment, part)``,
runs one or more statistical checks and returns a :class:`VerifyResult`
whose ``passed`` flag is the conjunction of its checks.  Experiments accept
keyword parameters; unknown ones raise :class:`ConfigError`.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import chains, diffusion
from .distributions import McmcConfig, gig_draws, gig_mcmc, inv_wishart_draws
from .errors import ConfigError, UsageError
from .jordan import Algebra, Kind
from .rng import stream
from .stats import ALPHA, TestReport, conditional_gig_check, energy_statistic, energy_test, ks_test


@dataclass
class Check:
    name: str
    passed: bool
    report: TestReport | None = None
    values: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"name": self.name, "passed": bool(self.passed), "values": self.values}
        if self.report is not None:
            d["report"] = self.report.to_dict()
        return d


@dataclass
class VerifyResult:
    which: str
    algebra: dict
    params: dict
    checks: list
    seconds: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, timing=False):
        d = {"which": self.which, "algebra": self.algebra, "params": self.params,
             "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}
        if timing:
            d["seconds"] = self.seconds
        return d

    def summary_lines(self):
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            extra = f" p={c.report.p_value:.4g}" if c.report is not None else ""
            vals = ", ".join(f"{k}={_short(v)}" for k, v in c.values.items())
            lines.append(f"[{tag}] {self.which}/{c.name}{extra} {vals}".rstrip())
        return lines


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)) and len(v) > 4:
        return "[...]"
    return str(v)


def _energy_check(name, a, b, rng, permutations, threshold=ALPHA):
    rep = energy_test(a, b, permutations=permutations, rng=rng)
    return Check(name, rep.p_value > threshold, rep)


def _mean_check(name, samples, target, k=3.0):
    x = np.asarray(samples, dtype=float)
    mean = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / math.sqrt(len(x))
    ok = bool(np.all(np.abs(mean - target) <= k * se))
    return Check(name, ok, None, {"mean": mean.tolist(), "se": se.tolist(),
                                   "target": np.broadcast_to(target, mean.shape).tolist()})


def _inv_gamma_cdf(p):
    """CDF of the inverse of ``Gamma(p, scale 2)``."""
    return sps.invgamma(p, scale=0.5).cdf


def inverse_wishart_mean(alg: Algebra, p):
    """``E[X^-1]`` for ``X ~ gamma_{p,e}``: ``e / (2 (p - dim/r))``."""
    return alg.identity / (2.0 * (p - alg.dim_over_rank))


def _require(alg, p, lower=None, upper=None, what="p"):
    if lower is not None and not p > lower:
        raise UsageError(f"{what} must exceed {lower:g} for {alg}, got {p:g}")
    if upper is not None and not p < upper:
        raise UsageError(f"{what} must be below {upper:g} for {alg}, got {p:g}")


def _dufresne_target_checks(alg, p, samples, rng, permutations, prefix):
    checks = []
    if alg.kind is Kind.REAL:
        checks.append(_mean_check(f"{prefix}mean", samples, inverse_wishart_mean(alg, p)))
        rep = ks_test(samples[:, 0], _inv_gamma_cdf(p))
        checks.append(Check(f"{prefix}ks_inverse_gamma", rep.p_value > ALPHA, rep))
    else:
        ref = inv_wishart_draws(alg, p, len(samples), rng)
        checks.append(_energy_check(f"{prefix}energy_inverse_wishart", samples, ref, rng,
                                    permutations))
    return checks


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def dufresne_discrete(alg, seed, p=None, replicas=None, steps=None, permutations=999,
                      mcmc=None):
    """``I_steps`` of the unscaled chain against the inverse Wishart law."""
    p = alg.wishart_threshold + 2.0 if p is None else p
    _require(alg, p, lower=alg.wishart_threshold)
    reps = replicas or (10000 if alg.kind is Kind.REAL else 3000)
    steps = steps or (400 if alg.kind is Kind.REAL else 200)
    cfg = McmcConfig.from_dict(mcmc)
    res = chains.dufresne_estimate(alg, p, steps, reps, stream(seed, "dufresne_discrete", "chain"),
                                   cfg)
    rng = stream(seed, "dufresne_discrete", "test")
    checks = _dufresne_target_checks(alg, p, res.samples, rng, permutations, "")
    tail = float(np.median(res.last_increment_norm))
    checks.append(Check("plateau", tail < 1e-8 and not res.diverged.any(), None,
                        {"median_last_increment": tail,
                         "diverged": int(res.diverged.sum())}))
    return checks, {"p": p, "replicas": reps, "steps": steps}


def dufresne_continuous(alg, seed, p=None, replicas=None, T=30.0, h=1e-3, discrete_steps=None,
                        permutations=999, mcmc=None):
    """``iota_T`` against the inverse Wishart law and against discrete ``I``."""
    p = alg.wishart_threshold + 2.0 if p is None else p
    _require(alg, p, lower=alg.wishart_threshold)
    reps = replicas or (5000 if alg.kind is Kind.REAL else 2000)
    res = diffusion.perpetuity_estimate(alg, p, T, h, reps,
                                        stream(seed, "dufresne_continuous", "sde"))
    rng = stream(seed, "dufresne_continuous", "test")
    checks = _dufresne_target_checks(alg, p, res.samples, rng, permutations, "")
    steps = discrete_steps or (400 if alg.kind is Kind.REAL else 200)
    disc = chains.dufresne_estimate(alg, p, steps, reps,
                                    stream(seed, "dufresne_continuous", "chain"),
                                    McmcConfig.from_dict(mcmc))
    checks.append(_energy_check("energy_vs_discrete", res.samples, disc.samples, rng,
                                permutations))
    tail = float(np.median(res.tail_norm))
    checks.append(Check("tail", tail < 1e-6, None, {"median_tail_norm": tail}))
    return checks, {"p": p, "replicas": reps, "T": T, "h": h, "discrete_steps": steps}


def intertwining(alg, seed, p=None, replicas=5000, a="both", permutations=999, mcmc=None):
    """Joint law of ``(Lambda_1, L_1)`` from an intertwined start (a = e and random)."""
    p = 2.0 if p is None else p
    cfg = McmcConfig.from_dict(mcmc)
    points = {"e": alg.identity,
              "random": alg.random_cone_element(stream(seed, "intertwining", "a"))}
    if a != "both":
        if a not in points:
            raise ConfigError("a must be 'e', 'random' or 'both'")
        points = {a: points[a]}
    checks = []
    for name, point in points.items():
        rng = stream(seed, "intertwining", name)
        lhs, rhs = chains.intertwining_experiment(alg, point, p, replicas, rng, cfg)
        checks.append(_energy_check(f"joint_energy_a_{name}", lhs, rhs, rng, permutations))
    return checks, {"p": p, "replicas": replicas, "a": {k: v.tolist() for k, v in points.items()}}


def _gig_reference(alg, p, lam, rng, cfg):
    e = alg.identity
    ref, _ = gig_draws(alg, p, alg.inv(lam), np.broadcast_to(e, lam.shape), len(lam), rng, cfg)
    return ref


def conditional_law(alg, seed, p=None, replicas=5000, steps=5, t=0.5, h=1e-3, bins=10,
                    tamper=0.0, continuous=True, mcmc=None):
    """``L | Lambda ~ GIG(p; Lambda^-1, e)`` after ``steps`` chain steps and at time ``t``.

    ``tamper`` shifts the parameter of the reference law (power check).
    """
    p = 1.0 if p is None else p
    cfg = McmcConfig.from_dict(mcmc)
    e = alg.identity
    checks = []
    rng = stream(seed, "conditional_law", "discrete")
    ell0, _ = gig_draws(alg, p, e, e, replicas, rng, cfg)
    w = chains.gig_increments(alg, p, 1, steps, replicas, rng, cfg)
    traj = chains.run_chain(alg, w, 1.0, ell0, e, record_stride=steps)
    lam, ell = traj.Lambda[-1], traj.L[-1]
    ref = _gig_reference(alg, p + tamper, lam, rng, cfg)
    rep = conditional_gig_check(alg, lam, ell, ref, bins=bins)
    checks.append(Check("discrete", rep.passed(), rep))
    if continuous:
        rng = stream(seed, "conditional_law", "continuous")
        ell0, _ = gig_draws(alg, p, e, e, replicas, rng, cfg)
        path = diffusion.simulate_hypo_bm(alg, p, t, h, replicas, rng, ell0, e)
        lam, ell = path.lam[-1], path.ell[-1]
        ref = _gig_reference(alg, p + tamper, lam, rng, cfg)
        rep = conditional_gig_check(alg, lam, ell, ref, bins=bins)
        checks.append(Check("continuous", rep.passed(), rep))
        if alg.kind is not Kind.REAL:
            rot = alg.random_rotation(rng)
            lam_r, ell_r = alg.rotate(lam, rot), alg.rotate(ell, rot)
            ref = _gig_reference(alg, p + tamper, lam_r, rng, cfg)
            rep = conditional_gig_check(alg, lam_r, ell_r, ref, bins=bins)
            checks.append(Check("continuous_rotated", rep.passed(), rep))
    return checks, {"p": p, "replicas": replicas, "steps": steps, "t": t, "h": h,
                    "bins": bins, "tamper": tamper}


def inversion(alg, seed, p=1.5, replicas=2000, a=None, b=None, permutations=999, mcmc=None):
    """Inverted ``GIG(p; a, b)`` draws against ``GIG(-p; b, a)`` draws."""
    a = alg.identity if a is None else np.asarray(a, float)
    b = 2.0 * alg.identity if b is None else np.asarray(b, float)
    cfg = McmcConfig.from_dict(mcmc)
    rng = stream(seed, "inversion", "draws")
    x, _ = gig_draws(alg, p, a, b, replicas, rng, cfg)
    y, _ = gig_draws(alg, -p, b, a, replicas, rng, cfg)
    check = _energy_check("energy", alg.inv(x), y, stream(seed, "inversion", "test"), permutations)
    return [check], {"p": p, "replicas": replicas, "a": a.tolist(), "b": b.tolist()}


def scaling_limit(alg, seed, p=None, replicas=2000, t=1.0, h=1e-3, n_scales=(4, 16, 64),
                  permutations=999, threshold=0.005, mcmc=None):
    """``Lambda^n_{floor(n t)}`` against ``lambda_t`` over increasing ``n``."""
    p = 1.0 if p is None else p
    cfg = McmcConfig.from_dict(mcmc)
    e = alg.identity
    sde = diffusion.simulate_hypo_bm(alg, p, t, h, replicas, stream(seed, "scaling_limit", "sde"),
                                     e, e).lam[-1]
    dists, last = [], None
    for n in n_scales:
        rng = stream(seed, "scaling_limit", "chain", int(n))
        k = int(math.floor(n * t))
        w = chains.gig_increments(alg, p, n, k, replicas, rng, cfg)
        last = chains.run_chain(alg, w, n, e, e, record_stride=k).Lambda[-1]
        dists.append(float(energy_statistic(last, sde)))
    rep = energy_test(last, sde, permutations, rng=stream(seed, "scaling_limit", "test"))
    checks = [Check(f"energy_n{n_scales[-1]}", rep.p_value > threshold, rep),
              Check("distance_decreasing", bool(np.all(np.diff(dists) < 0)), None,
                    {"n_scales": list(n_scales), "energy_distance": dists})]
    return checks, {"p": p, "replicas": replicas, "t": t, "h": h, "n_scales": list(n_scales)}


def lorentz_factorization(alg, seed, p=None, replicas=10000, t=1.0, h=1e-3, metric="euclidean"):
    """``y_t = exp(-2 b_t - 2 p t) xi_t``: normalization, law of ``b``, independence."""
    if alg.kind is not Kind.LORENTZ:
        raise UsageError("lorentz_factorization needs a lorentz algebra")
    p = 2.0 if p is None else p
    path = diffusion.simulate_hypo_bm(alg, p, t, h, replicas,
                                      stream(seed, "lorentz_factorization", "sde"),
                                      record_stride=max(1, int(round(t / h)) // 10),
                                      metric=metric)
    f = diffusion.lorentz_factorize(alg, path.y, path.t, p)
    b, R = f.b_plus_pt[-1], f.R[-1]
    n = len(b)
    se = b.std(ddof=1) / math.sqrt(n)
    var = float(b.var(ddof=1))
    corr = float(np.corrcoef(b, R)[0, 1])
    checks = [
        Check("form", f.form_error <= 1e-9, None,
              {"max_scaled_error": f.form_error, "max_abs_error": f.form_error_abs}),
        Check("b_mean", abs(b.mean()) <= 3 * se, None, {"mean": float(b.mean()), "se": se}),
        Check("b_variance", abs(var - t) <= 0.1 * t, None, {"variance": var, "t": t}),
        Check("b_R_correlation", abs(corr) <= 3 / math.sqrt(n), None,
              {"corr": corr, "se": 1 / math.sqrt(n)}),
    ]
    return checks, {"p": p, "replicas": replicas, "t": t, "h": h, "metric": metric}


def stationarity(alg, seed, p=None, p_small=None, replicas=3000, n_scale=16, T=1.0, h=1e-3,
                 permutations=999, mcmc=None):
    """Invariant laws of the chain ``Y``, of ``L^n`` and of ``ell``."""
    p = alg.wishart_threshold + 2.0 if p is None else p
    _require(alg, p, lower=alg.wishart_threshold)
    p_small = -(alg.wishart_threshold + 2.0) if p_small is None else p_small
    _require(alg, p_small, upper=-alg.wishart_threshold, what="p_small")
    cfg = McmcConfig.from_dict(mcmc)
    rng = stream(seed, "stationarity", "discrete")
    start, after = chains.stationarity_discrete(alg, p, replicas, rng, cfg)
    checks = [_energy_check("one_step", start, after, rng, permutations)]
    rng = stream(seed, "stationarity", "small_step")
    start, after = chains.stationarity_small_step(alg, p_small, n_scale, replicas, rng, cfg)
    checks.append(_energy_check("small_step", start, after, rng, permutations))
    rng = stream(seed, "stationarity", "continuous")
    ell0 = inv_wishart_draws(alg, -p_small, replicas, rng)
    path = diffusion.simulate_hypo_bm(alg, p_small, T, h, replicas, rng, ell0)
    fresh = inv_wishart_draws(alg, -p_small, replicas, rng)
    checks.append(_energy_check("continuous", path.ell[-1], fresh, rng, permutations))
    return checks, {"p": p, "p_small": p_small, "replicas": replicas, "n_scale": n_scale,
                    "T": T, "h": h}


def gaussian_limit(alg, seed, p=None, n=10000, replicas=100000, ks_replicas=10000,
                   real_replicas=10000, mcmc=None):
    """Large-``n`` behaviour of ``GIG(p; n e, n e)`` and the sampler check on the line.

    The mean of ``n log w`` has standard error ``sqrt(n / replicas)``, so
    ``replicas`` must be large for the mean check to resolve ``p e``.  The
    normality tests use the first ``ks_replicas`` draws: ``sqrt(n) log w`` is
    shifted by ``p / sqrt(n)``, which KS detects at ``10^5`` draws.
    """
    from .jordan import make_algebra

    p = 1.0 if p is None else p
    cfg = McmcConfig.from_dict(mcmc)
    checks = []
    # Metropolis on the real line against the exact sampler
    real = make_algebra("real")
    rng = stream(seed, "gaussian_limit", "real")
    mc = gig_mcmc(real, p, 1.0, 1.0, real_replicas, 1, cfg, rng).samples.reshape(-1)
    exact, _ = gig_draws(real, p, real.identity, real.identity, real_replicas, rng)
    rep = ks_test(mc, exact[:, 0])
    checks.append(Check("real_mcmc_vs_exact", rep.p_value > ALPHA, rep))
    # Gaussian limit in trace-orthonormal coordinates
    rng = stream(seed, "gaussian_limit", "large_n")
    ne = n * alg.identity
    w, res = gig_draws(alg, p, ne, ne, replicas, rng, cfg)
    basis = alg.p_basis("trace")
    z = alg.inner(alg.log(w)[:, None, :], basis[None]) * math.sqrt(n)
    for i in range(alg.dim):
        rep = ks_test(z[:ks_replicas, i], sps.norm.cdf)
        checks.append(Check(f"ks_coordinate_{i}", rep.p_value > ALPHA, rep))
    target = alg.inner(p * alg.identity, basis)
    checks.append(_mean_check("scaled_mean", math.sqrt(n) * z, target))
    meta = {"p": p, "n": n, "replicas": replicas, "ks_replicas": ks_replicas,
            "real_replicas": real_replicas}
    if res is not None:
        meta["acceptance"] = float(res.acceptance)
    return checks, meta


def lyapunov(alg, seed, p=None, T=50.0, h=1e-2, replicas=200, rel_tol=0.15, abs_tol=0.1):
    """Decay rate of ``(g_t^*)^-1 e`` at ``p`` and at the critical value ``dim/r - 1``."""
    p = alg.wishart_threshold + 1.0 if p is None else p
    res = diffusion.lyapunov_probe(alg, p, T, replicas, stream(seed, "lyapunov", "p"), h)
    crit = diffusion.lyapunov_probe(alg, alg.wishart_threshold, T, replicas,
                                    stream(seed, "lyapunov", "critical"), h)
    pred = res.predicted
    checks = [
        Check("exponent", abs(res.exponent - pred) <= rel_tol * abs(pred), None,
              {"estimate": res.exponent, "se": res.se, "predicted": pred}),
        Check("critical", abs(crit.exponent) <= abs_tol, None,
              {"p_critical": alg.wishart_threshold, "estimate": crit.exponent, "se": crit.se}),
    ]
    return checks, {"p": p, "T": T, "h": h, "replicas": replicas}


EXPERIMENTS = {
    "dufresne_discrete": dufresne_discrete,
    "dufresne_continuous": dufresne_continuous,
    "intertwining": intertwining,
    "conditional_law": conditional_law,
    "inversion": inversion,
    "scaling_limit": scaling_limit,
    "lorentz_factorization": lorentz_factorization,
    "stationarity": stationarity,
    "gaussian_limit": gaussian_limit,
    "lyapunov": lyapunov,
}


def run(which, alg: Algebra, seed, **params) -> VerifyResult:
    """Run experiment ``which`` on ``alg``; ``params`` override its defaults."""
    if which not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {which!r}; choose from {sorted(EXPERIMENTS)}")
    fn = EXPERIMENTS[which]
    allowed = set(fn.__code__.co_varnames[2:fn.__code__.co_argcount])
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown parameters for {which}: {sorted(unknown)}")
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        checks, used = fn(alg, seed, **params)
    return VerifyResult(which, alg.to_config(), used, checks, time.perf_counter() - t0)
