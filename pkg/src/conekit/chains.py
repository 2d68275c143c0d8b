"""Discrete-time processes ``L``, ``Lambda`` and ``I`` on a symmetric cone.

With increments ``w_k`` i.i.d. ``GIG(p; n e, n e)`` (``n = 1`` for the
unscaled chain)::

    L_{k+1}      = P(w_{k+1}) L_k + w_{k+1} / n
    Lambda_{k+1} = P(w_{k+1} + L_k^-1 / n) Lambda_k
    I_{k+1}      = I_k + P(w_1^-1) ... P(w_k^-1) (w_{k+1}^-1) / n

The unscaled chain starts from ``L_0 = 0`` with ``Lambda_1 = e``; the scaled
chain starts from user-supplied ``ell0, lambda0`` in the cone.  Everything is
batched over replicas: arrays carry a leading replica axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import McmcConfig, gig_draws, inv_wishart_draws
from .errors import ConeMembershipError, UsageError
from .jordan import Algebra, Kind

DIVERGENCE_GUARD = 1e12


# ---------------------------------------------------------------------------
# increments
# ---------------------------------------------------------------------------


def gig_increments(alg, p, n_scale, steps, reps, rng, cfg: McmcConfig | None = None):
    """``(steps, reps, dim)`` array of i.i.d. ``GIG(p; n e, n e)`` draws.

    Off the real line a pool of parallel Metropolis chains produces the draws,
    which are then shuffled so that a replica's consecutive increments come
    from unrelated chains and times.
    """
    total = steps * reps
    e = n_scale * alg.identity
    if alg.kind is Kind.REAL:
        x, _ = gig_draws(alg, p, e, e, total, rng)
        return x.reshape(steps, reps, alg.dim)
    cfg = cfg or McmcConfig()
    if cfg.chains is None:
        cfg = McmcConfig(cfg.step_size, cfg.burn_in, cfg.thin, cfg.adapt_target, min(reps, total))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        x, res = gig_draws(alg, p, e, e, total, rng, cfg)
    x = x[rng.permutation(total)]
    return x.reshape(steps, reps, alg.dim)


# ---------------------------------------------------------------------------
# chain state and stepping
# ---------------------------------------------------------------------------


@dataclass
class ChainState:
    """Batched chain state; arrays have a leading replica axis.

    ``M`` is the running operator ``P(w_1^-1) ... P(w_k^-1)``; its inverse
    (transposed) is ``P(w_k) ... P(w_1)``.
    """

    step: int
    L: np.ndarray
    Lambda: np.ndarray | None
    I: np.ndarray
    M: np.ndarray
    n_scale: float = 1.0
    scaled: bool = False

    @classmethod
    def initial(cls, alg, reps, n_scale=1.0, ell0=None, lambda0=None):
        """Unscaled start ``L_0 = 0`` when ``ell0`` is None, scaled start otherwise."""
        zero = np.zeros((reps, alg.dim))
        eye = np.broadcast_to(np.eye(alg.dim), (reps, alg.dim, alg.dim)).copy()
        if ell0 is None:
            return cls(0, zero, None, zero.copy(), eye, float(n_scale), False)
        ell0 = np.broadcast_to(np.asarray(ell0, dtype=float), (reps, alg.dim)).copy()
        lam0 = alg.identity if lambda0 is None else lambda0
        lam0 = np.broadcast_to(np.asarray(lam0, dtype=float), (reps, alg.dim)).copy()
        if not (alg.in_cone(ell0).all() and alg.in_cone(lam0).all()):
            raise UsageError("ell0 and lambda0 must lie in the open cone")
        return cls(0, ell0, lam0, zero.copy(), eye, float(n_scale), True)

    @property
    def W_op(self):
        """Running product ``P(w_k) ... P(w_1)`` (adjoint of ``P(w_1)...P(w_k)``)."""
        return np.linalg.inv(self.M)


def chain_step(alg: Algebra, state: ChainState, w) -> ChainState:
    """Advance every replica by one step with increments ``w`` (``(reps, dim)``)."""
    w = np.asarray(w, dtype=float)
    if not alg.in_cone(w).all():
        raise UsageError("increments must lie in the open cone")
    n = state.n_scale
    w_inv = alg.inv(w)
    L_new = alg.quad_apply(w, state.L) + w / n
    if state.Lambda is None:
        lam_new = np.broadcast_to(alg.identity, w.shape).copy()
    else:
        lam_new = alg.quad_apply(w + alg.inv(state.L) / n, state.Lambda)
    I_new = state.I + np.einsum("rij,rj->ri", state.M, w_inv) / n
    M_new = state.M @ alg.quad_matrix(w_inv)
    step = state.step + 1
    for name, val in (("L", L_new), ("Lambda", lam_new)):
        if not (alg.eigvals(val).min(axis=-1) > 0).all():
            raise ConeMembershipError(f"{name} left the cone at step {step}", step=step)
    return ChainState(step, L_new, lam_new, I_new, M_new, n, state.scaled)


@dataclass
class Trajectory:
    """Recorded states: arrays of shape ``(records, reps, dim)``."""

    steps: np.ndarray
    L: np.ndarray
    Lambda: np.ndarray
    I: np.ndarray
    increments: np.ndarray
    n_scale: float
    ell0: np.ndarray | None = None
    lambda0: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def run_chain(alg, increments, n_scale=1.0, ell0=None, lambda0=None, record_stride=1):
    """Run the chain on given increments ``(steps, reps, dim)`` and record states.

    Step 0 is recorded too; for the unscaled chain ``Lambda_0`` is undefined
    and recorded as NaN.
    """
    increments = np.asarray(increments, dtype=float)
    steps, reps, _ = increments.shape
    if steps < 1:
        raise UsageError("steps must be >= 1")
    state = ChainState.initial(alg, reps, n_scale, ell0, lambda0)
    rec_steps, Ls, Lams, Is = [], [], [], []

    def record(s):
        rec_steps.append(s.step)
        Ls.append(s.L.copy())
        Lams.append(np.full_like(s.L, np.nan) if s.Lambda is None else s.Lambda.copy())
        Is.append(s.I.copy())

    record(state)
    for k in range(steps):
        state = chain_step(alg, state, increments[k])
        if state.step % record_stride == 0 or state.step == steps:
            record(state)
    return Trajectory(np.array(rec_steps), np.stack(Ls), np.stack(Lams), np.stack(Is),
                      increments, n_scale,
                      None if ell0 is None else np.asarray(ell0, float),
                      None if lambda0 is None else np.asarray(lambda0, float))


def simulate_chain(alg, p, steps, reps, rng, n_scale=1, ell0=None, lambda0=None,
                   cfg: McmcConfig | None = None, record_stride=1):
    """Draw increments and run the chain."""
    w = gig_increments(alg, p, n_scale, steps, reps, rng, cfg)
    return run_chain(alg, w, n_scale, ell0, lambda0, record_stride)


# ---------------------------------------------------------------------------
# closed forms and the block-matrix model
# ---------------------------------------------------------------------------


def _check_k(increments, k):
    if not 0 <= k <= increments.shape[0]:
        raise UsageError(f"k={k} out of range [0, {increments.shape[0]}]")


def closed_form_I(alg, increments, k, n_scale=1.0):
    """``I_k`` by direct expansion of the series."""
    _check_k(increments, k)
    reps = increments.shape[1]
    total = np.zeros((reps, alg.dim))
    for j in range(k):
        term = alg.inv(increments[j])
        for i in range(j - 1, -1, -1):
            term = alg.quad_apply(alg.inv(increments[i]), term)
        total += term / n_scale
    return total


def closed_form_L(alg, increments, k, n_scale=1.0, ell0=None):
    """``L_k = P(w_k) ... P(w_1)(ell0 + I_k)`` (``ell0 = 0`` when unscaled)."""
    x = closed_form_I(alg, increments, k, n_scale)
    if ell0 is not None:
        x = x + ell0
    for j in range(k):
        x = alg.quad_apply(increments[j], x)
    return x


def closed_form_Lambda(alg, increments, k, n_scale=1.0, ell0=None, lambda0=None):
    """``Lambda_k = P(L_k) P(w_k^-1) ... P(w_1^-1)(s0)``.

    ``s0 = P(ell0^-1) lambda0`` for the scaled chain and ``e`` when unscaled.
    """
    reps = increments.shape[1]
    if ell0 is None:
        if k == 0:
            raise UsageError("Lambda_0 is undefined for the unscaled chain")
        s = np.broadcast_to(alg.identity, (reps, alg.dim))
    else:
        lam0 = alg.identity if lambda0 is None else lambda0
        s = np.broadcast_to(alg.quad_apply(alg.inv(ell0), lam0), (reps, alg.dim))
    for j in range(k):
        s = alg.quad_apply(alg.inv(increments[j]), s)
    return alg.quad_apply(closed_form_L(alg, increments, k, n_scale, ell0), s)


def block_oracle(alg, increments, n_scale=1.0, ell0=None, lambda0=None):
    """Literal ``2r x 2r`` block-matrix recursion for symmetric matrices.

    ``W_{k+1} = W_k w``, ``Z_{k+1} = Z_k w + (W_k^T)^-1 / n`` from ``W_0 = I``
    and ``Z_0 = ell0`` (zero for the unscaled chain).  Returns
    ``(Lambda, L, I)`` of shape ``(steps + 1, reps, dim)`` with
    ``Lambda = Z^T S Z``, ``L = W^T Z`` and ``I = Z W^-1 - ell0``, where
    ``S = P(ell0^-1) lambda0`` (identity when unscaled, ``Lambda_0`` then NaN).
    """
    if alg.kind is not Kind.SYM_REAL:
        raise UsageError("the block model only exists for sym_real")
    steps, reps, _ = increments.shape
    r = alg.rank
    mats = alg.to_matrix(increments)
    W = np.broadcast_to(np.eye(r), (reps, r, r)).copy()
    if ell0 is None:
        Z = np.zeros((reps, r, r))
        S = np.eye(r)
        l0 = np.zeros((r, r))
        lam = [np.full((reps, alg.dim), np.nan)]
    else:
        l0 = alg.to_matrix(ell0)
        Z = np.broadcast_to(l0, (reps, r, r)).copy()
        lam0 = alg.identity if lambda0 is None else lambda0
        S = alg.to_matrix(alg.quad_apply(alg.inv(ell0), lam0))
        lam = [alg.from_matrix(np.swapaxes(Z, 1, 2) @ S @ Z)]
    L = [alg.from_matrix(Z)]
    I = [np.zeros((reps, alg.dim))]
    for k in range(steps):
        w = mats[k]
        Z = Z @ w + np.linalg.inv(np.swapaxes(W, 1, 2)) / n_scale
        W = W @ w
        lam.append(alg.from_matrix(np.swapaxes(Z, 1, 2) @ S @ Z))
        L.append(alg.from_matrix(np.swapaxes(W, 1, 2) @ Z))
        I.append(alg.from_matrix(Z @ np.linalg.inv(W) - l0))
    return np.stack(lam), np.stack(L), np.stack(I)


# ---------------------------------------------------------------------------
# kernels and the intertwining experiment
# ---------------------------------------------------------------------------


def kernel_K_sample(alg, a, p, rng, count=1, cfg: McmcConfig | None = None):
    """``K(a, .) = delta_a x GIG(p; a^-1, e)``: returns ``(a, X)`` stacked."""
    a = np.asarray(a, dtype=float)
    if not alg.in_cone(a).all():
        raise UsageError("a must lie in the open cone")
    a_rows = np.broadcast_to(a, (count, alg.dim)).copy()
    x, _ = gig_draws(alg, p, alg.inv(a_rows) if a.ndim == 2 else alg.inv(a),
                     alg.identity, count, rng, cfg)
    return a_rows, x


def intertwining_experiment(alg, a, p, reps, rng, cfg: McmcConfig | None = None):
    """Two samples of ``(Lambda', L')`` pairs that should share one joint law.

    LHS: ``X ~ GIG(p; a^-1, e)``, ``w ~ GIG(p; e, e)`` and
    ``(P(w + X^-1) a, P(w) X + w)``.
    RHS: the same mechanism for ``Lambda''`` with fresh randomness, then
    ``L'' ~ GIG(p; Lambda''^-1, e)`` drawn independently.

    Returns two ``(reps, 2 dim)`` arrays ``[Lambda, L]``.
    """
    a = np.asarray(a, dtype=float)
    e = alg.identity

    def first_step():
        _, x = kernel_K_sample(alg, a, p, rng, reps, cfg)
        w, _ = gig_draws(alg, p, e, e, reps, rng, cfg)
        return alg.quad_apply(w + alg.inv(x), a), alg.quad_apply(w, x) + w

    lam1, ell1 = first_step()
    lam2, _ = first_step()
    ell2, _ = gig_draws(alg, p, alg.inv(lam2), e, reps, rng, cfg)
    return np.concatenate([lam1, ell1], axis=1), np.concatenate([lam2, ell2], axis=1)


# ---------------------------------------------------------------------------
# Dufresne series and stationarity
# ---------------------------------------------------------------------------


@dataclass
class DufresneResult:
    samples: np.ndarray
    last_increment_norm: np.ndarray
    diverged: np.ndarray
    warnings: list = field(default_factory=list)


def dufresne_series(alg, increments, n_scale=1.0, guard=DIVERGENCE_GUARD):
    """Stream ``I_steps`` without storing the trajectory.

    Replicas whose ``trace(I)`` exceeds ``guard`` are frozen and flagged.
    """
    steps, reps, _ = increments.shape
    I = np.zeros((reps, alg.dim))
    M = np.broadcast_to(np.eye(alg.dim), (reps, alg.dim, alg.dim)).copy()
    last = np.zeros(reps)
    alive = np.ones(reps, dtype=bool)
    for k in range(steps):
        w_inv = alg.inv(increments[k])
        inc = np.einsum("rij,rj->ri", M, w_inv) / n_scale
        inc[~alive] = 0.0
        I = I + inc
        last = np.where(alive, alg.norm(inc), last)
        M = M @ alg.quad_matrix(w_inv)
        alive &= alg.trace(I) <= guard
        M[~alive] = 0.0
    return DufresneResult(I, last, ~alive)


def dufresne_estimate(alg, p, steps, reps, rng, cfg: McmcConfig | None = None):
    """Terminal ``I_steps`` for the unscaled chain with convergence diagnostics."""
    notes = []
    if not p > alg.wishart_threshold:
        notes.append(f"p={p:g} is at or below dim/r - 1 = {alg.wishart_threshold:g}; "
                     "the series is not expected to converge")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    w = gig_increments(alg, p, 1, steps, reps, rng, cfg)
    res = dufresne_series(alg, w)
    res.warnings.extend(notes)
    if res.diverged.any():
        res.warnings.append(f"{int(res.diverged.sum())} replicas exceeded trace(I) > "
                            f"{DIVERGENCE_GUARD:g}")
    return res


def y_step(alg, x, w):
    """One step of ``Y``: ``x -> P(w^-1) x + w^-1``."""
    w_inv = alg.inv(w)
    return alg.quad_apply(w_inv, x) + w_inv


def stationarity_discrete(alg, p, reps, rng, cfg: McmcConfig | None = None):
    """``(start, after)``: inverse-Wishart draws and their image under one ``Y`` step."""
    x = inv_wishart_draws(alg, p, reps, rng)
    e = alg.identity
    w, _ = gig_draws(alg, p, e, e, reps, rng, cfg)
    return x, y_step(alg, x, w)


def stationarity_small_step(alg, p, n_scale, reps, rng, cfg: McmcConfig | None = None):
    """``(start, after)`` for one step of ``L^n`` from ``Inv(gamma_{-p, e})``.

    Needs ``p < 1 - dim/r`` so that ``-p`` is a valid Wishart parameter.
    """
    if not -p > alg.wishart_threshold:
        raise UsageError(f"needs p < 1 - dim/r = {-alg.wishart_threshold:g}")
    x = inv_wishart_draws(alg, -p, reps, rng)
    e = n_scale * alg.identity
    w, _ = gig_draws(alg, p, e, e, reps, rng, cfg)
    return x, alg.quad_apply(w, x) + w / n_scale


def growth_ratio(alg, p, rng, reps=2000, early=100, late=400, cfg=None):
    """Median ``|I|`` at ``late`` steps over the median at ``early`` steps."""
    w = gig_increments(alg, p, 1, late, reps, rng, cfg)
    a = dufresne_series(alg, w[:early])
    b = dufresne_series(alg, w)
    return float(np.median(alg.norm(b.samples)) / np.median(alg.norm(a.samples))), b

