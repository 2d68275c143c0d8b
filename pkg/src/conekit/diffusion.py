"""Hypoelliptic Brownian motion on the automorphism group and derived processes.

The group process ``g`` solves the Stratonovich equation
``dg = g o (2 sum_i L(f_i) dB^i + 2 p L(e) dt)`` for an orthonormal basis
``(f_i)`` of E.  Since ``exp_G(2 L(v)) = P(exp v)``, the geometric Euler scheme

    g_{t+h} = g_t P(exp(dB + p h e)),   dB = sqrt(h) sum_i Z_i f_i

needs no matrix exponential.  The simulation tracks ``M = (g^*)^-1`` through
``M <- M P(exp(-v))`` and derives::

    y      = M e = (g^*)^-1 e
    iota_t = int_0^t y_s ds                     (left Riemann sum)
    ell_t  = g_t^* (ell0 + iota_t)
    lam_t  = g_t^* P(ell0 + iota_t) P(ell0^-1) lambda0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chains import gig_increments, run_chain
from .errors import ConeMembershipError, UsageError
from .jordan import Algebra, ConeElement, Kind, LinOperator


def group_increment(v: ConeElement) -> LinOperator:
    """``exp_G(2 L(v))``, computed as ``P(exp v)``."""
    alg = v.algebra
    return LinOperator(alg, alg.quad_matrix(alg.exp(v.coords)))


def p_basis(alg: Algebra, metric="trace"):
    """Orthonormal basis of E as a list of elements (see :meth:`Algebra.p_basis`)."""
    return [ConeElement(alg, row) for row in alg.p_basis(metric)]


# ---------------------------------------------------------------------------
# trackers for M = (g^*)^-1
# ---------------------------------------------------------------------------


class _DenseTracker:
    """``M`` stored as a dense ``(reps, dim, dim)`` operator."""

    def __init__(self, alg, reps):
        self.alg = alg
        self.M = np.broadcast_to(np.eye(alg.dim), (reps, alg.dim, alg.dim)).copy()

    def step(self, v):
        self.M = self.M @ self.alg.quad_matrix(self.alg.exp(-v))

    def y(self):
        return self.M @ self.alg.identity

    def apply(self, z):
        return np.einsum("rij,rj->ri", self.M, z)

    def solve(self, z):
        return np.linalg.solve(self.M, z[..., None])[..., 0]

    def operator(self):
        return self.M

    def renormalize(self):
        c = np.linalg.norm(self.M, axis=(1, 2))
        self.M /= c[:, None, None]
        return np.log(c)


class _FactorTracker:
    """For symmetric matrices ``M z = A z A^T`` with ``A = exp(-v_1) ... exp(-v_k)``."""

    def __init__(self, alg, reps):
        self.alg = alg
        self.A = np.broadcast_to(np.eye(alg.rank), (reps, alg.rank, alg.rank)).copy()

    def step(self, v):
        self.A = self.A @ self.alg.to_matrix(self.alg.exp(-v))

    def y(self):
        return self.alg.from_matrix(self.A @ np.swapaxes(self.A, 1, 2))

    def apply(self, z):
        return self.alg.from_matrix(self.A @ self.alg.to_matrix(z) @ np.swapaxes(self.A, 1, 2))

    def solve(self, z):
        ai = np.linalg.inv(self.A)
        return self.alg.from_matrix(ai @ self.alg.to_matrix(z) @ np.swapaxes(ai, 1, 2))

    def operator(self):
        basis = self.alg.to_matrix(np.eye(self.alg.dim))
        a = self.A[:, None]
        cols = self.alg.from_matrix(a @ basis[None] @ np.swapaxes(a, 2, 3))
        return np.swapaxes(cols, 1, 2)

    def renormalize(self):
        c = np.linalg.norm(self.A, axis=(1, 2))
        self.A /= c[:, None, None]
        return 2 * np.log(c)


def _tracker(alg, reps):
    if alg.kind is Kind.SYM_REAL:
        return _FactorTracker(alg, reps)
    return _DenseTracker(alg, reps)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


@dataclass
class DiffusionPath:
    """Recorded states; arrays have shape ``(records, reps, ...)``."""

    t: np.ndarray
    y: np.ndarray
    iota: np.ndarray
    ell: np.ndarray
    lam: np.ndarray
    g_flat: np.ndarray | None = None
    adjoint_error: float | None = None
    meta: dict = field(default_factory=dict)


def simulate_hypo_bm(alg: Algebra, p, T, h, reps, rng, ell0=None, lambda0=None,
                     record_stride=None, metric="trace", quadrature="left",
                     noise=None, track_g=False, check_cone=True, derived=True):
    """Simulate ``reps`` independent paths up to time ``T`` with step ``h``.

    Parameters
    ----------
    ell0, lambda0 : array, optional
        Starting points, ``(dim,)`` or per replica ``(reps, dim)``; default e.
    record_stride : int, optional
        Record every ``record_stride`` steps (default: only the final time).
        Time 0 is always recorded.
    metric : {"trace", "euclidean"}
        Inner product defining the orthonormal noise basis.
    quadrature : {"left", "trapezoid"}
    noise : array, optional
        Standard normal increments of shape ``(steps, reps, dim)``; drawn from
        ``rng`` when omitted.
    track_g : bool
        Also propagate ``g`` itself and record the flattened operator and the
        largest deviation between ``M`` and ``(g^T)^-1``.
    derived : bool
        Compute ``ell`` and ``lam`` at record times (NaN otherwise).  Long
        horizons drive ``(g^*)^-1`` to numerical singularity, so perpetuity
        runs switch this off.
    """
    if h <= 0 or T < h:
        raise UsageError("need h > 0 and T >= h")
    steps = int(round(T / h))
    if noise is not None and noise.shape != (steps, reps, alg.dim):
        raise UsageError(f"noise must have shape {(steps, reps, alg.dim)}")
    if quadrature not in ("left", "trapezoid"):
        raise UsageError(f"unknown quadrature {quadrature!r}")
    stride = steps if record_stride is None else int(record_stride)
    e = alg.identity
    ell0 = np.broadcast_to(e if ell0 is None else np.asarray(ell0, float), (reps, alg.dim))
    lam0 = np.broadcast_to(e if lambda0 is None else np.asarray(lambda0, float), (reps, alg.dim))
    if not (alg.in_cone(ell0).all() and alg.in_cone(lam0).all()):
        raise UsageError("ell0 and lambda0 must lie in the open cone")
    s0 = alg.quad_apply(alg.inv(ell0), lam0)
    basis = math.sqrt(h) * alg.p_basis(metric)
    drift = p * h * e

    tracker = _tracker(alg, reps)
    G = np.broadcast_to(np.eye(alg.dim), (reps, alg.dim, alg.dim)).copy() if track_g else None
    y = np.broadcast_to(e, (reps, alg.dim)).copy()
    iota = np.zeros((reps, alg.dim))
    rec = {"t": [], "y": [], "iota": [], "ell": [], "lam": [], "g": []}
    adj_err = 0.0

    def record(k):
        if derived:
            base = ell0 + iota
            ell = tracker.solve(base)
            lam = tracker.solve(alg.quad_apply(base, s0))
        else:
            ell = lam = np.full((reps, alg.dim), np.nan)
        if check_cone and derived:
            for name, val in (("ell", ell), ("lambda", lam)):
                if not (alg.eigvals(val).min(axis=-1) > 0).all():
                    raise ConeMembershipError(f"{name} left the cone at t={k * h:g}", time=k * h)
        rec["t"].append(k * h)
        rec["y"].append(y.copy())
        rec["iota"].append(iota.copy())
        rec["ell"].append(ell)
        rec["lam"].append(lam)
        if track_g:
            rec["g"].append(G.reshape(reps, -1).copy())

    record(0)
    for k in range(steps):
        z = rng.standard_normal((reps, alg.dim)) if noise is None else noise[k]
        v = z @ basis + drift
        tracker.step(v)
        y_new = tracker.y()
        if quadrature == "left":
            iota += h * y
        else:
            iota += 0.5 * h * (y + y_new)
        y = y_new
        if track_g:
            G = G @ alg.quad_matrix(alg.exp(v))
            Mt = np.linalg.inv(np.swapaxes(G, 1, 2))
            M = tracker.operator()
            adj_err = max(adj_err, float(np.max(np.linalg.norm(Mt - M, axis=(1, 2))
                                                / np.linalg.norm(M, axis=(1, 2)))))
        if (k + 1) % stride == 0 or k + 1 == steps:
            record(k + 1)
    path = DiffusionPath(np.array(rec["t"]), np.stack(rec["y"]), np.stack(rec["iota"]),
                         np.stack(rec["ell"]), np.stack(rec["lam"]),
                         np.stack(rec["g"]) if track_g else None,
                         adj_err if track_g else None)
    path.meta = {"p": p, "T": T, "h": h, "metric": metric, "quadrature": quadrature}
    return path


def coupled_noise(rng, steps_fine, reps, dim):
    """Fine noise for step ``h/2`` and the matching coarse noise for step ``h``."""
    if steps_fine % 2:
        raise UsageError("fine step count must be even")
    fine = rng.standard_normal((steps_fine, reps, dim))
    coarse = (fine[0::2] + fine[1::2]) / math.sqrt(2.0)
    return fine, coarse


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass
class PerpetuityResult:
    samples: np.ndarray
    tail_norm: np.ndarray
    warnings: list = field(default_factory=list)


def perpetuity_estimate(alg, p, T, h, reps, rng, metric="trace"):
    """Terminal ``iota_T`` and the tail diagnostic ``|(g_T^*)^-1 e|``."""
    notes = []
    if not p > alg.wishart_threshold:
        notes.append(f"p={p:g} at or below dim/r - 1 = {alg.wishart_threshold:g}; "
                     "the integral is not expected to converge")
    path = simulate_hypo_bm(alg, p, T, h, reps, rng, metric=metric, derived=False)
    return PerpetuityResult(path.iota[-1], alg.norm(path.y[-1]), notes)


def scaling_limit_experiment(alg, p, n_scale, t, reps, rng, ell0=None, lambda0=None,
                             h=None, cfg=None):
    """``Lambda^n_{floor(n t)}`` samples and ``lambda_t`` samples from the SDE."""
    e = alg.identity
    ell0 = e if ell0 is None else np.asarray(ell0, float)
    lambda0 = e if lambda0 is None else np.asarray(lambda0, float)
    k = int(math.floor(n_scale * t))
    w = gig_increments(alg, p, n_scale, k, reps, rng, cfg)
    traj = run_chain(alg, w, n_scale, ell0, lambda0, record_stride=k)
    h = h if h is not None else min(1e-3, t / 100)
    path = simulate_hypo_bm(alg, p, t, h, reps, rng, ell0, lambda0)
    return traj.Lambda[-1], path.lam[-1]


@dataclass
class LorentzFactors:
    b_plus_pt: np.ndarray
    xi: np.ndarray
    R: np.ndarray
    form_error: float
    form_error_abs: float


def lorentz_factorize(alg, y, t=None, p=None):
    """Split ``y = (g^*)^-1 e`` into ``exp(-2 b - 2 p t) xi`` with ``(xi, xi) = 1``.

    Returns ``b + p t = -log det(y) / 4``, the hyperboloid point ``xi``, its
    radial coordinate ``R = arccosh(xi_0)`` and the deviation of the Lorentz
    form ``(xi, xi)`` from 1.  ``form_error`` is scaled by ``|xi|^2``, the
    conditioning of the form in floating point (rounding of the coordinates
    alone moves ``(xi, xi)`` by about ``eps |xi|^2``); ``form_error_abs`` is
    unscaled.  Pass ``t`` and ``p`` to get ``b`` alone.
    """
    if alg.kind is not Kind.LORENTZ:
        raise UsageError("the factorization applies to the lorentz algebra only")
    y = np.asarray(y, dtype=float)
    det = alg.det(y)
    if np.any(det <= 0) or np.any(y[..., 0] <= 0):
        raise ConeMembershipError("det(y) <= 0: y left the cone")
    bpt = -0.25 * np.log(det)
    xi = y / np.sqrt(det)[..., None]
    dev = np.abs(alg.det(xi) - 1.0)
    R = np.arccosh(np.maximum(xi[..., 0], 1.0))
    if t is not None and p is not None:
        bpt = bpt - p * np.asarray(t).reshape(np.shape(t) + (1,) * (bpt.ndim - np.ndim(t)))
    scaled = dev / np.sum(xi ** 2, axis=-1)
    return LorentzFactors(bpt, xi, R, float(np.max(scaled)), float(np.max(dev)))


@dataclass
class LyapunovResult:
    exponent: float
    se: float
    predicted: float
    times: np.ndarray
    mean_log_norm: np.ndarray


def predicted_exponent(alg, p):
    """Slowest decay rate ``-2 (p - d (r - 1) / 2)`` of ``(g^*)^-1 e``."""
    return -2.0 * (p - alg.degree * (alg.rank - 1) / 2)


def lyapunov_probe(alg, p, T=50.0, reps=200, rng=None, h=1e-2, metric="trace", record_every=None):
    """Estimate ``lim log|(g_t^*)^-1 e| / t`` by regression over ``[T/2, T]``.

    The tracked operator is renormalized every step and the log scale is
    accumulated separately, so long horizons do not underflow.
    """
    steps = int(round(T / h))
    every = record_every or max(1, steps // 200)
    basis = math.sqrt(h) * alg.p_basis(metric)
    drift = p * h * alg.identity
    tracker = _tracker(alg, reps)
    logscale = np.zeros(reps)
    times, logs = [], []
    for k in range(steps):
        v = rng.standard_normal((reps, alg.dim)) @ basis + drift
        tracker.step(v)
        logscale += tracker.renormalize()
        if (k + 1) % every == 0:
            times.append((k + 1) * h)
            logs.append(logscale + np.log(alg.norm(tracker.y())))
    times = np.array(times)
    logs = np.array(logs)
    sel = times >= T / 2
    tt = times[sel]
    # per-replica slopes, then their mean and standard error
    tc = tt - tt.mean()
    slopes = (tc @ (logs[sel] - logs[sel].mean(axis=0))) / (tc @ tc)
    return LyapunovResult(float(slopes.mean()), float(slopes.std(ddof=1) / math.sqrt(reps)),
                          predicted_exponent(alg, p), times, logs.mean(axis=1))
