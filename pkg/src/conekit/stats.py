"""Two-sample tests, goodness of fit and moment summaries.

All tests return a :class:`TestReport`.  The acceptance threshold used
throughout the package is ``ALPHA = 0.01``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from .errors import UsageError

ALPHA = 0.01
MIN_PERMUTATIONS = 500
MIN_BIN = 50


@dataclass
class TestReport:
    method: str
    statistic: float
    p_value: float
    n_a: int
    n_b: int = 0
    permutations: int = 0
    seed: int | None = None
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def passed(self, alpha=ALPHA):
        return self.p_value > alpha

    def to_dict(self):
        d = asdict(self)
        d["statistic"] = float(d["statistic"])
        d["p_value"] = float(d["p_value"])
        return d


def _as_2d(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise UsageError(f"{name} must be a 1-D or 2-D array")
    if x.shape[0] == 0:
        raise UsageError(f"{name} is empty")
    return x


def energy_statistic(a, b):
    """Scaled energy distance ``nm/(n+m) (2 E|X-Y| - E|X-X'| - E|Y-Y'|)``."""
    a, b = _as_2d(a, "A"), _as_2d(b, "B")
    n, m = len(a), len(b)
    sab = cdist(a, b).sum()
    saa = cdist(a, a).sum()
    sbb = cdist(b, b).sum()
    return n * m / (n + m) * (2 * sab / (n * m) - saa / n ** 2 - sbb / m ** 2)


def energy_test(a, b, permutations=999, rng=None, seed=None, chunk=1024):
    """Energy-distance two-sample test with a permutation p-value.

    The pooled distance matrix is processed in row chunks and multiplied by a
    label matrix holding the observed split and ``permutations`` random ones,
    so memory stays ``O(chunk * N + N * permutations)``.
    """
    a, b = _as_2d(a, "A"), _as_2d(b, "B")
    if a.shape[1] != b.shape[1]:
        raise UsageError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if permutations < MIN_PERMUTATIONS:
        raise UsageError(f"need at least {MIN_PERMUTATIONS} permutations")
    if rng is None:
        rng = np.random.default_rng(seed)
    n, m = len(a), len(b)
    pooled = np.concatenate([a, b])
    big_n = n + m
    labels = np.zeros(big_n)
    labels[:n] = 1.0
    z = np.empty((big_n, permutations + 1))
    z[:, 0] = labels
    for k in range(permutations):
        z[:, k + 1] = rng.permutation(labels)
    row_sums = np.empty(big_n)
    zdz = np.zeros(permutations + 1)
    for start in range(0, big_n, chunk):
        stop = min(start + chunk, big_n)
        d = cdist(pooled[start:stop], pooled)
        row_sums[start:stop] = d.sum(axis=1)
        zdz += np.einsum("ij,ij->j", z[start:stop], d @ z)
    total = row_sums.sum()
    zr = row_sums @ z
    s_aa = zdz
    s_ab = zr - zdz
    s_bb = total - 2 * zr + zdz
    e = n * m / big_n * (2 * s_ab / (n * m) - s_aa / n ** 2 - s_bb / m ** 2)
    obs = max(float(e[0]), 0.0)
    tol = 1e-10 * max(abs(float(e[0])), 1e-300) + 1e-12
    count = int(np.sum(e[1:] >= obs - tol))
    p = (1 + count) / (1 + permutations)
    return TestReport("energy_permutation", obs, p, n, m, permutations, seed)


def ks_test(sample, cdf_or_sample):
    """Kolmogorov-Smirnov test against a CDF callable or a second sample."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise UsageError("KS test needs a non-empty sample")
    if callable(cdf_or_sample):
        res = stats.kstest(x, cdf_or_sample)
        return TestReport("ks_vs_cdf", float(res.statistic), float(res.pvalue), x.size)
    y = np.asarray(cdf_or_sample, dtype=float).ravel()
    if y.size == 0:
        raise UsageError("KS test needs a non-empty second sample")
    res = stats.ks_2samp(x, y)
    return TestReport("ks_two_sample", float(res.statistic), float(res.pvalue), x.size, y.size)


def _quantile_cells(values, edges_from, q):
    """Cell index of each row of ``values`` on a ``q x q`` grid of quantiles."""
    cells = np.zeros(len(values), dtype=int)
    for j in range(values.shape[1]):
        cuts = np.quantile(edges_from[:, j], np.linspace(0, 1, q + 1)[1:-1])
        cells = cells * q + np.searchsorted(cuts, values[:, j], side="right")
    return cells


def homogeneity_chi2(a, b, q=3):
    """Chi-square homogeneity test of two samples on a pooled quantile grid."""
    a, b = _as_2d(a, "A"), _as_2d(b, "B")
    pooled = np.concatenate([a, b])
    ncell = q ** a.shape[1]
    ca = np.bincount(_quantile_cells(a, pooled, q), minlength=ncell)
    cb = np.bincount(_quantile_cells(b, pooled, q), minlength=ncell)
    keep = (ca + cb) > 0
    table = np.stack([ca[keep], cb[keep]])
    if table.shape[1] < 2:
        return 0.0, 1.0, table
    stat, p, _, _ = stats.chi2_contingency(table, correction=False)
    return float(stat), float(p), table


def conditional_summaries(alg, lam, ell):
    """K-invariant summaries ``(log det L, <Lambda^-1, L> + tr L^-1)``."""
    lam_inv = alg.inv(lam)
    logdet = np.sum(np.log(alg.eigvals(ell)), axis=-1)
    energy = alg.inner(lam_inv, ell) + alg.trace(alg.inv(ell))
    return np.stack([logdet, energy], axis=-1)


def conditional_gig_check(alg, lam, ell, reference, bins=10, q=3):
    """Binned check that ``L | Lambda ~ GIG(p; Lambda^-1, e)``.

    Parameters
    ----------
    lam, ell : (N, dim) arrays
        Observed pairs.
    reference : (N, dim) array
        One independent draw ``L'_i ~ GIG(p; Lambda_i^-1, e)`` per pair, for the
        claimed ``p``.
    bins : int
        Equal-mass bins on ``trace(Lambda)``; reduced with a warning when a bin
        would hold fewer than 50 pairs.

    Within each bin the summaries of observed and reference draws go through a
    chi-square homogeneity test; bin p-values are combined by Fisher's method.
    """
    lam, ell, reference = (np.asarray(v, dtype=float) for v in (lam, ell, reference))
    n = len(lam)
    if n == 0:
        raise UsageError("no pairs")
    if bins < 1:
        raise UsageError("bins must be >= 1")
    notes = []
    if n // bins < MIN_BIN:
        new = max(1, n // MIN_BIN)
        notes.append(f"bins widened from {bins} to {new} (fewer than {MIN_BIN} pairs per bin)")
        bins = new
    tr = alg.trace(lam)
    cuts = np.quantile(tr, np.linspace(0, 1, bins + 1)[1:-1])
    which = np.searchsorted(cuts, tr, side="right")
    obs = conditional_summaries(alg, lam, ell)
    ref = conditional_summaries(alg, lam, reference)
    pvals, stats_ = [], []
    for k in range(bins):
        sel = which == k
        if sel.sum() < 2:
            continue
        s, p, _ = homogeneity_chi2(obs[sel], ref[sel], q)
        pvals.append(p)
        stats_.append(s)
    if len(pvals) == 1:
        stat, p = stats_[0], pvals[0]
    else:
        stat, p = stats.combine_pvalues(pvals, method="fisher")
    return TestReport("chi2_binned", float(stat), float(p), n, n, 0, None, notes,
                      {"bins": bins, "bin_p_values": [float(v) for v in pvals]})


@dataclass
class MomentSummary:
    mean: np.ndarray
    var: np.ndarray
    se: np.ndarray
    batches: int

    def within(self, target, k=3.0):
        """True where ``|mean - target| <= k * SE``."""
        return np.abs(self.mean - np.asarray(target)) <= k * self.se

    def to_dict(self):
        return {"mean": self.mean.tolist(), "var": self.var.tolist(),
                "se": self.se.tolist(), "batches": self.batches}


def moment_summary(samples, batches=10):
    """Mean, per-coordinate variance and batch-means standard errors."""
    x = _as_2d(samples, "samples")
    if batches < 2 or batches > len(x):
        raise UsageError(f"need 2 <= batches <= number of samples ({len(x)}), got {batches}")
    usable = len(x) - len(x) % batches
    bm = x[:usable].reshape(batches, -1, x.shape[1]).mean(axis=1)
    se = bm.std(axis=0, ddof=1) / math.sqrt(batches)
    return MomentSummary(x.mean(axis=0), x.var(axis=0, ddof=1), se, batches)
