"""Euclidean Jordan algebras and their symmetric cones.

Three simple algebras are supported:

* ``real``      -- the rank-one algebra R with the ordinary product,
* ``sym_real``  -- real symmetric r x r matrices with ``a.b = (ab + ba)/2``,
* ``lorentz``   -- R^n, n >= 3, with the spin-factor product.

Elements are coordinate vectors in a fixed basis of E.  For ``sym_real`` the
basis is orthonormal for ``<x, y> = Tr(x.y)``: diagonal entries first, then
``sqrt(2) * x_ij`` for ``i < j`` in row-major order.  For ``lorentz`` the
coordinates are the raw ``(x_0, ..., x_{n-1})`` so that ``Tr(x.y)`` equals twice
the Euclidean dot product.  In both cases the basis is orthogonal, hence the
adjoint of an operator is its matrix transpose.

Every :class:`Algebra` method works on stacked arrays of shape ``(..., dim)``;
the :class:`ConeElement` / :class:`LinOperator` wrappers and the module-level
functions give the single-element API.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, UsageError

#: eigenvalues closer than this are treated as one eigenvalue
MERGE_TOL = 1e-10
#: relative floor used by the open-cone membership test
CONE_TOL = 1e-12


class Kind(str, enum.Enum):
    REAL = "real"
    SYM_REAL = "sym_real"
    LORENTZ = "lorentz"


@dataclass(frozen=True)
class Algebra:
    """Immutable description of one simple Euclidean Jordan algebra.

    Attributes
    ----------
    kind, size :
        The classification label, ``size`` being r for ``sym_real`` and n for
        ``lorentz`` (always 1 for ``real``).
    rank, dim, degree :
        r, dim E and d, tied by ``dim = r + d r (r - 1) / 2``.
    """

    kind: Kind
    size: int
    rank: int
    dim: int
    degree: int
    identity: np.ndarray = field(init=False, repr=False, compare=False)
    _lmul_basis: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e = self._make_identity()
        e.flags.writeable = False
        object.__setattr__(self, "identity", e)
        basis = np.eye(self.dim)
        # C[i, j, k] = (E_i . E_j)_k
        struct = self.mult(basis[:, None, :], basis[None, :, :])
        # L(x)[k, j] = sum_i x_i C[i, j, k]
        lb = np.ascontiguousarray(struct.transpose(0, 2, 1).reshape(self.dim, -1))
        lb.flags.writeable = False
        object.__setattr__(self, "_lmul_basis", lb)

    # -- descriptors -----------------------------------------------------------

    @property
    def weyl_coeffs(self) -> tuple:
        """Coefficients ``d (2i - r - 1) / 4`` of the Weyl vector, i = 1..r."""
        r, d = self.rank, self.degree
        return tuple(d * (2 * i - r - 1) / 4 for i in range(1, r + 1))

    @property
    def dim_over_rank(self) -> float:
        return self.dim / self.rank

    @property
    def wishart_threshold(self) -> float:
        """Wishart laws exist for ``p > dim/r - 1``."""
        return self.dim / self.rank - 1.0

    def to_config(self) -> dict:
        return {"kind": self.kind.value, "size": self.size}

    def __str__(self):
        return f"{self.kind.value}({self.size})"

    # -- products ----------------------------------------------------------------

    def mult(self, x, y):
        raise NotImplementedError

    def square(self, x):
        return self.mult(x, x)

    def lmul_matrix(self, x):
        """Matrix of ``y -> x.y``; shape ``(..., dim, dim)``."""
        x = np.asarray(x, dtype=float)
        return (x @ self._lmul_basis).reshape(x.shape[:-1] + (self.dim, self.dim))

    def quad_apply(self, x, y):
        """``P(x) y = 2 x.(x.y) - (x.x).y`` without forming the operator."""
        return 2.0 * self.mult(x, self.mult(x, y)) - self.mult(self.square(x), y)

    def quad_matrix(self, x):
        """Matrix of the quadratic representation ``P(x) = 2 L(x)^2 - L(x^2)``."""
        lx = self.lmul_matrix(x)
        return 2.0 * (lx @ lx) - self.lmul_matrix(self.square(x))

    def inner(self, x, y):
        """Trace form ``Tr(x.y)``."""
        return self._inner_scale * np.sum(np.asarray(x) * np.asarray(y), axis=-1)

    _inner_scale = 1.0

    def norm(self, x):
        return np.sqrt(self.inner(x, x))

    def trace(self, x):
        return self.inner(x, self.identity)

    # -- spectral calculus -------------------------------------------------------

    def eigh(self, x):
        """Eigenvalues (descending, shape ``(..., r)``) and the matching complete
        system of primitive idempotents (shape ``(..., r, dim)``)."""
        raise NotImplementedError

    def eigvals(self, x):
        return self.eigh(x)[0]

    def spectral_apply(self, x, fn):
        lam, frame = self.eigh(x)
        return np.einsum("...r,...rd->...d", fn(lam), frame)

    def det(self, x):
        return np.prod(self.eigvals(x), axis=-1)

    def inv(self, x):
        return self.spectral_apply(x, np.reciprocal)

    def exp(self, x):
        return self.spectral_apply(x, np.exp)

    def log(self, x):
        return self.spectral_apply(x, np.log)

    def sqrt(self, x):
        return self.spectral_apply(x, np.sqrt)

    def power(self, x, t):
        return self.spectral_apply(x, lambda lam: np.power(lam, t))

    def in_cone(self, x):
        """Open-cone membership: ``min eig > 1e-12 * max(1, |max eig|)``."""
        lam = self.eigvals(x)
        lo = lam.min(axis=-1)
        hi = np.abs(lam).max(axis=-1)
        return lo > CONE_TOL * np.maximum(1.0, hi)

    # -- group K and bases -----------------------------------------------------------

    def rotation_matrix(self, rot):
        """Coordinate matrix of the automorphism defined by ``rot``."""
        raise NotImplementedError

    def rotate(self, x, rot):
        return np.asarray(x) @ self.rotation_matrix(rot).T

    def random_rotation(self, rng):
        raise NotImplementedError

    def p_basis(self, metric="trace"):
        """Rows form an orthonormal basis of E for the chosen inner product.

        ``metric="trace"`` uses ``Tr(x.y)``; ``metric="euclidean"`` uses the plain
        dot product of coordinates (differs from the trace form on ``lorentz``).
        """
        if metric == "trace":
            return np.eye(self.dim) / math.sqrt(self._inner_scale)
        if metric == "euclidean":
            return np.eye(self.dim)
        raise UsageError(f"unknown metric {metric!r}")

    def coordinate_log_volume(self):
        """log of d(trace-orthonormal Lebesgue) / d(coordinate Lebesgue)."""
        return 0.5 * self.dim * math.log(self._inner_scale)

    # -- random elements (for tests and property checks) ---------------------------

    def random_element(self, rng, shape=(), scale=1.0):
        z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (self.dim,)) if shape != () \
            else rng.standard_normal(self.dim)
        return scale * z @ self.p_basis()

    def random_cone_element(self, rng, shape=(), spread=1.0):
        """``exp(z)`` with the spectrum of z inside ``[-spread, spread]``."""
        z = self.random_element(rng, shape)
        rad = np.abs(self.eigvals(z)).max(axis=-1, keepdims=True)
        u = rng.uniform(0.2, 1.0, size=rad.shape)
        return self.exp(spread * u * z / np.maximum(rad, 1e-300))

    def _make_identity(self):
        raise NotImplementedError


class RealAlgebra(Algebra):
    def _make_identity(self):
        return np.ones(1)

    def mult(self, x, y):
        return np.asarray(x, dtype=float) * np.asarray(y, dtype=float)

    def eigh(self, x):
        x = np.asarray(x, dtype=float)
        return x.copy(), np.ones(x.shape[:-1] + (1, 1))

    def eigvals(self, x):
        return np.asarray(x, dtype=float).copy()

    def det(self, x):
        return np.asarray(x, dtype=float)[..., 0]

    def inv(self, x):
        return 1.0 / np.asarray(x, dtype=float)

    def exp(self, x):
        return np.exp(x)

    def log(self, x):
        return np.log(x)

    def rotation_matrix(self, rot):
        if rot is not None:
            u = np.asarray(rot, dtype=float).reshape(-1)
            if u.size != 1 or abs(u[0] - 1.0) > 1e-12:
                raise UsageError("the real algebra only admits the identity rotation")
        return np.eye(1)

    def random_rotation(self, rng):
        return np.eye(1)


class SymRealAlgebra(Algebra):
    """Real symmetric matrices; coordinates are trace-orthonormal."""

    def __post_init__(self):
        r = self.rank
        iu, ju = np.triu_indices(r, 1)
        object.__setattr__(self, "_iu", iu)
        object.__setattr__(self, "_ju", ju)
        super().__post_init__()

    def _make_identity(self):
        return np.concatenate([np.ones(self.rank), np.zeros(self.dim - self.rank)])

    def to_matrix(self, x):
        x = np.asarray(x, dtype=float)
        r = self.rank
        m = np.zeros(x.shape[:-1] + (r, r))
        idx = np.arange(r)
        m[..., idx, idx] = x[..., :r]
        off = x[..., r:] / math.sqrt(2.0)
        m[..., self._iu, self._ju] = off
        m[..., self._ju, self._iu] = off
        return m

    def from_matrix(self, m):
        m = np.asarray(m, dtype=float)
        r = self.rank
        idx = np.arange(r)
        diag = m[..., idx, idx]
        off = 0.5 * (m[..., self._iu, self._ju] + m[..., self._ju, self._iu]) * math.sqrt(2.0)
        return np.concatenate([diag, off], axis=-1)

    def mult(self, x, y):
        a, b = self.to_matrix(x), self.to_matrix(y)
        ab = a @ b
        return self.from_matrix(0.5 * (ab + np.swapaxes(ab, -1, -2)))

    def quad_apply(self, x, y):
        a = self.to_matrix(x)
        return self.from_matrix(a @ self.to_matrix(y) @ a)

    def _eig2(self, x):
        # closed form for 2x2: [[a, c], [c, b]]
        a, b = x[..., 0], x[..., 1]
        c = x[..., 2] / math.sqrt(2.0)
        mid = 0.5 * (a + b)
        rad = np.hypot(0.5 * (a - b), c)
        return mid, rad, a, b, c

    def eigvals(self, x):
        x = np.asarray(x, dtype=float)
        if self.rank == 1:
            return x[..., :1].copy()
        if self.rank == 2:
            mid, rad, *_ = self._eig2(x)
            return np.stack([mid + rad, mid - rad], axis=-1)
        return np.linalg.eigvalsh(self.to_matrix(x))[..., ::-1]

    def eigh(self, x):
        x = np.asarray(x, dtype=float)
        r = self.rank
        if r == 1:
            return x[..., :1].copy(), np.ones(x.shape[:-1] + (1, 1))
        if r == 2:
            mid, rad, a, b, c = self._eig2(x)
            theta = 0.5 * np.arctan2(2.0 * c, a - b)
            cs, sn = np.cos(theta), np.sin(theta)
            s2 = math.sqrt(2.0)
            c1 = np.stack([cs * cs, sn * sn, s2 * cs * sn], axis=-1)
            c2 = np.stack([sn * sn, cs * cs, -s2 * cs * sn], axis=-1)
            return np.stack([mid + rad, mid - rad], axis=-1), np.stack([c1, c2], axis=-2)
        lam, vec = np.linalg.eigh(self.to_matrix(x))
        lam, vec = lam[..., ::-1], vec[..., ::-1]
        proj = np.einsum("...ik,...jk->...kij", vec, vec)
        return lam, self.from_matrix(proj)

    def det(self, x):
        x = np.asarray(x, dtype=float)
        if self.rank == 1:
            return x[..., 0]
        if self.rank == 2:
            return x[..., 0] * x[..., 1] - 0.5 * x[..., 2] ** 2
        return np.linalg.det(self.to_matrix(x))

    def inv(self, x):
        x = np.asarray(x, dtype=float)
        if self.rank == 1:
            return 1.0 / x
        if self.rank == 2:
            d = self.det(x)[..., None]
            return np.stack([x[..., 1], x[..., 0], -x[..., 2]], axis=-1) / d
        return self.from_matrix(np.linalg.inv(self.to_matrix(x)))

    def rotation_matrix(self, rot):
        u = _check_orthogonal(rot, self.rank)
        basis = np.eye(self.dim)
        return self.from_matrix(u @ self.to_matrix(basis) @ u.T).T

    def random_rotation(self, rng):
        return _haar_orthogonal(rng, self.rank)


class LorentzAlgebra(Algebra):
    """Spin factor on R^n with ``x.y = (<x, y>_R^n, x_0 y_k + y_0 x_k)``."""

    _inner_scale = 2.0

    def _make_identity(self):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def mult(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z0 = np.sum(x * y, axis=-1, keepdims=True)
        zb = x[..., :1] * y[..., 1:] + y[..., :1] * x[..., 1:]
        return _cat(z0, zb)

    def quad_apply(self, x, y):
        # P(x)y = 2 <x, Jy> x - det(x) Jy with J = diag(1, -1, ..., -1)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        jy = np.concatenate([y[..., :1], -y[..., 1:]], axis=-1)
        return 2.0 * np.sum(x * y, axis=-1, keepdims=True) * x - self.det(x)[..., None] * jy

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        x0 = x[..., 0]
        nb = np.linalg.norm(x[..., 1:], axis=-1)
        return x, x0, nb

    def eigvals(self, x):
        _, x0, nb = self._split(x)
        return np.stack([x0 + nb, x0 - nb], axis=-1)

    def eigh(self, x):
        x, x0, nb = self._split(x)
        degenerate = nb <= MERGE_TOL * np.maximum(1.0, np.abs(x0))
        axis = np.zeros(self.dim - 1)
        axis[0] = 1.0
        safe = np.where(degenerate, 1.0, nb)[..., None]
        u = np.where(degenerate[..., None], axis, x[..., 1:] / safe)
        half = np.full(u.shape[:-1] + (1,), 0.5)
        c1 = np.concatenate([half, 0.5 * u], axis=-1)
        c2 = np.concatenate([half, -0.5 * u], axis=-1)
        return np.stack([x0 + nb, x0 - nb], axis=-1), np.stack([c1, c2], axis=-2)

    def det(self, x):
        x = np.asarray(x, dtype=float)
        rad = np.linalg.norm(x[..., 1:], axis=-1)
        return (x[..., 0] - rad) * (x[..., 0] + rad)

    def inv(self, x):
        x = np.asarray(x, dtype=float)
        jx = np.concatenate([x[..., :1], -x[..., 1:]], axis=-1)
        return jx / self.det(x)[..., None]

    def rotation_matrix(self, rot):
        u = _check_orthogonal(rot, self.dim - 1)
        m = np.eye(self.dim)
        m[1:, 1:] = u
        return m

    def random_rotation(self, rng):
        return _haar_orthogonal(rng, self.dim - 1)


def _cat(head, tail):
    """Concatenate along the last axis after broadcasting the leading axes."""
    lead = np.broadcast_shapes(head.shape[:-1], tail.shape[:-1])
    return np.concatenate([np.broadcast_to(head, lead + head.shape[-1:]),
                           np.broadcast_to(tail, lead + tail.shape[-1:])], axis=-1)


def _check_orthogonal(rot, n):
    u = np.asarray(rot, dtype=float)
    if u.shape != (n, n):
        raise UsageError(f"rotation must be a {n}x{n} matrix, got shape {u.shape}")
    if np.max(np.abs(u.T @ u - np.eye(n))) > 1e-10:
        raise UsageError("rotation parameter is not orthogonal")
    return u


def _haar_orthogonal(rng, n):
    """Haar-distributed element of SO(n)."""
    if n == 1:
        return np.eye(1)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def make_algebra(kind, size=None) -> Algebra:
    """Build the algebra ``(kind, size)``.

    >>> a = make_algebra("sym_real", 3)
    >>> (a.rank, a.dim, a.degree)
    (3, 6, 1)
    """
    try:
        kind = Kind(kind.value if isinstance(kind, Kind) else str(kind).lower())
    except ValueError:
        raise ConfigError(f"unsupported algebra kind {kind!r}") from None
    if kind is Kind.REAL:
        if size not in (None, 1):
            raise ConfigError("the real algebra has size 1")
        return RealAlgebra(kind, 1, 1, 1, 0)
    if not isinstance(size, (int, np.integer)) or isinstance(size, bool):
        raise ConfigError(f"algebra size must be an integer, got {size!r}")
    size = int(size)
    if kind is Kind.SYM_REAL:
        if size < 1:
            raise ConfigError("sym_real needs r >= 1")
        return SymRealAlgebra(kind, size, size, size * (size + 1) // 2, 1 if size > 1 else 0)
    if size < 3:
        raise ConfigError("lorentz needs n >= 3")
    return LorentzAlgebra(kind, size, 2, size, size - 2)


def algebra_from_config(cfg) -> Algebra:
    if not isinstance(cfg, dict) or set(cfg) - {"kind", "size"} or "kind" not in cfg:
        raise ConfigError(f"algebra config must be {{'kind', 'size'}}, got {cfg!r}")
    return make_algebra(cfg["kind"], cfg.get("size"))


# ---------------------------------------------------------------------------
# single-element API
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConeElement:
    """An element of E (not necessarily of the cone E+)."""

    algebra: Algebra
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape != (self.algebra.dim,):
            raise UsageError(f"expected {self.algebra.dim} coordinates, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise UsageError("coordinates must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    def in_cone(self) -> bool:
        return bool(self.algebra.in_cone(self.coords))

    def eigenvalues(self):
        return self.algebra.eigvals(self.coords)

    def matrix(self):
        if not isinstance(self.algebra, SymRealAlgebra):
            raise UsageError("matrix view only exists for sym_real")
        return self.algebra.to_matrix(self.coords)

    def _wrap(self, c):
        return ConeElement(self.algebra, c)

    def _coerce(self, other):
        if isinstance(other, ConeElement):
            _same_algebra(self, other)
            return other.coords
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else self._wrap(self.coords + c)

    def __sub__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else self._wrap(self.coords - c)

    def __mul__(self, s):
        if isinstance(s, ConeElement):
            return jordan_product(self, s)
        return self._wrap(self.coords * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self._wrap(self.coords / float(s))

    def __neg__(self):
        return self._wrap(-self.coords)

    def __repr__(self):
        return f"ConeElement({self.algebra}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class LinOperator:
    """Dense matrix of an endomorphism of E in the coordinate basis."""

    algebra: Algebra
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.algebra.dim, self.algebra.dim):
            raise UsageError(f"operator must be {self.algebra.dim}x{self.algebra.dim}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __call__(self, x: ConeElement) -> ConeElement:
        _same_algebra(self, x)
        return ConeElement(self.algebra, self.matrix @ x.coords)

    def __matmul__(self, other: "LinOperator") -> "LinOperator":
        _same_algebra(self, other)
        return LinOperator(self.algebra, self.matrix @ other.matrix)

    def adjoint(self) -> "LinOperator":
        return LinOperator(self.algebra, self.matrix.T)

    def inverse(self) -> "LinOperator":
        return LinOperator(self.algebra, np.linalg.inv(self.matrix))

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @classmethod
    def identity(cls, algebra):
        return cls(algebra, np.eye(algebra.dim))


def _same_algebra(a, b):
    if a.algebra != b.algebra:
        raise UsageError(f"algebra mismatch: {a.algebra} vs {b.algebra}")


def element(algebra: Algebra, values) -> ConeElement:
    """Build an element from coordinates, or from a symmetric matrix on ``sym_real``."""
    v = np.asarray(values, dtype=float)
    if isinstance(algebra, SymRealAlgebra) and v.ndim == 2:
        if v.shape != (algebra.rank, algebra.rank) or not np.allclose(v, v.T):
            raise UsageError("expected a symmetric r x r matrix")
        v = algebra.from_matrix(v)
    return ConeElement(algebra, v)


def identity_element(algebra: Algebra) -> ConeElement:
    return ConeElement(algebra, algebra.identity)


def jordan_product(x: ConeElement, y: ConeElement) -> ConeElement:
    _same_algebra(x, y)
    return ConeElement(x.algebra, x.algebra.mult(x.coords, y.coords))


def lmul(x: ConeElement) -> LinOperator:
    return LinOperator(x.algebra, x.algebra.lmul_matrix(x.coords))


def quad_rep(x: ConeElement) -> LinOperator:
    return LinOperator(x.algebra, x.algebra.quad_matrix(x.coords))


def inner(x: ConeElement, y: ConeElement) -> float:
    _same_algebra(x, y)
    return float(x.algebra.inner(x.coords, y.coords))


def spectral_decompose(x: ConeElement):
    """Eigenvalues (descending) and a complete system of primitive idempotents.

    Eigenvalues closer than ``MERGE_TOL`` (relative to the spectral radius) are
    reported as one repeated value.
    """
    alg = x.algebra
    lam, frame = alg.eigh(x.coords)
    lam = lam.copy()
    scale = max(1.0, float(np.max(np.abs(lam))))
    i = 0
    while i < len(lam):
        j = i
        while j + 1 < len(lam) and abs(lam[j + 1] - lam[i]) <= MERGE_TOL * scale:
            j += 1
        lam[i:j + 1] = lam[i:j + 1].mean()
        i = j + 1
    return lam, [ConeElement(alg, c) for c in frame]


_CALCULUS = ("det", "trace", "inverse", "exp", "log", "sqrt", "power")


def functional_calculus(x: ConeElement, fn: str, t: float | None = None):
    """Apply ``fn`` through the spectral decomposition of ``x``.

    ``fn`` is one of det, trace, inverse, exp, log, sqrt, power (the latter
    with exponent ``t``).  Scalar results come back as floats.
    """
    alg = x.algebra
    if fn not in _CALCULUS:
        raise UsageError(f"unknown spectral function {fn!r}")
    if fn == "det":
        return float(alg.det(x.coords))
    if fn == "trace":
        return float(alg.trace(x.coords))
    if fn == "exp":
        return ConeElement(alg, alg.exp(x.coords))
    lam = alg.eigvals(x.coords)
    if fn == "inverse":
        bad = lam[np.abs(lam) <= CONE_TOL * max(1.0, float(np.max(np.abs(lam))))]
        if bad.size:
            raise DomainError(f"inverse needs nonzero eigenvalues; got eigenvalue {bad[0]:.3g}")
        return ConeElement(alg, alg.inv(x.coords))
    if not alg.in_cone(x.coords):
        raise DomainError(f"{fn} needs x in the open cone; minimal eigenvalue is {lam.min():.6g}")
    if fn == "log":
        return ConeElement(alg, alg.log(x.coords))
    if fn == "sqrt":
        return ConeElement(alg, alg.sqrt(x.coords))
    if t is None:
        raise UsageError("power needs an exponent t")
    return ConeElement(alg, alg.power(x.coords, t))


def apply_rotation(x: ConeElement, rot) -> ConeElement:
    """Act on ``x`` by the element of K given by an orthogonal matrix.

    ``sym_real``: ``x -> u x u^T``; ``lorentz``: ``u`` rotates the spatial
    coordinates; ``real``: only the identity is accepted.
    """
    alg = x.algebra
    return ConeElement(alg, alg.rotate(x.coords, rot))
