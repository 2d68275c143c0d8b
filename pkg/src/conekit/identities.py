"""Randomized checks of the algebraic identities satisfied by every algebra.

Each check draws a batch of random elements, evaluates both sides of an
identity and returns the largest relative discrepancy.  :func:`run_suite`
collects them into a report with pass/fail flags.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .jordan import Algebra

ALGEBRA_TOL = 1e-9
DET_TOL = 1e-8
FD_TOL = 1e-4
FD_STEP = 1e-5


def _rel(lhs, rhs, axes=(-1,)):
    """Per-draw relative error ``|lhs - rhs| / max(|rhs|, tiny)``, maximized."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    num = np.sqrt(np.sum((lhs - rhs) ** 2, axis=axes))
    den = np.sqrt(np.sum(rhs ** 2, axis=axes))
    return float(np.max(num / np.maximum(den, 1e-300)))


def _op_rel(lhs, rhs):
    """Operator-norm relative error, maximized over the batch."""
    num = np.linalg.norm(lhs - rhs, ord=2, axis=(-2, -1))
    den = np.linalg.norm(rhs, ord=2, axis=(-2, -1))
    return float(np.max(num / np.maximum(den, 1e-300)))


def _apply(op, x):
    return np.einsum("...ij,...j->...i", op, x)


# Each check has signature (alg, rng, n) -> max relative error.


def check_commutativity(alg, rng, n):
    x, y = alg.random_element(rng, n), alg.random_element(rng, n)
    return _rel(alg.mult(x, y), alg.mult(y, x))


def check_jordan_identity(alg, rng, n):
    x, y = alg.random_element(rng, n), alg.random_element(rng, n)
    xx = alg.mult(x, x)
    return _rel(alg.mult(x, alg.mult(xx, y)), alg.mult(xx, alg.mult(x, y)))


def check_unit_law(alg, rng, n):
    x = alg.random_element(rng, n)
    return _rel(alg.mult(alg.identity, x), x)


def check_trace_associativity(alg, rng, n):
    x, y, z = (alg.random_element(rng, n) for _ in range(3))
    lhs = alg.inner(x, alg.mult(y, z))
    rhs = alg.inner(alg.mult(x, y), z)
    scale = alg.norm(x) * alg.norm(y) * alg.norm(z)
    return float(np.max(np.abs(lhs - rhs) / scale))


def check_lmul_self_adjoint(alg, rng, n):
    lx = alg.lmul_matrix(alg.random_element(rng, n))
    return _op_rel(np.swapaxes(lx, -1, -2), lx)


def check_quad_inverse(alg, rng, n):
    x = alg.random_cone_element(rng, n)
    return _op_rel(np.linalg.inv(alg.quad_matrix(x)), alg.quad_matrix(alg.inv(x)))


def check_quad_fixes_inverse(alg, rng, n):
    x = alg.random_cone_element(rng, n)
    return _rel(alg.quad_apply(x, alg.inv(x)), x)


def check_fundamental_formula(alg, rng, n):
    x, y = alg.random_cone_element(rng, n), alg.random_cone_element(rng, n)
    py = alg.quad_matrix(y)
    return _op_rel(alg.quad_matrix(alg.quad_apply(y, x)), py @ alg.quad_matrix(x) @ py)


def check_inverse_of_quad(alg, rng, n):
    x, y = alg.random_cone_element(rng, n), alg.random_cone_element(rng, n)
    return _rel(alg.inv(alg.quad_apply(x, y)), alg.quad_apply(alg.inv(x), alg.inv(y)))


def check_inverse_derivative(alg, rng, n):
    x = alg.random_cone_element(rng, n)
    h = alg.random_element(rng, n)
    h = h / alg.norm(h)[..., None]
    fd = (alg.inv(x + FD_STEP * h) - alg.inv(x - FD_STEP * h)) / (2 * FD_STEP)
    return _rel(fd, -alg.quad_apply(alg.inv(x), h))


def check_det_quad(alg, rng, n):
    x = alg.random_cone_element(rng, n)
    lhs = np.linalg.det(alg.quad_matrix(x))
    rhs = alg.det(x) ** (2 * alg.dim / alg.rank)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def check_det_quad_image(alg, rng, n):
    x, y = alg.random_cone_element(rng, n), alg.random_cone_element(rng, n)
    lhs = alg.det(alg.quad_apply(y, x))
    rhs = alg.det(y) ** 2 * alg.det(x)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def check_cone_preserved(alg, rng, n):
    """Returns the fraction of draws where ``P(x) y`` left the cone."""
    x = alg.random_cone_element(rng, n, spread=2.0)
    y = alg.random_cone_element(rng, n, spread=2.0)
    return float(np.mean(~alg.in_cone(alg.quad_apply(x, y))))


def check_quad_sum_inverse(alg, rng, n):
    a, b = alg.random_cone_element(rng, n), alg.random_cone_element(rng, n)
    ai, bi = alg.inv(a), alg.inv(b)
    rhs = alg.quad_matrix(ai) @ alg.quad_matrix(a + b) @ alg.quad_matrix(bi)
    return _op_rel(alg.quad_matrix(ai + bi), rhs)


def check_inverse_sum(alg, rng, n):
    a, b = alg.random_cone_element(rng, n), alg.random_cone_element(rng, n)
    lhs = alg.inv(a + alg.quad_apply(a, alg.inv(b))) + alg.inv(a + b)
    return _rel(lhs, alg.inv(a))


def check_exp_quad(alg, rng, n):
    x = alg.random_element(rng, n)
    return _op_rel(alg.quad_matrix(alg.exp(x)), expm(2.0 * alg.lmul_matrix(x)))


@dataclass(frozen=True)
class Identity:
    name: str
    check: object
    tol: float
    description: str


IDENTITIES = (
    Identity("commutativity", check_commutativity, ALGEBRA_TOL, "x.y = y.x"),
    Identity("jordan_identity", check_jordan_identity, ALGEBRA_TOL, "x.((x.x).y) = (x.x).(x.y)"),
    Identity("unit_law", check_unit_law, ALGEBRA_TOL, "e.x = x"),
    Identity("trace_associativity", check_trace_associativity, ALGEBRA_TOL, "<x, y.z> = <x.y, z>"),
    Identity("lmul_self_adjoint", check_lmul_self_adjoint, ALGEBRA_TOL, "L(x)^T = L(x)"),
    Identity("quad_inverse", check_quad_inverse, ALGEBRA_TOL, "P(x)^-1 = P(x^-1)"),
    Identity("quad_fixes_inverse", check_quad_fixes_inverse, ALGEBRA_TOL, "P(x) x^-1 = x"),
    Identity("fundamental_formula", check_fundamental_formula, ALGEBRA_TOL,
             "P(P(y)x) = P(y)P(x)P(y)"),
    Identity("inverse_of_quad", check_inverse_of_quad, ALGEBRA_TOL,
             "(P(x)y)^-1 = P(x^-1)y^-1"),
    Identity("inverse_derivative", check_inverse_derivative, FD_TOL,
             "d(x^-1)[h] = -P(x^-1)h (central differences)"),
    Identity("det_quad", check_det_quad, DET_TOL, "det P(x) = det(x)^(2 dim/r)"),
    Identity("det_quad_image", check_det_quad_image, DET_TOL, "det(P(y)x) = det(y)^2 det(x)"),
    Identity("cone_preserved", check_cone_preserved, 0.0, "P(x)y lies in the cone"),
    Identity("quad_sum_inverse", check_quad_sum_inverse, ALGEBRA_TOL,
             "P(a^-1 + b^-1) = P(a^-1)P(a+b)P(b^-1)"),
    Identity("inverse_sum", check_inverse_sum, ALGEBRA_TOL,
             "(a + P(a)b^-1)^-1 + (a+b)^-1 = a^-1"),
    Identity("exp_quad", check_exp_quad, DET_TOL, "P(exp x) = expm(2 L(x))"),
)


def run_suite(alg: Algebra, rng, draws=1000, only=None):
    """Run every identity on ``draws`` random draws.

    Returns
    -------
    dict
        ``{"algebra", "draws", "passed", "identities": [{name, max_rel_error,
        tol, passed, description}, ...]}``.
    """
    rows = []
    for ident in IDENTITIES:
        if only is not None and ident.name not in only:
            continue
        err = ident.check(alg, rng, draws)
        ok = bool(np.isfinite(err) and err <= ident.tol)
        rows.append({"name": ident.name, "max_rel_error": err, "tol": ident.tol,
                     "passed": ok, "description": ident.description})
    return {"algebra": alg.to_config(), "draws": draws,
            "passed": all(r["passed"] for r in rows), "identities": rows}


def jacobian_check(alg: Algebra, rng, points=50, step=1e-5):
    """Finite-difference Jacobian of ``(x, y) -> (P(y)x + y, y + x^-1)``.

    Compares ``|det J|`` with ``det(y + x^-1)^(2 dim/r)`` and returns the
    largest relative error over ``points`` random points.
    """
    d = alg.dim
    x = alg.random_cone_element(rng, points)
    y = alg.random_cone_element(rng, points)

    def fmap(x, y):
        return np.concatenate([alg.quad_apply(y, x) + y, y + alg.inv(x)], axis=-1)

    jac = np.empty((points, 2 * d, 2 * d))
    eye = np.eye(2 * d)
    for k in range(2 * d):
        dx, dy = eye[k, :d] * step, eye[k, d:] * step
        jac[:, :, k] = (fmap(x + dx, y + dy) - fmap(x - dx, y - dy)) / (2 * step)
    lhs = np.abs(np.linalg.det(jac))
    rhs = np.abs(alg.det(y + alg.inv(x))) ** (2 * d / alg.rank)
    return float(np.max(np.abs(lhs - rhs) / rhs))


def corrupted(alg: Algebra, eps=1e-3) -> Algebra:
    """Copy of ``alg`` whose product is perturbed by ``eps <x, y> u``.

    The perturbed product stays commutative and bilinear but breaks the Jordan
    identity; used to exercise the failure path of the identity suite.
    """
    base = type(alg)
    u = np.zeros(alg.dim)
    u[-1] = 1.0

    def mult(self, x, y):
        z = base.mult(self, x, y)
        return z + eps * self.inner(x, y)[..., None] * u

    cls = type("Corrupted" + base.__name__, (base,), {"mult": mult,
                                                     "quad_apply": Algebra.quad_apply})
    return cls(alg.kind, alg.size, alg.rank, alg.dim, alg.degree)
