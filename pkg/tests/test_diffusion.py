import numpy as np
import pytest
from scipy.linalg import expm

from conekit import diffusion
from conekit.errors import UsageError
from conekit.jordan import element, make_algebra
from conekit.rng import stream


@pytest.mark.parametrize("kind,size", [("sym_real", 3), ("lorentz", 4)])
def test_group_increment_is_exp_of_twice_lmul(kind, size):
    alg = make_algebra(kind, size)
    v = alg.random_element(stream(1, kind))
    op = diffusion.group_increment(element(alg, v))
    np.testing.assert_allclose(op.matrix, expm(2 * alg.lmul_matrix(v)), rtol=1e-8, atol=1e-10)
    inv = diffusion.group_increment(element(alg, -v))
    np.testing.assert_allclose(op.matrix @ inv.matrix, np.eye(alg.dim), atol=1e-10)
    zero = diffusion.group_increment(element(alg, np.zeros(alg.dim)))
    np.testing.assert_allclose(zero.matrix, np.eye(alg.dim), atol=1e-14)


@pytest.mark.parametrize("kind,size", [("sym_real", 3), ("lorentz", 5), ("real", None)])
def test_p_basis_orthonormal(kind, size):
    alg = make_algebra(kind, size)
    basis = np.array([b.coords for b in diffusion.p_basis(alg)])
    gram = np.array([[alg.inner(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(alg.dim), atol=1e-13)
    assert np.linalg.matrix_rank(basis) == alg.dim


def test_real_log_y_moments():
    alg = make_algebra("real")
    p, T = 1.5, 2.0
    path = diffusion.simulate_hypo_bm(alg, p, T, 0.01, 20000, stream(2))
    logy = np.log(path.y[-1, :, 0])
    assert abs(logy.mean() + 2 * p * T) < 4 * np.sqrt(4 * T / 20000)
    assert logy.var() == pytest.approx(4 * T, rel=0.05)


def test_real_derived_processes():
    # in rank one g^* = 1/y, so ell = (ell0 + iota)/y and lam = (ell0 + iota)^2 lam0 / (ell0^2 y)
    alg = make_algebra("real")
    ell0, lam0 = np.array([2.0]), np.array([3.0])
    path = diffusion.simulate_hypo_bm(alg, 1.0, 1.0, 0.01, 50, stream(3), ell0, lam0)
    y, iota = path.y[-1, :, 0], path.iota[-1, :, 0]
    np.testing.assert_allclose(path.ell[-1, :, 0], (2 + iota) / y, rtol=1e-12)
    np.testing.assert_allclose(path.lam[-1, :, 0], (2 + iota) ** 2 * 3 / (4 * y), rtol=1e-12)


@pytest.mark.parametrize("kind,size", [("sym_real", 2), ("lorentz", 4)])
def test_adjoint_bookkeeping(kind, size):
    alg = make_algebra(kind, size)
    path = diffusion.simulate_hypo_bm(alg, 1.0, 1.0, 0.01, 20, stream(4, kind), track_g=True)
    assert path.adjoint_error <= 1e-6


def test_factor_tracker_matches_dense():
    alg = make_algebra("sym_real", 3)
    rng = stream(5)
    dense, factor = diffusion._DenseTracker(alg, 4), diffusion._FactorTracker(alg, 4)
    for _ in range(20):
        v = 0.1 * rng.standard_normal((4, alg.dim))
        dense.step(v)
        factor.step(v)
    np.testing.assert_allclose(factor.operator(), dense.operator(), rtol=1e-10, atol=1e-12)
    z = alg.random_element(rng, 4)
    np.testing.assert_allclose(factor.solve(factor.apply(z)), z, atol=1e-10)


def test_time_zero_initial_conditions():
    alg = make_algebra("lorentz", 3)
    ell0 = np.array([3.0, 1.0, 0.5])
    lam0 = np.array([2.0, 0.0, 1.0])
    path = diffusion.simulate_hypo_bm(alg, 1.0, 0.1, 0.01, 3, stream(6), ell0, lam0)
    np.testing.assert_allclose(path.y[0], np.broadcast_to(alg.identity, (3, 3)))
    np.testing.assert_allclose(path.ell[0], np.broadcast_to(ell0, (3, 3)))
    np.testing.assert_allclose(path.lam[0], np.broadcast_to(lam0, (3, 3)))


def test_halving_step_is_consistent():
    alg = make_algebra("sym_real", 2)
    h, T, reps = 0.01, 1.0, 200
    fine, coarse = diffusion.coupled_noise(stream(7), int(T / h) * 2, reps, alg.dim)
    a = diffusion.simulate_hypo_bm(alg, 1.0, T, h, reps, None, noise=coarse)
    b = diffusion.simulate_hypo_bm(alg, 1.0, T, h / 2, reps, None, noise=fine)
    err = np.linalg.norm(a.y[-1] - b.y[-1], axis=-1) / np.linalg.norm(b.y[-1], axis=-1)
    assert np.median(err) < 0.05


def test_coupled_noise_needs_even_count():
    with pytest.raises(UsageError):
        diffusion.coupled_noise(stream(8), 3, 1, 1)


def test_lorentz_factorize_needs_lorentz():
    alg = make_algebra("sym_real", 2)
    with pytest.raises(UsageError):
        diffusion.lorentz_factorize(alg, alg.identity[None])


def test_lorentz_factorize_unit_form():
    alg = make_algebra("lorentz", 4)
    path = diffusion.simulate_hypo_bm(alg, 2.0, 1.0, 0.01, 100, stream(9), metric="euclidean",
                                      derived=False)
    fac = diffusion.lorentz_factorize(alg, path.y[-1], t=1.0, p=2.0)
    assert fac.form_error < 1e-12
    assert np.all(fac.R >= 0)


def test_predicted_exponent():
    assert diffusion.predicted_exponent(make_algebra("real"), 1.0) == -2.0
    assert diffusion.predicted_exponent(make_algebra("lorentz", 4), 2.0) == -2.0


def test_lyapunov_real():
    res = diffusion.lyapunov_probe(make_algebra("real"), 1.0, T=20, reps=100, rng=stream(10))
    assert abs(res.exponent - res.predicted) < 0.15 * abs(res.predicted)
