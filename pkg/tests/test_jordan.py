import numpy as np
import pytest
from scipy.linalg import expm

from conekit.errors import ConfigError, DomainError, UsageError
from conekit.jordan import (
    apply_rotation,
    element,
    functional_calculus,
    identity_element,
    inner,
    jordan_product,
    lmul,
    make_algebra,
    quad_rep,
    spectral_decompose,
)
from conekit.rng import stream

ALGEBRAS = [("real", None), ("sym_real", 2), ("sym_real", 3), ("sym_real", 5),
            ("lorentz", 3), ("lorentz", 4), ("lorentz", 8)]


@pytest.mark.parametrize("kind,size,rank,dim,degree", [
    ("real", None, 1, 1, 0),
    ("sym_real", 2, 2, 3, 1),
    ("sym_real", 3, 3, 6, 1),
    ("lorentz", 3, 2, 3, 1),
    ("lorentz", 4, 2, 4, 2),
])
def test_structure_constants(kind, size, rank, dim, degree):
    alg = make_algebra(kind, size)
    assert (alg.rank, alg.dim, alg.degree) == (rank, dim, degree)
    assert alg.dim == alg.rank + alg.degree * alg.rank * (alg.rank - 1) // 2


def test_weyl_coefficients():
    alg = make_algebra("sym_real", 3)
    np.testing.assert_allclose(alg.weyl_coeffs, [-0.5, 0.0, 0.5])


@pytest.mark.parametrize("kind,size", [("octonion", 3), ("sym_real", 0), ("lorentz", 2),
                                       ("sym_real", 2.5)])
def test_bad_algebra(kind, size):
    with pytest.raises(ConfigError):
        make_algebra(kind, size)


def test_lorentz_square():
    alg = make_algebra("lorentz", 3)
    x = element(alg, [2, 1, 0])
    np.testing.assert_allclose(jordan_product(x, x).coords, [5, 4, 0])


def test_lorentz_spectral():
    alg = make_algebra("lorentz", 3)
    lam, frame = spectral_decompose(element(alg, [2, 1, 0]))
    np.testing.assert_allclose(lam, [3, 1])
    np.testing.assert_allclose(frame[0].coords, [0.5, 0.5, 0])
    np.testing.assert_allclose(frame[1].coords, [0.5, -0.5, 0])


def test_lorentz_inverse():
    alg = make_algebra("lorentz", 3)
    inv = functional_calculus(element(alg, [2, 1, 0]), "inverse")
    np.testing.assert_allclose(inv.coords, np.array([2, -1, 0]) / 3)


def test_lorentz_rotation():
    alg = make_algebra("lorentz", 3)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(apply_rotation(element(alg, [2, 1, 0]), rot).coords, [2, 0, 1],
                               atol=1e-15)


def test_symreal_quad_is_sandwich():
    alg = make_algebra("sym_real", 2)
    out = quad_rep(element(alg, np.diag([2.0, 3.0])))(element(alg, np.ones((2, 2))))
    np.testing.assert_allclose(out.matrix(), [[4, 6], [6, 9]])


def test_anticommuting_pair():
    alg = make_algebra("sym_real", 2)
    x = element(alg, [[0.0, 1.0], [1.0, 0.0]])
    y = element(alg, [[1.0, 0.0], [0.0, -1.0]])
    np.testing.assert_allclose(jordan_product(x, y).matrix(), np.zeros((2, 2)), atol=1e-15)


def test_diagonal_spectral():
    alg = make_algebra("sym_real", 2)
    lam, frame = spectral_decompose(element(alg, np.diag([5.0, -2.0])))
    np.testing.assert_allclose(lam, [5, -2])
    np.testing.assert_allclose(frame[0].matrix(), np.diag([1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(frame[1].matrix(), np.diag([0.0, 1.0]), atol=1e-15)


def test_repeated_eigenvalues_merge():
    alg = make_algebra("sym_real", 3)
    lam, _ = spectral_decompose(element(alg, np.diag([2.0, 2.0 + 1e-13, 1.0])))
    assert lam[0] == lam[1]


def test_real_lmul():
    alg = make_algebra("real")
    np.testing.assert_allclose(lmul(element(alg, [3.0])).matrix, [[3.0]])


def test_symreal_inner_is_matrix_trace():
    alg = make_algebra("sym_real", 3)
    rng = stream(1, "inner")
    x, y = alg.random_element(rng), alg.random_element(rng)
    assert inner(element(alg, x), element(alg, y)) == pytest.approx(
        np.trace(alg.to_matrix(x) @ alg.to_matrix(y)), rel=1e-12)


@pytest.mark.parametrize("kind,size", ALGEBRAS)
def test_identity_and_quad_of_identity(kind, size):
    alg = make_algebra(kind, size)
    rng = stream(2, kind, size or 1)
    x = alg.random_element(rng, 10)
    np.testing.assert_allclose(alg.mult(alg.identity, x), x, atol=1e-12)
    np.testing.assert_allclose(alg.quad_apply(x, alg.identity), alg.square(x), atol=1e-12)
    assert alg.trace(alg.identity) == pytest.approx(alg.rank)


@pytest.mark.parametrize("kind,size", ALGEBRAS)
def test_exp_log_roundtrip(kind, size):
    alg = make_algebra(kind, size)
    x = alg.random_cone_element(stream(3, kind, size or 1), 20)
    np.testing.assert_allclose(alg.exp(alg.log(x)), x, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(alg.square(alg.sqrt(x)), x, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind,size", ALGEBRAS)
def test_quad_of_exp_matches_expm(kind, size):
    alg = make_algebra(kind, size)
    x = alg.random_element(stream(4, kind, size or 1))
    np.testing.assert_allclose(alg.quad_matrix(alg.exp(x)), expm(2 * alg.lmul_matrix(x)),
                               rtol=1e-8, atol=1e-10)


def test_log_outside_cone_is_domain_error():
    alg = make_algebra("sym_real", 2)
    with pytest.raises(DomainError):
        functional_calculus(element(alg, np.diag([1.0, -1.0])), "log")


def test_inverse_of_singular_is_domain_error():
    alg = make_algebra("lorentz", 3)
    with pytest.raises(DomainError):
        functional_calculus(element(alg, [1.0, 1.0, 0.0]), "inverse")


def test_algebra_mismatch():
    with pytest.raises(UsageError):
        jordan_product(identity_element(make_algebra("sym_real", 2)),
                       identity_element(make_algebra("lorentz", 3)))


def test_wrong_coordinate_count():
    with pytest.raises(UsageError):
        element(make_algebra("lorentz", 4), [1.0, 0.0])
