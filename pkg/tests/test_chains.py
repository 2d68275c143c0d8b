import numpy as np
import pytest

from conekit import chains
from conekit.errors import UsageError
from conekit.jordan import make_algebra
from conekit.rng import stream


def _near_identity(alg, steps, reps, rng, spread=0.3):
    return alg.exp(spread * alg.random_element(rng, (steps, reps)))


def _rel(a, b):
    return np.max(np.linalg.norm(a - b, axis=-1) / np.linalg.norm(b, axis=-1))


def test_real_recursion_unrolled():
    alg = make_algebra("real")
    w = np.array([[[2.0]], [[3.0]]])
    tr = chains.run_chain(alg, w)
    assert tr.L[1, 0, 0] == 2.0
    assert tr.L[2, 0, 0] == 3.0 ** 2 * 2.0 + 3.0
    assert tr.Lambda[1, 0, 0] == 1.0
    # Lambda_2 = (w_2 + 1/L_1)^2 Lambda_1
    assert tr.Lambda[2, 0, 0] == pytest.approx((3.0 + 0.5) ** 2)
    assert tr.I[2, 0, 0] == pytest.approx(1 / 2 + 1 / (2 * 2 * 3))


@pytest.mark.parametrize("kind,size", [("sym_real", 2), ("lorentz", 4), ("real", None)])
def test_closed_forms_scaled(kind, size):
    alg = make_algebra(kind, size)
    rng = stream(1, kind)
    n = 64
    w = alg.exp(alg.random_element(rng, (100, 5)) / np.sqrt(n))
    ell0 = alg.random_cone_element(rng)
    lam0 = alg.random_cone_element(rng)
    tr = chains.run_chain(alg, w, n, ell0, lam0)
    for k in (1, 50, 100):
        assert _rel(chains.closed_form_L(alg, w, k, n, ell0), tr.L[k]) < 1e-8
        assert _rel(chains.closed_form_Lambda(alg, w, k, n, ell0, lam0), tr.Lambda[k]) < 1e-8
        assert _rel(chains.closed_form_I(alg, w, k, n), tr.I[k]) < 1e-8


def test_closed_forms_unscaled_short():
    alg = make_algebra("sym_real", 2)
    w = _near_identity(alg, 8, 5, stream(2))
    tr = chains.run_chain(alg, w)
    for k in (1, 4, 8):
        assert _rel(chains.closed_form_L(alg, w, k), tr.L[k]) < 1e-8
        assert _rel(chains.closed_form_Lambda(alg, w, k), tr.Lambda[k]) < 1e-8


def test_block_oracle_unscaled():
    alg = make_algebra("sym_real", 2)
    w = _near_identity(alg, 10, 5, stream(3))
    tr = chains.run_chain(alg, w)
    lam, L, I = chains.block_oracle(alg, w)
    assert _rel(L[1:], tr.L[1:]) < 1e-8
    assert _rel(lam[1:], tr.Lambda[1:]) < 1e-8
    assert _rel(I[1:], tr.I[1:]) < 1e-8


def test_block_oracle_scaled():
    alg = make_algebra("sym_real", 3)
    rng = stream(4)
    w = _near_identity(alg, 100, 4, rng, spread=0.1)
    ell0, lam0 = alg.random_cone_element(rng), alg.random_cone_element(rng)
    tr = chains.run_chain(alg, w, 16, ell0, lam0)
    lam, L, I = chains.block_oracle(alg, w, 16, ell0, lam0)
    assert _rel(L, tr.L) < 1e-8
    assert _rel(lam, tr.Lambda) < 1e-8


def test_block_oracle_needs_symreal():
    alg = make_algebra("lorentz", 3)
    with pytest.raises(UsageError):
        chains.block_oracle(alg, np.ones((1, 1, 3)))


def test_lambda0_undefined_when_unscaled():
    alg = make_algebra("sym_real", 2)
    with pytest.raises(UsageError):
        chains.closed_form_Lambda(alg, np.ones((1, 1, 3)), 0)


def test_increments_must_be_in_cone():
    alg = make_algebra("sym_real", 2)
    with pytest.raises(UsageError):
        chains.run_chain(alg, np.array([[[1.0, -1.0, 0.0]]]))


def test_scaled_start_must_be_in_cone():
    alg = make_algebra("real")
    with pytest.raises(UsageError):
        chains.run_chain(alg, np.ones((1, 1, 1)), 1, np.array([-1.0]))


def test_record_stride():
    alg = make_algebra("real")
    tr = chains.run_chain(alg, 1 + np.zeros((10, 2, 1)), record_stride=4)
    np.testing.assert_array_equal(tr.steps, [0, 4, 8, 10])


def test_gig_increments_real_exact_shape():
    alg = make_algebra("real")
    w = chains.gig_increments(alg, 2.0, 4, 3, 7, stream(5))
    assert w.shape == (3, 7, 1) and np.all(w > 0)


def test_dufresne_plateau_real():
    res = chains.dufresne_estimate(make_algebra("real"), 2.0, 400, 2000, stream(6))
    assert np.median(res.last_increment_norm) < 1e-8
    assert not res.diverged.any()


def test_divergence_below_threshold():
    # the real threshold is dim/r - 1 = 0
    ratio, res = chains.growth_ratio(make_algebra("real"), -0.1, stream(7), reps=2000)
    assert ratio > 10


def test_dufresne_warns_below_threshold():
    with pytest.warns(RuntimeWarning):
        chains.dufresne_estimate(make_algebra("real"), -0.5, 5, 10, stream(8))


def test_small_step_needs_negative_regime():
    with pytest.raises(UsageError):
        chains.stationarity_small_step(make_algebra("sym_real", 2), 1.0, 16, 10, stream(9))


def test_intertwining_shapes():
    alg = make_algebra("real")
    lhs, rhs = chains.intertwining_experiment(alg, alg.identity, 2.0, 50, stream(10))
    assert lhs.shape == rhs.shape == (50, 2)
