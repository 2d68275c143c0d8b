import pytest

from conekit.identities import IDENTITIES, corrupted, jacobian_check, run_suite
from conekit.jordan import make_algebra
from conekit.rng import stream


@pytest.mark.parametrize("kind,size", [("real", None), ("sym_real", 2), ("lorentz", 5)])
def test_suite_passes(kind, size):
    report = run_suite(make_algebra(kind, size), stream(1, "suite"), draws=200)
    assert report["passed"], [r for r in report["identities"] if not r["passed"]]
    assert len(report["identities"]) == len(IDENTITIES)


def test_suite_subset():
    report = run_suite(make_algebra("sym_real", 2), stream(1), draws=10, only={"unit_law"})
    assert [r["name"] for r in report["identities"]] == ["unit_law"]


def test_corrupted_product_breaks_jordan_identity():
    alg = corrupted(make_algebra("sym_real", 3), 1e-3)
    report = run_suite(alg, stream(2), draws=100)
    failed = {r["name"] for r in report["identities"] if not r["passed"]}
    assert not report["passed"]
    assert "jordan_identity" in failed
    assert "commutativity" not in failed


@pytest.mark.parametrize("kind,size", [("sym_real", 2), ("lorentz", 4)])
def test_jacobian(kind, size):
    assert jacobian_check(make_algebra(kind, size), stream(3), points=20) < 1e-4
