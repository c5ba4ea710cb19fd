import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import random_stable_ss
from regretctl.decomposition import AnticausalPart
from regretctl.lti import spectral_radius, unit_circle
from regretctl.nehari import gramians, solve_nehari, solve_nehari_strictly_causal


def _scalar(h):
    return AnticausalPart(np.array([[h]]), np.array([[0.5]]), np.array([[1.0]]))


def _random_part(rng, k=3, outputs=2, inputs=2, radius=0.8):
    F = rng.normal(size=(k, k))
    F *= radius / spectral_radius(F)
    return AnticausalPart(rng.normal(size=(outputs, k)), F, rng.normal(size=(k, inputs)))


def _sup(E):
    return float(np.max(np.linalg.svd(E, compute_uv=False)[:, 0]))


def test_zero_part():
    sol = solve_nehari(_scalar(0.0))
    assert sol.hankel_norm == 0.0
    np.testing.assert_array_equal(sol.Z, 0.0)
    assert np.max(np.abs(sol.C_N.evaluate(unit_circle(16)))) == 0.0


def test_scalar_feasible_case():
    sol = solve_nehari(_scalar(0.5), level=1.0)
    assert sol.Z[0, 0] == pytest.approx(1 / 3)
    assert sol.Pi[0, 0] == pytest.approx(4 / 3)
    assert sol.hankel_norm == pytest.approx(2 / 3)
    assert sol.feasible and sol.margin == pytest.approx(1 / 3)


def test_scalar_infeasible_case():
    sol = solve_nehari(_scalar(1.0), level=None)
    assert sol.Z[0, 0] == pytest.approx(4 / 3)
    assert sol.hankel_norm == pytest.approx(4 / 3)
    assert not sol.feasible


@pytest.mark.parametrize("h", [0.5, 1.0])
def test_optimal_level_error_is_hankel_norm(h):
    A = _scalar(h)
    sol = solve_nehari(A)
    z = unit_circle(2048)
    err = np.abs(sol.C_N.evaluate(z) - A.evaluate(z))
    # the optimal error is all-pass
    np.testing.assert_allclose(err, sol.hankel_norm, rtol=1e-9)


def test_suboptimal_level_meets_bound():
    A = _random_part(np.random.default_rng(31))
    sol = solve_nehari(A)
    loose = solve_nehari(A, level=1.5 * sol.hankel_norm)
    z = unit_circle(4096)
    assert _sup(loose.C_N.evaluate(z) - A.evaluate(z)) <= 1.5 * sol.hankel_norm * (1 + 1e-9)
    assert spectral_radius(loose.F_N) < 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_gramians_symmetric_psd(seed):
    A = _random_part(np.random.default_rng(seed), k=4)
    Z, Pi, hankel, res = gramians(A)
    for X in (Z, Pi):
        np.testing.assert_allclose(X, X.T, atol=1e-12)
        assert np.linalg.eigvalsh((X + X.T) / 2).min() >= -1e-10
    assert max(res.values()) <= 1e-10
    assert hankel >= 0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_no_causal_candidate_beats_hankel_norm(seed):
    rng = np.random.default_rng(seed)
    A = _random_part(rng)
    hankel = solve_nehari(A).hankel_norm
    z = unit_circle(2048)
    C = random_stable_ss(rng, int(rng.integers(1, 5)), 2, 2)
    assert _sup(C.evaluate(z) - A.evaluate(z)) >= hankel - 1e-3


def test_strictly_causal_zero_part():
    A = AnticausalPart(np.zeros((1, 1)), np.array([[0.5]]), np.ones((1, 1)), shift=True)
    sol = solve_nehari_strictly_causal(A, level=1.0)
    assert np.max(np.abs(sol.C_N.evaluate(unit_circle(16)))) == 0.0


def test_strictly_causal_has_no_feedthrough():
    A = _random_part(np.random.default_rng(32))
    A.shift = True
    sol = solve_nehari_strictly_causal(A, level=2.0)
    assert np.all(sol.C_N.markov(1)[0] == 0.0)


def test_strictly_causal_shift_relation_scalar():
    A_bar = AnticausalPart(np.array([[0.5]]), np.array([[0.5]]), np.array([[1.0]]), shift=True)
    sc = solve_nehari_strictly_causal(A_bar, level=1.0)
    causal = solve_nehari(_scalar(0.5), level=1.0)
    z = unit_circle(256)
    np.testing.assert_allclose(sc.C_N.evaluate(z), causal.C_N.evaluate(z) / z[:, None, None], atol=1e-9)
