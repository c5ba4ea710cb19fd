import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import SCALAR, adj, random_plant, rel_err
from regretctl.errors import InfeasibleError
from regretctl.factorization import (
    all_factors,
    factor_gamma,
    factor_M,
    factor_nabla,
    factor_S,
    factor_W,
    gamma_factors,
)
from regretctl.lti import unit_circle
from regretctl.solvers import solve_dare_control
from regretctl.sysmodel import StateSpacePlant, plant_response

P_SCALAR = 1.1327822185373187
NO_DISTURBANCE = StateSpacePlant([[0.5]], [[0.0]], [[1.0]], [[1.0]], [[1.0]])
NO_CONTROL = StateSpacePlant([[0.5]], [[1.0]], [[0.0]], [[1.0]], [[1.0]])


def _inverse_error(fac, n=128):
    z = unit_circle(n)
    Phi = fac.factor_ss().evaluate(z)
    return np.max(np.abs(fac.inverse_ss().evaluate(z) @ Phi - np.eye(Phi.shape[-1])))


def test_W_without_disturbance_is_identity():
    W = factor_W(NO_DISTURBANCE)
    assert W.P[0, 0] == 0.0
    np.testing.assert_allclose(W.R_full, np.eye(1))
    np.testing.assert_allclose(W.factor_ss().evaluate(unit_circle(16)), 1.0)


def test_W_scalar_closed_form():
    assert factor_W(SCALAR).R_full[0, 0] == pytest.approx(1 + P_SCALAR)


def test_W_identity_random_plant():
    p = random_plant(np.random.default_rng(10))
    z = unit_circle(64)
    W = factor_W(p).factor_ss().evaluate(z)
    P21 = plant_response(p, z)["P21"]
    assert rel_err(W @ adj(W), np.eye(p.p) + P21 @ adj(P21)) < 1e-8


def test_S_without_control_is_identity():
    S = factor_S(NO_CONTROL)
    np.testing.assert_allclose(S.factor_ss().evaluate(unit_circle(16)), 1.0)


def test_S_scalar_and_inverse():
    S = factor_S(SCALAR)
    assert S.R_full[0, 0] == pytest.approx(1 + P_SCALAR)
    assert _inverse_error(S) <= 1e-10


def test_gamma_without_disturbance_is_constant():
    G = factor_gamma(NO_DISTURBANCE, 3.0)
    np.testing.assert_allclose(G.R_full, [[9.0]])
    np.testing.assert_allclose(G.factor_ss().evaluate(unit_circle(16)), 3.0)


def test_gamma_scalar_fixed_point():
    # cost gamma^2 H'H + L'L = 2 with R = gamma^2 = 1
    p = 0.0
    for _ in range(500):
        p = 0.25 * p + 2.0 - (0.5 * p) ** 2 / (1.0 + p)
    assert factor_gamma(SCALAR, 1.0).P[0, 0] == pytest.approx(p, abs=1e-12)


def test_gamma_large_level_limit():
    pl = random_plant(np.random.default_rng(11))
    g = 1e3
    reduced = solve_dare_control(pl.F, pl.G1, pl.H.T @ pl.H, np.eye(pl.n_w))
    np.testing.assert_allclose(factor_gamma(pl, g).P / g**2, reduced.P, rtol=1e-5, atol=1e-7)


def test_nabla_without_disturbance_is_identity():
    N = factor_nabla(NO_DISTURBANCE, factor_gamma(NO_DISTURBANCE, 2.0))
    np.testing.assert_allclose(N.P, 0.0)
    np.testing.assert_allclose(N.factor_ss().evaluate(unit_circle(16)), 1.0)


def test_nabla_scalar_is_indefinite():
    N = factor_nabla(SCALAR, factor_gamma(SCALAR, 1.0))
    assert N.P[0, 0] < 0
    assert _inverse_error(N) <= 1e-10
    z = unit_circle(128)
    P = plant_response(SCALAR, z)
    V = 1 + np.abs(P["P21"]) ** 2
    target = 1 + np.abs(P["P11"]) ** 2 / V
    Nz = N.factor_ss().evaluate(z)
    assert rel_err(1 / np.abs(Nz) ** 2, target) < 1e-8


def test_M_without_control_is_scaled_identity():
    M = factor_M(NO_CONTROL, 2.0, factor_nabla(NO_CONTROL, factor_gamma(NO_CONTROL, 2.0)))
    np.testing.assert_allclose(M.factor.factor_ss().evaluate(unit_circle(16)), 0.5)


def test_M_scalar_identity_and_inverse():
    g = 2.0
    _, N, M = gamma_factors(SCALAR, g)
    z = unit_circle(128)
    P = plant_response(SCALAR, z)
    Ni = N.inverse_ss().evaluate(z)
    target = (1 + adj(P["P12"]) @ adj(Ni) @ Ni @ P["P12"]) / g**2
    Mz = M.factor.factor_ss().evaluate(z)
    assert rel_err(adj(Mz) @ Mz, target) < 1e-8
    assert _inverse_error(M.factor) <= 1e-10


def test_closed_loops_are_stable():
    fs = all_factors(random_plant(np.random.default_rng(12)), 50.0)
    for fac in fs.all_factors():
        assert fac.riccati.closed_loop_spectral_radius < 1


def test_factors_exist_for_every_positive_gamma():
    # Gamma'Gamma, (Nabla Nabla')^{-1} and M'M are positive definite for any gamma > 0,
    # so only the Nehari condition can make a level infeasible
    for g in (1e-2, 1e-1, 1.0, 1e2):
        fs = all_factors(SCALAR, g)
        assert max(f.riccati.residual for f in fs.all_factors()) <= 1e-9


def _exists(p, g):
    try:
        gamma_factors(p, g)
    except InfeasibleError:
        return False
    return True


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_factor_existence_is_monotone_in_gamma(seed):
    p = random_plant(np.random.default_rng(seed))
    flags = [_exists(p, g) for g in np.logspace(-1, 2, 12)]
    first = flags.index(True) if True in flags else len(flags)
    assert all(flags[first:])
