"""H2 (LQG) and H-infinity measurement-feedback baselines.

Both return feedback controllers ``u = K y``. The performance channel is
``(w, v) -> (s, u)``, the same closed loop the regret metrics use.
"""
from __future__ import annotations

import numpy as np

from .controller import ControllerRealization, feedback_to_youla
from .errors import InfeasibleError, InstabilityError, NumericalError
from .lti import StateSpace
from .solvers import solve_dare_control, solve_dare_filter
from .sysmodel import StateSpacePlant

LMI_EPS = 1e-8


def synthesize_h2(plant: StateSpacePlant) -> ControllerRealization:
    """LQG controller with the current (a posteriori) state estimate.

    ``u_i = -K_c xhat_{i|i}`` where ``K_c`` comes from the control DARE on
    ``(F, G2, L'L, I)`` and the estimate from the filter DARE on
    ``(F, H, G1 G1', I)``. The controller state is ``xhat_{i|i-1}``.
    """
    F, G1, G2, H, L = plant.F, plant.G1, plant.G2, plant.H, plant.L
    ctrl = solve_dare_control(F, G2, L.T @ L, np.eye(plant.m))
    filt = solve_dare_filter(F, H, G1 @ G1.T, np.eye(plant.p))
    Kc = ctrl.K
    Mf = filt.P @ H.T @ np.linalg.inv(filt.R_P)
    n = plant.n
    Fc = F - G2 @ Kc
    Imh = np.eye(n) - Mf @ H
    return ControllerRealization(Fc @ Imh, Fc @ Mf, -Kc @ Imh, -Kc @ Mf, kind="H2", form="feedback")


def _generalized(plant: StateSpacePlant):
    n, nw, m, p, q = plant.n, plant.n_w, plant.m, plant.p, plant.q
    B1 = np.hstack([plant.G1, np.zeros((n, p))])
    C1 = np.vstack([plant.L, np.zeros((m, n))])
    D12 = np.vstack([np.zeros((q, m)), np.eye(m)])
    D21 = np.hstack([np.zeros((p, nw)), np.eye(p)])
    return plant.F, B1, plant.G2, C1, D12, plant.H, D21


def _lmi_problem(plant: StateSpacePlant, level=None):
    import cvxpy as cp

    A, B1, B2, C1, D12, C2, D21 = _generalized(plant)
    n, m, p = plant.n, plant.m, plant.p
    nz, nwv = C1.shape[0], B1.shape[1]
    X = cp.Variable((n, n), symmetric=True)
    Y = cp.Variable((n, n), symmetric=True)
    Ah = cp.Variable((n, n))
    Bh = cp.Variable((n, p))
    Ch = cp.Variable((m, n))
    Dh = cp.Variable((m, p))
    g = cp.Variable() if level is None else level
    I = np.eye(n)
    bX = cp.bmat([[X, I], [I, Y]])
    bA = cp.bmat([[A @ X + B2 @ Ch, A + B2 @ Dh @ C2], [Ah, Y @ A + Bh @ C2]])
    bB = cp.bmat([[B1 + B2 @ Dh @ D21], [Y @ B1 + Bh @ D21]])
    bC = cp.bmat([[C1 @ X + D12 @ Ch, C1 + D12 @ Dh @ C2]])
    bD = D12 @ Dh @ D21
    Z = np.zeros
    big = cp.bmat([
        [bX, bA, bB, Z((2 * n, nz))],
        [bA.T, bX, Z((2 * n, nwv)), bC.T],
        [bB.T, Z((nwv, 2 * n)), g * np.eye(nwv), bD.T],
        [Z((nz, 2 * n)), bC, bD, g * np.eye(nz)],
    ])
    size = big.shape[0]
    cons = [(big + big.T) / 2 >> LMI_EPS * np.eye(size)]
    return cp, (X, Y, Ah, Bh, Ch, Dh, g), cons


def _solve(cp, prob):
    for solver in ("CLARABEL", "SCS"):
        if solver not in cp.installed_solvers():
            continue
        try:
            prob.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if prob.status in ("optimal", "optimal_inaccurate"):
            return True
    return False


def hinf_feasible(plant: StateSpacePlant, level: float) -> bool:
    """Whether some controller achieves ``||T||_inf < level`` (LMI test)."""
    cp, _, cons = _lmi_problem(plant, level)
    prob = cp.Problem(cp.Minimize(0), cons)
    return _solve(cp, prob) and prob.status == "optimal"


def _reconstruct(plant, X, Y, Ah, Bh, Ch, Dh):
    A, B1, B2, C1, D12, C2, D21 = _generalized(plant)
    n = plant.n
    Mm, Nt = np.eye(n), np.eye(n) - X @ Y  # M N' = I - X Y with M = I
    N = Nt.T
    DK = Dh
    MiT = np.linalg.inv(Mm).T
    CK = (Ch - DK @ C2 @ X) @ MiT
    Ni = np.linalg.inv(N)
    BK = Ni @ (Bh - Y @ B2 @ DK)
    AK = Ni @ (Ah - N @ BK @ C2 @ X - Y @ B2 @ CK @ Mm.T - Y @ (A + B2 @ DK @ C2) @ X) @ MiT
    return ControllerRealization(AK, BK, CK, DK, kind="Hinf", form="feedback")


def synthesize_hinf(plant: StateSpacePlant, tol: float = 1e-4, grid: int = 1024) -> ControllerRealization:
    """Measurement-feedback H-infinity controller near the optimal level.

    The optimal level is found by minimizing the level subject to the
    bounded-real LMI after the linearizing change of controller variables;
    the controller is then rebuilt from a solution at a slightly relaxed
    level and its closed-loop norm is checked on a frequency grid.
    """
    cp, (X, Y, Ah, Bh, Ch, Dh, g), cons = _lmi_problem(plant)
    prob = cp.Problem(cp.Minimize(g), cons)
    if not _solve(cp, prob):
        raise InfeasibleError(f"H-infinity LMI failed ({prob.status})")
    g_opt = float(g.value)
    # Rebuild from a strictly feasible point at a relaxed level. A pure
    # feasibility solve lands near the analytic centre, which keeps I - XY
    # well conditioned; widen the relaxation if the check on the grid fails.
    last = None
    for relax in (max(tol, 1e-3), 1e-2, 5e-2):
        level = g_opt * (1.0 + relax)
        cp, (X, Y, Ah, Bh, Ch, Dh, _), cons = _lmi_problem(plant, level)
        prob = cp.Problem(cp.Minimize(0), cons)
        if not _solve(cp, prob):
            last = InfeasibleError(f"H-infinity LMI at level {level:.6g} failed ({prob.status})")
            continue
        K = _reconstruct(plant, X.value, Y.value, Ah.value, Bh.value, Ch.value, Dh.value)
        K.gamma = level
        K.metadata["lmi_optimal_level"] = g_opt
        try:
            _verify_hinf(plant, K, level, grid)
        except NumericalError as exc:
            last = exc
            continue
        return K
    raise last


def _verify_hinf(plant, K, level, grid):
    from .evaluation import operator_norm_sq

    try:
        Q = feedback_to_youla(plant, K)
    except InstabilityError as exc:
        raise NumericalError(f"reconstructed H-infinity controller is not stabilizing: {exc}") from exc
    op = float(np.sqrt(operator_norm_sq(plant, Q, grid)))
    K.metadata["closed_loop_norm"] = op
    if op > level * (1 + 1e-3):
        raise NumericalError(f"H-infinity controller misses its level: {op:.6g} > {level:.6g}")


def closed_loop_ss(plant: StateSpacePlant, K: StateSpace) -> StateSpace:
    """Closed loop ``(w, v) -> (s, u)`` of a feedback controller."""
    F, G1, G2, H, L = plant.F, plant.G1, plant.G2, plant.H, plant.L
    n = plant.n
    A = np.block([
        [F + G2 @ K.D @ H, G2 @ K.C],
        [K.B @ H, K.A],
    ])
    B = np.block([
        [G1, G2 @ K.D],
        [np.zeros((K.n_states, plant.n_w)), K.B],
    ])
    C = np.block([
        [L, np.zeros((plant.q, K.n_states))],
        [K.D @ H, K.C],
    ])
    D = np.block([
        [np.zeros((plant.q, plant.n_w)), np.zeros((plant.q, plant.p))],
        [np.zeros((plant.m, plant.n_w)), K.D],
    ])
    return StateSpace(A, B, C, D)
