"""Split ``X = M^{1/2} Q2 W^{-/2}`` into causal and anticausal parts.

``X = C1 + C2 + A`` where ``C1``, ``C2`` are causal and ``A`` is strictly
anticausal,

    A(z) = H_A (z^{-1} I - F_A')^{-1} G_A.

The strictly-causal variant splits ``X = C1_bar + C2_bar + A_bar`` with
strictly causal ``C1_bar``, ``C2_bar`` and an ``A_bar`` supported on lags
``<= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .factorization import FactorSet
from .lti import StateSpace
from .solvers import solve_stein, solve_sylvester, sylvester_residual
from .sysmodel import StateSpacePlant


@dataclass
class AnticausalPart:
    """Anticausal block ``A(z) = s * H_A (z^{-1} I - F_A')^{-1} G_A``.

    ``s`` is 1 for the causal problem and ``z^{-1}`` when ``shift`` is set
    (strictly-causal problem).
    """

    H_A: np.ndarray
    F_A: np.ndarray
    G_A: np.ndarray
    U1: np.ndarray | None = None
    U2: np.ndarray | None = None
    U3: np.ndarray | None = None
    H_tilde_A: np.ndarray | None = None
    shift: bool = False

    def adjoint_ss(self) -> StateSpace:
        """``w -> H_A (w I - F_A')^{-1} G_A``, to be evaluated at ``w = z^{-1}``."""
        return StateSpace(self.F_A.T, self.G_A, self.H_A)

    def evaluate(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = self.adjoint_ss().evaluate(1.0 / z)
        if self.shift:
            vals = vals / z[:, None, None]
        return vals


@dataclass
class CausalPart:
    name: str
    realization: StateSpace

    def evaluate(self, z) -> np.ndarray:
        return self.realization.evaluate(z)


@dataclass
class Decomposition:
    C1: CausalPart
    C2: CausalPart
    A: AnticausalPart
    residuals: dict = field(default_factory=dict)
    strictly_causal: bool = False


def _common(plant: StateSpacePlant, fs: FactorSet):
    W, S = fs.W, fs.S
    F_S, F_W = S.F_cl, W.F_cl
    L, G1 = plant.L, plant.G1
    U1 = solve_stein(F_S.T, L.T @ np.linalg.solve(S.R_full, L))
    U2 = solve_sylvester(F_S, F_W.T, G1 @ G1.T)
    n = plant.n
    # F_A' = [[F_W', 0], [U1 G1 G1', F_S']]
    F_A = np.block([
        [F_W, G1 @ G1.T @ U1],
        [np.zeros((n, n)), F_S],
    ])
    Rw_ms = W.R_half_inv.T  # R_W^{-*/2}
    G_A0 = plant.H.T @ Rw_ms
    G_A = np.vstack([G_A0, np.zeros((n, plant.p))])
    res = {
        "U1": sylvester_residual(U1, F_S.T, F_S, L.T @ np.linalg.solve(S.R_full, L)),
        "U2": sylvester_residual(U2, F_S, F_W.T, G1 @ G1.T),
    }
    return U1, U2, F_A, G_A0, G_A, res


def decompose_X(plant: StateSpacePlant, fs: FactorSet) -> Decomposition:
    """Causal-problem decomposition of ``M^{1/2} Q2 W^{-/2}``."""
    Mf = fs.M.factor
    F_E, G_E = fs.M.F_E, fs.M.G_E
    F_S = fs.S.F_cl
    G2 = plant.G2
    U1, U2, F_A, G_A0, G_A, res = _common(plant, fs)

    H_tilde = G2.T @ np.hstack([U1 @ U2, F_S.T])
    U3 = solve_sylvester(F_E, F_A.T, G_E @ H_tilde, require_contraction=False)
    res["U3"] = sylvester_residual(U3, F_E, F_A.T, G_E @ H_tilde)
    H_A = -Mf.R_half @ (H_tilde + Mf.K @ U3 @ F_A.T)
    A = AnticausalPart(H_A, F_A, G_A, U1, U2, U3, H_tilde, shift=False)

    head = G2.T @ U1 @ F_S
    inner = StateSpace(F_S, F_S @ U2 @ G_A0, head, head @ U2 @ G_A0)
    C1 = -(Mf.factor_ss() @ inner)
    outer = -Mf.R_half @ Mf.K
    C2 = StateSpace(F_E, F_E @ U3 @ G_A, outer, outer @ U3 @ G_A)
    return Decomposition(CausalPart("C1", C1), CausalPart("C2", C2), A, res)


def decompose_X_strictly_causal(plant: StateSpacePlant, fs: FactorSet) -> Decomposition:
    """Strictly-causal-problem decomposition; the causal parts have no feedthrough."""
    Mf = fs.M.factor
    F_E, G_E = fs.M.F_E, fs.M.G_E
    F_S = fs.S.F_cl
    G2 = plant.G2
    n = plant.n
    U1, U2, F_A, G_A0, G_A, res = _common(plant, fs)

    h_tilde = G2.T @ np.hstack([U1 @ F_S @ U2, np.eye(n)])
    U3b = solve_sylvester(F_E, F_A.T, G_E @ h_tilde, require_contraction=False)
    res["U3_bar"] = sylvester_residual(U3b, F_E, F_A.T, G_E @ h_tilde)
    H_A_bar = -Mf.R_half @ (h_tilde + Mf.K @ U3b @ F_A.T)
    A = AnticausalPart(H_A_bar, F_A, G_A, U1, U2, U3b, h_tilde, shift=True)

    inner = StateSpace(F_S, F_S @ U2 @ G_A0, G2.T @ U1 @ F_S)
    C1 = -(Mf.factor_ss() @ inner)
    C2 = StateSpace(F_E, U3b @ G_A, -Mf.R_half @ Mf.K)
    return Decomposition(CausalPart("C1_bar", C1), CausalPart("C2_bar", C2), A, res, strictly_causal=True)
