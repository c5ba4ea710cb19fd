"""Canonical spectral factorizations used by the regret-optimal synthesis.

Two generic shapes cover every factor:

* UL (upper-lower): ``R + G'Phi' C'C Phi G = Psi~ Psi`` with
  ``Psi = R^{1/2}(I + K Phi G)``, from a control-type DARE.
* LU (lower-upper): ``R + H Phi B B' Phi' H' = Psi Psi~`` with
  ``Psi = (I + H Phi K) R^{1/2}``, from a filter-type DARE.

Here ``Phi = (zI - F)^{-1}`` and ``~`` is the para-Hermitian conjugate.
Square roots of ``R`` are Cholesky factors: lower triangular for LU kinds
(``R = R^{1/2} R^{1/2}'``) and upper triangular for UL kinds
(``R = R^{1/2}' R^{1/2}``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .lti import StateSpace
from .solvers import RiccatiSolution, solve_dare_control, solve_dare_filter
from .sysmodel import StateSpacePlant

UL = "UL"
LU = "LU"


def _chol(R: np.ndarray, orientation: str) -> np.ndarray:
    R = (R + R.T) / 2
    try:
        low = np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        lam = float(np.linalg.eigvalsh(R).min())
        raise InfeasibleError(f"R factor is not positive definite (eigenvalue {lam:.6g})", value=lam)
    return low if orientation == LU else low.T


@dataclass
class CanonicalFactor:
    """One spectral factor.

    ``F`` is the open-loop matrix the factor is built on and ``io_map`` the
    fixed map of the factor (input map ``G`` for UL, output map ``H`` for LU).
    """

    K: np.ndarray
    R_half: np.ndarray
    R_full: np.ndarray
    F_cl: np.ndarray
    P: np.ndarray
    kind: str
    orientation: str
    F: np.ndarray
    io_map: np.ndarray
    riccati: RiccatiSolution | None = None

    @property
    def R_half_inv(self) -> np.ndarray:
        return np.linalg.inv(self.R_half)

    def factor_ss(self) -> StateSpace:
        """Realization of the factor itself (causal, stable when F is)."""
        if self.orientation == UL:
            return StateSpace(self.F, self.io_map, self.R_half @ self.K, self.R_half)
        return StateSpace(self.F, self.K @ self.R_half, self.io_map, self.R_half)

    def inverse_ss(self) -> StateSpace:
        """Realization of the inverse factor; its poles are those of ``F_cl``."""
        Rhi = self.R_half_inv
        if self.orientation == UL:
            return StateSpace(self.F_cl, self.io_map @ Rhi, -self.K, Rhi)
        return StateSpace(self.F_cl, self.K, -Rhi @ self.io_map, Rhi)


def ul_factor(F, G, CtC, R, kind: str) -> CanonicalFactor:
    sol = solve_dare_control(F, G, CtC, R)
    return CanonicalFactor(
        K=sol.K, R_half=_chol(sol.R_P, UL), R_full=sol.R_P, F_cl=sol.F_cl, P=sol.P,
        kind=kind, orientation=UL, F=np.asarray(F, float), io_map=np.asarray(G, float), riccati=sol,
    )


def lu_factor(F, H, BBt, R, kind: str, sign: int = 1) -> CanonicalFactor:
    sol = solve_dare_filter(F, H, BBt, R, sign=sign)
    return CanonicalFactor(
        K=sol.K, R_half=_chol(sol.R_P, LU), R_full=sol.R_P, F_cl=sol.F_cl, P=sol.P,
        kind=kind, orientation=LU, F=np.asarray(F, float), io_map=np.asarray(H, float), riccati=sol,
    )


def factor_W(plant: StateSpacePlant) -> CanonicalFactor:
    """LU factor of ``I + P21 P21~``.

    ``factor_ss()`` is ``W^{-/2} = (I + H Phi K_W) R_W^{1/2}`` and
    ``inverse_ss()`` is ``W^{1/2} = R_W^{-1/2}(I - H Phi_W K_W)``.
    """
    return lu_factor(plant.F, plant.H, plant.G1 @ plant.G1.T, np.eye(plant.p), "W")


def factor_S(plant: StateSpacePlant) -> CanonicalFactor:
    """LU factor of ``I + P12 P12~``; ``factor_ss()`` is ``S^{1/2}``."""
    return lu_factor(plant.F, plant.L, plant.G2 @ plant.G2.T, np.eye(plant.q), "S")


def factor_gamma(plant: StateSpacePlant, gamma: float) -> CanonicalFactor:
    """UL factor of ``gamma^2 (I + P21~ P21) + P11~ P11``; ``factor_ss()`` is Gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g2 = gamma * gamma
    cost = g2 * plant.H.T @ plant.H + plant.L.T @ plant.L
    return ul_factor(plant.F, plant.G1, cost, g2 * np.eye(plant.n_w), "Gamma")


def factor_nabla(plant: StateSpacePlant, gamma_factor: CanonicalFactor) -> CanonicalFactor:
    """LU factor of ``I - L Phi_G G1 R_G^{-1} G1' Phi_G~ L'`` (indefinite DARE).

    ``Phi_G`` uses the closed loop of the Gamma factor. Raises
    :class:`InfeasibleError` when ``R_nabla`` is not positive definite.
    """
    G1 = plant.G1
    noise = G1 @ np.linalg.solve(gamma_factor.R_full, G1.T)
    return lu_factor(gamma_factor.F_cl, plant.L, noise, np.eye(plant.q), "Nabla", sign=-1)


@dataclass
class AugmentedM:
    """State-space data of ``gamma^{-1} nabla^{-1} P12`` and the UL factor of M."""

    H_E: np.ndarray
    F_E: np.ndarray
    G_E: np.ndarray
    factor: CanonicalFactor
    gamma: float

    def scaled_channel(self) -> StateSpace:
        """``H_E (zI - F_E)^{-1} G_E = gamma^{-1} nabla^{-1} P12``."""
        return StateSpace(self.F_E, self.G_E, self.H_E)


def factor_M(plant: StateSpacePlant, gamma: float, nabla_factor: CanonicalFactor) -> AugmentedM:
    """UL factor of ``M = gamma^{-2}(I + P12~ nabla^{-~} nabla^{-1} P12)``.

    The second state block carries the negated state of ``nabla^{-1}`` so
    that the output map is ``R_nabla^{-1/2} [L, L]``.
    """
    n = plant.n
    Rn_inv = nabla_factor.R_half_inv
    H_E = Rn_inv @ np.hstack([plant.L, plant.L])
    F_E = np.block([
        [plant.F, np.zeros((n, n))],
        [-nabla_factor.K @ plant.L, nabla_factor.F_cl],
    ])
    G_E = np.vstack([plant.G2 / gamma, np.zeros((n, plant.m))])
    fac = ul_factor(F_E, G_E, H_E.T @ H_E, np.eye(plant.m) / gamma**2, "M")
    return AugmentedM(H_E=H_E, F_E=F_E, G_E=G_E, factor=fac, gamma=gamma)


@dataclass
class FactorSet:
    """All factors for one value of gamma."""

    gamma: float
    W: CanonicalFactor
    S: CanonicalFactor
    Gamma: CanonicalFactor
    Nabla: CanonicalFactor
    M: AugmentedM

    def all_factors(self) -> list[CanonicalFactor]:
        return [self.W, self.S, self.Gamma, self.Nabla, self.M.factor]


def gamma_factors(plant: StateSpacePlant, gamma: float):
    """Gamma-dependent chain Gamma -> nabla -> M; raises InfeasibleError."""
    g = factor_gamma(plant, gamma)
    nb = factor_nabla(plant, g)
    m = factor_M(plant, gamma, nb)
    return g, nb, m


def all_factors(plant: StateSpacePlant, gamma: float, W=None, S=None) -> FactorSet:
    W = factor_W(plant) if W is None else W
    S = factor_S(plant) if S is None else S
    g, nb, m = gamma_factors(plant, gamma)
    return FactorSet(gamma=gamma, W=W, S=S, Gamma=g, Nabla=nb, M=m)
