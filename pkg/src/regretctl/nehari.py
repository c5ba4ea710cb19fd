"""Nehari problem for a strictly anticausal rational matrix.

Given ``A(z) = H_A (z^{-1} I - F_A')^{-1} G_A`` with ``rho(F_A) < 1``, find a
causal ``C`` with ``||C - A||_inf <= level``. The smallest achievable level
is the Hankel norm ``sqrt(rho(Z Pi))`` where

    Z  = F_A Z F_A' + H_A' H_A
    Pi = F_A' Pi F_A + G_A G_A'.

The central solution at ``level`` uses ``Z_l = Z / level^2``:

    K_N = (I - F_A Z_l F_A' Pi)^{-1} F_A Z_l G_A
    F_N = F_A - K_N G_A'
    C_N(z) = H_A Pi (F_N (zI - F_N)^{-1} + I) K_N = z H_A Pi (zI - F_N)^{-1} K_N.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decomposition import AnticausalPart
from .errors import NumericalError
from .lti import StateSpace, spectral_radius
from .solvers import solve_stein, sylvester_residual

SINGULAR_TOL = 1e-12


@dataclass
class NehariSolution:
    Z: np.ndarray
    Pi: np.ndarray
    K_N: np.ndarray
    F_N: np.ndarray
    C_N: StateSpace
    hankel_norm: float
    level: float
    strictly_causal: bool = False
    residuals: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.hankel_norm <= 1.0

    @property
    def margin(self) -> float:
        return 1.0 - self.hankel_norm


def gramians(A: AnticausalPart):
    """Return ``(Z, Pi, hankel_norm, residuals)`` for the anticausal part."""
    F_A, H_A, G_A = A.F_A, A.H_A, A.G_A
    Z = solve_stein(F_A, H_A.T @ H_A)
    Pi = solve_stein(F_A.T, G_A @ G_A.T)
    res = {
        "Z": sylvester_residual(Z, F_A, F_A.T, H_A.T @ H_A),
        "Pi": sylvester_residual(Pi, F_A.T, F_A, G_A @ G_A.T),
    }
    eig = np.linalg.eigvals(Z @ Pi)
    hankel = float(np.sqrt(max(np.max(eig.real), 0.0))) if eig.size else 0.0
    return Z, Pi, hankel, res


def _central(A: AnticausalPart, level):
    Z, Pi, hankel, res = gramians(A)
    F_A, H_A, G_A = A.F_A, A.H_A, A.G_A
    k = F_A.shape[0]
    if level is None:
        level = hankel
    if level <= 0.0:
        # nothing to approximate
        K_N = np.zeros((k, G_A.shape[1]))
        return Z, Pi, hankel, 0.0, K_N, F_A.copy(), res
    Zl = Z / level**2
    E = np.eye(k) - F_A @ Zl @ F_A.T @ Pi
    if np.linalg.cond(E) > 1.0 / SINGULAR_TOL:
        raise NumericalError("degenerate Nehari problem: I - F_A Z F_A' Pi is singular")
    K_N = np.linalg.solve(E, F_A @ Zl @ G_A)
    F_N = F_A - K_N @ G_A.T
    return Z, Pi, hankel, level, K_N, F_N, res


def solve_nehari(A: AnticausalPart, level: float | None = None) -> NehariSolution:
    """Causal central Nehari solution.

    Parameters
    ----------
    A : AnticausalPart
        Strictly anticausal part (``A.shift`` must be False).
    level : float, optional
        Approximation level. ``None`` selects the optimal level (the Hankel
        norm), for which ``||C_N - A||_inf`` equals the Hankel norm. The
        regret synthesis uses ``level=1``.
    """
    Z, Pi, hankel, level, K_N, F_N, res = _central(A, level)
    HP = A.H_A @ Pi
    C_N = StateSpace(F_N, K_N, HP @ F_N, HP @ K_N)
    return NehariSolution(Z, Pi, K_N, F_N, C_N, hankel, level, False, res)


def solve_nehari_strictly_causal(A_bar: AnticausalPart, level: float | None = None) -> NehariSolution:
    """Strictly causal Nehari solution for a part supported on lags ``<= 0``.

    ``z A_bar`` is strictly anticausal; its causal solution times ``z^{-1}``
    is ``C_N_bar(z) = H_A_bar Pi (zI - F_N)^{-1} K_N``, which has no
    feedthrough term.
    """
    Z, Pi, hankel, level, K_N, F_N, res = _central(A_bar, level)
    C_N = StateSpace(F_N, K_N, A_bar.H_A @ Pi)
    return NehariSolution(Z, Pi, K_N, F_N, C_N, hankel, level, True, res)


def closed_loop_radius(sol: NehariSolution) -> float:
    return spectral_radius(sol.F_N)
