"""Finite-horizon check of the regret bound with dense block-Toeplitz matrices.

Over a horizon of N steps every causal LTI map becomes a block lower
triangular Toeplitz matrix, and the clairvoyant reference is the dense
minimizer of the finite-horizon Frobenius norm

    Q2_N = -(I + P12' P12)^{-1} P12' P11 P21' (I + P21 P21')^{-1}.

The regret of a causal ``Q`` is the top eigenvalue of
``T_Q' T_Q - T_{Q2_N}' T_{Q2_N}`` over stacked ``(w, v)`` sequences.
Signals are stacked time-major: entry ``t*k + i`` is component ``i`` at
time ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .lti import StateSpace
from .sysmodel import StateSpacePlant

DENSE_BUDGET = 5000


@dataclass
class ToeplitzOperator:
    N: int
    block_rows: int
    block_cols: int
    data: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        r, c = self.block_rows, self.block_cols
        return self.data[i * r:(i + 1) * r, j * c:(j + 1) * c]


def build_toeplitz(realization: StateSpace, N: int, strictly_causal: bool = False) -> ToeplitzOperator:
    """Block lower-triangular Toeplitz section of a causal realization."""
    if N < 1:
        raise ValueError("horizon must be at least 1")
    h = realization.markov(N)
    if strictly_causal:
        h[0] = 0.0
    r, c = realization.n_outputs, realization.n_inputs
    data = np.zeros((N * r, N * c))
    for lag in range(N):
        blk = h[lag]
        for j in range(N - lag):
            i = j + lag
            data[i * r:(i + 1) * r, j * c:(j + 1) * c] = blk
    return ToeplitzOperator(N, r, c, data)


def plant_toeplitz(plant: StateSpacePlant, N: int) -> dict[str, np.ndarray]:
    return {name: build_toeplitz(plant.channel(name), N, strictly_causal=True).data
            for name in ("P11", "P12", "P21", "P22")}


def finite_h2_noncausal(P: dict, N: int | None = None) -> np.ndarray:
    """Dense finite-horizon reference ``Q2_N`` from the Toeplitz channels."""
    P11, P12, P21 = P["P11"], P["P12"], P["P21"]
    left = np.eye(P12.shape[1]) + P12.T @ P12
    right = np.eye(P21.shape[0]) + P21 @ P21.T
    core = np.linalg.solve(left, P12.T @ P11 @ P21.T)
    return -np.linalg.solve(right.T, core.T).T


def _closed_loop(P: dict, Qm: np.ndarray) -> np.ndarray:
    P11, P12, P21 = P["P11"], P["P12"], P["P21"]
    return np.block([
        [P11 + P12 @ Qm @ P21, P12 @ Qm],
        [Qm @ P21, Qm],
    ])


@dataclass
class OracleResult:
    N: int
    regret: float
    direction: np.ndarray
    w: np.ndarray
    v: np.ndarray
    T_Q: np.ndarray
    T_ref: np.ndarray

    def quadratic_form(self, d=None) -> float:
        d = self.direction if d is None else d
        return float(np.sum((self.T_Q @ d) ** 2) - np.sum((self.T_ref @ d) ** 2))


def check_budget(plant: StateSpacePlant, N: int) -> None:
    size = N * max(plant.n_w + plant.p, plant.q + plant.m)
    if size > DENSE_BUDGET:
        raise BudgetError(f"dense oracle size {size} exceeds budget {DENSE_BUDGET}")


def finite_horizon_regret(plant: StateSpacePlant, Q, N: int,
                          strictly_causal: bool = False) -> OracleResult:
    """Top eigenvalue of ``T_Q' T_Q - T_ref' T_ref`` and its maximizing ``(w, v)``.

    ``Q`` is a realization or an already assembled ``(N m) x (N p)`` matrix.
    """
    check_budget(plant, N)
    P = plant_toeplitz(plant, N)
    if isinstance(Q, StateSpace):
        Qm = build_toeplitz(Q, N, strictly_causal=strictly_causal).data
    else:
        Qm = np.asarray(Q, dtype=float)
        if Qm.shape != (N * plant.m, N * plant.p):
            raise ValueError(f"dense Q must be {(N * plant.m, N * plant.p)}, got {Qm.shape}")
    T = _closed_loop(P, Qm)
    T0 = _closed_loop(P, finite_h2_noncausal(P, N))
    D = T.T @ T - T0.T @ T0
    vals, vecs = np.linalg.eigh((D + D.T) / 2)
    d = vecs[:, -1]
    nw = plant.n_w * N
    return OracleResult(
        N=N,
        regret=float(vals[-1]),
        direction=d,
        w=d[:nw].reshape(N, plant.n_w),
        v=d[nw:].reshape(N, plant.p),
        T_Q=T,
        T_ref=T0,
    )


def regret_sequence(plant: StateSpacePlant, Q: StateSpace, horizons=(20, 40, 60)) -> list[float]:
    return [finite_horizon_regret(plant, Q, N).regret for N in horizons]
