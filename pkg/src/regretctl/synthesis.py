"""Regret-optimal controller assembly and gamma bisection.

For a feasible level ``gamma`` the regret-optimal Youla parameter is

    Q = M^{-1/2} (C1 + C2 + C_N) W^{1/2}

and admits the closed-form realization assembled in
:func:`synthesize_ro_causal`. The optimal regret is ``gamma*^2`` with
``gamma*`` the smallest level at which every factor exists and the Hankel
norm of the anticausal part is at most one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import synthesize_h2, synthesize_hinf  # noqa: F401  (re-exported)
from .controller import (
    ControllerRealization,
    feedback_to_youla,
    youla_to_feedback,
    zero_controller,
)
from .decomposition import Decomposition, decompose_X, decompose_X_strictly_causal
from .errors import InfeasibleError, InstabilityError, NumericalError
from .evaluation import operator_norm_sq
from .factorization import FactorSet, all_factors, factor_S, factor_W
from .lti import spectral_radius
from .nehari import NehariSolution, solve_nehari, solve_nehari_strictly_causal
from .sysmodel import StateSpacePlant

GAMMA_FLOOR = 1e-12
MAX_BISECTIONS = 60
NEHARI_LEVEL = 1.0


@dataclass
class RegretChain:
    """Every intermediate object of one synthesis at a fixed gamma."""

    gamma: float
    factors: FactorSet
    decomposition: Decomposition
    nehari: NehariSolution
    strictly_causal: bool = False

    def residuals(self) -> dict:
        out = {}
        for fac in self.factors.all_factors():
            out[f"riccati_{fac.kind}"] = fac.riccati.residual
        out.update({f"sylvester_{k}": v for k, v in self.decomposition.residuals.items()})
        out.update({f"gramian_{k}": v for k, v in self.nehari.residuals.items()})
        return out

    def spectral_radii(self) -> dict:
        out = {f"F_{fac.kind}": fac.riccati.closed_loop_spectral_radius for fac in self.factors.all_factors()}
        out["F_A"] = spectral_radius(self.decomposition.A.F_A)
        out["F_N"] = spectral_radius(self.nehari.F_N)
        return out


def build_chain(plant: StateSpacePlant, gamma: float, strictly_causal: bool = False,
                W=None, S=None, level: float | None = NEHARI_LEVEL) -> RegretChain:
    """Factor, decompose and solve the Nehari problem at ``gamma``.

    Raises :class:`InfeasibleError` if a gamma-dependent factor does not exist.
    """
    fs = all_factors(plant, gamma, W=W, S=S)
    if strictly_causal:
        dec = decompose_X_strictly_causal(plant, fs)
        neh = solve_nehari_strictly_causal(dec.A, level=level)
    else:
        dec = decompose_X(plant, fs)
        neh = solve_nehari(dec.A, level=level)
    return RegretChain(gamma, fs, dec, neh, strictly_causal)


def _assemble_causal(plant: StateSpacePlant, ch: RegretChain) -> ControllerRealization:
    fs, dec, neh = ch.factors, ch.decomposition, ch.nehari
    W, S, Mf = fs.W, fs.S, fs.M.factor
    A = dec.A
    F_W, F_S, F_M, F_N = W.F_cl, S.F_cl, Mf.F_cl, neh.F_N
    H, G2 = plant.H, plant.G2
    n = plant.n
    Rw_m = W.R_half_inv                  # R_W^{-1/2}
    Rw_inv = np.linalg.inv(W.R_full)     # R_W^{-1}
    Rm_m = Mf.R_half_inv                 # R_M^{-1/2}
    HAPi = A.H_A @ neh.Pi

    kN, kM = F_N.shape[0], F_M.shape[0]
    Z = np.zeros
    A_hat = np.block([
        [F_N, Z((kN, kM)), Z((kN, n))],
        [fs.M.G_E @ Rm_m @ HAPi, F_M, Z((kM, n))],
        [Z((n, kN)), Z((n, kM)), F_S],
    ])
    B_hat = np.vstack([
        neh.K_N @ Rw_m,
        A.U3 @ A.G_A @ Rw_m,
        A.U2 @ H.T @ Rw_inv,
    ])
    C_hat = np.hstack([Rm_m @ HAPi, -Mf.K, -G2.T @ A.U1 @ F_S])
    k = A_hat.shape[0]
    A_full = np.block([
        [F_W, Z((n, k))],
        [-B_hat @ H, A_hat],
    ])
    B0 = np.vstack([W.K, B_hat])
    C_full = np.hstack([Z((plant.m, n)), C_hat])
    # Q(z) = z C (zI - A)^{-1} B0
    return ControllerRealization(A_full, A_full @ B0, C_full, C_full @ B0,
                                 kind="RO-causal", gamma=ch.gamma)


def _assemble_strictly_causal(plant: StateSpacePlant, ch: RegretChain) -> ControllerRealization:
    fs, dec, neh = ch.factors, ch.decomposition, ch.nehari
    W, S, Mf = fs.W, fs.S, fs.M.factor
    A = dec.A
    F_W, F_S, F_M, F_N = W.F_cl, S.F_cl, Mf.F_cl, neh.F_N
    H, G2 = plant.H, plant.G2
    n = plant.n
    Rw_m = W.R_half_inv
    Rw_inv = np.linalg.inv(W.R_full)
    Rm_m = Mf.R_half_inv
    HAPi = A.H_A @ neh.Pi

    kN, kM = F_N.shape[0], F_M.shape[0]
    Z = np.zeros
    A_hat = np.block([
        [F_S, Z((n, kN)), Z((n, kM))],
        [Z((kN, n)), F_N, Z((kN, kM))],
        [Z((kM, n)), fs.M.G_E @ Rm_m @ HAPi, F_M],
    ])
    B_hat = np.vstack([
        F_S @ A.U2 @ H.T @ Rw_inv,
        neh.K_N @ Rw_m,
        A.U3 @ A.G_A @ Rw_m,
    ])
    C_hat = np.hstack([-G2.T @ A.U1 @ F_S, Rm_m @ HAPi, -Mf.K])
    k = A_hat.shape[0]
    A_full = np.block([
        [F_W, Z((n, k))],
        [-B_hat @ H, A_hat],
    ])
    B_full = np.vstack([W.K, B_hat])
    C_full = np.hstack([Z((plant.m, n)), C_hat])
    return ControllerRealization(A_full, B_full, C_full, None,
                                 kind="RO-strictly-causal", gamma=ch.gamma)


def _degenerate(plant: StateSpacePlant) -> bool:
    return not np.any(plant.G2) or not np.any(plant.G1)


def _check_feasible(ch: RegretChain) -> None:
    if not ch.nehari.feasible:
        raise InfeasibleError(
            f"gamma={ch.gamma:.6g} is infeasible: Hankel norm {ch.nehari.hankel_norm:.6g} > 1",
            value=ch.nehari.hankel_norm,
        )


def synthesize_ro_causal(plant: StateSpacePlant, gamma: float, chain: RegretChain | None = None) -> ControllerRealization:
    """Causal regret-optimal Youla parameter at level ``gamma``.

    States are ordered ``(F_W, F_N, F_M, F_S)``.
    """
    if _degenerate(plant):
        return zero_controller(plant, kind="RO-causal", gamma=gamma)
    ch = build_chain(plant, gamma) if chain is None else chain
    _check_feasible(ch)
    return _assemble_causal(plant, ch)


def synthesize_ro_strictly_causal(plant: StateSpacePlant, gamma: float,
                                  chain: RegretChain | None = None) -> ControllerRealization:
    """Strictly causal regret-optimal Youla parameter (no feedthrough).

    States are ordered ``(F_W, F_S, F_N, F_M)``.
    """
    if _degenerate(plant):
        return zero_controller(plant, kind="RO-strictly-causal", gamma=gamma)
    ch = build_chain(plant, gamma, strictly_causal=True) if chain is None else chain
    _check_feasible(ch)
    return _assemble_strictly_causal(plant, ch)


@dataclass
class SynthesisResult:
    controller: ControllerRealization
    gamma: float
    gamma_squared: float
    diagnostics: dict = field(default_factory=dict)
    feasibility_margin: float = 1.0
    feedback: ControllerRealization | None = None
    chain: RegretChain | None = None
    iterations: int = 0


def feasibility(plant: StateSpacePlant, gamma: float, strictly_causal: bool = False, W=None, S=None):
    """Return ``(feasible, chain_or_None)`` for one gamma."""
    try:
        ch = build_chain(plant, gamma, strictly_causal=strictly_causal, W=W, S=S)
    except InfeasibleError:
        return False, None
    return ch.nehari.feasible, ch


def upper_bracket(plant: StateSpacePlant, grid=256) -> float:
    """``10 * ||T||_inf`` of the H2 loop, a level at which regret is always achievable."""
    K = synthesize_h2(plant)
    Q = feedback_to_youla(plant, K)
    return 10.0 * float(np.sqrt(operator_norm_sq(plant, Q, grid)))


def optimal_gamma(plant: StateSpacePlant, tol: float = 1e-4, strictly_causal: bool = False,
                  upper: float | None = None) -> SynthesisResult:
    """Bisection for the smallest feasible gamma (relative tolerance ``tol``)."""
    if not 0 < tol < 0.1:
        raise ValueError("tol must lie in (0, 0.1)")
    synth = _assemble_strictly_causal if strictly_causal else _assemble_causal
    kind = "RO-strictly-causal" if strictly_causal else "RO-causal"

    if _degenerate(plant):
        Q = zero_controller(plant, kind=kind, gamma=GAMMA_FLOOR)
        return SynthesisResult(Q, GAMMA_FLOOR, GAMMA_FLOOR**2, {"degenerate": True}, 1.0,
                               _feedback_or_none(plant, Q))

    W, S = factor_W(plant), factor_S(plant)
    hi = upper_bracket(plant) if upper is None else float(upper)
    ok, hi_chain = feasibility(plant, hi, strictly_causal, W, S)
    expansions = 0
    while not ok:
        expansions += 1
        if expansions > 20:
            raise NumericalError(f"no feasible gamma found up to {hi:.6g}")
        hi *= 10.0
        ok, hi_chain = feasibility(plant, hi, strictly_causal, W, S)
    lo = GAMMA_FLOOR
    it = 0
    while hi - lo > tol * hi and it < MAX_BISECTIONS:
        it += 1
        mid = 0.5 * (lo + hi)
        ok, ch = feasibility(plant, mid, strictly_causal, W, S)
        if ok:
            hi, hi_chain = mid, ch
        else:
            lo = mid
    Q = synth(plant, hi_chain)
    diag = {
        "residuals": hi_chain.residuals(),
        "spectral_radii": hi_chain.spectral_radii(),
        "hankel_norm": hi_chain.nehari.hankel_norm,
        "lower_bracket": lo,
        "controller_spectral_radius": Q.spectral_radius,
    }
    return SynthesisResult(
        controller=Q,
        gamma=hi,
        gamma_squared=hi * hi,
        diagnostics=diag,
        feasibility_margin=hi_chain.nehari.margin,
        feedback=_feedback_or_none(plant, Q),
        chain=hi_chain,
        iterations=it,
    )


def _feedback_or_none(plant, Q):
    try:
        return youla_to_feedback(plant, Q)
    except InstabilityError:
        return None
