"""Riccati, Stein and Sylvester solvers.

Riccati equations are solved by the structure-preserving doubling
algorithm (SDA); when doubling breaks down or returns a non-stabilizing
answer we fall back to an ordered QZ deflation of the symplectic pencil.
Every solution is checked a posteriori: the residual is recomputed and the
closed-loop spectral radius is obtained from eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InfeasibleError, NumericalError
from .lti import spectral_radius

SDA_TOL = 1e-14
SDA_MAX_DOUBLINGS = 200
RICCATI_RESIDUAL_TOL = 1e-9
CIRCLE_BAND = 1e-8
KRON_LIMIT = 1600


@dataclass
class RiccatiSolution:
    """Stabilizing solution of a DARE plus the quantities built from it.

    Attributes
    ----------
    P : ndarray
        Symmetric solution.
    residual : float
        ``||res||_F / (1 + ||P||_F)``.
    closed_loop_spectral_radius : float
        Spectral radius of the closed-loop matrix ``F_cl``.
    K : ndarray
        Gain (``R_P^{-1} G' P F`` for control form, ``F P H' R_P^{-1}`` for
        filter form).
    R_P : ndarray
        ``R + G' P G`` or ``R + H P H'``.
    F_cl : ndarray
        ``F - G K`` (control) or ``F - K H`` (filter).
    method : str
        ``"sda"`` or ``"qz"``.
    """

    P: np.ndarray
    residual: float
    closed_loop_spectral_radius: float
    K: np.ndarray
    R_P: np.ndarray
    F_cl: np.ndarray
    method: str = "sda"


def _sym(a):
    return (a + a.T) / 2


def _sda(A, G, H):
    """Doubling iteration; returns the limit of H_k or None on breakdown."""
    n = A.shape[0]
    eye = np.eye(n)
    for _ in range(SDA_MAX_DOUBLINGS):
        W = eye + G @ H
        try:
            lu = sla.lu_factor(W, check_finite=True)
        except (ValueError, sla.LinAlgError):
            return None
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-14 * max(1.0, np.abs(lu[0]).max()):
            return None
        WiA = sla.lu_solve(lu, A)
        WiG = sla.lu_solve(lu, G)
        H_next = _sym(H + A.T @ H @ WiA)
        G_next = _sym(G + A @ WiG @ A.T)
        A = A @ WiA
        if not (np.all(np.isfinite(H_next)) and np.all(np.isfinite(G_next))):
            return None
        step = np.linalg.norm(H_next - H)
        H, G = H_next, G_next
        if step <= SDA_TOL * max(1.0, np.linalg.norm(H)):
            return H
    return None


def _qz(A, G, Q):
    """Stable deflating subspace of ``[[A,0],[-Q,I]] - lam [[I,G],[0,A']]``."""
    n = A.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    left = np.block([[A, zero], [-Q, eye]])
    right = np.block([[eye, G], [zero, A.T]])
    _, _, alpha, beta, _, Z = sla.ordqz(left, right, sort="iuc", output="real")
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(np.abs(beta) > 0, alpha / np.where(beta == 0, 1, beta), np.inf)
    gap = np.abs(np.abs(lam) - 1.0)
    closest = lam[np.argmin(gap)]
    if gap.min() <= CIRCLE_BAND or np.sum(np.abs(lam) < 1.0) != n:
        raise InfeasibleError(
            f"symplectic pencil has an eigenvalue on the unit circle ({complex(closest):.6g})",
            value=complex(closest),
        )
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > 1e12:
        raise InfeasibleError("stable deflating subspace is not a graph", value=complex(closest))
    return _sym(np.linalg.solve(U1.T, U2.T).T)


def _control_pieces(F, G, Qc, R, P):
    R_P = _sym(R + G.T @ P @ G)
    K = np.linalg.solve(R_P, G.T @ P @ F)
    F_cl = F - G @ K
    FPF, KRK = F.T @ P @ F, K.T @ R_P @ K
    res = FPF + Qc - KRK - P
    # relative to the largest term of the equation
    scale = max(1.0, *(np.linalg.norm(t) for t in (P, FPF, Qc, KRK)))
    residual = float(np.linalg.norm(res) / scale)
    return K, R_P, F_cl, residual


def _newton_polish(F, G, Qc, R, P, steps: int = 3):
    """A few Newton steps ``P += X`` with ``X = F_cl' X F_cl + residual``."""
    K, R_P, F_cl, residual = _control_pieces(F, G, Qc, R, P)
    for _ in range(steps):
        if residual <= 1e-3 * RICCATI_RESIDUAL_TOL or spectral_radius(F_cl) >= 1.0:
            break
        res = _sym(F.T @ P @ F + Qc - K.T @ R_P @ K - P)
        P_new = _sym(P + solve_stein(F_cl.T, res))
        pieces = _control_pieces(F, G, Qc, R, P_new)
        if pieces[3] >= residual:
            break
        P, (K, R_P, F_cl, residual) = P_new, pieces
    return P, K, R_P, F_cl, residual


def _solve_control(F, G, Qc, R, require_pd_rp: bool):
    n = F.shape[0]
    if G.shape[1] == 0 or not np.any(G):
        # no input: the only candidate is the Stein solution, stabilizing iff F is stable
        rho = spectral_radius(F)
        if rho >= 1.0:
            raise InfeasibleError(f"no input and spectral radius {rho:.6g} >= 1: no stabilizing solution",
                                  value=rho)
        if not np.any(Qc):
            P = np.zeros((n, n))
        else:
            P = solve_stein(F.T, Qc)
        K, R_P, F_cl, residual = _control_pieces(F, G, Qc, R, P)
        return RiccatiSolution(P, residual, spectral_radius(F_cl), K, R_P, F_cl, "stein")

    try:
        Rinv_Gt = np.linalg.solve(R, G.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("R is singular") from exc
    Gm = _sym(G @ Rinv_Gt)
    candidates = []
    P = _sda(F.copy(), Gm, _sym(Qc))
    if P is not None:
        candidates.append(("sda", P))
    for method, P in candidates:
        P, K, R_P, F_cl, residual = _newton_polish(F, G, Qc, R, P)
        rho = spectral_radius(F_cl)
        if rho < 1.0 and residual <= RICCATI_RESIDUAL_TOL:
            sol = RiccatiSolution(P, residual, rho, K, R_P, F_cl, method)
            return _check_rp(sol, require_pd_rp)
    P = _qz(F, Gm, _sym(Qc))
    P, K, R_P, F_cl, residual = _newton_polish(F, G, Qc, R, P)
    rho = spectral_radius(F_cl)
    if rho >= 1.0:
        raise InfeasibleError(f"Riccati solution is not stabilizing (spectral radius {rho:.6g})", value=rho)
    if residual > RICCATI_RESIDUAL_TOL:
        raise NumericalError(f"Riccati residual {residual:.3g} exceeds {RICCATI_RESIDUAL_TOL:g}")
    return _check_rp(RiccatiSolution(P, residual, rho, K, R_P, F_cl, "qz"), require_pd_rp)


def _check_rp(sol: RiccatiSolution, require_pd: bool) -> RiccatiSolution:
    if require_pd and sol.R_P.size:
        lam = np.linalg.eigvalsh(sol.R_P).min()
        if lam <= 0:
            raise InfeasibleError(f"R_P is not positive definite (eigenvalue {lam:.6g})", value=float(lam))
    return sol


def solve_dare_control(F, G, HtH, R) -> RiccatiSolution:
    """Stabilizing solution of ``P = F'PF + HtH - K' R_P K``.

    ``K = R_P^{-1} G' P F`` and ``R_P = R + G' P G``.

    Raises
    ------
    InfeasibleError
        The symplectic pencil has unit-circle eigenvalues, the solution is
        not stabilizing, or ``R_P`` is not positive definite.
    NumericalError
        Residual check failed.
    """
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float).reshape(F.shape[0], -1)
    HtH = np.asarray(HtH, dtype=float)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    return _solve_control(F, G, HtH, R, require_pd_rp=True)


def solve_dare_filter(F, H, GGt, R, sign: int = 1) -> RiccatiSolution:
    """Stabilizing solution of ``P = F P F' + sign*GGt - K R_P K'``.

    ``K = F P H' R_P^{-1}``, ``R_P = R + H P H'`` and ``F_cl = F - K H``.
    With ``sign=-1`` the solution may be indefinite, but ``R_P`` must stay
    positive definite.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    F = np.asarray(F, dtype=float)
    H = np.asarray(H, dtype=float).reshape(-1, F.shape[0])
    GGt = np.asarray(GGt, dtype=float)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    dual = _solve_control(F.T, H.T, sign * GGt, R, require_pd_rp=True)
    K = dual.K.T
    return RiccatiSolution(dual.P, dual.residual, dual.closed_loop_spectral_radius, K, dual.R_P, dual.F_cl.T, dual.method)


def _kron_solve(A, B, C):
    r, c = C.shape
    lhs = np.eye(r * c) - np.kron(B.T, A)
    try:
        x = np.linalg.solve(lhs, C.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Sylvester operator is singular") from exc
    return x.reshape((r, c), order="F")


def _smith(A, B, C):
    X = C.copy()
    Ak, Bk = A.copy(), B.copy()
    for _ in range(100):
        step = Ak @ X @ Bk
        X = X + step
        Ak, Bk = Ak @ Ak, Bk @ Bk
        if np.linalg.norm(step) <= 1e-16 * max(1.0, np.linalg.norm(X)):
            break
    return X


def solve_sylvester(A, B, C, require_contraction: bool = True) -> np.ndarray:
    """Solve ``X = A X B + C``.

    Parameters
    ----------
    require_contraction : bool
        If True (default) insist on ``rho(A) rho(B) < 1``, the condition for
        the series ``sum A^k C B^k`` to converge. If False only uniqueness is
        required (no product of eigenvalues equal to one), which is what the
        decomposition needs when the plant itself is unstable.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.size == 0:
        return C.copy()
    ra, rb = spectral_radius(A), spectral_radius(B)
    if require_contraction and ra * rb >= 1.0:
        raise NumericalError(f"no solution: spectral-radius product {ra * rb:.6g} >= 1")
    if not require_contraction:
        prods = np.outer(np.linalg.eigvals(A), np.linalg.eigvals(B))
        if np.min(np.abs(1.0 - prods)) < 1e-10:
            raise NumericalError("Sylvester equation is singular (eigenvalue product on 1)")
    if C.size <= KRON_LIMIT:
        X = _kron_solve(A, B, C)
    elif ra * rb < 1.0:
        X = _smith(A, B, C)
    else:
        raise NumericalError("non-contractive Sylvester equation too large for the direct solver")
    return X


def solve_stein(A, W) -> np.ndarray:
    """Solve ``X = A X A' + W``; ``rho(A) < 1`` is required."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if spectral_radius(A) >= 1.0:
        raise NumericalError(f"no solution: spectral radius {spectral_radius(A):.6g} >= 1")
    X = solve_sylvester(A, A.T, W)
    if np.allclose(W, W.T):
        X = _sym(X)
    return X


def sylvester_residual(X, A, B, C) -> float:
    """Relative residual ``||X - A X B - C||_F / (1 + ||X||_F)``."""
    return float(np.linalg.norm(X - A @ X @ B - C) / (1.0 + np.linalg.norm(X)))
