"""Frequency-domain norms of the closed loop and time-domain simulation.

For a Youla parameter ``Q`` the map from ``(w, v)`` to ``(s, u)`` is

    T_Q = [[P11 + P12 Q P21, P12 Q],
           [Q P21,           Q    ]].

Three scalar metrics are reported on a uniform unit-circle grid:

* ``frobenius_sq``: mean over the grid of ``Tr(T_Q* T_Q)``;
* ``operator_sq``: ``max lambda_max(T_Q* T_Q)``;
* ``regret``: ``max lambda_max(T_Q* T_Q - T_Q2* T_Q2)`` with ``Q2`` the
  non-causal H2 controller.

Maxima are refined by golden-section search around the best grid point.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controller import ControllerRealization
from .errors import DivergenceError
from .lti import StateSpace
from .sysmodel import StateSpacePlant, plant_response

GOLDEN_ITERS = 40
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid ``omega_k = 2 pi k / N``."""

    n_points: int = 1024

    def __post_init__(self):
        n = self.n_points
        if n < 64 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 64, got {n}")

    @property
    def omegas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.omegas)


def _grid(grid) -> FrequencyGrid:
    return grid if isinstance(grid, FrequencyGrid) else FrequencyGrid(int(grid))


def _adj(x):
    return np.conj(np.swapaxes(x, -1, -2))


def _assemble(P, Qz):
    top = np.concatenate([P["P11"] + P["P12"] @ Qz @ P["P21"], P["P12"] @ Qz], axis=2)
    bottom = np.concatenate([Qz @ P["P21"], Qz], axis=2)
    return np.concatenate([top, bottom], axis=1)


def _q2_from_response(P):
    P11, P12, P21 = P["P11"], P["P12"], P["P21"]
    m, p = P12.shape[2], P21.shape[1]
    left = np.eye(m) + _adj(P12) @ P12
    right = np.eye(p) + P21 @ _adj(P21)
    core = _adj(P12) @ P11 @ _adj(P21)
    # (I + A)^{-1} with A Hermitian PSD; solve from both sides
    tmp = np.linalg.solve(left, core)
    return -_adj(np.linalg.solve(right, _adj(tmp)))


def noncausal_q2(plant: StateSpacePlant, z) -> np.ndarray:
    """``Q2 = -(I + P12* P12)^{-1} P12* P11 P21* (I + P21 P21*)^{-1}`` at each ``z``."""
    return _q2_from_response(plant_response(plant, z))


def noncausal_q2_at(plant: StateSpacePlant, omega: float) -> np.ndarray:
    return noncausal_q2(plant, np.array([np.exp(1j * omega)]))[0]


def closed_loop_response(plant: StateSpacePlant, Q: StateSpace, z) -> np.ndarray:
    """``T_Q`` at every point of ``z``; shape (N, q+m, n_w+p)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return _assemble(plant_response(plant, z), Q.evaluate(z))


def noncausal_response(plant: StateSpacePlant, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    P = plant_response(plant, z)
    return _assemble(P, _q2_from_response(P))


def closed_loop_TQ(plant: StateSpacePlant, Q: StateSpace, omega: float) -> np.ndarray:
    return closed_loop_response(plant, Q, np.array([np.exp(1j * omega)]))[0]


def _lam_max_gram(T):
    s = np.linalg.svd(T, compute_uv=False)
    return s[..., 0] ** 2 if s.shape[-1] else np.zeros(T.shape[0])


def _lam_max_regret(T, T0):
    D = _adj(T) @ T - _adj(T0) @ T0
    D = (D + _adj(D)) / 2
    return np.linalg.eigvalsh(D)[..., -1]


def _golden_max(f, a, b, iters=GOLDEN_ITERS):
    r = (np.sqrt(5) - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def _refine(values, omegas, f):
    k = int(np.argmax(values))
    best_w, best = omegas[k], float(values[k])
    step = omegas[1] - omegas[0] if omegas.size > 1 else np.pi
    w, v = _golden_max(f, best_w - step, best_w + step)
    if v > best:
        return float(v), float(w % (2 * np.pi))
    return best, float(best_w)


def frobenius_norm_sq(plant: StateSpacePlant, Q: StateSpace, grid=256) -> float:
    g = _grid(grid)
    T = closed_loop_response(plant, Q, g.z)
    return float(np.mean(np.sum(np.abs(T) ** 2, axis=(1, 2))))


def operator_norm_sq(plant: StateSpacePlant, Q: StateSpace, grid=256, return_omega: bool = False):
    g = _grid(grid)
    vals = _lam_max_gram(closed_loop_response(plant, Q, g.z))

    def f(w):
        return float(_lam_max_gram(closed_loop_response(plant, Q, np.exp(1j * np.array([w]))))[0])

    best, w = _refine(vals, g.omegas, f)
    return (best, w) if return_omega else best


def regret_norm(plant: StateSpacePlant, Q: StateSpace, grid=256, reference: StateSpace | None = None,
                return_omega: bool = False):
    """Worst-frequency regret against ``Q2`` (or against ``reference`` if given)."""
    g = _grid(grid)

    def loops(z):
        P = plant_response(plant, z)
        T = _assemble(P, Q.evaluate(z))
        Q0 = _q2_from_response(P) if reference is None else reference.evaluate(z)
        return T, _assemble(P, Q0)

    vals = _lam_max_regret(*loops(g.z))

    def f(w):
        return float(_lam_max_regret(*loops(np.exp(1j * np.array([w]))))[0])

    best, w = _refine(vals, g.omegas, f)
    return (best, w) if return_omega else best


@dataclass
class NormReport:
    frobenius_sq: float
    operator_sq: float
    regret: float
    per_frequency: dict = field(default_factory=dict)

    def rows(self):
        pf = self.per_frequency
        return list(zip(pf["omega"], pf["trace"], pf["sigma_max_sq"], pf["regret_eig"]))


def _report_from_loops(T, T0, g: FrequencyGrid, refine_op, refine_reg) -> NormReport:
    trace = np.sum(np.abs(T) ** 2, axis=(1, 2))
    sig = _lam_max_gram(T)
    reg = _lam_max_regret(T, T0)
    op, _ = _refine(sig, g.omegas, refine_op)
    rg, _ = _refine(reg, g.omegas, refine_reg)
    return NormReport(
        frobenius_sq=float(np.mean(trace)),
        operator_sq=op,
        regret=rg,
        per_frequency={"omega": g.omegas, "trace": trace, "sigma_max_sq": sig, "regret_eig": reg},
    )


def norm_report(plant: StateSpacePlant, Q: StateSpace, grid=1024) -> NormReport:
    """All three metrics plus the per-frequency table for a Youla parameter."""
    g = _grid(grid)

    def loops(z):
        P = plant_response(plant, z)
        return _assemble(P, Q.evaluate(z)), _assemble(P, _q2_from_response(P))

    def f_op(w):
        return float(_lam_max_gram(loops(np.exp(1j * np.array([w])))[0])[0])

    def f_reg(w):
        return float(_lam_max_regret(*loops(np.exp(1j * np.array([w]))))[0])

    return _report_from_loops(*loops(g.z), g, f_op, f_reg)


def noncausal_report(plant: StateSpacePlant, grid=1024) -> NormReport:
    """Metrics of the non-causal reference loop; its regret is zero by definition."""
    g = _grid(grid)

    def f_op(w):
        return float(_lam_max_gram(noncausal_response(plant, np.exp(1j * np.array([w]))))[0])

    T = noncausal_response(plant, g.z)
    rep = _report_from_loops(T, T, g, f_op, lambda w: 0.0)
    rep.regret = 0.0
    return rep


def simulate(plant: StateSpacePlant, K: StateSpace, w_seq, v_seq, horizon: int | None = None):
    """Run the loop ``u = K y`` from zero initial state.

    Parameters
    ----------
    K : StateSpace
        Feedback controller (``u = K y``), not a Youla parameter.
    w_seq, v_seq : array_like
        Shapes (horizon, n_w) and (horizon, p).

    Returns
    -------
    cost : float
        ``sum_i |s_i|^2 + |u_i|^2``.
    traj : dict
        Arrays ``x``, ``s``, ``y``, ``u``, ``xi`` indexed by time.
    """
    w_seq = np.asarray(w_seq, dtype=float).reshape(-1, plant.n_w)
    v_seq = np.asarray(v_seq, dtype=float).reshape(-1, plant.p)
    if horizon is None:
        horizon = w_seq.shape[0]
    F, G1, G2, H, L = plant.F, plant.G1, plant.G2, plant.H, plant.L
    x = np.zeros(plant.n)
    xi = np.zeros(K.n_states)
    traj = {k: [] for k in ("x", "s", "y", "u", "xi")}
    cost = 0.0
    for i in range(horizon):
        s = L @ x
        y = H @ x + v_seq[i]
        u = K.C @ xi + K.D @ y
        cost += float(s @ s + u @ u)
        for key, val in (("x", x), ("s", s), ("y", y), ("u", u), ("xi", xi)):
            traj[key].append(val)
        x = F @ x + G1 @ w_seq[i] + G2 @ u
        xi = K.A @ xi + K.B @ y
        if np.linalg.norm(x) > DIVERGENCE_LIMIT or np.linalg.norm(xi) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"state norm exceeded {DIVERGENCE_LIMIT:g} at step {i}")
    return cost, {k: np.array(v) for k, v in traj.items()}


def is_youla(Q) -> bool:
    return not isinstance(Q, ControllerRealization) or Q.form == "youla"
