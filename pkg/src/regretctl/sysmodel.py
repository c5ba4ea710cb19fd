"""Plant description, cost-weight absorption and standing-assumption checks.

The plant is

    x_{i+1} = F x_i + G1 w_i + G2 u_i
    s_i     = L x_i
    y_i     = H x_i + v_i

and the four channels are P11 = L(zI-F)^{-1}G1, P12 = L(zI-F)^{-1}G2,
P21 = H(zI-F)^{-1}G1, P22 = H(zI-F)^{-1}G2.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, WeightError
from .lti import StateSpace, as_matrix, check_poles, resolvent_apply

UNIT_CIRCLE_BAND = 1e-8
RANK_RTOL = 1e-10

CHANNELS = ("P11", "P12", "P21", "P22")


@dataclass(frozen=True)
class CostWeights:
    Q: np.ndarray
    R: np.ndarray

    @classmethod
    def identity(cls, q: int, m: int) -> "CostWeights":
        return cls(np.eye(q), np.eye(m))


@dataclass(frozen=True, eq=False)
class StateSpacePlant:
    """Plant matrices plus bookkeeping for weight normalization.

    ``input_scaling`` maps normalized controls back to physical ones
    (``u_phys = input_scaling @ u``); it is the identity until
    :func:`absorb_weights` is applied.
    """

    F: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    H: np.ndarray
    L: np.ndarray
    name: str = ""
    weights: CostWeights | None = None
    input_scaling: np.ndarray | None = None
    normalized: bool = False

    def __post_init__(self):
        F = as_matrix(self.F, name="F")
        n = F.shape[0]
        if F.shape != (n, n):
            raise DimensionError(f"F must be square, got {F.shape}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G1", as_matrix(self.G1, rows=n, name="G1"))
        object.__setattr__(self, "G2", as_matrix(self.G2, rows=n, name="G2"))
        object.__setattr__(self, "H", as_matrix(self.H, cols=n, name="H"))
        object.__setattr__(self, "L", as_matrix(self.L, cols=n, name="L"))
        if self.weights is not None:
            Q = as_matrix(self.weights.Q, self.q, self.q, "Q")
            R = as_matrix(self.weights.R, self.m, self.m, "R")
            object.__setattr__(self, "weights", CostWeights(Q, R))
        if self.input_scaling is None:
            object.__setattr__(self, "input_scaling", np.eye(self.m))

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def n_w(self) -> int:
        return self.G1.shape[1]

    @property
    def m(self) -> int:
        return self.G2.shape[1]

    @property
    def p(self) -> int:
        return self.H.shape[0]

    @property
    def q(self) -> int:
        return self.L.shape[0]

    def channel(self, which: str) -> StateSpace:
        """Strictly proper realization of one of P11, P12, P21, P22."""
        out, inp = {
            "P11": (self.L, self.G1),
            "P12": (self.L, self.G2),
            "P21": (self.H, self.G1),
            "P22": (self.H, self.G2),
        }[which]
        return StateSpace(self.F, inp, out)

    def to_dict(self) -> dict:
        d = {
            "F": self.F.tolist(),
            "G1": self.G1.tolist(),
            "G2": self.G2.tolist(),
            "H": self.H.tolist(),
            "L": self.L.tolist(),
        }
        if self.weights is not None:
            d["Q"] = self.weights.Q.tolist()
            d["R"] = self.weights.R.tolist()
        if self.name:
            d["name"] = self.name
        return d


def sym_sqrt(a: np.ndarray, inverse: bool = False, name: str = "matrix") -> np.ndarray:
    """Principal square root of a symmetric positive definite matrix."""
    a = np.asarray(a, dtype=float)
    if not np.allclose(a, a.T, atol=1e-12 * (1 + np.abs(a).max())):
        raise WeightError(f"{name} is not symmetric")
    vals, vecs = np.linalg.eigh((a + a.T) / 2)
    if vals.min() <= 0:
        raise WeightError(
            f"{name} is not positive definite (eigenvalue {vals.min():.6g})",
            eigenvalue=float(vals.min()),
        )
    root = vals ** (-0.5 if inverse else 0.5)
    return (vecs * root) @ vecs.T


def absorb_weights(plant: StateSpacePlant, weights: CostWeights | None = None) -> StateSpacePlant:
    """Fold ``s' Q s + u' R u`` into unit weights.

    Returns a plant with ``L <- Q^{1/2} L`` and ``G2 <- G2 R^{-1/2}``.
    Controls produced for the returned plant must be multiplied by
    ``input_scaling`` (= ``R^{-1/2}``) before being applied physically.
    """
    if weights is None:
        weights = plant.weights
    if weights is None:
        weights = CostWeights.identity(plant.q, plant.m)
    q_half = sym_sqrt(as_matrix(weights.Q, plant.q, plant.q, "Q"), name="Q")
    r_inv_half = sym_sqrt(as_matrix(weights.R, plant.m, plant.m, "R"), inverse=True, name="R")
    return replace(
        plant,
        L=q_half @ plant.L,
        G2=plant.G2 @ r_inv_half,
        weights=None,
        input_scaling=plant.input_scaling @ r_inv_half,
        normalized=True,
    )


@dataclass
class AssumptionReport:
    detectable_FH: bool
    detectable_FL: bool
    stabilizable_FG1: bool
    unit_circle_controllable_FG1: bool
    unit_circle_controllable_FG2: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(
            (
                self.detectable_FH,
                self.detectable_FL,
                self.stabilizable_FG1,
                self.unit_circle_controllable_FG1,
                self.unit_circle_controllable_FG2,
            )
        )

    def failures(self) -> list[str]:
        return [k for k, v in self.witnesses.items() if v]

    def describe(self) -> str:
        if self.ok:
            return "all standing assumptions hold"
        parts = []
        for test, eigs in self.witnesses.items():
            if eigs:
                ev = ", ".join(f"{complex(e):.6g}" for e in eigs)
                parts.append(f"{test} fails at eigenvalue(s) {ev}")
        return "; ".join(parts)


def _pbh_deficient(F, M, eigs, columns: bool) -> list:
    """Eigenvalues at which the PBH matrix [F - lam I, M] (or its stack) drops rank."""
    n = F.shape[0]
    bad = []
    for lam in eigs:
        shifted = F - lam * np.eye(n)
        pbh = np.hstack([shifted, M]) if columns else np.vstack([shifted, M])
        sv = np.linalg.svd(pbh, compute_uv=False)
        if sv.size == 0 or sv[0] == 0.0:
            bad.append(lam)
            continue
        rank = int(np.sum(sv > RANK_RTOL * sv[0]))
        if rank < n:
            bad.append(lam)
    return bad


def validate_assumptions(plant: StateSpacePlant) -> AssumptionReport:
    """PBH rank tests for detectability, stabilizability and unit-circle controllability."""
    F = plant.F
    eigs = np.linalg.eigvals(F)
    mod = np.abs(eigs)
    outside = eigs[mod >= 1.0 - UNIT_CIRCLE_BAND]
    on_circle = eigs[np.abs(mod - 1.0) <= UNIT_CIRCLE_BAND]

    witnesses = {
        "detectable_FH": _pbh_deficient(F, plant.H, outside, columns=False),
        "detectable_FL": _pbh_deficient(F, plant.L, outside, columns=False),
        "stabilizable_FG1": _pbh_deficient(F, plant.G1, outside, columns=True),
        "unit_circle_controllable_FG1": _pbh_deficient(F, plant.G1, on_circle, columns=True),
        "unit_circle_controllable_FG2": _pbh_deficient(F, plant.G2, on_circle, columns=True),
    }
    return AssumptionReport(**{k: not v for k, v in witnesses.items()}, witnesses=witnesses)


def plant_transfer(plant: StateSpacePlant, which: str, z) -> np.ndarray:
    """Evaluate one channel at a single complex point ``z``."""
    if which not in CHANNELS:
        raise ValueError(f"unknown channel {which!r}; expected one of {CHANNELS}")
    z = complex(z)
    check_poles(plant.F, np.array([z]))
    return plant.channel(which).at(z)


def plant_response(plant: StateSpacePlant, z) -> dict[str, np.ndarray]:
    """All four channels on an array of points; each entry has shape (N, rows, cols)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x1 = resolvent_apply(plant.F, plant.G1, z)
    x2 = resolvent_apply(plant.F, plant.G2, z)
    return {
        "P11": np.einsum("ij,njk->nik", plant.L, x1),
        "P12": np.einsum("ij,njk->nik", plant.L, x2),
        "P21": np.einsum("ij,njk->nik", plant.H, x1),
        "P22": np.einsum("ij,njk->nik", plant.H, x2),
    }
