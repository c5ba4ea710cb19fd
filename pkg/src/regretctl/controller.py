"""Controller realizations and the Youla/feedback conversions.

A Youla parameter ``Q`` acts on the innovation ``y - P22 u``:

    u = Q (y - P22 u)   <=>   u = K y,  K = (I + Q P22)^{-1} Q.

Conversely ``Q = K (I - P22 K)^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InstabilityError
from .lti import StateSpace, spectral_radius
from .sysmodel import StateSpacePlant

KINDS = ("RO-causal", "RO-strictly-causal", "H2", "Hinf", "Youla", "feedback")


@dataclass
class ControllerRealization(StateSpace):
    """Discrete controller ``(A, B, C, D)`` from measurements to controls.

    ``form`` is ``"youla"`` when the realization is the parameter ``Q`` and
    ``"feedback"`` when it is the controller ``K`` with ``u = K y``.
    """

    kind: str = "Youla"
    gamma: float | None = None
    form: str = "youla"
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_ss(cls, ss: StateSpace, **kw) -> "ControllerRealization":
        return cls(ss.A, ss.B, ss.C, ss.D, **kw)

    @property
    def strictly_causal(self) -> bool:
        return not np.any(self.D)

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "kind": self.kind,
            "gamma": self.gamma,
            "form": self.form,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerRealization":
        for key in ("A", "B", "C", "D"):
            if key not in d:
                raise DimensionError(f"controller is missing key {key!r}")
        B = np.asarray(d["B"], dtype=float)
        C = np.asarray(d["C"], dtype=float)
        A = np.asarray(d["A"], dtype=float)
        D = np.atleast_2d(np.asarray(d["D"], dtype=float))
        if A.size == 0:
            A = np.zeros((0, 0))
            B = B.reshape(0, D.shape[1])
            C = C.reshape(D.shape[0], 0)
        return cls(A, B, C, D, kind=d.get("kind", "Youla"), gamma=d.get("gamma"),
                   form=d.get("form", "youla"))

    def check_plant(self, plant: StateSpacePlant) -> None:
        if self.n_inputs != plant.p or self.n_outputs != plant.m:
            raise DimensionError(
                f"controller is {self.n_outputs}x{self.n_inputs}, plant needs {plant.m}x{plant.p}"
            )


def zero_controller(plant: StateSpacePlant, **kw) -> ControllerRealization:
    return ControllerRealization(np.zeros((0, 0)), np.zeros((0, plant.p)), np.zeros((plant.m, 0)),
                                 np.zeros((plant.m, plant.p)), **kw)


def youla_to_feedback(plant: StateSpacePlant, Q: ControllerRealization, check: bool = True) -> ControllerRealization:
    """Feedback controller ``K = (I + Q P22)^{-1} Q``.

    The realization carries a copy of the plant state (``xh``) that
    reconstructs ``P22 u``; its states are ``(xh, xi)`` with ``xi`` the
    state of ``Q``. The resulting loop is internally stable iff both ``F``
    and ``A_Q`` are stable, which is checked when ``check`` is set.
    """
    Q.check_plant(plant)
    F, G2, H = plant.F, plant.G2, plant.H
    if check:
        rq = spectral_radius(Q.A)
        rf = spectral_radius(F)
        if rq >= 1.0:
            raise InstabilityError(f"Youla parameter is unstable (spectral radius {rq:.6g})")
        if rf >= 1.0:
            raise InstabilityError(
                f"plant is open-loop unstable (spectral radius {rf:.6g}); the loop "
                "u = Q(y - P22 u) is not internally stable"
            )
    if not np.any(G2) or not np.any(H):
        return ControllerRealization(Q.A, Q.B, Q.C, Q.D, kind=Q.kind, gamma=Q.gamma, form="feedback")
    A_Q, B_Q, C_Q, D_Q = Q.A, Q.B, Q.C, Q.D
    A = np.block([
        [F - G2 @ D_Q @ H, G2 @ C_Q],
        [-B_Q @ H, A_Q],
    ])
    B = np.vstack([G2 @ D_Q, B_Q])
    C = np.hstack([-D_Q @ H, C_Q])
    return ControllerRealization(A, B, C, D_Q, kind=Q.kind, gamma=Q.gamma, form="feedback")


def feedback_to_youla(plant: StateSpacePlant, K: ControllerRealization) -> ControllerRealization:
    """Youla parameter ``Q = K (I - P22 K)^{-1}`` of a feedback controller.

    Its state matrix is the closed loop of ``K`` with ``(F, G2, H)``, so it
    is stable exactly when ``K`` stabilizes the plant.
    """
    K.check_plant(plant)
    F, G2, H = plant.F, plant.G2, plant.H
    A_K, B_K, C_K, D_K = K.A, K.B, K.C, K.D
    A = np.block([
        [F + G2 @ D_K @ H, G2 @ C_K],
        [B_K @ H, A_K],
    ])
    B = np.vstack([G2 @ D_K, B_K])
    C = np.hstack([D_K @ H, C_K])
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise InstabilityError(f"controller does not stabilize the plant (spectral radius {rho:.6g})")
    return ControllerRealization(A, B, C, D_K, kind=K.kind, gamma=K.gamma, form="youla")
