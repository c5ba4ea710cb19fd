"""Minimal discrete-time state-space algebra.

Only what the synthesis chain needs: batched frequency evaluation,
series/parallel composition, and impulse-response coefficients.
Transfer matrices are ``C (zI - A)^{-1} B + D``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SingularityError

POLE_TOL = 1e-10


def as_matrix(x, rows=None, cols=None, name="matrix") -> np.ndarray:
    """Coerce ``x`` to a 2-D float array, optionally checking its shape."""
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise DimensionError(f"{name} must have {cols} columns, got {a.shape[1]}")
    return a


def spectral_radius(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def unit_circle(n_points: int) -> np.ndarray:
    """Uniform grid ``exp(j 2 pi k / N)``, k = 0..N-1."""
    return np.exp(2j * np.pi * np.arange(n_points) / n_points)


def resolvent_apply(a: np.ndarray, b: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Return ``(zI - a)^{-1} b`` for every entry of ``z``; shape (N, n, k)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = a.shape[0]
    if n == 0:
        return np.zeros((z.size, 0, b.shape[1]), dtype=complex)
    lhs = z[:, None, None] * np.eye(n) - a[None, :, :]
    rhs = np.broadcast_to(b.astype(complex), (z.size,) + b.shape)
    return np.linalg.solve(lhs, rhs)


def check_poles(a: np.ndarray, z: np.ndarray, tol: float = POLE_TOL) -> None:
    if a.shape[0] == 0:
        return
    eig = np.linalg.eigvals(a)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    dist = np.abs(z[:, None] - eig[None, :])
    scale = 1.0 + np.abs(z)[:, None]
    if np.any(dist <= tol * scale):
        i, j = np.unravel_index(np.argmin(dist / scale), dist.shape)
        raise SingularityError(
            f"evaluation point {z[i]:.6g} is within {tol:g} of pole {eig[j]:.6g}"
        )


@dataclass
class StateSpace:
    """A real discrete-time LTI realization ``(A, B, C, D)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0:
            self.A = np.zeros((0, 0))
        elif self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise DimensionError(f"A must be square, got shape {self.A.shape}")
        n = self.A.shape[0]
        self.B = np.asarray(self.B, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        if self.B.ndim != 2 or self.C.ndim != 2:
            raise DimensionError("B and C must be 2-D")
        if self.B.shape[0] != n or self.C.shape[1] != n:
            raise DimensionError(
                f"B {self.B.shape} and C {self.C.shape} do not match A {self.A.shape}"
            )
        if self.D is None:
            self.D = np.zeros((self.C.shape[0], self.B.shape[1]))
        self.D = as_matrix(self.D, self.C.shape[0], self.B.shape[1], "D")

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def spectral_radius(self) -> float:
        return spectral_radius(self.A)

    def is_stable(self, margin: float = 0.0) -> bool:
        return self.spectral_radius < 1.0 - margin

    def evaluate(self, z, check: bool = False) -> np.ndarray:
        """Frequency response at the points ``z``; returns shape (N, out, in)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if check:
            check_poles(self.A, z)
        x = resolvent_apply(self.A, self.B, z)
        return np.einsum("ij,njk->nik", self.C, x) + self.D[None, :, :]

    def at(self, z) -> np.ndarray:
        """Single-point evaluation, returns a 2-D complex matrix."""
        return self.evaluate(np.array([z]))[0]

    def markov(self, count: int) -> np.ndarray:
        """Impulse-response coefficients h_0 = D, h_k = C A^{k-1} B, k < count."""
        out = np.zeros((count, self.n_outputs, self.n_inputs))
        if count == 0:
            return out
        out[0] = self.D
        x = self.B.copy()
        for k in range(1, count):
            out[k] = self.C @ x
            x = self.A @ x
        return out

    def __neg__(self) -> "StateSpace":
        return StateSpace(self.A, self.B, -self.C, -self.D)

    def __add__(self, other: "StateSpace") -> "StateSpace":
        return parallel(self, other)

    def __matmul__(self, other: "StateSpace") -> "StateSpace":
        # (self @ other)(z) = self(z) other(z)
        return series(other, self)

    def scale_left(self, m) -> "StateSpace":
        m = np.asarray(m, dtype=float)
        if m.ndim == 0:
            return StateSpace(self.A, self.B, m * self.C, m * self.D)
        return StateSpace(self.A, self.B, m @ self.C, m @ self.D)

    def scale_right(self, m) -> "StateSpace":
        m = np.asarray(m, dtype=float)
        if m.ndim == 0:
            return StateSpace(self.A, m * self.B, self.C, m * self.D)
        return StateSpace(self.A, self.B @ m, self.C, self.D @ m)

    def similarity(self, t) -> "StateSpace":
        t = np.asarray(t, dtype=float)
        ti = np.linalg.inv(t)
        return StateSpace(t @ self.A @ ti, t @ self.B, self.C @ ti, self.D)


def constant(d) -> StateSpace:
    d = np.atleast_2d(np.asarray(d, dtype=float))
    return StateSpace(np.zeros((0, 0)), np.zeros((0, d.shape[1])), np.zeros((d.shape[0], 0)), d)


def series(first: StateSpace, second: StateSpace) -> StateSpace:
    """Realization of ``second(z) @ first(z)`` (signal passes ``first`` then ``second``)."""
    if first.n_outputs != second.n_inputs:
        raise DimensionError(
            f"series: {first.n_outputs} outputs feed {second.n_inputs} inputs"
        )
    n1, n2 = first.n_states, second.n_states
    a = np.block([
        [first.A, np.zeros((n1, n2))],
        [second.B @ first.C, second.A],
    ])
    b = np.vstack([first.B, second.B @ first.D])
    c = np.hstack([second.D @ first.C, second.C])
    d = second.D @ first.D
    return StateSpace(a, b, c, d)


def parallel(a_sys: StateSpace, b_sys: StateSpace) -> StateSpace:
    if a_sys.D.shape != b_sys.D.shape:
        raise DimensionError("parallel: mismatched input/output sizes")
    n1, n2 = a_sys.n_states, b_sys.n_states
    a = np.block([
        [a_sys.A, np.zeros((n1, n2))],
        [np.zeros((n2, n1)), b_sys.A],
    ])
    return StateSpace(
        a,
        np.vstack([a_sys.B, b_sys.B]),
        np.hstack([a_sys.C, b_sys.C]),
        a_sys.D + b_sys.D,
    )


def impulse_coefficients(samples: np.ndarray) -> np.ndarray:
    """Laurent coefficients from uniform unit-circle samples.

    ``samples[k]`` is the value at ``exp(j 2 pi k / N)``; entry ``l`` of the
    result is the coefficient of ``z^{-l}`` (negative ``l`` wrap to the end).
    """
    return np.fft.ifft(samples, axis=0)
