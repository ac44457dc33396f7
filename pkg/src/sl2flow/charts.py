"""Coordinate charts on SL(2,R) and its tangent bundle.

Three coordinate systems are used:

* ambient pairs ``(A, B)`` with ``det A = 1`` and ``B`` tangent at ``A``;
* chart coordinates ``(x, p)``: ``A = phi(x)`` and ``p`` the momentum
  conjugate to ``x`` under the induced metric ``g(x)``;
* reduced coordinates ``(q, xi)``: polar coordinates for ``(x1, x2)``.
  When the invariant ``X2`` is nonzero the canonical polar lift is used
  (``q1 > 0``).  When ``X2 = 0`` the momentum is parallel to the position
  and both share the angle ``q2 = xi2``; ``q1`` may then take either sign.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotOnManifold, SingularChart
from .matrix_core import (DEFAULT_TOL, I, K, M, Mat2, Z, det2, inner, norm_sq,
                          tangent_defect)

SQRT2 = math.sqrt(2.0)

#: relative band on |X2| below which the X2 = 0 reduction is chosen
X2_ZERO_BAND = 1e-10


class PhaseState(NamedTuple):
    """A point ``(A, B)`` of the tangent bundle, B playing the role of dA/dt."""
    A: Mat2
    B: Mat2


class ChartPoint(NamedTuple):
    x: tuple
    p: tuple


class Regime(str, enum.Enum):
    X2_NONZERO = "X2NonZero"
    X2_ZERO = "X2Zero"


@dataclass(frozen=True)
class ReducedState:
    """Reduced coordinates ``(q, xi)`` and the reduction they belong to."""
    q: tuple
    xi: tuple
    regime: Regime = Regime.X2_NONZERO

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if self.regime is Regime.X2_ZERO and np.ndim(self.q[1]) == 0:
            # both momenta and position share the angle q2 = xi2
            d = math.remainder(float(self.q[1]) - float(self.xi[1]), 2.0 * math.pi)
            if abs(d) > 1e-12:
                raise ValueError(f"X2Zero regime needs xi2 = q2, got q2={self.q[1]!r}, "
                                 f"xi2={self.xi[1]!r}")

    def as_vector(self) -> np.ndarray:
        return np.array([*self.q, *self.xi], dtype=float)

    @classmethod
    def from_vector(cls, v, regime) -> ReducedState:
        v = [float(c) for c in v]
        return cls(tuple(v[:3]), tuple(v[3:6]), Regime(regime))


PolarPoint = ReducedState


def _scalarize(v):
    return float(v) if np.ndim(v) == 0 else v


def rho(x):
    """rho(x) = sqrt(2 + x1^2 + x2^2)."""
    return np.sqrt(2.0 + x[0] * x[0] + x[1] * x[1])


def phi(x) -> Mat2:
    x1, x2, x3 = x
    r = rho(x)
    c, s = np.cos(x3), np.sin(x3)
    a = r * c
    b = r * s
    # (a I + b Z + x1 K + x2 M) / sqrt(2)
    return Mat2(*(_scalarize(e / SQRT2) for e in (a + x1, -b + x2, b + x2, a - x1)))


def phi_jacobian(x) -> tuple[Mat2, Mat2, Mat2]:
    """The partial derivatives of ``phi`` at ``x``, one Mat2 per coordinate."""
    x1, x2, x3 = x
    r = rho(x)
    c, s = np.cos(x3), np.sin(x3)
    # d/dx1 = ((x1/r)(cI + sZ) + K)/sqrt2, d/dx2 likewise with M,
    # d/dx3 = r(-sI + cZ)/sqrt2
    u1, u2 = x1 / r, x2 / r
    d1 = Mat2(*(_scalarize(e / SQRT2) for e in (u1 * c + 1.0, -u1 * s, u1 * s, u1 * c - 1.0)))
    d2 = Mat2(*(_scalarize(e / SQRT2) for e in (u2 * c, -u2 * s + 1.0, u2 * s + 1.0, u2 * c)))
    d3 = Mat2(*(_scalarize(e / SQRT2) for e in (-r * s, -r * c, r * c, -r * s)))
    return d1, d2, d3


def phi_inverse(A: Mat2, tol: float = DEFAULT_TOL) -> tuple:
    if abs(det2(A) - 1.0) > tol:
        raise NotOnManifold(f"det A = {det2(A)!r} is not 1 within {tol}")
    x1 = inner(A, K) / SQRT2
    x2 = inner(A, M) / SQRT2
    x3 = math.atan2(inner(A, Z), inner(A, I))
    return (float(x1), float(x2), float(x3))


def pushforward(x, y) -> Mat2:
    d1, d2, d3 = phi_jacobian(x)
    return d1 * y[0] + d2 * y[1] + d3 * y[2]


def big_phi(x, y) -> PhaseState:
    """(phi(x), D phi(x) y)."""
    return PhaseState(phi(x), pushforward(x, y))


def metric_g(x) -> np.ndarray:
    x1, x2 = float(x[0]), float(x[1])
    r2 = 2.0 + x1 * x1 + x2 * x2
    return np.array([[1.0 + x1 * x1 / r2, x1 * x2 / r2, 0.0],
                     [x1 * x2 / r2, 1.0 + x2 * x2 / r2, 0.0],
                     [0.0, 0.0, r2]])


def metric_g_inv(x) -> np.ndarray:
    x1, x2 = float(x[0]), float(x[1])
    r2 = 2.0 + x1 * x1 + x2 * x2
    f2 = r2 + x1 * x1 + x2 * x2  # |phi(x)|^2
    return np.array([[1.0 - x1 * x1 / f2, -x1 * x2 / f2, 0.0],
                     [-x1 * x2 / f2, 1.0 - x2 * x2 / f2, 0.0],
                     [0.0, 0.0, 1.0 / r2]])


def gamma(x, p) -> tuple:
    """Legendre inverse: (x, p) -> (x, g(x)^{-1} p)."""
    return tuple(x), tuple(float(v) for v in metric_g_inv(x) @ np.asarray(p, dtype=float))


def gamma_inverse(x, y) -> tuple:
    return tuple(x), tuple(float(v) for v in metric_g(x) @ np.asarray(y, dtype=float))


def chart_to_ambient(cp: ChartPoint) -> PhaseState:
    x, p = cp
    x1, x2 = x[0], x[1]
    f2 = 2.0 + 2.0 * (x1 * x1 + x2 * x2)
    r2 = 2.0 + x1 * x1 + x2 * x2
    # g^{-1} p written out so that batched (array) coordinates work
    xp = x1 * p[0] + x2 * p[1]
    y = (p[0] - x1 * xp / f2, p[1] - x2 * xp / f2, p[2] / r2)
    return PhaseState(phi(x), pushforward(x, y))


def ambient_to_chart(state: PhaseState, tol: float = DEFAULT_TOL) -> ChartPoint:
    A, B = state
    x = phi_inverse(A, tol)
    # p = g y = D phi^T D phi y = D phi^T B
    p = tuple(float(inner(d, B)) for d in phi_jacobian(x))
    return ChartPoint(x, p)


def check_on_bundle(state: PhaseState, tol: float = DEFAULT_TOL) -> None:
    A, B = state
    dd = abs(det2(A) - 1.0)
    if dd > tol:
        raise NotOnManifold(f"|det A - 1| = {dd:.3e} exceeds {tol}")
    td = abs(tangent_defect(A, B))
    scale = max(1.0, math.sqrt(norm_sq(A) * norm_sq(B)))
    if td > tol * scale:
        raise NotOnManifold(f"<B, cof A> = {td:.3e} exceeds {tol} (B not tangent to SL(2,R))")


def psi(q) -> tuple:
    q1, q2, q3 = q
    return (q1 * np.cos(q2), q1 * np.sin(q2), q3)


def metric_h(q1: float) -> np.ndarray:
    if not q1 > 0:
        raise SingularChart(f"metric h is singular at q1 = {q1!r}")
    s = q1 * q1
    return np.diag([(2.0 + s) / (2.0 * (1.0 + s)), 1.0 / s, 1.0 / (2.0 + s)])


def reduced_to_chart(rs: ReducedState) -> ChartPoint:
    q1, q2, q3 = rs.q
    xi1, xi2, xi3 = rs.xi
    if rs.regime is Regime.X2_NONZERO:
        if np.any(np.asarray(q1) <= 0):
            raise SingularChart(f"X2NonZero regime needs q1 > 0, got {q1!r}")
        c, s = np.cos(q2), np.sin(q2)
        # p = D psi(q)^{-T} xi
        w = xi2 / q1
        p = (c * xi1 - s * w, s * xi1 + c * w, xi3)
    else:
        p = (xi1 * np.cos(xi2), xi1 * np.sin(xi2), xi3)
    x = psi(rs.q)
    return ChartPoint(tuple(map(_scalarize, x)), tuple(map(_scalarize, p)))


def reduced_to_ambient(rs: ReducedState) -> PhaseState:
    return chart_to_ambient(reduced_to_chart(rs))


def x2_is_zero(X2: float, X1: float) -> bool:
    return abs(X2) <= X2_ZERO_BAND * max(1.0, abs(X1))


def ambient_to_reduced(state: PhaseState, tol: float = DEFAULT_TOL, *,
                       kappa: float = 0.0, regime: Regime | None = None) -> ReducedState:
    """Reduced coordinates reproducing ``state``.

    The regime is picked from ``X2`` unless forced.  In the X2 = 0 regime the
    common direction of the position and momentum is taken from whichever of
    the two is longer, which keeps the discarded transverse component at the
    rounding level.
    """
    check_on_bundle(state, tol)
    (x1, x2, x3), (p1, p2, p3) = ambient_to_chart(state, tol)
    X2 = x1 * p2 - x2 * p1
    if regime is None:
        A, B = state
        X1 = 0.5 * norm_sq(B) + 0.5 * kappa * norm_sq(A)
        regime = Regime.X2_ZERO if x2_is_zero(X2, X1) else Regime.X2_NONZERO
    regime = Regime(regime)
    if regime is Regime.X2_NONZERO:
        q1 = math.hypot(x1, x2)
        if not q1 > 0:
            raise SingularChart("A is a rotation; the X2NonZero chart does not cover it")
        q2 = math.atan2(x2, x1)
        xi1 = (x1 * p1 + x2 * p2) / q1
        return ReducedState((q1, q2, x3), (xi1, X2, p3), regime)
    nx, npn = math.hypot(x1, x2), math.hypot(p1, p2)
    if nx == 0.0 and npn == 0.0:
        q2 = 0.0
    elif nx >= npn:
        q2 = math.atan2(x2, x1)
    else:
        q2 = math.atan2(p2, p1)
    c, s = math.cos(q2), math.sin(q2)
    return ReducedState((x1 * c + x2 * s, q2, x3), (p1 * c + p2 * s, q2, p3), regime)


def tangent_columns(q) -> tuple[Mat2, Mat2, Mat2]:
    """Pushforwards of the reduced momentum basis vectors at ``q`` (q1 > 0).

    These are the columns of the map xi -> B; they are mutually orthogonal
    with squared lengths given by ``metric_h``.
    """
    cols = []
    for e in np.eye(3):
        cols.append(reduced_to_ambient(ReducedState(tuple(q), tuple(e), Regime.X2_NONZERO)).B)
    return tuple(cols)
