"""Orthonormal tangent frames at A and the special launch sets within them.

In the normalized momenta ``xihat`` (coordinates of B in an orthonormal
frame of the tangent plane at A), the interesting invariant sets become
quadrics:

* zero pressure: ``xihat1^2/(1+q1^2) + xihat2^2 - xihat3^2 + 2 kappa = 0``;
* rigid motions: ``xihat1 = 0`` and ``xihat2^2/q1^2 + xihat3^2/(2+q1^2) = 2 kappa``;
* the manifolds asymptotic to rigid rotations:
  ``xihat2 = 0`` and ``xihat1^2/2 + kappa q1^2 = q1^2 xihat3^2/4``.

At a rotation A the frame is ``AK, AM, AZ`` over sqrt 2 and the zero
pressure quadric reads ``xihat1^2 + xihat2^2 - xihat3^2 + 2 kappa = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..charts import SQRT2, metric_h, phi_inverse, tangent_columns
from ..errors import NotOnManifold
from ..matrix_core import DEFAULT_TOL, K, M, Mat2, Z, det2, inner, norm_sq


@dataclass(frozen=True)
class TangentReport:
    A: Mat2
    kappa: float
    q1: float
    in_so2: bool
    basis: tuple

    def coordinates(self, B: Mat2) -> tuple:
        """xihat_i = <tau_i, B>; B is assumed tangent at A."""
        return tuple(float(inner(t, B)) for t in self.basis)

    def launch(self, xihat) -> Mat2:
        """The tangent vector with normalized coordinates ``xihat``."""
        t1, t2, t3 = self.basis
        return t1 * xihat[0] + t2 * xihat[1] + t3 * xihat[2]

    def pressureless_residual(self, xihat) -> float:
        a, b, c = xihat
        if self.in_so2:
            return a * a + b * b - c * c + 2.0 * self.kappa
        return a * a / (1.0 + self.q1 ** 2) + b * b - c * c + 2.0 * self.kappa

    def rigid_residual(self, xihat) -> tuple[float, float]:
        """``(xihat1, xihat2^2/q1^2 + xihat3^2/(2+q1^2) - 2 kappa)`` off SO(2).

        At a rotation the rigid directions are the multiples of ``tau3``; the
        residual is then ``(xihat1, xihat2)``.
        """
        a, b, c = xihat
        if self.in_so2:
            return a, b
        s = self.q1 ** 2
        return a, b * b / s + c * c / (2.0 + s) - 2.0 * self.kappa

    def homoclinic_residual(self, xihat) -> tuple[float, float] | None:
        """``(xihat2, xihat1^2/2 + kappa q1^2 - q1^2 xihat3^2/4)``; None at a rotation.

        For kappa = 0 the sign of ``xihat1`` equals the sign of ``<A, B>``,
        negative on the stable and positive on the unstable manifold.
        """
        if self.in_so2:
            return None
        a, b, c = xihat
        s = self.q1 ** 2
        return b, 0.5 * a * a + self.kappa * s - 0.25 * s * c * c

    def rigid_directions(self, n: int = 64) -> np.ndarray:
        """Sample of normalized rigid launch directions (rows of xihat)."""
        if self.in_so2:
            return np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        if self.kappa == 0:
            return np.zeros((0, 3))
        s = self.q1 ** 2
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        r = math.sqrt(2.0 * self.kappa)
        return np.column_stack([np.zeros(n), r * self.q1 * np.cos(th),
                                r * math.sqrt(2.0 + s) * np.sin(th)])

    def homoclinic_directions(self) -> np.ndarray:
        """The launch directions onto the asymptotic manifolds (possibly empty).

        Solutions ``(xihat1, 0, xihat3)`` of the hyperbola exist only when
        ``xihat3^2 >= 4 kappa``; returned here for ``xihat3`` on a grid.
        """
        if self.in_so2:
            return np.zeros((0, 3))
        s = self.q1 ** 2
        c = np.linspace(2.0 * math.sqrt(self.kappa) + 1e-3, 2.0 * math.sqrt(self.kappa) + 6.0, 32)
        a = np.sqrt(np.maximum(0.5 * s * c * c - 2.0 * self.kappa * s, 0.0))
        rows = [np.column_stack([sa * a, np.zeros_like(c), sc * c])
                for sa in (1.0, -1.0) for sc in (1.0, -1.0)]
        return np.vstack(rows)


def tangent_launcher(A: Mat2, kappa: float, tol: float = DEFAULT_TOL) -> TangentReport:
    """Orthonormal frame of the tangent plane at ``A`` and the launch-set data."""
    if abs(det2(A) - 1.0) > tol:
        raise NotOnManifold(f"det A = {det2(A)!r} is not 1 within {tol}")
    in_so2 = abs(norm_sq(A) - 2.0) <= tol
    if in_so2:
        basis = (A @ K / SQRT2, A @ M / SQRT2, A @ Z / SQRT2)
        return TangentReport(A, float(kappa), 0.0, True, basis)
    x1, x2, x3 = phi_inverse(A, tol)
    q = (math.hypot(x1, x2), math.atan2(x2, x1), x3)
    h = np.diag(metric_h(q[0]))
    cols = tangent_columns(q)
    basis = tuple(c / math.sqrt(hi) for c, hi in zip(cols, h))
    return TangentReport(A, float(kappa), q[0], False, basis)
