"""Fluid fields and ellipse geometry reconstructed from a phase-space state.

For a state ``(A, B)`` the fluid occupies the ellipse ``A(unit disk)`` and

    u(x) = B A^{-1} x,   b(x) = c0 A Z A^{-1} x,   p(x) = lambda (1 - |A^{-1} x|^2) / 2

with ``c0^2 = kappa`` and ``lambda`` the Lagrange multiplier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import PhaseState
from .dynamics import lagrange_multiplier
from .errors import KappaMismatch, NotOnManifold
from .matrix_core import DEFAULT_TOL, Mat2, Z, det2, inverse, matvec, norm_sq, trace


@dataclass(frozen=True)
class EllipseGeometry:
    semi_axis_major: float
    semi_axis_minor: float
    orientation: float
    area: float


@dataclass(frozen=True)
class FieldSample:
    x: tuple
    u: tuple
    b: tuple
    p: float
    inside: bool


def velocity_gradient(state: PhaseState) -> Mat2:
    """L = B A^{-1}; trace free on the tangent bundle."""
    A, B = state
    return B @ inverse(A)


def _c0(kappa, c0):
    if c0 is None:
        return math.sqrt(kappa)
    if abs(c0 * c0 - kappa) > 1e-12:
        raise KappaMismatch(f"c0^2 = {c0 * c0!r} differs from kappa = {kappa!r}")
    return float(c0)


def fields_at(state: PhaseState, kappa: float, c0: float | None, x) -> FieldSample:
    """Velocity, magnetic field and pressure at the point ``x``.

    ``c0`` may be either square root of ``kappa``; ``None`` picks the positive one.
    Points outside the fluid get zero fields.
    """
    c0 = _c0(kappa, c0)
    A, B = state
    Ai = inverse(A)
    y = matvec(Ai, x)
    r2 = float(y[0] ** 2 + y[1] ** 2)
    inside = r2 <= 1.0 + 1e-12
    if not inside:
        return FieldSample(tuple(map(float, x)), (0.0, 0.0), (0.0, 0.0), 0.0, False)
    u = matvec(B @ Ai, x)
    b = matvec((A @ Z @ Ai) * c0, x)
    lam = float(lagrange_multiplier(state, kappa))
    p = 0.5 * lam * (1.0 - r2)
    return FieldSample(tuple(map(float, x)), tuple(map(float, u)), tuple(map(float, b)),
                       float(p), True)


def ellipse_arrays(A: Mat2):
    """Vectorized ``(major, minor, orientation)`` for batched ``A``; no det check."""
    h = 0.5 * np.asarray(norm_sq(A), dtype=float)
    sp = np.sqrt(h + 1.0)
    sm = np.sqrt(np.maximum(h - 1.0, 0.0))
    major = (sp + sm) / math.sqrt(2.0)
    minor = (sp - sm) / math.sqrt(2.0)
    a11, a12, a21, a22 = (np.asarray(v, dtype=float) for v in A)
    # A A^T = [[p, r], [r, s]]
    p = a11 * a11 + a12 * a12
    s = a21 * a21 + a22 * a22
    r = a11 * a21 + a12 * a22
    theta = 0.5 * np.arctan2(2.0 * r, p - s)
    theta = np.where(theta <= -0.5 * math.pi, theta + math.pi, theta)
    theta = np.where(sm <= 1e-12, 0.0, theta)
    return major, minor, theta


def ellipse_of(A: Mat2, tol: float = DEFAULT_TOL) -> EllipseGeometry:
    """Principal semi-axes and orientation of the ellipse ``A(unit disk)``.

    The semi-axes are ``[(|A|^2/2 + 1)^{1/2} +- (|A|^2/2 - 1)^{1/2}] / sqrt 2``;
    the orientation is the angle in (-pi/2, pi/2] of the major axis, the
    leading eigenvector of ``A A^T`` (reported as 0 for a disk).
    """
    if abs(det2(A) - 1.0) > tol:
        raise NotOnManifold(f"det A = {det2(A)!r} is not 1 within {tol}")
    major, minor, theta = (float(v) for v in ellipse_arrays(A))
    return EllipseGeometry(major, minor, theta, math.pi * major * minor)


@dataclass(frozen=True)
class DivergenceReport:
    div_u: float
    div_b: float
    max_b_dot_n: float
    max_p_boundary: float
    sample_count: int


def divergence_checks(state: PhaseState, kappa: float, c0: float | None = None,
                      sample_count: int = 1000) -> DivergenceReport:
    """Analytic divergences and sampled boundary conditions.

    Boundary points are ``A(cos s, sin s)``; the outward normal there is
    ``A^{-T}(cos s, sin s)``, normalized.
    """
    c0 = _c0(kappa, c0)
    A, B = state
    Ai = inverse(A)
    div_u = float(trace(B @ Ai))
    div_b = float(c0 * trace(A @ Z @ Ai))
    th = np.linspace(0.0, 2.0 * np.pi, int(sample_count), endpoint=False)
    w = (np.cos(th), np.sin(th))
    x = matvec(A, w)
    n = matvec(Ai.T, w)
    nn = np.hypot(n[0], n[1])
    bv = matvec((A @ Z @ Ai) * c0, x)
    bn = np.abs(bv[0] * n[0] + bv[1] * n[1]) / nn
    y = matvec(Ai, x)
    lam = float(lagrange_multiplier(state, kappa))
    pb = np.abs(0.5 * lam * (1.0 - (y[0] ** 2 + y[1] ** 2)))
    return DivergenceReport(div_u, div_b, float(bn.max()), float(pb.max()), int(sample_count))


def taylor_sign(state: PhaseState, kappa: float) -> bool:
    """True when the multiplier (so the interior pressure) is positive."""
    return bool(lagrange_multiplier(state, kappa) > 0)
