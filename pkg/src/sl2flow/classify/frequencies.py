"""Period of |A(t)| and the two rotation frequencies of bounded orbits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ..charts import PhaseState, Regime, ambient_to_reduced
from ..dynamics import DEFAULT_ATOL, DEFAULT_RTOL, Trajectory, integrate
from ..errors import NotPeriodic
from ..matrix_core import Mat2, norm_sq, rotation
from .orbits import OrbitKind, classify

QUAD_TOL = 1e-11


@dataclass(frozen=True)
class FrequencyReport:
    """Period ``T`` of |A(t)| and frequencies ``omega1``, ``omega2``.

    ``t_ref`` is the time of the Poincare-section crossing the period was
    measured from (0 when the period is arbitrary, as for rigid motions).
    """
    T: float
    omega1: float
    omega2: float
    hatA_period: float
    t_ref: float = 0.0
    kind: OrbitKind | None = None


def reduced_trajectory(state: PhaseState, kappa: float, t_span, t_eval=None, *,
                       rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, t_init=None) -> Trajectory:
    """Integrate ``state`` in whichever polar reduction applies to it."""
    rs = ambient_to_reduced(state, kappa=kappa)
    form = "Hamsys2" if rs.regime is Regime.X2_NONZERO else "Hamsys3"
    return integrate(form, rs, kappa, t_span, t_eval, rtol=rtol, atol=atol, t_init=t_init)


def _section(traj: Trajectory, t):
    # <A, B> = 2 q1 q1' has the sign of q1 xi1; down-crossings are maxima of |A|^2
    y = traj.dense(t)
    return y[..., 0] * y[..., 3]


def section_crossings(traj: Trajectory, t0: float, t1: float, count: int) -> list[float]:
    """Times of the first ``count`` decreasing zeros of ``<A, B>`` in ``[t0, t1]``."""
    lo, hi = traj._steps[0], traj._steps[1]
    mask = (hi > t0) & (lo < t1)
    knots = np.unique(np.concatenate([[t0, t1], lo[mask], hi[mask]]))
    knots = knots[(knots >= t0) & (knots <= t1)]
    # subdivide each step so that sign changes inside a step are resolved
    fine = np.linspace(knots[:-1], knots[1:], 9, axis=1)[:, :-1].ravel()
    fine = np.append(fine, knots[-1])
    g = _section(traj, fine)
    out = []
    for i in np.nonzero((g[:-1] > 0) & (g[1:] <= 0))[0]:
        a, b = fine[i], fine[i + 1]
        if _section(traj, b) == 0.0:
            out.append(float(b))
        else:
            out.append(brentq(lambda s: float(_section(traj, s)), a, b, xtol=1e-13, rtol=1e-15))
        if len(out) >= count:
            break
    return out


def detect_period(state: PhaseState, kappa: float, *, window: float = 20.0,
                  max_window: float = 5e4, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Return ``(T, t_ref, traj)`` from two consecutive maxima of |A|^2."""
    W = window
    while W <= max_window:
        traj = reduced_trajectory(state, kappa, (0.0, W), rtol=rtol, atol=atol)
        ts = section_crossings(traj, 0.0, W, 2)
        if len(ts) == 2:
            return ts[1] - ts[0], ts[0], traj
        W *= 4.0
    raise NotPeriodic(f"no two maxima of |A|^2 found within t <= {max_window:g}")


def frequencies(state: PhaseState, kappa: float, *, rtol=DEFAULT_RTOL,
                atol=DEFAULT_ATOL) -> FrequencyReport:
    """Period and rotation frequencies of a bounded orbit.

    For rigid motions the period of |A| is arbitrary and ``T = 1`` is
    reported; the frequencies are then exact closed forms.  Otherwise the
    period is located on the section ``xi1 = 0`` (maxima of |A|^2) and

    ``omega1 = (1/T) int_0^T X3 / (|A|^2/2 + 1) dt``,
    ``omega2 = (1/T) int_0^T X2 / (|A|^2/2 - 1) dt``

    are evaluated by adaptive quadrature on the dense output.

    Raises
    ------
    NotPeriodic
        If the orbit is not bounded and periodic in |A|.
    """
    oc = classify(state, kappa)
    inv = oc.invariants
    kind = oc.kind
    if kind is OrbitKind.RIGID_ROTATION:
        return FrequencyReport(1.0, 0.5 * inv.X3, 0.0, 2.0, 0.0, kind)
    if kind is OrbitKind.RIGID:
        s = 0.5 * float(norm_sq(state.A)) - 1.0  # q1^2
        return FrequencyReport(1.0, inv.X3 / (2.0 + s), inv.X2 / s, 1.0, 0.0, kind)
    if kind is not OrbitKind.PERIODIC_RADIUS:
        raise NotPeriodic(f"orbit is {kind.value}, not periodic in |A|")
    T, t_ref, traj = detect_period(state, kappa, rtol=rtol, atol=atol)
    x2_zero = traj.formulation.value == "Hamsys3"

    def q1sq(t):
        return float(traj.dense(t)[0]) ** 2

    w1, _ = quad(lambda t: inv.X3 / (2.0 + q1sq(t)), t_ref, t_ref + T, epsabs=QUAD_TOL,
                 epsrel=QUAD_TOL, limit=400)
    if x2_zero:
        w2 = 0.0
    else:
        w2, _ = quad(lambda t: inv.X2 / q1sq(t), t_ref, t_ref + T, epsabs=QUAD_TOL,
                     epsrel=QUAD_TOL, limit=400)
        w2 /= T
    hat = 2.0 * T if oc.passes_through_so2 else T
    return FrequencyReport(float(T), float(w1 / T), float(w2), float(hat), float(t_ref), kind)


def hat_A(A_rows, t, report: FrequencyReport) -> np.ndarray:
    """U(-(w1+w2)t/2) A(t) U(-(w1-w2)t/2) for ambient rows ``A_rows`` at times ``t``.

    This strips the two rotation frequencies; the result is periodic with
    period ``report.hatA_period``.
    """
    t = np.asarray(t, dtype=float)
    A_rows = np.atleast_2d(A_rows)
    A = Mat2(*A_rows[:, :4].T)
    L = rotation(-0.5 * (report.omega1 + report.omega2) * t)
    R = rotation(-0.5 * (report.omega1 - report.omega2) * t)
    H = L @ A @ R
    return np.column_stack([np.broadcast_to(np.asarray(v, dtype=float), t.shape) for v in H])


__all__ = ["FrequencyReport", "frequencies", "detect_period", "section_crossings",
           "reduced_trajectory", "hat_A"]
