"""Asymptotic behaviour of computed trajectories.

* Homoclinic orbits (kappa > 0, X3^2 > 8 kappa, X2 = 0) and the one-sided
  separatrices of the perfect fluid approach the rotating disk
  ``U(X3 t / 2 + theta)`` exponentially fast.
* Unbounded perfect-fluid orbits approach a straight line ``A_inf + B_inf t``.
* Quasi-periodic MHD orbits nearly return after ``2 ell T`` for some
  ``ell <= N^2``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .charts import PhaseState, Regime, ReducedState, reduced_to_ambient
from .classify.frequencies import frequencies, reduced_trajectory
from .classify.orbits import OrbitKind, classify
from .dynamics import Trajectory, invariants_of
from .errors import NotConvergent, NotPeriodic, NotUnbounded, ParameterOutOfRange
from .matrix_core import I, Mat2, Z, cofactor, det2, inner, norm_sq, rotation

log = logging.getLogger(__name__)

#: samples whose distance to SO(2) is below this multiple of the closest
#: approach are treated as dominated by integration error
NOISE_FACTOR = 100.0
TAIL_TOL = 1e-13
DEFAULT_HORIZON = 1e3


# ---------------------------------------------------------------- launch data

def homoclinic_q1_max(kappa: float, X3: float) -> float:
    """Turning point of the homoclinic lobe, ``q1^2 = X3^2/(4 kappa) - 2``."""
    if not kappa > 0:
        raise ParameterOutOfRange("the homoclinic lobe needs kappa > 0")
    if not X3 * X3 > 8.0 * kappa:
        raise ParameterOutOfRange(f"X3^2 = {X3 * X3!r} must exceed 8 kappa = {8.0 * kappa!r}")
    return math.sqrt(X3 * X3 / (4.0 * kappa) - 2.0)


def _separatrix_xi1(kappa, X3, q1):
    # xi1^2 = 2(1+s)/(2+s) * s (X3^2/(2(2+s)) - 2 kappa), s = q1^2
    s = q1 * q1
    f = s * (X3 * X3 / (2.0 * (2.0 + s)) - 2.0 * kappa)
    return math.sqrt(max(2.0 * (1.0 + s) / (2.0 + s) * f, 0.0))


def _launch(kappa, X3, q1, sign, q2, q3, reduced):
    xi1 = math.copysign(_separatrix_xi1(kappa, X3, abs(q1)), sign) * math.copysign(1.0, q1)
    rs = ReducedState((float(q1), float(q2), float(q3)), (xi1, float(q2), float(X3)),
                      Regime.X2_ZERO)
    return rs if reduced else reduced_to_ambient(rs)


def build_homoclinic_data(kappa: float, X3: float, q1_start: float, sign: float = 1.0, *,
                          q2: float = 0.0, q3: float = 0.0, reduced: bool = False):
    """A state on the homoclinic manifold, ``H0 = kappa + X3^2/4`` with ``X2 = 0``.

    Parameters
    ----------
    kappa : float
        Must be positive.
    X3 : float
        Needs ``X3^2 > 8 kappa``.
    q1_start : float
        Radius coordinate in ``(0, q1_max]``; ``q1_max`` is the turning point.
    sign : float
        Sign of ``xi1``: positive moves away from the rotation (unstable
        branch), negative towards it.
    reduced : bool
        Return the :class:`ReducedState` instead of the ambient pair.

    Raises
    ------
    ParameterOutOfRange
    """
    qm = homoclinic_q1_max(kappa, X3)
    if not 0.0 < q1_start <= qm * (1.0 + 1e-14):
        raise ParameterOutOfRange(f"q1_start = {q1_start!r} outside the lobe (0, {qm!r}]")
    return _launch(kappa, X3, min(q1_start, qm), sign, q2, q3, reduced)


def build_separatrix_data(X3: float, q1_start: float, side: str = "stable", *,
                          q2: float = 0.0, q3: float = 0.0, reduced: bool = False):
    """A perfect-fluid state on the stable (``<A,B> < 0``) or unstable manifold."""
    if X3 == 0.0:
        raise ParameterOutOfRange("X3 = 0 has no rotating-disk limit")
    if not q1_start > 0:
        raise ParameterOutOfRange("q1_start must be positive")
    sign = {"stable": -1.0, "unstable": 1.0}[side]
    return _launch(0.0, X3, q1_start, sign, q2, q3, reduced)


# ---------------------------------------------------------------- rotation limits

@dataclass(frozen=True)
class ConvergenceReport:
    """Exponential approach to ``U(X3 t / 2 + theta)`` on one side.

    ``mu_bound`` is the supremum of the admissible rates; the fitted rate
    should sit just below it.  ``mu_fitted_derivative`` is the rate for
    ``|dA/dt - (X3/2) Z U|``.  ``window`` is the fitting interval and ``t_closest`` the time of closest
    approach to SO(2), beyond which the computed orbit is not trusted.
    """
    theta: float
    mu_fitted: float
    mu_bound: float
    side: str
    mu_fitted_derivative: float
    sign_ok: bool
    window: tuple
    final_residual: float
    t_closest: float

    def as_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def rate_bound(kappa: float, X3: float) -> float:
    if kappa > 0:
        return 0.5 * math.sqrt(max(X3 * X3 - 8.0 * kappa, 0.0))
    return 0.5 * abs(X3)


def _phase(A: Mat2, t, X3):
    C = A @ rotation(-0.5 * X3 * t)
    return np.unwrap(np.arctan2(inner(C, Z), inner(C, I)))


def _loglin_slope(t, r):
    return float(np.polyfit(t, np.log(r), 1)[0])


def fit_rotation_convergence(traj: Trajectory, side: str = "forward", *,
                             samples: int = 2000) -> ConvergenceReport:
    """Fit the asymptotic phase and decay rate towards the rotating disk.

    The side window runs from the maximum of ``|A|^2`` to the end of the
    trajectory (forward) or from its start (backward).  Near the rotation the
    computed orbit eventually leaves the separatrix by amplified rounding, so
    only samples before the closest approach and at least ``NOISE_FACTOR``
    times farther from SO(2) are used; the fit takes the last third of those.

    The phase is the intercept of a least-squares fit
    ``angle(A U(-X3 t/2)) ~ theta + c (|A|^2 - 2)``, the leading correction
    being proportional to ``q1^2``.

    Raises
    ------
    NotConvergent
        If the orbit is not on a manifold asymptotic to a rotation, or the
        residual does not decay.
    """
    if side not in ("forward", "backward"):
        raise ValueError("side must be 'forward' or 'backward'")
    inv = traj.invariants0
    kind = classify(traj.initial_state(), inv.kappa).kind
    allowed = {OrbitKind.HOMOCLINIC: ("forward", "backward"),
               OrbitKind.UNBOUNDED_BACKWARD: ("forward",),
               OrbitKind.UNBOUNDED_FORWARD: ("backward",)}
    if side not in allowed.get(kind, ()):
        raise NotConvergent(f"{kind.value} orbit has no {side} rotation limit")
    X3 = inv.X3
    n = max(int(samples), int((traj.t_max - traj.t_min) / 0.01) + 1)
    t = np.linspace(traj.t_min, traj.t_max, n)
    Y = traj.ambient(t)
    A = Mat2(*Y[:, :4].T)
    Bm = Mat2(*Y[:, 4:].T)
    d2 = norm_sq(A) - 2.0
    # climb from the launch time to the turning point of this excursion
    i_top = int(np.clip(np.searchsorted(t, traj.t_init), 0, n - 1))
    while i_top + 1 < n and d2[i_top + 1] > d2[i_top]:
        i_top += 1
    while i_top > 0 and d2[i_top - 1] > d2[i_top]:
        i_top -= 1
    sl = slice(i_top, None) if side == "forward" else slice(None, i_top + 1)
    ts, ds = t[sl], d2[sl]
    if side == "backward":
        ts, ds = ts[::-1], ds[::-1]
    # closest approach: the first local minimum after the turning point
    j_min = 0
    while j_min + 1 < len(ds) and ds[j_min + 1] <= ds[j_min]:
        j_min += 1
    floor = max(float(ds[j_min]), 1e-300)
    # d2 ~ q1^2, so the factor on distance is squared here
    ok = np.nonzero(ds[:j_min + 1] >= NOISE_FACTOR ** 2 * floor)[0]
    if len(ok) < 9:
        raise NotConvergent("too few samples between the turning point and the noise floor")
    sel = ok[len(ok) - len(ok) // 3:]
    tt = ts[sel]
    # back to global indices
    gidx = np.searchsorted(t, tt)
    Asel = Mat2(*(np.asarray(c)[gidx] for c in A))
    Bsel = Mat2(*(np.asarray(c)[gidx] for c in Bm))
    ph = _phase(Asel, tt, X3)
    coef = np.polyfit(d2[gidx], ph, 1)
    theta = float(coef[1])
    U = rotation(0.5 * X3 * tt + theta)
    r0 = np.sqrt(norm_sq(Asel - U))
    r1 = np.sqrt(norm_sq(Bsel - (Z @ U) * (0.5 * X3)))
    if np.any(r0 <= 0) or np.any(r1 <= 0):
        raise NotConvergent("residual vanished; cannot fit a rate")
    s = 1.0 if side == "forward" else -1.0
    mu = -s * _loglin_slope(tt, r0)
    mu1 = -s * _loglin_slope(tt, r1)
    if not mu > 0:
        raise NotConvergent(f"residual does not decay on the {side} side (rate {mu:.3g})")
    AB = inner(Asel, Bsel)
    sign_ok = bool(np.all(AB < 0) if side == "forward" else np.all(AB > 0))
    theta = math.remainder(theta, 2.0 * math.pi)
    return ConvergenceReport(theta, mu, rate_bound(inv.kappa, X3), side, mu1, sign_ok,
                             (float(tt.min()), float(tt.max())), float(r0[-1]),
                             float(ts[j_min]))


def phase_shift_integral(traj: Trajectory, t0: float | None = None,
                         t1: float | None = None) -> float:
    """``-(X3/2) int q1^2/(2 + q1^2) dt`` along the computed orbit.

    Uses ``q1^2 = |A|^2/2 - 1``, so it applies in any formulation.
    """
    X3 = traj.invariants0.X3
    a = traj.t_min if t0 is None else t0
    b = traj.t_max if t1 is None else t1

    def f(t):
        s = 0.5 * float((traj.ambient(t)[:4] ** 2).sum()) - 1.0
        return s / (2.0 + s)

    val, _ = quad(f, a, b, epsabs=1e-12, epsrel=1e-12, limit=1000)
    return -0.5 * X3 * val


# ---------------------------------------------------------------- linear asymptote

@dataclass(frozen=True)
class AsymptoteReport:
    """Straight-line limit ``A(t) ~ A_inf + B_inf t`` of a perfect-fluid orbit.

    ``identity_residuals`` are ``(det B_inf, <B_inf, cof A_inf>,
    det A_inf - (X3^2 - X2^2)/(2 X1))``; ``invariant_residuals`` the
    differences ``X_i(A_inf, B_inf) - X_i``.
    """
    A_inf: Mat2
    B_inf: Mat2
    residual_decay_exponent: float
    invariant_residuals: tuple
    identity_residuals: tuple
    side: str
    horizon: float

    def as_dict(self):
        return {"A_inf": list(map(float, self.A_inf)), "B_inf": list(map(float, self.B_inf)),
                "residual_decay_exponent": self.residual_decay_exponent,
                "invariant_residuals": list(self.invariant_residuals),
                "identity_residuals": list(self.identity_residuals),
                "side": self.side, "horizon": self.horizon}


def _tail(P, Q, c, T, s):
    """Tails ``int Abar`` and ``int sigma Abar`` beyond ``T`` along ``P + sigma Q``.

    ``s = +1`` integrates over ``[T, inf)``, ``s = -1`` over ``(-inf, T]``;
    on the line the acceleration is ``c cof L / |L|^4``.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    cofP = np.array(cofactor(Mat2(*P)), dtype=float)
    cofQ = np.array(cofactor(Mat2(*Q)), dtype=float)

    def acc(u, k):
        sig = T + s * u
        L = P + sig * Q
        n2 = float(L @ L)
        return c * (cofP[k] + sig * cofQ[k]) / (n2 * n2)

    i0 = np.empty(4)
    i1 = np.empty(4)
    for k in range(4):
        i0[k] = quad(lambda u: acc(u, k), 0.0, np.inf, epsabs=TAIL_TOL, epsrel=1e-10,
                     limit=400)[0]
        i1[k] = quad(lambda u: (T + s * u) * acc(u, k), 0.0, np.inf, epsabs=TAIL_TOL,
                     epsrel=1e-10, limit=400)[0]
    return i0, i1


def asymptote_from_endpoint(traj: Trajectory, T: float, side: str = "forward",
                            iterations: int = 3) -> tuple[Mat2, Mat2]:
    """``(A_inf, B_inf)`` from the state at ``T`` plus the analytic tail.

    With ``dA/dt(T)`` and ``A(T) - T dA/dt(T)`` the limits are corrected by
    ``int_T^inf A''`` and ``int_T^inf sigma A''``, evaluated along the
    current line estimate and iterated.
    """
    inv = traj.invariants0
    c = 4.0 * inv.X1 + 2.0 * inv.X2 ** 2 - 2.0 * inv.X3 ** 2
    y = traj.ambient(T)
    a, b = y[:4], y[4:]
    s = 1.0 if side == "forward" else -1.0
    B_inf, A_inf = b.copy(), a - T * b
    for _ in range(max(1, iterations)):
        i0, i1 = _tail(A_inf, B_inf, c, T, s)
        # forward: B = b + int_T^inf, A = a - T b - int_T^inf sigma
        # backward: B = b - int_-inf^T, A = a - T b + int_-inf^T sigma
        B_new = b + s * i0
        A_new = a - T * b - s * i1
        done = np.abs(B_new - B_inf).max() + np.abs(A_new - A_inf).max() < 1e-15
        A_inf, B_inf = A_new, B_new
        if done:
            break
    return Mat2(*map(float, A_inf)), Mat2(*map(float, B_inf))


def fit_linear_asymptote(traj: Trajectory, side: str = "forward", *,
                         horizon: float | None = None) -> AsymptoteReport:
    """Extract ``A_inf, B_inf`` for a perfect-fluid orbit on an unbounded side.

    ``horizon`` (default: the end of the trajectory on that side) is where
    the numerical solution hands over to the tail quadrature.

    Raises
    ------
    NotUnbounded
        If ``kappa != 0`` or the orbit stays bounded on ``side``.
    """
    if side not in ("forward", "backward"):
        raise ValueError("side must be 'forward' or 'backward'")
    inv = traj.invariants0
    if inv.kappa != 0.0:
        raise NotUnbounded("linear asymptotes exist only for kappa = 0")
    kind = classify(traj.initial_state(), 0.0).kind
    ok = {OrbitKind.UNBOUNDED_BOTH: ("forward", "backward"),
          OrbitKind.UNBOUNDED_FORWARD: ("forward",),
          OrbitKind.UNBOUNDED_BACKWARD: ("backward",)}
    if side not in ok.get(kind, ()):
        raise NotUnbounded(f"{kind.value} orbit is bounded on the {side} side")
    if horizon is None:
        T = traj.t_max if side == "forward" else traj.t_min
    else:
        T = float(horizon) if side == "forward" else -float(horizon)
        if not traj.t_min <= T <= traj.t_max:
            raise ValueError("horizon outside the computed trajectory")
    A_inf, B_inf = asymptote_from_endpoint(traj, T, side)

    # decay of |A(t) - (A_inf + B_inf t)| against 1 + |t|
    aT = abs(T)
    tt = np.geomspace(max(5.0, aT / 200.0), aT / 2.0, 60)
    tt = tt if side == "forward" else -tt
    Y = traj.ambient(tt)
    line = np.array(A_inf)[None, :] + tt[:, None] * np.array(B_inf)[None, :]
    r = np.sqrt(((Y[:, :4] - line) ** 2).sum(axis=1))
    expo = float(np.polyfit(np.log1p(np.abs(tt)), np.log(np.maximum(r, 1e-300)), 1)[0])

    X = invariants_of(PhaseState(A_inf, B_inf), 0.0)
    inv_res = (X.X1 - inv.X1, X.X2 - inv.X2, X.X3 - inv.X3)
    target = (inv.X3 ** 2 - inv.X2 ** 2) / (2.0 * inv.X1)
    ids = (float(det2(B_inf)), float(inner(B_inf, cofactor(A_inf))),
           float(det2(A_inf) - target))
    return AsymptoteReport(A_inf, B_inf, expo, tuple(map(float, inv_res)), ids, side, aT)


# ---------------------------------------------------------------- recurrence

@dataclass(frozen=True)
class RecurrenceReport:
    """Best near-return ``ell`` for ``|A(2 ell T + t) - A(t)|`` on ``t in [0, 2T]``.

    Iterating yields ``(ell, max_deviation)``.  ``bound`` is
    ``8 pi max|A| / N``; ``relative`` is the worst ratio of the deviation to
    ``|A(t)|`` (the pointwise form of the bound is ``relative <= 8 pi / N``).
    """
    ell: int
    max_deviation: float
    bound: float
    relative: float
    N: int
    T: float

    @property
    def within_bound(self) -> bool:
        return self.max_deviation <= self.bound and self.relative <= 8.0 * math.pi / self.N

    def __iter__(self):
        return iter((self.ell, self.max_deviation))


def recurrence_search(source, N: int, *, kappa: float | None = None,
                      period: float | None = None, points_per_period: int = 256,
                      rtol: float = 1e-12, atol: float = 1e-14) -> RecurrenceReport:
    """Search ``ell in {1, ..., N^2}`` for the closest return of a bounded orbit.

    Parameters
    ----------
    source : PhaseState or Trajectory
        Initial data at ``t = 0``, or a trajectory whose start is used.
    N : int
        Resolution of the pigeonhole argument.
    period : float, optional
        The period ``T`` of ``|A|``; detected when omitted (for rigid motions
        any positive value is admissible and 1 is used).

    Raises
    ------
    NotPeriodic
        If ``kappa = 0`` or ``|A|`` is not periodic.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    if isinstance(source, Trajectory):
        kappa = source.kappa if kappa is None else kappa
        state = source.initial_state()
    else:
        state = PhaseState(*source)
    if kappa is None:
        raise ValueError("kappa is required with a PhaseState")
    if not kappa > 0:
        raise NotPeriodic("recurrence needs kappa > 0")
    if period is None:
        period = frequencies(state, kappa).T
    T = float(period)
    if not T > 0:
        raise ValueError("period must be positive")
    horizon = 2.0 * N * N * T + 2.0 * T
    traj = reduced_trajectory(state, kappa, (0.0, horizon), t_eval=np.zeros(1),
                              rtol=rtol, atol=atol)
    g = np.linspace(0.0, 2.0 * T, 2 * points_per_period + 1)
    base = traj.ambient(g)[:, :4]
    na = np.sqrt((base ** 2).sum(axis=1))
    best = (0, math.inf, math.inf)
    chunk = max(1, 200_000 // len(g))
    ells = np.arange(1, N * N + 1)
    for k in range(0, len(ells), chunk):
        e = ells[k:k + chunk]
        tt = (2.0 * T * e[:, None] + g[None, :]).ravel()
        Ap = traj.ambient(tt)[:, :4].reshape(len(e), len(g), 4)
        dev = np.sqrt(((Ap - base[None]) ** 2).sum(axis=2))
        worst = dev.max(axis=1)
        i = int(np.argmin(worst))
        if worst[i] < best[1]:
            best = (int(e[i]), float(worst[i]), float((dev[i] / na).max()))
    bound = 8.0 * math.pi * float(na.max()) / N
    rep = RecurrenceReport(best[0], best[1], bound, best[2], N, T)
    if not rep.within_bound:
        log.warning("recurrence bound violated: %.3e > %.3e (N=%d)", best[1], bound, N)
    return rep


__all__ = [
    "homoclinic_q1_max", "build_homoclinic_data", "build_separatrix_data",
    "ConvergenceReport", "rate_bound", "fit_rotation_convergence", "phase_shift_integral",
    "AsymptoteReport", "asymptote_from_endpoint", "fit_linear_asymptote",
    "RecurrenceReport", "recurrence_search",
]
