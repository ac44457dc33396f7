"""Equations of motion, invariants and time integration.

Four equivalent formulations are supported:

``Ambient``
    The constrained second-order ODE for ``A(t)`` in SL(2,R), state ``(A, B)``.
``Hamsys``
    Hamilton's equations in the chart ``phi``, state ``(x, p)``.
``Hamsys2`` / ``Hamsys3``
    The polar reductions for ``X2 != 0`` and ``X2 = 0``, state ``(q, xi)``.

All of them are integrated by the same adaptive Dormand-Prince 5(4) kernel
(compiled when available, see :mod:`sl2flow.kernels`).  Results come back as
a :class:`Trajectory`, which keeps the dense-output polynomials so states can
be evaluated at arbitrary times and always reconstructed in ambient form.
"""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from . import _kernels_py, kernels
from .charts import (ChartPoint, PhaseState, ReducedState, Regime, ambient_to_chart,
                     ambient_to_reduced, chart_to_ambient, check_on_bundle,
                     reduced_to_chart)
from .errors import IntegrationFailed, SingularChart, ToleranceExceeded
from .matrix_core import DEFAULT_TOL, Z, Mat2, cofactor, det2, inner, norm_sq

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
#: relative band on 2 X1 + X2^2 - X3^2 for the closed-form (zero pressure) path
PRESSURELESS_BAND = 1e-10


class Formulation(str, enum.Enum):
    AMBIENT = "Ambient"
    HAMSYS = "Hamsys"
    HAMSYS2 = "Hamsys2"
    HAMSYS3 = "Hamsys3"


_SYSTEM_ID = {Formulation.AMBIENT: kernels.AMBIENT, Formulation.HAMSYS: kernels.HAMSYS,
              Formulation.HAMSYS2: kernels.HAMSYS2, Formulation.HAMSYS3: kernels.HAMSYS3}


class Invariants(NamedTuple):
    kappa: float
    X1: float
    X2: float
    X3: float

    @property
    def pressure_coefficient(self):
        """4 X1 + 2 X2^2 - 2 X3^2; the multiplier is this over |A|^4."""
        return 4.0 * self.X1 + 2.0 * self.X2 ** 2 - 2.0 * self.X3 ** 2

    def is_pressureless(self, band: float = PRESSURELESS_BAND) -> bool:
        return abs(2.0 * self.X1 + self.X2 ** 2 - self.X3 ** 2) <= band * max(1.0, abs(self.X1))


class TrajectorySample(NamedTuple):
    t: float
    state: PhaseState
    lam: float
    invariant_drift: tuple
    det_defect: float


def invariants_of(state: PhaseState, kappa: float) -> Invariants:
    """X1 = |B|^2/2 + kappa |A|^2/2, X2 = <ZA - AZ, B>/2, X3 = <ZA + AZ, B>/2."""
    A, B = state
    ZA, AZ = Z @ A, A @ Z
    X1 = 0.5 * norm_sq(B) + 0.5 * kappa * norm_sq(A)
    return Invariants(kappa, X1, 0.5 * inner(ZA - AZ, B), 0.5 * inner(ZA + AZ, B))


def lagrange_multiplier(state: PhaseState, kappa: float):
    """Lambda(A, B) = 2 (kappa - det B) / |A|^2."""
    A, B = state
    return 2.0 * (kappa - det2(B)) / norm_sq(A)


def multiplier_from_invariants(inv: Invariants, A_norm_sq):
    """The multiplier along an exact trajectory, (4X1 + 2X2^2 - 2X3^2)/|A|^4."""
    return inv.pressure_coefficient / (A_norm_sq * A_norm_sq)


def rhs_ambient(state: PhaseState, kappa: float) -> tuple[Mat2, Mat2]:
    A, B = state
    lam = lagrange_multiplier(state, kappa)
    return B, -kappa * A + lam * cofactor(A)


def rhs_hamsys(cp: ChartPoint, kappa: float) -> ChartPoint:
    d = _kernels_py.rhs(_kernels_py.HAMSYS, [*cp.x, *cp.p], kappa)
    return ChartPoint(tuple(d[:3]), tuple(d[3:]))


def rhs_hamsys2(rs: ReducedState, kappa: float) -> tuple[tuple, tuple]:
    """(q', xi') for the X2 != 0 reduction."""
    if not rs.q[0] > 0:
        raise SingularChart(f"reduced system needs q1 > 0, got {rs.q[0]!r}")
    d = _kernels_py.rhs(_kernels_py.HAMSYS2, [*rs.q, *rs.xi], kappa)
    return tuple(d[:3]), tuple(d[3:])


def rhs_hamsys3(rs: ReducedState, kappa: float) -> tuple[tuple, tuple]:
    """(q', xi') for the X2 = 0 reduction; q1 ranges over the whole line."""
    d = _kernels_py.rhs(_kernels_py.HAMSYS3, [*rs.q, *rs.xi], kappa)
    return tuple(d[:3]), tuple(d[3:])


def hamiltonian(x, p, kappa: float) -> float:
    """H(x, p) = p.g^{-1}(x)p / 2 + kappa (1 + |xbar|^2)."""
    x1, x2 = x[0], x[1]
    s = x1 * x1 + x2 * x2
    xp = x1 * p[0] + x2 * p[1]
    kin = p[0] ** 2 + p[1] ** 2 - xp * xp / (2.0 + 2.0 * s) + p[2] ** 2 / (2.0 + s)
    return 0.5 * kin + kappa * (1.0 + s)


def h_tilde(q, xi, kappa: float):
    s = q[0] * q[0]
    return 0.5 * ((2.0 + s) * xi[0] ** 2 / (2.0 * (1.0 + s)) + xi[1] ** 2 / s
                  + xi[2] ** 2 / (2.0 + s)) + kappa * (1.0 + s)


def h_zero(q1, xi1, xi3, kappa: float):
    s = q1 * q1
    return 0.5 * ((2.0 + s) * xi1 ** 2 / (2.0 * (1.0 + s)) + xi3 ** 2 / (2.0 + s)) + kappa * (1.0 + s)


def reduced_energy(rs: ReducedState, kappa: float) -> float:
    if rs.regime is Regime.X2_NONZERO:
        return float(h_tilde(rs.q, rs.xi, kappa))
    return float(h_zero(rs.q[0], rs.xi[0], rs.xi[2], kappa))


# ---------------------------------------------------------------- conversions

def ambient_array(state: PhaseState) -> np.ndarray:
    """Stack a (possibly batched) PhaseState into an array of shape (..., 8)."""
    A, B = state
    return np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (*A, *B))), axis=-1)


def state_from_array(y) -> PhaseState:
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        return PhaseState(Mat2(*map(float, y[:4])), Mat2(*map(float, y[4:8])))
    return PhaseState(Mat2(*y[..., :4].T), Mat2(*y[..., 4:8].T))


def native_to_ambient(formulation: Formulation, Y, regime: Regime | None = None) -> np.ndarray:
    """Convert native states (rows of ``Y``) to ambient rows ``(A, B)``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    formulation = Formulation(formulation)
    if formulation is Formulation.AMBIENT:
        return Y[:, :8].copy()
    cols = [Y[:, i] for i in range(6)]
    if formulation is Formulation.HAMSYS:
        cp = ChartPoint(tuple(cols[:3]), tuple(cols[3:]))
    else:
        reg = Regime.X2_NONZERO if formulation is Formulation.HAMSYS2 else Regime.X2_ZERO
        cp = reduced_to_chart(ReducedState(tuple(cols[:3]), tuple(cols[3:]), reg))
    return ambient_array(chart_to_ambient(cp))


def _initial_native(formulation: Formulation, initial, kappa: float, tol: float):
    """Native state vector for ``formulation`` from any accepted initial form."""
    if isinstance(initial, PhaseState) or (isinstance(initial, tuple) and len(initial) == 2
                                           and isinstance(initial[0], Mat2)):
        state = PhaseState(*initial)
        check_on_bundle(state, tol)
        if formulation is Formulation.AMBIENT:
            return ambient_array(state)
        if formulation is Formulation.HAMSYS:
            cp = ambient_to_chart(state, tol)
            return np.array([*cp.x, *cp.p])
        reg = Regime.X2_NONZERO if formulation is Formulation.HAMSYS2 else Regime.X2_ZERO
        rs = ambient_to_reduced(state, tol, kappa=kappa, regime=reg)
        return rs.as_vector()
    if isinstance(initial, ChartPoint):
        if formulation is Formulation.HAMSYS:
            return np.array([*initial.x, *initial.p], dtype=float)
        return _initial_native(formulation, chart_to_ambient(initial), kappa, tol)
    if isinstance(initial, ReducedState):
        want = {Regime.X2_NONZERO: Formulation.HAMSYS2, Regime.X2_ZERO: Formulation.HAMSYS3}
        if formulation is want[initial.regime]:
            if formulation is Formulation.HAMSYS2 and not initial.q[0] > 0:
                raise SingularChart(f"Hamsys2 needs q1 > 0, got {initial.q[0]!r}")
            return initial.as_vector()
        from .charts import reduced_to_ambient
        return _initial_native(formulation, reduced_to_ambient(initial), kappa, tol)
    raise TypeError(f"cannot use {type(initial).__name__} as initial data")


# ---------------------------------------------------------------- trajectories

class Trajectory:
    """Integrated (or closed-form) solution with dense output.

    Sequence access yields :class:`TrajectorySample` objects at the output
    times; :meth:`dense` and :meth:`ambient` evaluate anywhere in
    ``[t_min, t_max]``.
    """

    def __init__(self, formulation, kappa, t_eval, invariants0, *, regime=None,
                 steps=None, closed_form=None, nfev_steps=0, t_init=None, span=None):
        self.formulation = Formulation(formulation)
        self.kappa = float(kappa)
        self.regime = regime
        self.invariants0 = invariants0
        self._steps = steps  # (lo, hi, t_start, h, rcont) sorted by lo
        self._closed = closed_form
        self.n_steps = nfev_steps
        self.t = np.asarray(t_eval, dtype=float)
        if span is None:
            span = (self.t[0], self.t[-1]) if len(self.t) else (math.nan, math.nan)
        self.span = (float(span[0]), float(span[1]))
        self.t_init = self.span[0] if t_init is None else float(t_init)
        amb = self.ambient(self.t) if len(self.t) else np.zeros((0, 8))
        self._amb = amb
        self._samples = None

    # dense evaluation
    @property
    def t_min(self):
        """Start of the interval covered by the dense output."""
        return self.span[0]

    @property
    def t_max(self):
        return self.span[1]

    def dense(self, t) -> np.ndarray:
        """Native-coordinate state(s) at time(s) ``t``."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if self._closed is not None:
            out = self._closed(tt)
        else:
            lo, hi, t0s, hs, rc = self._steps
            idx = np.clip(np.searchsorted(lo, tt, side="right") - 1, 0, len(lo) - 1)
            th = ((tt - t0s[idx]) / hs[idx])[:, None]
            r = rc[idx]
            out = r[:, 0] + th * (r[:, 1] + (1 - th) * (r[:, 2] + th * (r[:, 3] + (1 - th) * r[:, 4])))
        return out[0] if scalar else out

    def ambient(self, t) -> np.ndarray:
        """Ambient rows ``(a11, a12, a21, a22, b11, b12, b21, b22)`` at ``t``."""
        scalar = np.ndim(t) == 0
        Y = np.atleast_2d(self.dense(np.atleast_1d(t)))
        out = native_to_ambient(self.formulation, Y, self.regime)
        return out[0] if scalar else out

    def initial_state(self) -> PhaseState:
        """The ambient state at ``t_init``, where the data was given."""
        return self.state_at(self.t_init)

    def state_at(self, t: float) -> PhaseState:
        return state_from_array(self.ambient(float(t)))

    # diagnostics on the output grid
    @property
    def ambient_samples(self) -> np.ndarray:
        return self._amb

    def invariant_series(self) -> np.ndarray:
        """Columns X1, X2, X3 along the output grid."""
        inv = invariants_of(state_from_array(self._amb), self.kappa)
        return np.column_stack([np.broadcast_to(inv.X1, self.t.shape), inv.X2, inv.X3])

    def invariant_drift(self) -> np.ndarray:
        X = self.invariant_series()
        ref = np.array(self.invariants0[1:])
        return np.abs(X - ref)

    def det_defect(self) -> np.ndarray:
        a = self._amb
        return np.abs(a[:, 0] * a[:, 3] - a[:, 1] * a[:, 2] - 1.0)

    def multiplier(self) -> np.ndarray:
        return np.asarray(lagrange_multiplier(state_from_array(self._amb), self.kappa))

    def norm_sq_A(self) -> np.ndarray:
        return (self._amb[:, :4] ** 2).sum(axis=1)

    @property
    def samples(self) -> list:
        if self._samples is None:
            drift = self.invariant_drift()
            det = self.det_defect()
            lam = np.atleast_1d(self.multiplier())
            self._samples = [
                TrajectorySample(float(t), state_from_array(row), float(lam[i]),
                                 tuple(float(v) for v in drift[i]), float(det[i]))
                for i, (t, row) in enumerate(zip(self.t, self._amb))]
        return self._samples

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i):
        return self.samples[i]

    def __iter__(self):
        return iter(self.samples)


def _leg(formulation, y0, t0, t1, kappa, rtol, atol, q_floor, renorm, max_steps, backend):
    ts, ys, rc, status = kernels.solve(_SYSTEM_ID[formulation], y0, t0, t1, kappa, rtol,
                                       atol, 0.0, max_steps, q_floor, renorm, backend=backend)
    if status == kernels.FLOOR_HIT:
        raise SingularChart(
            f"q1 = {ys[-1, 0]:.3e} reached the floor {q_floor:.3e} at t = {ts[-1]:.6g}; "
            "this indicates integration error")
    if status == kernels.MAX_STEPS:
        raise IntegrationFailed(f"step budget {max_steps} exhausted at t = {ts[-1]:.6g}")
    if status == kernels.STEP_UNDERFLOW:
        raise IntegrationFailed(f"step size underflow at t = {ts[-1]:.6g}")
    return ts, ys, rc


def _closed_form_evaluator(A0: Mat2, B0: Mat2, kappa: float, t_init: float):
    a0 = np.array(A0, dtype=float)
    b0 = np.array(B0, dtype=float)
    if kappa == 0.0:
        def ev(tt):
            s = (tt - t_init)[:, None]
            return np.hstack([a0 + s * b0, np.broadcast_to(b0, (len(tt), 4))])
    else:
        w = math.sqrt(kappa)

        def ev(tt):
            s = (tt - t_init)[:, None]
            c, sn = np.cos(w * s), np.sin(w * s)
            return np.hstack([c * a0 + (sn / w) * b0, -w * sn * a0 + c * b0])
    return ev


def integrate(formulation, initial, kappa: float, t_span, t_eval=None, *,
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              max_drift: float | None = None, renormalize: bool = False,
              closed_form: bool = True, t_init: float | None = None,
              max_steps: int = 2_000_000, tol: float = DEFAULT_TOL,
              backend: str | None = None) -> Trajectory:
    """Integrate one trajectory.

    Parameters
    ----------
    formulation : Formulation or str
        ``"Ambient"``, ``"Hamsys"``, ``"Hamsys2"`` or ``"Hamsys3"``.
    initial : PhaseState, ChartPoint or ReducedState
        Initial data, given at ``t_init``.  Ambient data is converted to the
        native coordinates of ``formulation`` as needed.
    kappa : float
        Magnetic parameter, nonnegative.
    t_span : (float, float)
        Time window.  ``t_init`` (default ``t_span[0]``) may lie inside it, in
        which case the solution is computed in both directions.
    t_eval : array_like, optional
        Output times.  Defaults to the accepted step times.
    max_drift : float, optional
        Raise :class:`ToleranceExceeded` if any invariant drifts further.
    renormalize : bool
        Rescale ``A`` to unit determinant after every step (Ambient only).
    closed_form : bool
        Use the exact solution when the pressure vanishes identically
        (Ambient only).

    Returns
    -------
    Trajectory
    """
    formulation = Formulation(formulation)
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    t_init = t0 if t_init is None else float(t_init)
    if not t0 <= t_init <= t1:
        raise ValueError("t_init must lie inside t_span")
    y0 = np.asarray(_initial_native(formulation, initial, kappa, tol), dtype=float).ravel()
    regime = {Formulation.HAMSYS2: Regime.X2_NONZERO,
              Formulation.HAMSYS3: Regime.X2_ZERO}.get(formulation)
    amb0 = native_to_ambient(formulation, y0[None, :], regime)[0]
    inv0 = invariants_of(state_from_array(amb0), kappa)
    inv0 = Invariants(float(kappa), *(float(v) for v in inv0[1:]))

    if formulation is Formulation.AMBIENT and closed_form and inv0.is_pressureless():
        log.debug("pressureless data; using the closed-form solution")
        ev = _closed_form_evaluator(Mat2(*amb0[:4]), Mat2(*amb0[4:]), kappa, t_init)
        te = np.asarray(t_eval, dtype=float) if t_eval is not None else np.linspace(t0, t1, 201)
        traj = Trajectory(formulation, kappa, te, inv0, regime=regime, closed_form=ev,
                          t_init=t_init, span=(t0, t1))
        _check_drift(traj, max_drift)
        return traj

    q_floor = 0.0
    if formulation is Formulation.HAMSYS2:
        q_floor = 0.5 * abs(y0[4]) / math.sqrt(2.0 * inv0.X1)
    legs = []
    for a, b in ((t_init, t0), (t_init, t1)):
        if a != b:
            legs.append(_leg(formulation, y0, a, b, kappa, rtol, atol, q_floor,
                             renormalize, max_steps, backend))
    if not legs:
        raise ValueError("empty time span")
    starts, hs, rcs, times = [], [], [], []
    nsteps = 0
    for ts, ys, rc in legs:
        h = np.diff(ts)
        st = ts[:-1]
        if h[0] < 0:  # backward leg: reverse so that intervals are ascending
            st, h, rc = st[::-1], h[::-1], rc[::-1]
        starts.append(st)
        hs.append(h)
        rcs.append(rc)
        times.append(ts)
        nsteps += len(h)
    st = np.concatenate(starts)
    h = np.concatenate(hs)
    rc = np.concatenate(rcs)
    lo = np.minimum(st, st + h)
    order = np.argsort(lo, kind="stable")
    steps = (lo[order], np.maximum(st, st + h)[order], st[order], h[order], rc[order])
    if t_eval is None:
        te = np.unique(np.concatenate(times))
    else:
        te = np.asarray(t_eval, dtype=float)
        if te.size and (te.min() < t0 - 1e-12 or te.max() > t1 + 1e-12):
            raise ValueError("t_eval outside t_span")
    traj = Trajectory(formulation, kappa, te, inv0, regime=regime, steps=steps,
                      nfev_steps=nsteps, t_init=t_init, span=(t0, t1))
    _check_drift(traj, max_drift)
    return traj


def _check_drift(traj: Trajectory, max_drift):
    if max_drift is None or len(traj) == 0:
        return
    worst = float(traj.invariant_drift().max())
    if worst > max_drift:
        raise ToleranceExceeded(f"invariant drift {worst:.3e} exceeds {max_drift:.3e}")


def integrate_batch(formulation, initials, kappa, t_span, t_eval=None, *, workers: int = 1,
                    **opts) -> list[Trajectory]:
    """Integrate several initial states, optionally on a thread pool.

    The compiled kernel releases the GIL, so threads give real parallelism.
    """
    def one(init):
        return integrate(formulation, init, kappa, t_span, t_eval, **opts)

    if workers <= 1:
        return [one(i) for i in initials]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, initials))


def pressureless_solution(state: PhaseState, kappa: float, t) -> PhaseState:
    """Exact zero-pressure solution through ``state`` at ``t = 0``."""
    ev = _closed_form_evaluator(state.A, state.B, kappa, 0.0)
    y = ev(np.atleast_1d(np.asarray(t, dtype=float)))
    return state_from_array(y[0] if np.ndim(t) == 0 else y)


__all__ = [
    "Formulation", "Invariants", "TrajectorySample", "Trajectory", "invariants_of",
    "lagrange_multiplier", "multiplier_from_invariants", "rhs_ambient", "rhs_hamsys",
    "rhs_hamsys2", "rhs_hamsys3", "hamiltonian", "h_tilde", "h_zero", "reduced_energy",
    "integrate", "integrate_batch", "native_to_ambient", "ambient_array",
    "state_from_array", "pressureless_solution",
]
