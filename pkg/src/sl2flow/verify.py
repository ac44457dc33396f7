"""Quantitative verification suites.

Each criterion returns a :class:`CriterionResult` with measured values and the
thresholds they were held to; :func:`run` collects a selection of them.
Random data is drawn from ``numpy.random.default_rng((seed, number))`` so each
criterion is reproducible on its own.
"""
from __future__ import annotations

import json
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import matrix_core as mc
from .asymptotics import (build_homoclinic_data, fit_linear_asymptote,
                          fit_rotation_convergence, homoclinic_q1_max, phase_shift_integral,
                          recurrence_search)
from .charts import (PhaseState, Regime, ReducedState, ambient_to_chart, big_phi,
                     chart_to_ambient, metric_g, phi, phi_inverse, phi_jacobian,
                     reduced_to_ambient)
from .classify import (FIGURES, OrbitKind, center_q1_squared, classify, critical_points,
                       portrait)
from .dynamics import (integrate, invariants_of, lagrange_multiplier,
                       multiplier_from_invariants)
from .errors import ParameterOutOfRange, SL2FlowError
from .matrix_core import I, K, M, Mat2, Z

log = logging.getLogger(__name__)

#: integrator tolerances for the conservation, closed-form and multiplier suites
VERIFY_RTOL = 1e-12
VERIFY_ATOL = 1e-14


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict
    limits: dict
    runtime: float
    runtime_limit: float | None
    paper_ref: str
    error: str | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = []
        for k, v in self.measured.items():
            lim = self.limits.get(k)
            txt = f"{k}={_fmt(v)}"
            if lim is not None:
                txt += f" (limit {_fmt(lim)})"
            parts.append(txt)
        rt = f"runtime {self.runtime:.2f}s"
        if self.runtime_limit is not None:
            rt += f" (limit {self.runtime_limit:g}s)"
        msg = f"[{status}] {self.number:2d} {self.name}: " + ", ".join(parts) + "; " + rt
        if self.error:
            msg += f"; error: {self.error}"
        return msg


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


@dataclass
class VerifyReport:
    seed: int
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed,
                "criteria": [asdict(r) for r in self.results],
                "paper_refs": {str(r.number): r.paper_ref for r in self.results}}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(repr(o))


# ---------------------------------------------------------------- random data

def random_state(rng, scale: float = 1.0) -> PhaseState:
    """A random point of the tangent bundle: ``A = phi(x)``, ``B = D phi(x) y``."""
    x = rng.uniform(-scale, scale, 3)
    y = rng.uniform(-scale, scale, 3)
    return big_phi(tuple(x), tuple(y))


def random_x2zero_state(rng, scale: float = 1.0) -> ReducedState:
    q1, q2, q3 = rng.uniform(0.2, 1.5), rng.uniform(-math.pi, math.pi), rng.uniform(-3, 3)
    return ReducedState((q1, q2, q3), (rng.uniform(-scale, scale), q2,
                                       rng.uniform(-2 * scale, 2 * scale)), Regime.X2_ZERO)


def _rng(seed, number):
    return np.random.default_rng((int(seed), int(number)))


def _rel(a, b, scale):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.asarray(scale)))


def _max_abs(x):
    return float(np.max(np.abs(np.asarray(x, dtype=float))))


# ---------------------------------------------------------------- 1 algebra

def _c1(seed, opts):
    rng = _rng(seed, 1)
    n = 10_000
    A, B, C = (Mat2(*rng.standard_normal((4, n))) for _ in range(3))
    nA, nB, nC = mc.norm(A), mc.norm(B), mc.norm(C)
    errs = {}
    scale = nA * nB * nC
    lhs = mc.inner(A @ B, C)
    errs["adjoint"] = max(_rel(lhs, mc.inner(B, A.T @ C), scale),
                          _rel(lhs, mc.inner(A, C @ B.T), scale))
    basis = 0.0
    for X, Y, P in ((Z, Z, -I), (K, K, I), (M, M, I), (Z, K, M), (M, K, Z), (M, Z, K)):
        basis = max(basis, _max_abs(np.array(X @ Y - P)))
    names = list(mc.BASIS.values())
    for i, X in enumerate(names):
        for j, Y in enumerate(names):
            basis = max(basis, abs(mc.inner(X, Y) - (2.0 if i == j else 0.0)))
    errs["basis"] = basis
    cA = mc.cofactor(A)
    cof = max(_rel(np.array(cA), np.array(Z @ A @ Z.T), nA),
              _rel(np.array(cA), np.array(Z.T @ A @ Z), nA),
              _rel(mc.norm(cA), nA, nA),
              _rel(mc.inner(cA, B), mc.inner(A, mc.cofactor(B)), nA * nB))
    errs["cofactor"] = cof
    cB = mc.cofactor(B)
    lhs = mc.inner(A, B) * mc.inner(cA, B) + mc.inner(Z @ A, B) * mc.inner(A @ Z, B)
    rhs = 0.5 * mc.inner(cA, A) * mc.norm_sq(B) + 0.5 * mc.inner(cB, B) * mc.norm_sq(A)
    errs["quartic_identity"] = _rel(lhs, rhs, nA ** 2 * nB ** 2)
    errs["det_pairing"] = _rel(mc.det2(A), 0.5 * mc.inner(A, cA), nA ** 2)
    U = mc.rotation(rng.uniform(-np.pi, np.pi, n))
    V = mc.rotation(rng.uniform(-np.pi, np.pi, n))
    errs["rotation_isometry"] = _rel(mc.norm(U @ A @ V), nA, nA)
    worst = max(errs.values())
    x = rng.uniform(-3, 3, (3, n))
    min_sl2 = float(np.min(mc.norm_sq(phi(tuple(x)))))
    measured = {"max_rel_err": worst, **errs, "min_norm_sq_sl2": min_sl2}
    limits = {"max_rel_err": 1e-12, "min_norm_sq_sl2": 2.0}
    ok = worst < 1e-12 and min_sl2 >= 2.0 - 1e-12
    return ok, measured, limits


# ---------------------------------------------------------------- 2 charts

def _c2(seed, opts):
    rng = _rng(seed, 2)
    n = 2000
    x = rng.uniform(-10, 10, (3, n))
    det_err = _max_abs(mc.det2(phi(tuple(x))) - 1.0)
    rt = 0.0
    for xi in x.T[:500]:
        back = phi_inverse(phi(tuple(xi)))
        d = np.array(back) - xi
        d[2] = math.remainder(d[2], 2 * math.pi)
        rt = max(rt, _max_abs(d))
    # metric against the finite-difference Jacobian
    g_err = 0.0
    h = 1e-5
    for xi in x.T[:300]:
        J = np.empty((4, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            J[:, j] = (np.array(phi(tuple(xi + e))) - np.array(phi(tuple(xi - e)))) / (2 * h)
        g_err = max(g_err, _max_abs(J.T @ J - metric_g(xi)))
    # closed-form Jacobian agrees too
    jac_err = 0.0
    for xi in x.T[:100]:
        J = np.column_stack([np.array(d) for d in phi_jacobian(tuple(xi))])
        jac_err = max(jac_err, _max_abs(J.T @ J - metric_g(xi)) / max(1.0, metric_g(xi)[2, 2]))
    inv_err = 0.0
    for _ in range(500):
        xx = tuple(rng.uniform(-3, 3, 3))
        pp = tuple(rng.uniform(-3, 3, 3))
        X = invariants_of(chart_to_ambient((xx, pp)), 0.0)
        s = max(1.0, abs(X.X2), abs(X.X3))
        inv_err = max(inv_err, abs(X.X2 - (xx[0] * pp[1] - xx[1] * pp[0])) / s,
                      abs(X.X3 - pp[2]) / s)
        q = (rng.uniform(0.05, 3), rng.uniform(-4, 4), rng.uniform(-4, 4))
        xi = tuple(rng.uniform(-3, 3, 3))
        X = invariants_of(reduced_to_ambient(ReducedState(q, xi)), 0.0)
        s = max(1.0, abs(xi[1]), abs(xi[2]))
        inv_err = max(inv_err, abs(X.X2 - xi[1]) / s, abs(X.X3 - xi[2]) / s)
    measured = {"det_err": det_err, "roundtrip_err": rt, "metric_fd_err": g_err,
                "metric_closed_form_err": jac_err, "invariant_err": inv_err}
    limits = {"det_err": 1e-12, "roundtrip_err": 1e-10, "metric_fd_err": 1e-6,
              "metric_closed_form_err": 1e-12, "invariant_err": 1e-10}
    ok = all(measured[k] < limits[k] for k in limits)
    return ok, measured, limits


# ---------------------------------------------------------------- 3 and 6

_cache_lock = threading.Lock()
_suite3_cache: dict = {}


def _suite3(seed):
    with _cache_lock:
        if seed in _suite3_cache:
            return _suite3_cache[seed]
        rng = _rng(seed, 3)
        states = [random_state(rng) for _ in range(50)]
        te = np.linspace(0.0, 100.0, 1001)
        out = []
        for kappa in (0.0, 1.0):
            for st in states:
                tr = integrate("Ambient", st, kappa, (0.0, 100.0), te, rtol=VERIFY_RTOL,
                               atol=VERIFY_ATOL, closed_form=False)
                out.append(tr)
        _suite3_cache.clear()
        _suite3_cache[seed] = out
        return out


def _c3(seed, opts):
    trajs = _suite3(seed)
    dX = np.zeros(3)
    ddet = 0.0
    for tr in trajs:
        dX = np.maximum(dX, tr.invariant_drift().max(axis=0))
        ddet = max(ddet, float(tr.det_defect().max()))
    measured = {"X1_drift": float(dX[0]), "X2_drift": float(dX[1]), "X3_drift": float(dX[2]),
                "det_drift": ddet, "trajectories": len(trajs)}
    limits = {k: 1e-8 for k in ("X1_drift", "X2_drift", "X3_drift", "det_drift")}
    ok = all(measured[k] < 1e-8 for k in limits)
    return ok, measured, limits


def _c6(seed, opts):
    trajs = _suite3(seed)
    worst = 0.0
    flips = 0
    for tr in trajs:
        lam = np.asarray(lagrange_multiplier(
            PhaseState(Mat2(*tr.ambient_samples[:, :4].T), Mat2(*tr.ambient_samples[:, 4:].T)),
            tr.kappa))
        pred = np.asarray(multiplier_from_invariants(tr.invariants0, tr.norm_sq_A()))
        worst = max(worst, _max_abs(lam - pred))
        if np.any(lam > 1e-12) and np.any(lam < -1e-12):
            flips += 1
    measured = {"max_multiplier_err": worst, "sign_changes": flips}
    limits = {"max_multiplier_err": 1e-8, "sign_changes": 0}
    return worst < 1e-8 and flips == 0, measured, limits


# ---------------------------------------------------------------- 4 closed forms

def _c4(seed, opts):
    tol = dict(rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    # rigid rotation (I, 2Z), kappa = 1: A = U(2t), period pi
    t = np.linspace(0.0, 10 * math.pi, 2001)
    exact = np.array(mc.rotation(2.0 * t)).T
    rot = 0.0
    for form, init in (("Ambient", PhaseState(I, Z * 2.0)),
                       ("Hamsys3", ReducedState((0.0, 0.0, 0.0), (0.0, 0.0, 4.0),
                                                Regime.X2_ZERO))):
        tr = integrate(form, init, 1.0, (t[0], t[-1]), t, **tol)
        rot = max(rot, _max_abs(tr.ambient_samples[:, :4] - exact))
    # pressureless, kappa = 1
    t = np.linspace(0.0, 4 * math.pi, 2001)
    B0 = Z * math.sqrt(2.0) + K
    exact = np.outer(np.cos(t), np.array(I)) + np.outer(np.sin(t), np.array(B0))
    pl = 0.0
    for cf in (True, False):
        tr = integrate("Ambient", PhaseState(I, B0), 1.0, (t[0], t[-1]), t, closed_form=cf,
                       **tol)
        pl = max(pl, _max_abs(tr.ambient_samples[:, :4] - exact))
    # shear geodesic
    t = np.linspace(0.0, 100.0, 2001)
    S = Z + M
    exact = np.array(I)[None, :] + np.outer(t, np.array(S))
    sh = 0.0
    for cf in (True, False):
        tr = integrate("Ambient", PhaseState(I, S), 0.0, (t[0], t[-1]), t, closed_form=cf,
                       **tol)
        sh = max(sh, _max_abs(tr.ambient_samples[:, :4] - exact))
    measured = {"rigid_rotation_err": rot, "pressureless_err": pl, "shear_err": sh}
    limits = {"rigid_rotation_err": 1e-8, "pressureless_err": 1e-8, "shear_err": 1e-10}
    return all(measured[k] < limits[k] for k in limits), measured, limits


# ---------------------------------------------------------------- 5 equivalence

def _c5(seed, opts):
    rng = _rng(seed, 5)
    te = np.linspace(0.0, 10.0, 201)
    e2 = e3 = 0.0
    for i in range(20):
        kappa = float(i % 2)
        st = random_state(rng)
        a = integrate("Ambient", st, kappa, (0, 10), te, closed_form=False)
        b = integrate("Hamsys2", st, kappa, (0, 10), te)
        e2 = max(e2, _max_abs(a.ambient_samples[:, :4] - b.ambient_samples[:, :4]))
        rs = random_x2zero_state(rng)
        a = integrate("Ambient", reduced_to_ambient(rs), kappa, (0, 10), te, closed_form=False)
        b = integrate("Hamsys3", rs, kappa, (0, 10), te)
        e3 = max(e3, _max_abs(a.ambient_samples[:, :4] - b.ambient_samples[:, :4]))
    measured = {"ambient_vs_hamsys2": e2, "ambient_vs_hamsys3": e3}
    limits = {"ambient_vs_hamsys2": 1e-6, "ambient_vs_hamsys3": 1e-6}
    return e2 < 1e-6 and e3 < 1e-6, measured, limits


# ---------------------------------------------------------------- 7 classification

def _grid_minimizer(kappa, X3, lo, hi, rounds=60, n=21):
    """Minimize kappa (1 + s) + X3^2 / (2 (2 + s)) over s by nested grids, exactly."""
    k = Fraction(kappa)
    c = Fraction(X3) ** 2 / 2
    lo, hi = Fraction(lo), Fraction(hi)
    for _ in range(rounds):
        pts = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        vals = [k * (1 + s) + c / (2 + s) for s in pts]
        j = min(range(n), key=vals.__getitem__)
        lo, hi = pts[max(j - 1, 0)], pts[min(j + 1, n - 1)]
    return float((lo + hi) / 2)


def _c7(seed, opts):
    rng = _rng(seed, 7)
    # (a) homoclinic family switches on across X3^2 = 8 kappa
    flips = []
    for kappa in (0.5, 1.0, 2.0):
        Xc = math.sqrt(8.0 * kappa)
        up, dn = Xc * math.sqrt(1 + 1e-6), Xc * math.sqrt(1 - 1e-6)
        st = build_homoclinic_data(kappa, up, 0.5 * homoclinic_q1_max(kappa, up))
        above = classify(st, kappa).kind is OrbitKind.HOMOCLINIC
        above = above and [c[1] for c in critical_points(kappa, 0.0, up)].count("saddle") == 1
        try:
            build_homoclinic_data(kappa, dn, 1e-4)
            below = False
        except ParameterOutOfRange:
            below = True
        below = below and [c[1] for c in critical_points(kappa, 0.0, dn)] == ["center"]
        below = below and classify(PhaseState(I, Z * (0.5 * dn)), kappa).kind \
            is OrbitKind.RIGID_ROTATION
        flips.append(above and below)
    # (b) centers against an exact grid search
    cerr = 0.0
    for kappa, X3 in ((1.0, 4.0), (0.5, 3.0), (2.0, 7.0), (1.0, -5.0), (0.25, 2.5)):
        s_grid = _grid_minimizer(kappa, X3, 0, 4 * X3 * X3)
        cerr = max(cerr, abs(center_q1_squared(kappa, X3) - s_grid))
    # (c) rigid states stay rigid
    te = np.linspace(0.0, 50.0, 2001)
    rdrift = 0.0
    rigid_ok = True
    for _ in range(8):
        kappa = float(rng.uniform(0.3, 2.0))
        q1 = float(rng.uniform(0.3, 2.0))
        ang = float(rng.uniform(0.1, math.pi / 2 - 0.1)) * rng.choice([-1, 1])
        r = math.sqrt(2.0 * kappa)
        X2 = q1 * q1 * r * math.cos(ang)
        X3 = (2.0 + q1 * q1) * r * math.sin(ang)
        st = reduced_to_ambient(ReducedState((q1, rng.uniform(-3, 3), rng.uniform(-3, 3)),
                                             (0.0, X2, X3)))
        rigid_ok &= classify(st, kappa).kind is OrbitKind.RIGID
        tr = integrate("Ambient", st, kappa, (0, 50), te, rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
        rdrift = max(rdrift, _max_abs(tr.norm_sq_A() - mc.norm_sq(st.A)))
    measured = {"bifurcation_flips": all(flips), "center_err": cerr,
                "rigid_classified": bool(rigid_ok), "rigid_norm_drift": rdrift}
    limits = {"center_err": 1e-8, "rigid_norm_drift": 1e-6}
    ok = all(flips) and cerr < 1e-8 and rigid_ok and rdrift < 1e-6
    return ok, measured, limits


# ---------------------------------------------------------------- 8 homoclinic

def _c8(seed, opts):
    H = float(opts.get("horizon") or 20.0)
    alpha = math.sqrt(2.0)
    rs = build_homoclinic_data(1.0, 4.0, homoclinic_q1_max(1.0, 4.0), reduced=True)
    tr = integrate("Hamsys3", rs, 1.0, (-H, H), t_init=0.0, rtol=VERIFY_RTOL,
                   atol=VERIFY_ATOL)
    f = fit_rotation_convergence(tr, "forward")
    b = fit_rotation_convergence(tr, "backward")
    shift = phase_shift_integral(tr, b.t_closest, f.t_closest)
    perr = abs(math.remainder(f.theta - b.theta - shift, 2 * math.pi))
    rf = abs(f.mu_fitted - alpha) / alpha
    rb = abs(b.mu_fitted - alpha) / alpha
    measured = {"mu_forward": f.mu_fitted, "mu_backward": b.mu_fitted,
                "rel_err_forward": rf, "rel_err_backward": rb, "phase_shift_err": perr,
                "sign_ok": f.sign_ok and b.sign_ok}
    limits = {"rel_err_forward": 0.1, "rel_err_backward": 0.1, "phase_shift_err": 1e-3}
    ok = rf < 0.1 and rb < 0.1 and perr < 1e-3 and f.sign_ok and b.sign_ok
    return ok, measured, limits


# ---------------------------------------------------------------- 9 asymptote

def _c9(seed, opts):
    rng = _rng(seed, 9)
    H = float(opts.get("horizon") or 1e3)
    worst = 0.0
    expo = -math.inf
    inv_worst = 0.0
    n = 0
    while n < 10:
        st = random_state(rng)
        if classify(st, 0.0).kind is not OrbitKind.UNBOUNDED_BOTH:
            continue
        n += 1
        tr = integrate("Ambient", st, 0.0, (-H, H), t_init=0.0, rtol=VERIFY_RTOL,
                       atol=VERIFY_ATOL, closed_form=False, t_eval=np.zeros(1))
        for side in ("forward", "backward"):
            rep = fit_linear_asymptote(tr, side)
            worst = max(worst, _max_abs(rep.identity_residuals))
            inv_worst = max(inv_worst, _max_abs(rep.invariant_residuals))
            expo = max(expo, rep.residual_decay_exponent)
    measured = {"max_identity_residual": worst, "max_decay_exponent": expo,
                "max_invariant_residual": inv_worst, "horizon": H}
    limits = {"max_identity_residual": 1e-5, "max_decay_exponent": -0.8}
    return worst < 1e-5 and expo <= -0.8, measured, limits


# ---------------------------------------------------------------- 10 recurrence

def _c10(seed, opts):
    rng = _rng(seed, 10)
    rows = []
    ok = True
    worst_ratio = 0.0
    orbits = 0
    while orbits < 5:
        st = random_state(rng)
        if classify(st, 1.0).kind is not OrbitKind.PERIODIC_RADIUS:
            continue
        orbits += 1
        for N in (5, 10, 20):
            rep = recurrence_search(st, N, kappa=1.0)
            good = 1 <= rep.ell <= N * N and rep.within_bound
            ok &= good
            worst_ratio = max(worst_ratio, rep.max_deviation / rep.bound)
            rows.append((N, rep.ell))
    measured = {"cases": len(rows), "worst_deviation_over_bound": worst_ratio,
                "all_within_bound": bool(ok)}
    limits = {"worst_deviation_over_bound": 1.0}
    return bool(ok), measured, limits


# ---------------------------------------------------------------- 11 portraits

#: expected topology tags per figure, one list per energy in FIGURES
EXPECTED_TAGS = {
    1: [["point"], ["closed"], ["closed"]],
    2: [["unbounded"], ["unbounded"]],
    3: [["point", "point"], ["closed", "closed"], ["point", "homoclinic", "homoclinic"],
        ["closed"]],
    4: [["point"], ["closed"], ["closed"]],
    5: [["unbounded"] * 2, ["point"] + ["unbounded"] * 4, ["unbounded"] * 2],
    6: [["equilibrium_line"], ["unbounded"] * 2],
}


def check_portrait(fig: int, data: dict) -> tuple[bool, float]:
    """Tags agree with the expected topology, closed curves close, points lie on the level."""
    ok = [sorted(lv["tags"]) for lv in data["levels"]] == \
        [sorted(t) for t in EXPECTED_TAGS[fig]]
    res = 0.0
    for lv in data["levels"]:
        res = max(res, lv.get("residual", 0.0))
        for c in lv["curves"]:
            if c["tag"] in ("closed", "homoclinic"):
                gap = math.hypot(c["q1"][0] - c["q1"][-1], c["xi1"][0] - c["xi1"][-1])
                ok &= gap < 1e-12
    return ok, res


def _c11(seed, opts):
    figs_ok = {}
    res = 0.0
    for fig, cfg in FIGURES.items():
        cfg = dict(cfg)
        data = portrait(cfg.pop("hamiltonian"), cfg.pop("kappa"), cfg.pop("X2"),
                        cfg.pop("X3"), cfg.pop("energies"))
        good, r = check_portrait(fig, data)
        figs_ok[fig] = good
        res = max(res, r)
    measured = {f"fig{k}": v for k, v in figs_ok.items()}
    measured["max_level_residual"] = res
    limits = {"max_level_residual": 1e-10}
    return all(figs_ok.values()) and res < 1e-10, measured, limits


# ---------------------------------------------------------------- registry

@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    suite: str
    fn: object
    runtime_limit: float | None
    paper_ref: str


CRITERIA = [
    Criterion(1, "algebraic identities", "algebra", _c1, 1.0,
              "adjoint identities of the matrix inner product; orthogonal basis relations; "
              "cofactor isometry and symmetry; quartic pairing identity; "
              "det A = <A, cof A>/2; rotation isometries"),
    Criterion(2, "charts", "charts", _c2, 5.0,
              "chart phi is an immersion into SL(2,R) with metric Dphi^T Dphi; invariants "
              "in chart and polar coordinates"),
    Criterion(3, "conservation", "invariants", _c3, 60.0,
              "global existence with conserved X1, X2, X3 and det A = 1"),
    Criterion(4, "closed forms", "closed_form", _c4, 10.0,
              "rigid rotations A = U(X3 t/2) A0; vanishing-pressure solutions; shear geodesic"),
    Criterion(5, "formulation equivalence", "equivalence", _c5, 30.0,
              "ambient system equivalent to the polar Hamiltonian reductions"),
    Criterion(6, "multiplier identity", "invariants", _c6, None,
              "Lagrange multiplier equals (4 X1 + 2 X2^2 - 2 X3^2)/|A|^4"),
    Criterion(7, "classification", "classification", _c7, None,
              "critical points of H0 and the homoclinic threshold X3^2 = 8 kappa; rigidity "
              "conditions"),
    Criterion(8, "homoclinic decay", "asymptotics", _c8, 10.0,
              "exponential approach to rotating disks on the homoclinic manifold; total phase "
              "shift"),
    Criterion(9, "linear asymptote", "asymptotics", _c9, 60.0,
              "perfect-fluid solutions are asymptotically linear with <B, cof A> = det B = 0"),
    Criterion(10, "recurrence", "recurrence", _c10, 120.0,
              "pigeonhole recurrence |A(2 l T + t) - A(t)| <= 8 pi |A(t)|/N"),
    Criterion(11, "portraits", "portraits", _c11, None,
              "level curves of the reduced Hamiltonians (six phase portraits)"),
]

SUITES = sorted({c.suite for c in CRITERIA})


def select(suite: str | None = None) -> list[Criterion]:
    """Criteria for a suite name, a criterion number, or everything (``None``/"all")."""
    if suite in (None, "", "all"):
        return list(CRITERIA)
    if str(suite).isdigit():
        out = [c for c in CRITERIA if c.number == int(suite)]
    else:
        out = [c for c in CRITERIA if c.suite == suite]
    if not out:
        raise ValueError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)} "
                         "or a criterion number")
    return out


def run_criterion(c: Criterion, seed: int = 0, **opts) -> CriterionResult:
    t0 = time.perf_counter()
    err = None
    try:
        ok, measured, limits = c.fn(seed, opts)
    except SL2FlowError as exc:  # a failed computation is a failed criterion
        ok, measured, limits, err = False, {}, {}, f"{type(exc).__name__}: {exc}"
    rt = time.perf_counter() - t0
    if c.runtime_limit is not None and rt >= c.runtime_limit:
        ok = False
    return CriterionResult(c.number, c.name, bool(ok), measured, limits, rt, c.runtime_limit,
                           c.paper_ref, err)


def run(suite: str | None = None, seed: int = 0, *, workers: int = 1,
        horizon: float | None = None) -> VerifyReport:
    """Run the selected criteria; results come back in criterion order."""
    crit = select(suite)
    opts = {"horizon": horizon}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda c: run_criterion(c, seed, **opts), crit))
    else:
        results = [run_criterion(c, seed, **opts) for c in crit]
    return VerifyReport(int(seed), results)
