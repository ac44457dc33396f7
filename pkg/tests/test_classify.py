import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from sl2flow.asymptotics import build_homoclinic_data, build_separatrix_data, homoclinic_q1_max
from sl2flow.charts import PhaseState, ReducedState, Regime, phi, reduced_to_ambient
from sl2flow.classify import (OrbitKind, classify, critical_points, decide, detect_period,
                              frequencies, hat_A, level_curve, minimum_energy, portrait,
                              reduced_trajectory, rigid_conditions, tangent_launcher)
from sl2flow.classify.levelsets import FIGURES
from sl2flow.dynamics import Invariants, h_tilde, h_zero, integrate, invariants_of
from sl2flow.errors import EmptyLevelSet, NoCriticalPoint, NotOnManifold, NotPeriodic
from sl2flow.matrix_core import I, K, M, Mat2, Z, ZERO, inner, norm_sq, rotation

SQ2 = math.sqrt(2)
RIGID = ReducedState((1.0, 0.0, 0.0), (0.0, 1.0, 3.0))
PERIODIC = ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2))


def x2zero_on_saddle_level(kappa, X3, q1):
    """X2 = 0 data with X1 = kappa + X3^2/4, xi1 solved from H0 = X1 directly."""
    s = q1 * q1
    E = kappa + 0.25 * X3 * X3
    xi1_sq = (2 * (E - kappa * (1 + s)) - X3 * X3 / (2 + s)) * 2 * (1 + s) / (2 + s)
    return ReducedState((q1, 0.0, 0.0), (math.sqrt(xi1_sq), 0.0, X3), Regime.X2_ZERO)


# ---------------------------------------------------------------- classify

def test_classify_examples():
    assert classify(PhaseState(I, ZERO), 1.0).kind is OrbitKind.EQUILIBRIUM
    oc = classify(PhaseState(I, Z * 2), 1.0)
    assert oc.kind is OrbitKind.RIGID_ROTATION
    assert oc.invariants.X1 == pytest.approx(5.0) and oc.invariants.X3 == pytest.approx(4.0)
    assert classify(reduced_to_ambient(RIGID), 1.0).kind is OrbitKind.RIGID
    assert classify(reduced_to_ambient(PERIODIC), 1.0).kind is OrbitKind.PERIODIC_RADIUS
    assert classify(build_homoclinic_data(1.0, 4.0, 0.5), 1.0).kind is OrbitKind.HOMOCLINIC


def test_classify_perfect_fluid():
    assert classify(PhaseState(I, ZERO), 0.0).kind is OrbitKind.EQUILIBRIUM
    assert classify(PhaseState(I, Z), 0.0).kind is OrbitKind.RIGID_ROTATION
    oc = classify(PhaseState(I, K), 0.0)
    assert oc.kind is OrbitKind.UNBOUNDED_BOTH and oc.passes_through_so2
    stable = build_separatrix_data(2.0, 1.0, "stable")
    unstable = build_separatrix_data(2.0, 1.0, "unstable")
    assert inner(stable.A, stable.B) < 0 < inner(unstable.A, unstable.B)
    assert classify(stable, 0.0).kind is OrbitKind.UNBOUNDED_BACKWARD
    assert classify(unstable, 0.0).kind is OrbitKind.UNBOUNDED_FORWARD
    # same separatrix level built independently of the asymptotics helpers
    rs = x2zero_on_saddle_level(0.0, 2.0, 0.8)
    assert classify(reduced_to_ambient(rs), 0.0).kind is OrbitKind.UNBOUNDED_FORWARD


def test_pressureless_flag():
    assert classify(PhaseState(I, Z * SQ2 + K), 1.0).pressureless
    assert classify(PhaseState(I, Z + M), 0.0).pressureless
    assert not classify(PhaseState(I, K), 0.0).pressureless


def test_classify_rejects_off_manifold():
    with pytest.raises(NotOnManifold):
        classify(PhaseState(I, I), 1.0)
    with pytest.raises(ValueError):
        classify(PhaseState(I, Z), -1.0)


@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([0.0, 1.0]))
def test_classification_is_isometry_invariant(seed, a, b, kappa):
    rng = np.random.default_rng(seed)
    kind = rng.integers(4)
    if kind == 0:
        state = reduced_to_ambient(PERIODIC)
    elif kind == 1:
        state = reduced_to_ambient(RIGID)
    elif kind == 2:
        state = build_separatrix_data(2.0, float(rng.uniform(0.3, 2)), "stable")
    else:
        state = reduced_to_ambient(ReducedState(tuple(rng.uniform(0.2, 1.5, 3)),
                                                tuple(rng.uniform(-1, 1, 3))))
    U, V = rotation(a), rotation(b)
    moved = PhaseState(U @ state.A @ V, U @ state.B @ V)
    assert classify(moved, kappa).kind is classify(state, kappa).kind


def test_homoclinic_bifurcation_flip():
    kappa = 1.0
    for sign, expect in ((1, OrbitKind.HOMOCLINIC), (-1, OrbitKind.PERIODIC_RADIUS)):
        X3 = math.sqrt(8 * kappa * (1 + sign * 1e-6))
        inv = Invariants(kappa, kappa + 0.25 * X3 * X3, 0.0, X3)
        kind, _, _ = decide(inv, 2.5, 0.1)
        assert kind is expect
    X3 = math.sqrt(8 * kappa * (1 + 1e-7))
    _, _, warn = decide(Invariants(kappa, kappa + 0.25 * X3 * X3, 0.0, X3), 2.5, 0.1)
    assert any("bifurcation" in w for w in warn)
    # above the boundary an actual state exists off SO(2) on the saddle level
    rs = x2zero_on_saddle_level(1.0, math.sqrt(8 * (1 + 1e-6)), 1e-4)
    assert classify(reduced_to_ambient(rs), 1.0).kind is OrbitKind.HOMOCLINIC


def test_rigid_conditions():
    r1, r2 = rigid_conditions(4.0, invariants_of(reduced_to_ambient(RIGID), 1.0))
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12
    # X2 = X3 = 0, kappa > 0: second residual is -2 kappa
    assert rigid_conditions(3.0, Invariants(1.0, 1.5, 0.0, 0.0))[1] == pytest.approx(-2.0)
    assert rigid_conditions(3.0, Invariants(0.0, 1.0, 0.5, 0.3))[1] > 0


def test_rigid_stays_rigid():
    tr = integrate("Ambient", reduced_to_ambient(RIGID), 1.0, (0, 50), np.linspace(0, 50, 501))
    assert np.abs(tr.norm_sq_A() - 4.0).max() < 1e-6


def test_equilibrium_does_not_move():
    A = phi((0.4, -0.3, 1.0))
    oc = classify(PhaseState(A, ZERO), 0.0)
    assert oc.kind is OrbitKind.EQUILIBRIUM
    tr = integrate("Ambient", PhaseState(A, ZERO), 0.0, (0, 100), np.linspace(0, 100, 11))
    assert np.abs(tr.ambient_samples[:, 4:]).max() < 1e-10


def test_unbounded_growth_is_quadratic():
    tr = integrate("Ambient", PhaseState(I, K + Z * 0.1), 0.0, (-200, 200),
                   np.array([-200.0, -100.0, 100.0, 200.0]), t_init=0.0)
    n = tr.norm_sq_A()
    assert n[0] / n[1] == pytest.approx(4, rel=0.05)
    assert n[3] / n[2] == pytest.approx(4, rel=0.05)


def test_homoclinic_radius_decays_both_ways():
    # launched at the turning point, where |A| is largest
    rs = build_homoclinic_data(1.0, 4.0, homoclinic_q1_max(1.0, 4.0), reduced=True)
    tr = integrate("Hamsys3", rs, 1.0,
                   (-8, 8), np.linspace(-8, 8, 17), t_init=0.0)
    r = 0.5 * tr.norm_sq_A() - 1
    assert r[0] < 1e-3 and r[-1] < 1e-3
    assert np.all(np.diff(r[:8]) > 0) and np.all(np.diff(r[9:]) < 0)


# ---------------------------------------------------------------- critical points

def _grid_min(f, lo, hi):
    q = np.linspace(lo, hi, 200_001)
    i = int(np.argmin(f(q)))
    return minimize_scalar(f, bounds=(q[max(i - 1, 0)], q[min(i + 1, len(q) - 1)]),
                           method="bounded", options={"xatol": 1e-12}).x


def test_centers_for_homoclinic_parameters():
    pts = critical_points(1.0, 0.0, 4.0)
    types = sorted(t for _, t in pts)
    assert types == ["center", "center", "saddle"]
    qc = max(q for q, _ in pts)
    assert qc ** 2 == pytest.approx(2 * SQ2 - 2, rel=1e-14)
    assert 16 / (2 + qc ** 2) ** 2 == pytest.approx(2.0)
    found = _grid_min(lambda q: h_zero(q, 0.0, 4.0, 1.0), 0.1, 3.0)
    assert abs(found - qc) < 1e-8


def test_centers_merge_at_boundary():
    assert critical_points(1.0, 0.0, math.sqrt(8)) == [(0.0, "center")]


def test_htilde_minimum():
    (q, t), = critical_points(1.0, 1.0, 0.0)
    assert t == "minimum"
    assert q == pytest.approx(2 ** -0.25, rel=1e-14)
    found = _grid_min(lambda s: h_tilde((s, 0, 0), (0.0, 1.0, 0.0), 1.0), 0.3, 3.0)
    assert abs(found - q) < 1e-8


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.0, 3))
def test_htilde_minimizer_property(kappa, X2, X3):
    (q, _), = critical_points(kappa, X2, X3)
    f = lambda s: h_tilde((s, 0, 0), (0.0, X2, X3), kappa)
    assert f(q) <= f(q * (1 + 1e-4)) and f(q) <= f(q * (1 - 1e-4))


def test_no_critical_point_for_perfect_fluid_with_x2():
    with pytest.raises(NoCriticalPoint):
        critical_points(0.0, 1.0, 1.0)
    assert critical_points(0.0, 0.0, 2.0) == [(0.0, "saddle")]


# ---------------------------------------------------------------- frequencies

def test_rigid_rotation_frequencies():
    fr = frequencies(PhaseState(I, Z * 2), 1.0)
    assert fr.omega1 == pytest.approx(2.0) and fr.omega2 == 0.0


def test_rigid_frequencies():
    fr = frequencies(reduced_to_ambient(RIGID), 1.0)
    assert fr.omega1 == pytest.approx(1.0) and fr.omega2 == pytest.approx(1.0)


def test_periodic_frequencies_from_angle_windings():
    state = reduced_to_ambient(PERIODIC)
    fr = frequencies(state, 1.0)
    # independent estimate: q3' = X3/(|A|^2/2 + 1) and q2' = X2/(|A|^2/2 - 1),
    # so the angle advance over one period gives the frequencies
    tr = integrate("Hamsys2", PERIODIC, 1.0, (0, 3 * fr.T + fr.t_ref + 1))
    y0, y1 = tr.dense(fr.t_ref), tr.dense(fr.t_ref + fr.T)
    assert (y1[2] - y0[2]) / fr.T == pytest.approx(fr.omega1, abs=1e-8)
    assert (y1[1] - y0[1]) / fr.T == pytest.approx(fr.omega2, abs=1e-8)
    # |A| is T periodic
    t = np.linspace(0, fr.T, 50)
    amb = integrate("Ambient", state, 1.0, (0, 3 * fr.T), np.concatenate([t, t + fr.T]))
    n = amb.norm_sq_A()
    assert np.abs(n[:50] - n[50:]).max() < 1e-5
    # the frequency-stripped matrix is hatA_period periodic
    P = fr.hatA_period
    tt = np.linspace(0, P, 40)
    amb = integrate("Ambient", state, 1.0, (0, 2 * P), np.concatenate([tt, tt + P]))
    H = hat_A(amb.ambient_samples, amb.t, fr)
    assert np.abs(H[:40] - H[40:]).max() < 1e-6


def test_x2zero_periodic_passes_through_rotations():
    rs = ReducedState((0.5, 0.0, 0.0), (0.2, 0.0, 2.0), Regime.X2_ZERO)
    state = reduced_to_ambient(rs)
    oc = classify(state, 1.0)
    assert oc.kind is OrbitKind.PERIODIC_RADIUS and oc.passes_through_so2
    fr = frequencies(state, 1.0)
    assert fr.omega2 == 0.0 and fr.hatA_period == pytest.approx(2 * fr.T)
    tt = np.linspace(0, 2 * fr.T, 40)
    amb = integrate("Ambient", state, 1.0, (0, 4 * fr.T), np.concatenate([tt, tt + 2 * fr.T]))
    H = hat_A(amb.ambient_samples, amb.t, fr)
    assert np.abs(H[:40] - H[40:]).max() < 1e-6


def test_not_periodic():
    with pytest.raises(NotPeriodic):
        frequencies(PhaseState(I, K), 0.0)
    with pytest.raises(NotPeriodic):
        frequencies(build_homoclinic_data(1.0, 4.0, 0.5), 1.0)


def test_detect_period_matches_section():
    T, t_ref, traj = detect_period(reduced_to_ambient(PERIODIC), 1.0)
    y0, y1 = traj.dense(t_ref), traj.dense(t_ref + T)
    assert abs(y1[0] - y0[0]) < 1e-9 and abs(y1[3] - y0[3]) < 1e-9


# ---------------------------------------------------------------- level sets

def polyline_distance(points, branches):
    """Exact distance from each point to the union of the branch polylines."""
    best = np.full(len(points), np.inf)
    for br in branches:
        P = np.column_stack([br.q1, br.xi1])
        if len(P) == 1:
            best = np.minimum(best, np.hypot(*(points - P[0]).T))
            continue
        A, D = P[:-1], np.diff(P, axis=0)
        L2 = np.where((D ** 2).sum(1) > 0, (D ** 2).sum(1), 1.0)
        for k, y in enumerate(points):
            t = np.clip(((y - A) * D).sum(1) / L2, 0, 1)
            best[k] = min(best[k], np.min(np.hypot(*(A + t[:, None] * D - y).T)))
    return best


EXPECTED = {  # topology of each phase portrait, one list per level
    1: [["point"], ["closed"], ["closed"]],
    2: [["unbounded"], ["unbounded"]],
    3: [["point", "point"], ["closed", "closed"], ["homoclinic", "homoclinic", "point"], ["closed"]],
    4: [["point"], ["closed"], ["closed"]],
    5: [["unbounded"] * 2, ["point"] + ["unbounded"] * 4, ["unbounded"] * 2],
    6: [["equilibrium_line"], ["unbounded"] * 2],
}


@pytest.mark.parametrize("fig", sorted(FIGURES))
def test_portrait_topology(fig):
    data = portrait(**FIGURES[fig])
    got = [sorted(lv["tags"]) for lv in data["levels"]]
    assert got == [sorted(t) for t in EXPECTED[fig]]
    for lv in data["levels"]:
        assert lv["residual"] < 1e-10
        for c in lv["curves"]:
            if c["tag"] in ("closed", "homoclinic"):
                assert c["q1"][0] == pytest.approx(c["q1"][-1], abs=1e-12)
                assert c["xi1"][0] == pytest.approx(c["xi1"][-1], abs=1e-12)


def test_homoclinic_level_passes_through_origin():
    ls = level_curve("H0", 1.0, 0.0, 4.0, 5.0)
    for br in ls.branches:
        if br.tag.value == "homoclinic":
            assert np.min(np.hypot(br.q1, br.xi1)) < 1e-12


def test_perfect_fluid_zero_rotation_branches():
    E = 1.7
    ls = level_curve("H0", 0.0, 0.0, 0.0, E)
    for br in ls.branches:
        s = br.q1 ** 2
        np.testing.assert_allclose(np.abs(br.xi1), np.sqrt(4 * E * (1 + s) / (2 + s)), rtol=1e-12)


def test_minimum_level_is_a_point():
    E = minimum_energy("Htilde", 1.0, 1.0, 0.0)
    assert E == pytest.approx(h_tilde((2 ** -0.25, 0, 0), (0, 1, 0), 1.0))
    ls = level_curve("Htilde", 1.0, 1.0, 0.0, E)
    (br,) = ls.branches
    assert br.tag.value == "point"
    assert br.q1[0] == pytest.approx(2 ** -0.25, abs=1e-8) and br.xi1[0] == 0


def test_empty_level():
    with pytest.raises(EmptyLevelSet):
        level_curve("H0", 1.0, 0.0, 4.0, 4.2)
    data = portrait("H0", 1.0, 0.0, 4.0, [4.2, 5.0])
    assert data["levels"][0]["error"] == "EmptyLevelSet"
    assert data["levels"][1]["tags"]


@pytest.mark.parametrize("ham,kappa,X2,X3,E", [("Htilde", 1.0, 1.0, 0.0, 3.0),
                                                ("H0", 1.0, 0.0, 4.0, 6.0),
                                                ("H0", 1.0, 0.0, 2.0, 3.0)])
def test_flow_stays_on_level_curve(ham, kappa, X2, X3, E):
    ls = level_curve(ham, kappa, X2, X3, E)
    br = ls.branches[0]
    i = len(br.q1) // 3
    q1, xi1 = float(br.q1[i]), float(br.xi1[i])
    if ham == "Htilde":
        rs, form = ReducedState((q1, 0.0, 0.0), (xi1, X2, X3)), "Hamsys2"
    else:
        rs, form = ReducedState((q1, 0.0, 0.0), (xi1, 0.0, X3), Regime.X2_ZERO), "Hamsys3"
    tr = integrate(form, rs, kappa, (0, 20), np.linspace(0, 20, 400))
    Y = tr.dense(tr.t)
    d = polyline_distance(Y[:, [0, 3]], ls.branches)
    assert d.max() < 1e-5


# ---------------------------------------------------------------- tangent spaces

def test_tangent_at_identity_perfect_fluid():
    rep = tangent_launcher(I, 0.0)
    assert rep.in_so2
    xh = rep.coordinates(Z + M)
    np.testing.assert_allclose(xh, (0, SQ2, SQ2), atol=1e-15)
    assert rep.pressureless_residual(xh) == pytest.approx(0.0, abs=1e-14)


def test_tangent_at_identity_magnetic():
    rep = tangent_launcher(I, 1.0)
    xh = rep.coordinates(Z * SQ2 + K)
    np.testing.assert_allclose(xh, (SQ2, 0, 2), atol=1e-15)
    assert abs(rep.pressureless_residual(xh)) < 1e-12
    assert rep.homoclinic_residual(xh) is None
    assert len(rep.homoclinic_directions()) == 0
    np.testing.assert_allclose(rep.rigid_directions(), [[0, 0, 1], [0, 0, -1]])


def test_tangent_basis_orthonormal():
    rep = tangent_launcher(phi((0.6, -0.2, 0.4)), 1.0)
    G = np.array([[inner(a, b) for b in rep.basis] for a in rep.basis])
    np.testing.assert_allclose(G, np.eye(3), atol=1e-13)
    with pytest.raises(NotOnManifold):
        tangent_launcher(K, 1.0)


def test_launch_sets_agree_with_classification():
    A = phi((0.6, 0.0, 0.3))
    rep = tangent_launcher(A, 1.0)
    for xh in rep.rigid_directions(8):
        assert classify(PhaseState(A, rep.launch(xh)), 1.0).kind is OrbitKind.RIGID
    for xh in rep.homoclinic_directions():
        state = PhaseState(A, rep.launch(xh))
        inv = invariants_of(state, 1.0)
        assert inv.X2 == pytest.approx(0.0, abs=1e-12)
        assert inv.X1 == pytest.approx(1.0 + 0.25 * inv.X3 ** 2, rel=1e-12)
        expect = OrbitKind.HOMOCLINIC if inv.X3 ** 2 > 8 else OrbitKind.PERIODIC_RADIUS
        assert classify(state, 1.0).kind is expect
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = rng.uniform(-2, 2, 2)
        c = math.sqrt(a * a / (1 + 0.36) + b * b + 2)
        state = PhaseState(A, rep.launch((a, b, c)))
        assert invariants_of(state, 1.0).is_pressureless()


def test_stable_unstable_sign_for_perfect_fluid():
    A = phi((0.8, 0.0, 0.0))
    rep = tangent_launcher(A, 0.0)
    for xh in rep.homoclinic_directions():
        state = PhaseState(A, rep.launch(xh))
        kind = classify(state, 0.0).kind
        assert kind is (OrbitKind.UNBOUNDED_BACKWARD if xh[0] < 0 else OrbitKind.UNBOUNDED_FORWARD)
        assert np.sign(inner(state.A, state.B)) == np.sign(xh[0])
