import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl2flow.charts import ChartPoint, PhaseState, ReducedState, Regime, phi, reduced_to_ambient
from sl2flow.dynamics import (Formulation, h_tilde, h_zero, hamiltonian, integrate,
                              integrate_batch, invariants_of, lagrange_multiplier,
                              multiplier_from_invariants, pressureless_solution, reduced_energy,
                              rhs_ambient, rhs_hamsys, rhs_hamsys2, rhs_hamsys3)
from sl2flow.errors import SingularChart, ToleranceExceeded
from sl2flow.matrix_core import ZERO, I, K, M, Z, cofactor, inner
from sl2flow.verify import VERIFY_ATOL, VERIFY_RTOL
from conftest import as_np, random_state

SQ2 = math.sqrt(2)
val = st.floats(-2, 2, allow_nan=False)


def grad(f, z, h=1e-6):
    z = np.asarray(z, dtype=float)
    g = np.zeros_like(z)
    for i in range(len(z)):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


def A_of(traj, t):
    return traj.ambient(t)[..., :4]


# ---------------------------------------------------------------- invariants

def test_invariants_examples():
    w = 1.7
    inv = invariants_of(PhaseState(I, Z * w), 0.5)
    assert inv.X1 == pytest.approx(w * w + 0.5)
    assert inv.X2 == 0 and inv.X3 == pytest.approx(2 * w)
    inv = invariants_of(PhaseState(I, K), 2.0)
    assert tuple(inv[1:]) == (3.0, 0.0, 0.0)
    A = phi((1, 0.5, 0.2))
    inv = invariants_of(PhaseState(A, ZERO), 1.0)
    assert inv.X1 == pytest.approx(0.5 * float(inner(A, A)))
    assert inv.X2 == inv.X3 == 0


def test_pressureless_example_invariants():
    # |sqrt2 Z + K|^2 = 6, so X1 = 3 + 1 = 4 and X3 = 2 sqrt2: 2X1 + X2^2 - X3^2 = 0
    inv = invariants_of(PhaseState(I, Z * SQ2 + K), 1.0)
    assert inv.X1 == pytest.approx(4.0)
    assert inv.X3 == pytest.approx(2 * SQ2)
    assert inv.is_pressureless()


def test_multiplier_examples():
    assert lagrange_multiplier(PhaseState(I, K), 0.0) == 1.0
    assert multiplier_from_invariants(invariants_of(PhaseState(I, K), 0.0), 2.0) == 1.0
    assert lagrange_multiplier(PhaseState(I, Z), 1.0) == 0.0
    assert lagrange_multiplier(PhaseState(phi((1, 0, 0)), ZERO), 1.0) == pytest.approx(0.5)


def test_rhs_ambient_examples():
    B, acc = rhs_ambient(PhaseState(I, ZERO), 0.0)
    assert B == ZERO and acc == ZERO
    B, acc = rhs_ambient(PhaseState(I, Z), 1.0)
    assert B == Z and acc == -I
    B, acc = rhs_ambient(PhaseState(I, K), 0.0)
    assert acc == I


def test_rhs_hamsys_examples():
    v = rhs_hamsys(ChartPoint((0, 0, 0), (0, 0, 3.0)), 1.0)
    np.testing.assert_allclose(v.x, (0, 0, 1.5))
    np.testing.assert_allclose(v.p, (0, 0, 0))


def test_rhs_hamsys2_examples():
    qd, xid = rhs_hamsys2(ReducedState((1.0, 0, 0), (2.0, 0.5, 0.1)), 1.0)
    assert qd[0] == pytest.approx(1.5)
    qd, xid = rhs_hamsys2(ReducedState((1.0, 0, 0), (0.0, 1.0, 0.0)), 0.0)
    assert xid[0] == pytest.approx(1.0)
    # stationary when xi1 = 0 and xi2^2/q1^4 + xi3^2/(2+q1^2)^2 = 2 kappa
    qd, xid = rhs_hamsys2(ReducedState((1.0, 0, 0), (0.0, 1.0, 3.0)), 1.0)
    assert qd[0] == 0 and xid[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SingularChart):
        rhs_hamsys2(ReducedState((-1.0, 0, 0), (0, 1, 0)), 1.0)


def test_rhs_hamsys3_examples():
    qd, xid = rhs_hamsys3(ReducedState((0.0, 0, 0), (0.0, 0, 4.0), Regime.X2_ZERO), 1.0)
    assert qd[0] == 0 and xid[0] == 0 and qd[2] == pytest.approx(2.0)
    qd, xid = rhs_hamsys3(ReducedState((0.01, 0, 0), (0.0, 0, 1.0), Regime.X2_ZERO), 0.0)
    assert xid[0] > 0


@given(st.tuples(val, val, val), st.tuples(val, val, val), st.sampled_from([0.0, 1.0]))
def test_hamsys_is_hamiltonian(x, p, kappa):
    v = rhs_hamsys(ChartPoint(x, p), kappa)
    H = lambda z: hamiltonian(z[:3], z[3:], kappa)
    g = grad(H, [*x, *p])
    np.testing.assert_allclose(v.x, g[3:], atol=1e-7)
    np.testing.assert_allclose(v.p, -g[:3], atol=1e-7)


@given(st.floats(0.2, 3), val, val, st.tuples(val, val, val), st.sampled_from([0.0, 1.0]))
def test_hamsys2_is_hamiltonian(q1, q2, q3, xi, kappa):
    if abs(xi[1]) < 1e-3:
        return
    qd, xid = rhs_hamsys2(ReducedState((q1, q2, q3), xi), kappa)
    H = lambda z: h_tilde(z[:3], z[3:], kappa)
    g = grad(H, [q1, q2, q3, *xi])
    np.testing.assert_allclose(qd, g[3:], rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(xid, -g[:3], rtol=1e-6, atol=1e-6)


@given(val, val, val, val, st.sampled_from([0.0, 1.0]))
def test_hamsys3_is_hamiltonian(q1, q3, xi1, xi3, kappa):
    qd, xid = rhs_hamsys3(ReducedState((q1, 0.3, q3), (xi1, 0.3, xi3), Regime.X2_ZERO), kappa)
    H = lambda z: h_zero(z[0], z[1], z[2], kappa)
    g = grad(H, [q1, xi1, xi3])
    assert qd[0] == pytest.approx(g[1], abs=1e-7)
    assert xid[0] == pytest.approx(-g[0], abs=1e-7)
    assert qd[2] == pytest.approx(g[2], abs=1e-7)
    assert qd[1] == 0 and xid[1] == 0 and xid[2] == 0


@given(st.integers(0, 10_000), st.sampled_from([0.0, 1.0]))
def test_ambient_flow_stays_tangent(seed, kappa):
    # d/dt <B, cof A> = <B', cof A> + <B, cof B> must vanish on D
    A, B = random_state(np.random.default_rng(seed))
    _, acc = rhs_ambient(PhaseState(A, B), kappa)
    assert abs(inner(acc, cofactor(A)) + inner(B, cofactor(B))) < 1e-10 * max(1, inner(B, B))


# ---------------------------------------------------------------- integration

def test_rigid_rotation_numeric():
    w = 1.3
    t = np.linspace(0, 10, 101)
    tr = integrate("Ambient", PhaseState(I, Z * w), 0.7, (0, 10), t, closed_form=False)
    exact = np.array([[math.cos(w * s), -math.sin(w * s), math.sin(w * s), math.cos(w * s)] for s in t])
    np.testing.assert_allclose(A_of(tr, t), exact, atol=1e-8)


def test_pressureless_numeric_and_closed_form():
    B0 = Z * SQ2 + K
    t = np.linspace(0, 2 * math.pi, 73)
    exact = np.cos(t)[:, None] * as_np(I).ravel() + np.sin(t)[:, None] * as_np(B0).ravel()
    num = integrate("Ambient", PhaseState(I, B0), 1.0, (0, 2 * math.pi), t, closed_form=False)
    np.testing.assert_allclose(A_of(num, t), exact, atol=1e-8)
    fast = integrate("Ambient", PhaseState(I, B0), 1.0, (0, 2 * math.pi), t)
    assert fast._closed is not None
    np.testing.assert_allclose(A_of(fast, t), exact, atol=1e-14)
    np.testing.assert_allclose(fast.multiplier(), 0.0, atol=1e-13)


def test_shear_line_exact():
    t = np.linspace(0, 100, 11)
    tr = integrate("Ambient", PhaseState(I, Z + M), 0.0, (0, 100), t)
    exact = np.column_stack([np.ones_like(t), 0 * t, 2 * t, np.ones_like(t)])
    np.testing.assert_allclose(A_of(tr, t), exact, atol=1e-12)
    assert tr.det_defect().max() < 1e-12
    s = pressureless_solution(PhaseState(I, Z + M), 0.0, 3.0)
    np.testing.assert_allclose(as_np(s.A), [[1, 0], [6, 1]], atol=1e-14)


@pytest.mark.parametrize("kappa", [0.0, 1.0])
def test_conservation_random(kappa, rng):
    state = random_state(rng)
    tr = integrate("Ambient", state, kappa, (0, 100), np.linspace(0, 100, 501))
    assert tr.invariant_drift().max() < 1e-8
    # det A drifts like rtol |A|^2 t for kappa = 0, so the constraint is
    # checked at the tighter verification tolerances
    tight = integrate("Ambient", state, kappa, (0, 100), np.linspace(0, 100, 501),
                      rtol=VERIFY_RTOL, atol=VERIFY_ATOL, closed_form=False)
    assert tight.det_defect().max() < 1e-8
    assert tight.invariant_drift().max() < 1e-8
    # multiplier identity and its constant sign
    lam = tr.multiplier()
    np.testing.assert_allclose(lam, multiplier_from_invariants(tr.invariants0, tr.norm_sq_A()),
                               atol=1e-8)
    assert np.all(np.sign(lam) == np.sign(lam[0])) or np.abs(lam).max() < 1e-8


def test_reduced_energy_is_conserved():
    rs = ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2))
    tr = integrate("Hamsys2", rs, 1.0, (0, 20), np.linspace(0, 20, 201))
    E = np.array([h_tilde(y[:3], y[3:], 1.0) for y in tr.dense(tr.t)])
    assert np.ptp(E) < 1e-9
    tr = integrate("Hamsys2", rs, 1.0, (0, 100), np.linspace(0, 100, 201),
                   rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    E = np.array([h_tilde(y[:3], y[3:], 1.0) for y in tr.dense(tr.t)])
    assert np.ptp(E) < 1e-9
    assert E[0] == pytest.approx(reduced_energy(rs, 1.0))
    rs = ReducedState((0.5, 0.0, 0.0), (0.2, 0.0, 4.0), Regime.X2_ZERO)
    tr = integrate("Hamsys3", rs, 1.0, (0, 100), np.linspace(0, 100, 201),
                   rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    E = np.array([h_zero(y[0], y[3], y[5], 1.0) for y in tr.dense(tr.t)])
    assert np.ptp(E) < 1e-9


def test_hamsys2_matches_ambient():
    rs = ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2))
    t = np.linspace(0, 10, 51)
    a = integrate("Ambient", reduced_to_ambient(rs), 1.0, (0, 10), t)
    b = integrate("Hamsys2", rs, 1.0, (0, 10), t)
    c = integrate("Hamsys", reduced_to_ambient(rs), 1.0, (0, 10), t)
    np.testing.assert_allclose(b.ambient_samples, a.ambient_samples, atol=1e-6)
    np.testing.assert_allclose(c.ambient_samples, a.ambient_samples, atol=1e-6)


def test_interior_start_matches_forward_run():
    state = PhaseState(I, K * 0.8 + Z * 1.1)
    whole = integrate("Ambient", state, 1.0, (-5, 5), np.array([-5.0, 0.0, 5.0]), t_init=0.0)
    fwd = integrate("Ambient", state, 1.0, (0, 5), np.array([5.0]))
    back = integrate("Ambient", whole.state_at(-5.0), 1.0, (-5, 0), np.array([0.0]))
    np.testing.assert_allclose(whole.ambient(5.0), fwd.ambient(5.0), atol=1e-12)
    np.testing.assert_allclose(back.ambient(0.0), whole.ambient(0.0), atol=1e-8)
    s0 = whole.initial_state()
    np.testing.assert_allclose(as_np(s0.B), as_np(state.B), atol=1e-15)


def test_samples_and_errors():
    tr = integrate("Ambient", PhaseState(I, K), 0.0, (0, 1), np.linspace(0, 1, 5))
    assert len(tr) == 5 and tr[0].t == 0.0 and tr[-1].t == 1.0
    assert all(min(s.invariant_drift) >= 0 and s.det_defect >= 0 for s in tr)
    with pytest.raises(ToleranceExceeded):
        integrate("Ambient", PhaseState(I, K + Z), 1.0, (0, 50), rtol=1e-3, atol=1e-3,
                  max_drift=1e-14)
    with pytest.raises(ValueError):
        integrate("Ambient", PhaseState(I, K), -1.0, (0, 1))
    with pytest.raises(ValueError):
        integrate("Ambient", PhaseState(I, K), 0.0, (1, 0))
    with pytest.raises(ValueError):
        integrate("Bogus", PhaseState(I, K), 0.0, (0, 1))
    with pytest.raises(SingularChart):
        integrate("Hamsys2", ReducedState((0.0, 0, 0), (0, 1, 0)), 1.0, (0, 1))


def test_batch_matches_serial(rng):
    states = [random_state(rng) for _ in range(4)]
    t = np.linspace(0, 5, 11)
    ser = integrate_batch("Ambient", states, 1.0, (0, 5), t)
    par = integrate_batch("Ambient", states, 1.0, (0, 5), t, workers=2)
    for a, b in zip(ser, par):
        np.testing.assert_array_equal(a.ambient_samples, b.ambient_samples)


def test_renormalize_keeps_det(rng):
    tr = integrate("Ambient", random_state(rng), 1.0, (0, 20), np.linspace(0, 20, 21),
                   renormalize=True, closed_form=False)
    # exact at the steps; the samples come from the dense interpolant
    assert tr.det_defect().max() < 1e-10


def test_formulation_names():
    assert {f.value for f in Formulation} == {"Ambient", "Hamsys", "Hamsys2", "Hamsys3"}
