import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl2flow.charts import PhaseState, phi
from sl2flow.dynamics import integrate
from sl2flow.errors import KappaMismatch, NotOnManifold
from sl2flow.matrix_core import I, K, Mat2, Z, inverse, norm_sq, rotation, trace
from sl2flow.physics import (divergence_checks, ellipse_arrays, ellipse_of, fields_at, taylor_sign,
                             velocity_gradient)
from conftest import as_np, random_sl2, random_state

SQ2, SQ3 = math.sqrt(2), math.sqrt(3)


def test_velocity_gradient_examples():
    assert velocity_gradient(PhaseState(I, K)) == K
    th, w = 0.7, 1.9
    L = velocity_gradient(PhaseState(rotation(th), Z @ rotation(th) * w))
    np.testing.assert_allclose(as_np(L), as_np(Z * w), atol=1e-15)


@given(st.integers(0, 10_000))
def test_velocity_gradient_trace_free(seed):
    state = random_state(np.random.default_rng(seed))
    assert abs(trace(velocity_gradient(state))) < 1e-12 * max(1, norm_sq(state.B) * norm_sq(state.A))


def test_fields_examples():
    f = fields_at(PhaseState(I, K), 0.0, 0.0, (1.0, 0.0))
    assert f.u == (1.0, 0.0) and f.b == (0.0, 0.0) and f.p == 0.0 and f.inside
    f = fields_at(PhaseState(I, Z), 1.0, 1.0, (0.5, 0.0))
    assert f.u == (0.0, 0.5) and f.b == (0.0, 0.5) and f.p == 0.0
    f = fields_at(PhaseState(I, K), 0.0, None, (0.0, 0.0))
    assert f.p == 0.5


def test_fields_outside_and_kappa_mismatch():
    f = fields_at(PhaseState(I, K), 0.0, 0.0, (2.0, 0.0))
    assert not f.inside and f.p == 0.0
    with pytest.raises(KappaMismatch):
        fields_at(PhaseState(I, K), 1.0, 0.5, (0.0, 0.0))
    # either root of kappa is accepted
    assert fields_at(PhaseState(I, Z), 4.0, -2.0, (0.5, 0.0)).b == (-0.0, -1.0)


def test_ellipse_examples():
    e = ellipse_of(I)
    assert (e.semi_axis_major, e.semi_axis_minor, e.orientation) == (1.0, 1.0, 0.0)
    e = ellipse_of(phi((1, 0, 0)))
    assert e.semi_axis_major == pytest.approx((SQ3 + 1) / SQ2)
    assert e.semi_axis_minor == pytest.approx((SQ3 - 1) / SQ2)
    assert e.orientation == pytest.approx(0.0, abs=1e-15)
    assert e.area == pytest.approx(math.pi)
    with pytest.raises(NotOnManifold):
        ellipse_of(K)


def test_ellipse_orientation_of_rotated_stretch():
    D = Mat2(2.0, 0.0, 0.0, 0.5)
    for th in (0.3, -1.2, 1.5):
        e = ellipse_of(rotation(th) @ D)
        assert e.orientation == pytest.approx(th)


@given(st.integers(0, 10_000))
def test_ellipse_against_svd(seed):
    A = random_sl2(np.random.default_rng(seed), 3.0)
    e = ellipse_of(A)
    U, s, _ = np.linalg.svd(as_np(A))
    assert e.semi_axis_major == pytest.approx(s[0], rel=1e-10)
    assert e.semi_axis_minor == pytest.approx(s[1], rel=1e-8)
    assert e.semi_axis_major * e.semi_axis_minor == pytest.approx(1.0, rel=1e-10)
    assert e.semi_axis_major ** 2 + e.semi_axis_minor ** 2 == pytest.approx(norm_sq(A), rel=1e-10)
    if s[0] - s[1] > 1e-6:
        ang = math.atan2(U[1, 0], U[0, 0])
        assert abs(math.remainder(e.orientation - ang, math.pi)) < 1e-8
    assert -math.pi / 2 < e.orientation <= math.pi / 2


def test_ellipse_arrays_batched():
    A = Mat2(*np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.5]]))
    major, minor, theta = ellipse_arrays(A)
    assert major.shape == (2,)
    assert major[1] == pytest.approx(2.0) and minor[1] == pytest.approx(0.5)


def test_divergence_examples():
    r = divergence_checks(PhaseState(I, Z), 1.0, 1.0, 100)
    assert r.div_u == 0 and r.div_b == 0 and r.max_b_dot_n < 1e-12
    state = random_state(np.random.default_rng(7))
    r = divergence_checks(state, 1.0, 1.0, 1000)
    assert abs(r.div_u) < 1e-12 and abs(r.div_b) < 1e-12
    assert r.max_b_dot_n < 1e-10 and r.max_p_boundary < 1e-10


def test_pressure_sign_is_constant_along_trajectories(rng):
    for _ in range(5):
        state = random_state(rng)
        tr = integrate("Ambient", state, 1.0, (0, 30), np.linspace(0, 30, 301))
        flags = {taylor_sign(s.state, 1.0) for s in tr}
        assert len(flags) == 1
        centre = [fields_at(s.state, 1.0, None, (0.0, 0.0)).p for s in tr[::30]]
        assert len({np.sign(p) for p in centre}) == 1
