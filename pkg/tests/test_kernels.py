import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sl2flow import _kernels_py, kernels
from sl2flow.charts import ReducedState, Regime, reduced_to_ambient
from sl2flow.dynamics import ambient_array
from conftest import random_state

try:
    from sl2flow import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernel not built")

CASES = [
    (kernels.AMBIENT, ambient_array(reduced_to_ambient(ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2)))), 1.0),
    (kernels.HAMSYS, np.array([0.3, -0.2, 0.1, 0.4, 0.5, 1.0]), 0.0),
    (kernels.HAMSYS2, np.array([0.7, 0.2, 0.1, 0.3, 0.5, 1.2]), 1.0),
    (kernels.HAMSYS3, np.array([0.5, 0.0, 0.0, 0.2, 0.0, 4.0]), 1.0),
]


@needs_ext
@pytest.mark.parametrize("system,y0,kappa", CASES)
def test_backends_bit_identical(system, y0, kappa):
    a = kernels.solve(system, y0, 0.0, 30.0, kappa, backend="cython")
    b = kernels.solve(system, y0, 0.0, 30.0, kappa, backend="python")
    assert a[3] == b[3] == kernels.OK
    for x, y in zip(a[:3], b[:3]):
        np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


@needs_ext
@pytest.mark.parametrize("system,y0,kappa", CASES)
def test_rhs_parity(system, y0, kappa):
    np.testing.assert_array_equal(np.asarray(_kernels.eval_rhs(system, y0, kappa)),
                                  np.asarray(_kernels_py.eval_rhs(system, y0, kappa)))


def test_backward_leg():
    system, y0, kappa = CASES[2]
    ts, ys, rc, status = kernels.solve(system, y0, 0.0, -5.0, kappa)
    assert status == kernels.OK and ts[-1] == -5.0 and np.all(np.diff(ts) < 0)


def test_step_budget_and_floor():
    system, y0, kappa = CASES[2]
    *_, status = kernels.solve(system, y0, 0.0, 100.0, kappa, max_steps=3)
    assert status == kernels.MAX_STEPS
    *_, status = kernels.solve(system, y0, 0.0, 100.0, kappa, q_floor=0.69)
    assert status == kernels.FLOOR_HIT


def test_env_forces_pure_backend():
    env = dict(os.environ, SL2FLOW_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import sl2flow; print(sl2flow.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_default_backend_is_compiled():
    env = {k: v for k, v in os.environ.items() if k != "SL2FLOW_PURE"}
    out = subprocess.run([sys.executable, "-c", "import sl2flow; print(sl2flow.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"


@needs_ext
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 1.0]))
@settings(max_examples=25)
def test_random_trajectories_bit_identical(seed, kappa):
    rng = np.random.default_rng(seed)
    y0 = ambient_array(random_state(rng))
    a = kernels.solve(kernels.AMBIENT, y0, 0.0, 20.0, kappa, backend="cython")
    b = kernels.solve(kernels.AMBIENT, y0, 0.0, 20.0, kappa, backend="python")
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


@needs_ext
def test_benchmark_script_runs(capsys):
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--repeat", "1", "--t1", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5 and all(line.endswith("True") for line in lines[1:])
