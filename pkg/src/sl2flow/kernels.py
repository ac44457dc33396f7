"""Backend selection for the integration kernel.

The compiled extension is used when it imports; set ``SL2FLOW_PURE=1`` to
force the pure-Python implementation (useful for parity tests).
"""
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

AMBIENT, HAMSYS, HAMSYS2, HAMSYS3 = (_kernels_py.AMBIENT, _kernels_py.HAMSYS,
                                     _kernels_py.HAMSYS2, _kernels_py.HAMSYS3)
DIMS = _kernels_py.DIMS
OK, MAX_STEPS, FLOOR_HIT, STEP_UNDERFLOW = 0, 1, 2, 3


def _load():
    if os.environ.get("SL2FLOW_PURE", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError as exc:  # extension not built
        log.info("compiled kernel unavailable (%s); using pure Python", exc)
        return _kernels_py, "python"
    return _kernels, "cython"


_backend, BACKEND = _load()


def solve(system, y0, t0, t1, kappa, rtol=1e-10, atol=1e-12, h0=0.0,
          max_steps=1_000_000, q_floor=0.0, renorm=False, backend=None):
    """Integrate one of the four systems from ``t0`` to ``t1``.

    Returns ``(ts, ys, rcont, status)``: accepted step times, states, the
    per-step dense-output coefficients (shape ``(nsteps, 5, n)``) and a status
    code (0 ok, 1 step budget exhausted, 2 radial floor reached, 3 step
    underflow).
    """
    mod = _backend
    if backend == "python":
        mod = _kernels_py
    elif backend == "cython":
        from . import _kernels as mod
    return mod.solve(int(system), y0, float(t0), float(t1), float(kappa), float(rtol),
                     float(atol), float(h0), int(max_steps), float(q_floor), bool(renorm))
