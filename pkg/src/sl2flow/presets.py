"""Named initial data used by the CLI and the verification suites."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .asymptotics import build_homoclinic_data, build_separatrix_data, homoclinic_q1_max
from .charts import PhaseState, ReducedState, reduced_to_ambient
from .matrix_core import I, K, M, Z


@dataclass(frozen=True)
class Preset:
    name: str
    kappa: float
    initial: PhaseState
    t_span: tuple
    t_init: float = 0.0
    formulation: str = "Ambient"
    description: str = ""
    rtol: float | None = None  # None: the caller's default
    atol: float | None = None


def _homoclinic():
    rs = build_homoclinic_data(1.0, 4.0, homoclinic_q1_max(1.0, 4.0), reduced=True)
    return reduced_to_ambient(rs)


def _build():
    s2 = math.sqrt(2.0)
    out = [
        Preset("rigid-rotation", 1.0, PhaseState(I, Z * 2.0), (0.0, 10.0 * math.pi),
               description="rotating disk (I, 2Z); X3 = 4, period pi"),
        Preset("pressureless", 1.0, PhaseState(I, Z * s2 + K), (0.0, 4.0 * math.pi),
               description="zero pressure, A(t) = cos t I + sin t (sqrt2 Z + K)"),
        Preset("shear", 0.0, PhaseState(I, Z + M), (0.0, 100.0),
               description="shear geodesic A(t) = I + t (Z + M)"),
        # the saddle amplifies errors by exp(sqrt2 |t|); tight tolerances keep |A|^2 near 2
    # out to |t| = 20 (closest approach ~1e-13 near |t| = 13; float64 cannot do better)
    Preset("homoclinic", 1.0, _homoclinic(), (-20.0, 20.0), 0.0, "Hamsys3",
           description="kappa = 1, X3 = 4, launched at the turning point q1 = sqrt2",
           rtol=1e-13, atol=1e-16),
        Preset("separatrix", 0.0, build_separatrix_data(2.0, 1.0, "stable"), (0.0, 25.0),
               description="perfect fluid, X3 = 2, stable manifold of the rotating disk"),
        Preset("rigid", 1.0, reduced_to_ambient(ReducedState((1.0, 0.0, 0.0), (0.0, 1.0, 3.0))),
               (0.0, 50.0), description="rigid motion with omega1 = omega2 = 1"),
        Preset("periodic", 1.0,
               reduced_to_ambient(ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2))),
               (0.0, 50.0), description="generic bounded orbit, |A| periodic"),
        Preset("unbounded", 0.0, PhaseState(I, K + Z * 0.1), (0.0, 100.0),
               description="perfect fluid, unbounded in both directions"),
    ]
    return {p.name: p for p in out}


PRESETS = _build()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
