"""Affine motions of an incompressible fluid ellipse, with and without a magnetic field.

The state is a pair ``(A, B)`` with ``A`` in SL(2,R) and ``B = dA/dt``
tangent there; the flow is the constrained geodesic-type system

    A'' = -kappa A + lambda cof A,   det A = 1,

with ``kappa >= 0``.  Subpackages and modules:

``matrix_core``  2x2 algebra, cofactor, rotations
``charts``       chart, polar and bundle coordinates
``dynamics``     the four equivalent formulations and the integrator
``classify``     orbit classes, frequencies, phase portraits, tangent frames
``physics``      velocity, magnetic field, pressure, ellipse geometry
``asymptotics``  rotating-disk limits, linear asymptotes, recurrence
``verify``       quantitative verification suites
``cli``          command-line interface
"""
from .charts import (ChartPoint, PhaseState, PolarPoint, ReducedState, Regime,
                     ambient_to_reduced, reduced_to_ambient)
from .dynamics import (Formulation, Invariants, Trajectory, integrate, invariants_of,
                       lagrange_multiplier)
from .errors import (EmptyLevelSet, IntegrationFailed, KappaMismatch, NoCriticalPoint,
                     NotConvergent, NotOnManifold, NotPeriodic, NotUnbounded,
                     ParameterOutOfRange, SingularChart, SL2FlowError, ToleranceExceeded)
from .kernels import BACKEND
from .matrix_core import I, K, M, Mat2, Z, cofactor, det2, inner, norm_sq, rotation

__version__ = "0.1.0"

__all__ = [
    "ChartPoint", "PhaseState", "PolarPoint", "ReducedState", "Regime", "ambient_to_reduced",
    "reduced_to_ambient", "Formulation", "Invariants", "Trajectory", "integrate",
    "invariants_of", "lagrange_multiplier", "EmptyLevelSet", "IntegrationFailed",
    "KappaMismatch", "NoCriticalPoint", "NotConvergent", "NotOnManifold", "NotPeriodic",
    "NotUnbounded", "ParameterOutOfRange", "SingularChart", "SL2FlowError",
    "ToleranceExceeded", "BACKEND", "I", "K", "M", "Mat2", "Z", "cofactor", "det2", "inner",
    "norm_sq", "rotation", "__version__",
]
