"""Orbit classification from the invariants and two discrete data of the initial state."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from ..charts import PhaseState, check_on_bundle
from ..dynamics import Invariants, invariants_of
from ..errors import NoCriticalPoint, ParameterOutOfRange
from ..matrix_core import DEFAULT_TOL, inner, norm_sq

#: relative band for equalities between invariants
CLASS_BAND = 1e-9
#: relative distance from a class boundary that triggers a proximity warning
WARN_BAND = 1e-6


class OrbitKind(str, enum.Enum):
    EQUILIBRIUM = "Equilibrium"
    RIGID_ROTATION = "RigidRotation"
    RIGID = "Rigid"
    PERIODIC_RADIUS = "PeriodicRadius"
    HOMOCLINIC = "Homoclinic"
    UNBOUNDED_BOTH = "UnboundedBothEnds"
    UNBOUNDED_FORWARD = "UnboundedForward"
    UNBOUNDED_BACKWARD = "UnboundedBackward"


@dataclass
class OrbitClass:
    kind: OrbitKind
    pressureless: bool
    passes_through_so2: bool
    invariants: Invariants
    A0_norm_sq: float
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        inv = self.invariants
        return {"kind": self.kind.value, "pressureless": self.pressureless,
                "passes_through_so2": self.passes_through_so2,
                "invariants": {"kappa": inv.kappa, "X1": inv.X1, "X2": inv.X2, "X3": inv.X3},
                "A0_norm_sq": self.A0_norm_sq,
                "boundary_proximity_warnings": list(self.warnings)}


def rigid_conditions(A0_norm_sq: float, inv: Invariants) -> tuple[float, float]:
    """Residuals of the two rigidity conditions at ``|A0|^2 > 2``.

    Returns ``(r1, r2)`` with ``r1 = X1 - [X2^2/(s-1) + X3^2/(s+1)]/2 - kappa s``
    and ``r2 = X2^2/(s-1)^2 + X3^2/(s+1)^2 - 2 kappa``, where ``s = |A0|^2/2``.
    Both vanish exactly for rigid motions.
    """
    if not A0_norm_sq > 2.0:
        raise ParameterOutOfRange(f"|A0|^2 = {A0_norm_sq!r} must exceed 2")
    s = 0.5 * A0_norm_sq
    k, X1, X2, X3 = inv
    r1 = X1 - (0.5 * (X2 * X2 / (s - 1.0) + X3 * X3 / (s + 1.0)) + 0.5 * k * A0_norm_sq)
    r2 = X2 * X2 / (s - 1.0) ** 2 + X3 * X3 / (s + 1.0) ** 2 - 2.0 * k
    return r1, r2


def _scale(inv: Invariants) -> float:
    return max(1.0, abs(inv.X1))


def decide(inv: Invariants, A0_norm_sq: float, AB: float, *, band: float = CLASS_BAND,
           so2_tol: float = DEFAULT_TOL) -> tuple[OrbitKind, bool, list]:
    """The classification decision tree on invariant data alone.

    Parameters
    ----------
    inv : Invariants
    A0_norm_sq : float
        ``|A0|^2``; ``A0`` is in SO(2) iff this equals 2.
    AB : float
        ``<A0, B0>``, whose sign separates the two semi-bounded families.

    Returns
    -------
    (kind, passes_through_so2, warnings)
    """
    k, X1, X2, X3 = inv
    tol = band * _scale(inv)
    warn = []
    in_so2 = abs(A0_norm_sq - 2.0) <= so2_tol
    saddle = k + 0.25 * X3 * X3
    x2_zero = abs(X2) <= tol
    on_saddle = abs(X1 - saddle) <= tol

    def near(a, b, what):
        d = abs(a - b)
        if tol < d <= WARN_BAND * _scale(inv):
            warn.append(f"{what}: relative distance {d / _scale(inv):.2e} from boundary")

    near(X1, k, "X1 near kappa (equilibrium)")
    near(X1, saddle, "X1 near kappa + X3^2/4")
    if not x2_zero:
        near(abs(X2), 0.0, "X2 near 0")
    passes = in_so2 or (x2_zero and X1 > saddle + tol)

    if abs(X1 - k) <= tol:
        return OrbitKind.EQUILIBRIUM, True, warn
    if in_so2 and on_saddle:
        return OrbitKind.RIGID_ROTATION, True, warn
    if k > 0:
        if X3 * X3 > 0 and abs(X3 * X3 - 8.0 * k) <= WARN_BAND * 8.0 * k:
            warn.append("X3^2 near 8 kappa (homoclinic bifurcation)")
        if A0_norm_sq > 2.0 and not in_so2:
            r1, r2 = rigid_conditions(A0_norm_sq, inv)
            if abs(r1) <= tol and abs(r2) <= band * max(1.0, 2.0 * k):
                return OrbitKind.RIGID, passes, warn
        if x2_zero and on_saddle and X3 * X3 > 8.0 * k and not in_so2:
            return OrbitKind.HOMOCLINIC, False, warn
        return OrbitKind.PERIODIC_RADIUS, passes, warn
    # perfect fluid
    if x2_zero and on_saddle and X1 > tol and not in_so2:
        if AB < 0:
            return OrbitKind.UNBOUNDED_BACKWARD, False, warn
        if AB > 0:
            return OrbitKind.UNBOUNDED_FORWARD, False, warn
        warn.append("<A0, B0> = 0 on the separatrix level; treated as two-sided")
    return OrbitKind.UNBOUNDED_BOTH, passes, warn


def classify(state: PhaseState, kappa: float, tol: float = DEFAULT_TOL) -> OrbitClass:
    """Classify the trajectory through ``state``.

    Parameters
    ----------
    state : PhaseState
        Initial data on the tangent bundle.
    kappa : float
        Magnetic parameter.
    tol : float
        Manifold-membership tolerance; also the relative band used for the
        pressureless flag.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    check_on_bundle(state, tol)
    inv = invariants_of(state, kappa)
    inv = Invariants(float(kappa), *(float(v) for v in inv[1:]))
    A0n = float(norm_sq(state.A))
    AB = float(inner(state.A, state.B))
    kind, passes, warn = decide(inv, A0n, AB, so2_tol=tol)
    pressureless = abs(2.0 * inv.X1 + inv.X2 ** 2 - inv.X3 ** 2) <= tol * _scale(inv)
    return OrbitClass(kind, pressureless, passes, inv, A0n, warn)


def critical_points(kappa: float, X2: float, X3: float) -> list[tuple[float, str]]:
    """Critical points of the reduced Hamiltonian in the ``(q1, xi1)`` plane.

    All critical points have ``xi1 = 0``; the returned list holds
    ``(q1, type)`` with type one of ``"minimum"``, ``"saddle"``, ``"center"``
    or ``"equilibrium_line"`` (kappa = X2 = X3 = 0, where every point of the
    axis is critical; ``q1 = 0`` is returned as a representative).
    """
    k = float(kappa)
    if abs(X2) > 0:
        if k <= 0:
            raise NoCriticalPoint("kappa = 0 with X2 != 0 has unbounded level sets")
        a, b = X2 * X2, X3 * X3

        # 2 kappa = X2^2/q^4 + X3^2/(2+q^2)^2, right side strictly decreasing in q
        def g(q):
            return a / q ** 4 + b / (2.0 + q * q) ** 2 - 2.0 * k

        lo = (a / (2.0 * k)) ** 0.25
        hi = ((a + b) / (2.0 * k)) ** 0.25 * 1.0001 + 1e-300
        if g(hi) > 0:
            hi *= 2.0
        # g(lo) >= 0 in exact arithmetic; a nonpositive value means lo is the root
        q = lo if g(lo) <= 0 else brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        return [(float(q), "minimum")]
    if k == 0:
        if X3 == 0:
            return [(0.0, "equilibrium_line")]
        return [(0.0, "saddle")]
    qc2 = center_q1_squared(k, X3)
    if qc2 > CLASS_BAND:  # below the band the centers have merged into the origin
        qc = math.sqrt(qc2)
        return [(0.0, "saddle"), (-qc, "center"), (qc, "center")]
    return [(0.0, "center")]


def center_q1_squared(kappa: float, X3: float) -> float:
    """q1^2 = |X3|/sqrt(2 kappa) - 2 for the off-axis centers (X2 = 0)."""
    return abs(X3) / math.sqrt(2.0 * kappa) - 2.0
