"""Level curves of the reduced Hamiltonians in the ``(q1, xi1)`` plane.

Both reduced Hamiltonians are quadratic in ``xi1``, so on the level
``H = E`` we have explicitly

    xi1^2 = 2 (1 + q^2) / (2 + q^2) * F(q),
    F(q) = 2 (E - kappa (1 + q^2)) - X2^2 / q^2 - X3^2 / (2 + q^2)

(the ``X2`` term is absent for ``H0``).  The admissible set ``F >= 0`` is a
union of intervals whose endpoints are the turning points; each interval
gives one curve (or two mirror images for ``H0``, which is even in ``q1``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..dynamics import h_tilde, h_zero
from ..errors import EmptyLevelSet, ParameterOutOfRange

#: curves that run off to q1 = infinity are truncated here unless told otherwise
DEFAULT_Q_MAX = 6.0


class Hamiltonian(str, enum.Enum):
    HTILDE = "Htilde"
    H0 = "H0"


class Tag(str, enum.Enum):
    CLOSED = "closed"
    UNBOUNDED = "unbounded"
    HOMOCLINIC = "homoclinic"
    POINT = "point"
    EQUILIBRIUM_LINE = "equilibrium_line"


@dataclass
class Branch:
    q1: np.ndarray
    xi1: np.ndarray
    tag: Tag

    def as_dict(self) -> dict:
        return {"tag": self.tag.value, "q1": self.q1.tolist(), "xi1": self.xi1.tolist()}


@dataclass
class LevelSet:
    hamiltonian: Hamiltonian
    kappa: float
    X2: float
    X3: float
    energy: float
    branches: list = field(default_factory=list)

    def tags(self) -> list[str]:
        return [b.tag.value for b in self.branches]

    def count(self, tag) -> int:
        return sum(b.tag is Tag(tag) for b in self.branches)

    def as_dict(self, with_points: bool = True) -> dict:
        d = {"hamiltonian": self.hamiltonian.value, "kappa": self.kappa, "X2": self.X2,
             "X3": self.X3, "energy": self.energy, "tags": self.tags()}
        if with_points:
            d["curves"] = [b.as_dict() for b in self.branches]
        return d


def _F(q, E, kappa, X2, X3, ham):
    s = q * q
    out = 2.0 * (E - kappa * (1.0 + s)) - X3 * X3 / (2.0 + s)
    if ham is Hamiltonian.HTILDE:
        out = out - X2 * X2 / s
    return out


def _xi1(q, E, kappa, X2, X3, ham):
    s = q * q
    return np.sqrt(np.maximum(2.0 * (1.0 + s) / (2.0 + s) * _F(q, E, kappa, X2, X3, ham), 0.0))


def energy(ham, kappa, X2, X3, q1, xi1):
    ham = Hamiltonian(ham)
    if ham is Hamiltonian.HTILDE:
        return h_tilde((q1, 0.0, 0.0), (xi1, X2, X3), kappa)
    return h_zero(q1, xi1, X3, kappa)


def minimum_energy(ham, kappa, X2, X3) -> float:
    """Infimum of the reduced Hamiltonian over the ``(q1, xi1)`` plane."""
    from .orbits import critical_points
    ham = Hamiltonian(ham)
    if ham is Hamiltonian.HTILDE:
        if kappa == 0:
            return 0.0  # not attained: H -> X2-free kinetic floor at infinity
        q = critical_points(kappa, X2, X3)[0][0]
        return float(h_tilde((q, 0, 0), (0.0, X2, X3), kappa))
    if kappa > 0 and X3 * X3 > 8.0 * kappa:
        qc = math.sqrt(abs(X3) / math.sqrt(2.0 * kappa) - 2.0)
        return float(h_zero(qc, 0.0, X3, kappa))
    return float(kappa + 0.25 * X3 * X3) if kappa > 0 else 0.0


def _turning_points(E, kappa, X2, X3, ham) -> list[float]:
    """Positive roots s = q^2 of F, polished on F itself."""
    a2, a3 = X2 * X2, X3 * X3
    c = 2.0 * (E - kappa)
    if ham is Hamiltonian.HTILDE:
        # s (2 + s) F = -2k s^3 + (c - 4k) s^2 + (2c - a2 - a3) s - 2 a2
        coeffs = [-2.0 * kappa, c - 4.0 * kappa, 2.0 * c - a2 - a3, -2.0 * a2]
    else:
        # (2 + s) F = -2k s^2 + (c - 4k) s + (2c - a3)
        coeffs = [-2.0 * kappa, c - 4.0 * kappa, 2.0 * c - a3]
    while coeffs and coeffs[0] == 0.0:
        coeffs = coeffs[1:]
    if len(coeffs) < 2:
        return []
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)) or r.real <= 0:
            continue
        s = float(r.real)
        q = math.sqrt(s)
        # polish in q where F changes sign
        f = lambda x: _F(x, E, kappa, X2, X3, ham)
        lo, hi = q * (1 - 1e-7), q * (1 + 1e-7)
        if f(lo) * f(hi) < 0:
            q = brentq(f, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=200)
        out.append(q)
    return sorted(set(out))


def _cos_grid(a, b, n, cluster_a=True, cluster_b=True):
    u = np.linspace(0.0, 1.0, n)
    if cluster_a and cluster_b:
        w = 0.5 * (1.0 - np.cos(np.pi * u))
    elif cluster_a:
        w = 1.0 - np.cos(0.5 * np.pi * u)
    elif cluster_b:
        w = np.sin(0.5 * np.pi * u)
    else:
        w = u
    q = a + (b - a) * w
    q[0], q[-1] = a, b
    return q


def _closed_curve(qs, E, kappa, X2, X3, ham, tag=Tag.CLOSED):
    xi = _xi1(qs, E, kappa, X2, X3, ham)
    q = np.concatenate([qs, qs[-2::-1]])
    x = np.concatenate([xi, -xi[-2::-1]])
    return Branch(q, x, tag)


def level_curve(hamiltonian, kappa: float, X2: float, X3: float, energy_value: float,
                sampling: int = 2000, q_max: float | None = None) -> LevelSet:
    """Polylines of ``{(q1, xi1): H = energy}`` with topology tags.

    Parameters
    ----------
    hamiltonian : {"Htilde", "H0"}
        ``Htilde`` needs ``X2 != 0`` and lives on ``q1 > 0``; ``H0`` is the
        ``X2 = 0`` reduction on the whole line.
    sampling : int
        Points per half-branch (cosine-clustered toward turning points).
    q_max : float, optional
        Truncation radius for unbounded branches.

    Raises
    ------
    EmptyLevelSet
        If ``energy`` lies below the minimum of the Hamiltonian.
    """
    ham = Hamiltonian(hamiltonian)
    k, E = float(kappa), float(energy_value)
    X2, X3 = float(X2), float(X3)
    if k < 0:
        raise ParameterOutOfRange("kappa must be nonnegative")
    if ham is Hamiltonian.HTILDE and X2 == 0:
        raise ParameterOutOfRange("Htilde requires X2 != 0; use H0")
    if ham is Hamiltonian.H0:
        X2 = 0.0
    n = max(int(sampling), 8)
    ls = LevelSet(ham, k, X2, X3, E)
    Emin = minimum_energy(ham, k, X2, X3)
    scale = max(1.0, abs(E))
    band = 1e-12 * scale
    if E < Emin - band:
        raise EmptyLevelSet(f"energy {E!r} is below the minimum {Emin!r}")

    # isolated minima
    if abs(E - Emin) <= band and not (k == 0):
        from .orbits import critical_points
        if ham is Hamiltonian.HTILDE:
            q = critical_points(k, X2, X3)[0][0]
            ls.branches.append(Branch(np.array([q]), np.array([0.0]), Tag.POINT))
        elif X3 * X3 > 8.0 * k:
            qc = math.sqrt(abs(X3) / math.sqrt(2.0 * k) - 2.0)
            for q in (-qc, qc):
                ls.branches.append(Branch(np.array([q]), np.array([0.0]), Tag.POINT))
        else:
            ls.branches.append(Branch(np.array([0.0]), np.array([0.0]), Tag.POINT))
        return ls

    if ham is Hamiltonian.H0 and k == 0 and X3 == 0:
        qm = DEFAULT_Q_MAX if q_max is None else float(q_max)
        qs = np.linspace(-qm, qm, 2 * n - 1)
        if E == 0:
            ls.branches.append(Branch(qs, np.zeros_like(qs), Tag.EQUILIBRIUM_LINE))
            return ls
        xi = _xi1(qs, E, k, X2, X3, ham)
        ls.branches.append(Branch(qs, xi, Tag.UNBOUNDED))
        ls.branches.append(Branch(qs, -xi, Tag.UNBOUNDED))
        return ls

    saddle_level = ham is Hamiltonian.H0 and abs(E - (k + 0.25 * X3 * X3)) <= band
    roots = _turning_points(E, k, X2, X3, ham)
    if saddle_level:
        E = k + 0.25 * X3 * X3
        roots = [r for r in roots if r > 1e-6]  # s = 0 is a root here; drop its rounding image
    f = lambda q: _F(q, E, k, X2, X3, ham)
    # admissible intervals in q > 0, open to the right when kappa = 0
    edges = [0.0] + roots + [math.inf]
    intervals = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b) if math.isfinite(b) else (2.0 * a + 1.0)
        if a == 0.0 and ham is Hamiltonian.HTILDE:
            continue  # F -> -infinity at q -> 0
        if f(mid) > 0:
            intervals.append((a, b))
    qm_default = max([DEFAULT_Q_MAX] + [2.0 * r for r in roots])
    qm = qm_default if q_max is None else float(q_max)

    if saddle_level:
        ls.branches.append(Branch(np.array([0.0]), np.array([0.0]), Tag.POINT))
    for a, b in intervals:
        if ham is Hamiltonian.HTILDE:
            if math.isfinite(b):
                ls.branches.append(_closed_curve(_cos_grid(a, b, n), E, k, X2, X3, ham))
            else:
                qs = _cos_grid(a, max(qm, a + 1.0), n, True, False)
                xi = _xi1(qs, E, k, X2, X3, ham)
                ls.branches.append(Branch(np.concatenate([qs[::-1], qs[1:]]),
                                          np.concatenate([-xi[::-1], xi[1:]]), Tag.UNBOUNDED))
            continue
        # H0: even in q
        if a == 0.0 and saddle_level:
            if math.isfinite(b):
                # figure eight: two homoclinic loops through the origin
                qs = _cos_grid(0.0, b, n)
                for sgn in (1.0, -1.0):
                    br = _closed_curve(qs, E, k, X2, X3, ham, Tag.HOMOCLINIC)
                    br.q1 = sgn * br.q1
                    ls.branches.append(br)
            else:
                # separatrices: four branches leaving the saddle
                qs = _cos_grid(0.0, qm, n, True, False)
                xi = _xi1(qs, E, k, X2, X3, ham)
                for sq in (1.0, -1.0):
                    for sx in (1.0, -1.0):
                        ls.branches.append(Branch(sq * qs, sx * xi, Tag.UNBOUNDED))
            continue
        if a == 0.0:
            if math.isfinite(b):
                qs = _cos_grid(-b, b, 2 * n - 1)
                ls.branches.append(_closed_curve(qs, E, k, X2, X3, ham))
            else:
                qs = _cos_grid(-qm, qm, 2 * n - 1, False, False)
                xi = _xi1(qs, E, k, X2, X3, ham)
                ls.branches.append(Branch(qs, xi, Tag.UNBOUNDED))
                ls.branches.append(Branch(qs.copy(), -xi, Tag.UNBOUNDED))
            continue
        for sgn in (1.0, -1.0):
            if math.isfinite(b):
                br = _closed_curve(_cos_grid(a, b, n), E, k, X2, X3, ham)
            else:
                qs = _cos_grid(a, max(qm, a + 1.0), n, True, False)
                xi = _xi1(qs, E, k, X2, X3, ham)
                br = Branch(np.concatenate([qs[::-1], qs[1:]]),
                            np.concatenate([-xi[::-1], xi[1:]]), Tag.UNBOUNDED)
            br.q1 = sgn * br.q1
            ls.branches.append(br)
    if not ls.branches:
        raise EmptyLevelSet(f"no admissible points at energy {E!r}")
    return ls


def residual(ls: LevelSet) -> float:
    """Largest |H - E| over all sampled points."""
    worst = 0.0
    for br in ls.branches:
        if ls.hamiltonian is Hamiltonian.HTILDE:
            H = h_tilde((br.q1, 0.0, 0.0), (br.xi1, ls.X2, ls.X3), ls.kappa)
        else:
            H = h_zero(br.q1, br.xi1, ls.X3, ls.kappa)
        worst = max(worst, float(np.max(np.abs(np.asarray(H) - ls.energy))))
    return worst


#: parameter sets of the six standard phase portraits; ``None`` in the
#: energy list stands for the minimum level
FIGURES = {
    1: dict(hamiltonian="Htilde", kappa=1.0, X2=1.0, X3=0.0, energies=(None, 3.0, 5.0)),
    2: dict(hamiltonian="Htilde", kappa=0.0, X2=1.0, X3=1.0, energies=(0.5, 2.0)),
    3: dict(hamiltonian="H0", kappa=1.0, X2=0.0, X3=4.0, energies=(None, 4.8, 5.0, 6.0)),
    4: dict(hamiltonian="H0", kappa=1.0, X2=0.0, X3=2.0, energies=(None, 3.0, 5.0)),
    5: dict(hamiltonian="H0", kappa=0.0, X2=0.0, X3=2.0, energies=(0.5, 1.0, 2.0)),
    6: dict(hamiltonian="H0", kappa=0.0, X2=0.0, X3=0.0, energies=(0.0, 1.0)),
}


def portrait(hamiltonian, kappa: float, X2: float, X3: float, energies, *,
             sampling: int = 400, q_max: float | None = None) -> dict:
    """Level curves for several energies; empty levels are reported, not raised.

    ``None`` in ``energies`` selects the minimum level.
    """
    ham = Hamiltonian(hamiltonian)
    if ham is Hamiltonian.H0:
        X2 = 0.0
    emin = minimum_energy(ham, kappa, X2, X3)
    levels = []
    for E in energies:
        E = emin if E is None else float(E)
        try:
            ls = level_curve(ham, kappa, X2, X3, E, sampling=sampling, q_max=q_max)
        except EmptyLevelSet as exc:
            levels.append({"energy": E, "error": "EmptyLevelSet", "message": str(exc),
                           "tags": [], "curves": []})
            continue
        d = ls.as_dict()
        d["residual"] = residual(ls)
        levels.append(d)
    return {"hamiltonian": ham.value, "kappa": float(kappa), "X2": float(X2),
            "X3": float(X3), "minimum_energy": emin, "levels": levels}
