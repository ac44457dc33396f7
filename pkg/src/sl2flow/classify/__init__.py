"""Orbit classification, frequencies, phase portraits and tangent-space launch sets."""
from .frequencies import FrequencyReport, detect_period, frequencies, hat_A, reduced_trajectory
from .levelsets import (FIGURES, Branch, Hamiltonian, LevelSet, Tag, level_curve,
                        minimum_energy, portrait, residual)
from .orbits import (OrbitClass, OrbitKind, center_q1_squared, classify, critical_points,
                     decide, rigid_conditions)
from .tangent import TangentReport, tangent_launcher

__all__ = [
    "FrequencyReport", "detect_period", "frequencies", "hat_A", "reduced_trajectory",
    "FIGURES", "Branch", "Hamiltonian", "LevelSet", "Tag", "level_curve", "minimum_energy",
    "portrait", "residual",
    "OrbitClass", "OrbitKind", "center_q1_squared", "classify", "critical_points", "decide",
    "rigid_conditions", "TangentReport", "tangent_launcher",
]
