"""Gaussian-state simulator of a dual-polarization SU(1,1) interferometer
for birefringence sensing beyond the shot-noise limit."""

from .elements import BellState, bell_config
from .gaussian import GaussianState, photon_statistics, second_moments, vacuum_state
from .metrology import SensitivityResult, heisenberg_reference, optimize_phi_su, sensitivity_at
from .modes import ModeIndex
from .pipeline import Basis, DetectionSpec, InterferometerConfig, Placement, build_and_run

__all__ = [
    "Basis",
    "BellState",
    "DetectionSpec",
    "GaussianState",
    "InterferometerConfig",
    "ModeIndex",
    "Placement",
    "SensitivityResult",
    "bell_config",
    "build_and_run",
    "heisenberg_reference",
    "optimize_phi_su",
    "photon_statistics",
    "second_moments",
    "sensitivity_at",
    "vacuum_state",
]
__version__ = "0.1.0"
