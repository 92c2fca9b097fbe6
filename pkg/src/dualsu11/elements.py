"""Matrices for the physical elements of the interferometer.

Parametric amplifiers produce Bogoliubov pairs ``(U, V)``; wave plates, the
birefringent sample and the phase plate produce 4x4 unitaries acting on the
mode order ``(sH, sV, iH, iV)``.  Angle-valued inputs may be numpy arrays,
in which case the returned matrices carry the same leading batch shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modes import N_PHYSICAL, ModeIndex, Polarization


@dataclass(frozen=True)
class OpaParams:
    gain_g: float
    polarization: Polarization = Polarization.H
    sign: int = 1

    def __post_init__(self):
        if not np.isfinite(self.gain_g):
            raise ValueError("gain must be finite")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "polarization", Polarization(self.polarization))


@dataclass(frozen=True)
class WaveplateParams:
    phase_psi: float
    axis_gamma: float


@dataclass(frozen=True)
class PhasePlateParams:
    phi_su: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0


class BellState(str, Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"


# (alpha, beta, theta) per Bell state
_BELL_TABLE = {
    BellState.PHI_PLUS: (0.0, 0.0, 0.0),
    BellState.PHI_MINUS: (np.pi, 0.0, 0.0),
    BellState.PSI_PLUS: (np.pi, 0.0, np.pi / 8),
    BellState.PSI_MINUS: (np.pi, np.pi, np.pi / 8),
}


def bell_config(bell) -> tuple[float, float, float]:
    """Pump-flip phase alpha, signal-V flip beta and quarter-wave angle theta."""
    return _BELL_TABLE[BellState(bell)]


def make_opa(p: OpaParams) -> tuple[np.ndarray, np.ndarray]:
    """Two-mode squeezer between signal and idler of one polarization."""
    g = float(p.gain_g)
    if p.polarization is Polarization.H:
        s, i = ModeIndex.SH, ModeIndex.IH
    else:
        s, i = ModeIndex.SV, ModeIndex.IV
    U = np.eye(N_PHYSICAL, dtype=complex)
    V = np.zeros((N_PHYSICAL, N_PHYSICAL), dtype=complex)
    U[s, s] = U[i, i] = np.cosh(g)
    V[s, i] = V[i, s] = p.sign * np.sinh(g)
    return U, V


def jones_retarder(psi, gamma) -> np.ndarray:
    """2x2 Jones matrix of a linear retarder with phase ``psi`` and axis ``gamma``."""
    psi = np.asarray(psi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    c = np.cos(psi / 2)
    s = np.sin(psi / 2)
    c2, s2 = np.cos(2 * gamma), np.sin(2 * gamma)
    shape = np.broadcast_shapes(psi.shape, gamma.shape)
    j = np.empty(shape + (2, 2), dtype=complex)
    j[..., 0, 0] = c - 1j * c2 * s
    j[..., 0, 1] = -1j * s2 * s
    j[..., 1, 0] = -1j * s2 * s
    j[..., 1, 1] = c + 1j * c2 * s
    return j


def jones_retarder_dpsi(psi, gamma) -> np.ndarray:
    """Derivative of :func:`jones_retarder` with respect to the phase."""
    psi = np.asarray(psi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    c = 0.5 * np.cos(psi / 2)
    s = -0.5 * np.sin(psi / 2)
    c2, s2 = np.cos(2 * gamma), np.sin(2 * gamma)
    shape = np.broadcast_shapes(psi.shape, gamma.shape)
    j = np.empty(shape + (2, 2), dtype=complex)
    j[..., 0, 0] = s - 1j * c2 * c
    j[..., 0, 1] = -1j * s2 * c
    j[..., 1, 0] = -1j * s2 * c
    j[..., 1, 1] = s + 1j * c2 * c
    return j


def polarization_block(j: np.ndarray) -> np.ndarray:
    """Place a 2x2 polarization matrix on both the signal and idler pairs."""
    j = np.asarray(j, dtype=complex)
    J = np.zeros(j.shape[:-2] + (N_PHYSICAL, N_PHYSICAL), dtype=complex)
    J[..., 0:2, 0:2] = j
    J[..., 2:4, 2:4] = j
    return J


def make_waveplate(p: WaveplateParams) -> np.ndarray:
    return polarization_block(jones_retarder(p.phase_psi, p.axis_gamma))


def quarter_wave(theta) -> np.ndarray:
    return polarization_block(jones_retarder(np.pi / 2, theta))


def half_wave(gamma) -> np.ndarray:
    return polarization_block(jones_retarder(np.pi, gamma))


def make_phase_plate(p: PhasePlateParams) -> np.ndarray:
    """Diagonal phases: SU(1,1) phase on idlers, pump flip on V, signal-V flip."""
    phi, a, b = (np.asarray(x, dtype=float) for x in (p.phi_su, p.alpha, p.beta))
    shape = np.broadcast_shapes(phi.shape, a.shape, b.shape)
    J = np.zeros(shape + (N_PHYSICAL, N_PHYSICAL), dtype=complex)
    J[..., ModeIndex.SH, ModeIndex.SH] = 1.0
    J[..., ModeIndex.SV, ModeIndex.SV] = np.exp(-1j * b) * np.exp(-0.5j * a)
    J[..., ModeIndex.IH, ModeIndex.IH] = np.exp(1j * phi)
    J[..., ModeIndex.IV, ModeIndex.IV] = np.exp(1j * phi) * np.exp(-0.5j * a)
    return J
