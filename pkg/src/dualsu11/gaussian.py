r"""Multimode Gaussian states in transfer form.

A state is stored as the linear map from a set of vacuum input modes
:math:`\hat v_k` to the current annihilation operators,

.. math::

    \hat a_i = \sum_k A_{ik}\,\hat v_k + B_{ik}\,\hat v_k^\dagger + d_i ,

so every expectation value follows from Wick contractions against vacuum.
Rows are the four physical modes; columns grow by one for each loss ancilla.

All operations broadcast over leading batch axes: ``A`` may have shape
``(..., 4, m)`` so a whole parameter grid is propagated in one pass.
"""

from __future__ import annotations

import contextlib
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .modes import N_PHYSICAL, ModeIndex

log = logging.getLogger(__name__)


class InvalidTransformation(ValueError):
    """A supplied (U, V) or Jones matrix does not preserve commutators."""


class InvariantViolation(RuntimeError):
    """A state failed the commutator or symmetry check."""


@dataclass
class Tolerances:
    state: float = 1e-10  # A A^dag - B B^dag = I and A B^T symmetric
    transform: float = 1e-12  # U U^dag - V V^dag = I, J unitary
    physicality: float = 1e-9  # symplectic eigenvalues >= 1
    variance_clamp: float = 1e-12


TOLERANCES = Tolerances()


@contextlib.contextmanager
def tolerances(**overrides):
    """Temporarily override the module-wide validation tolerances."""
    saved = replace(TOLERANCES)
    for k, v in overrides.items():
        if not hasattr(TOLERANCES, k):
            raise AttributeError(f"unknown tolerance {k!r}")
        setattr(TOLERANCES, k, v)
    try:
        yield TOLERANCES
    finally:
        for k in vars(saved):
            setattr(TOLERANCES, k, getattr(saved, k))


def _dag(x):
    return np.conj(np.swapaxes(x, -1, -2))


def _T(x):
    return np.swapaxes(x, -1, -2)


@dataclass(frozen=True)
class GaussianState:
    """Bogoliubov transfer (A, B) from vacuum plus coherent displacement d."""

    A: np.ndarray
    B: np.ndarray
    d: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.A.shape[-2]

    @property
    def n_inputs(self) -> int:
        return self.A.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.A.shape[:-2]

    def commutator_residual(self) -> float:
        """Largest element of ``|A A^dag - B B^dag - I|``."""
        R = self.A @ _dag(self.A) - self.B @ _dag(self.B) - np.eye(self.n_modes)
        return float(np.max(np.abs(R))) if R.size else 0.0

    def symmetry_residual(self) -> float:
        """Largest element of ``|A B^T - (A B^T)^T|``."""
        S = self.A @ _T(self.B)
        return float(np.max(np.abs(S - _T(S)))) if S.size else 0.0

    def check(self, tol: float | None = None) -> "GaussianState":
        tol = TOLERANCES.state if tol is None else tol
        rc = self.commutator_residual()
        if not rc <= tol:
            raise InvariantViolation(f"commutator residual {rc:.3e} exceeds {tol:.1e}")
        rs = self.symmetry_residual()
        if not rs <= tol:
            raise InvariantViolation(f"A B^T asymmetry {rs:.3e} exceeds {tol:.1e}")
        return self


@dataclass(frozen=True)
class SecondMoments:
    """Normal-ordered fluctuation moments.

    ``N[i, j] = <da_i^dag da_j>`` (Hermitian) and ``M[i, j] = <da_i da_j>``
    (symmetric), together with the displacement ``d``.
    """

    N: np.ndarray
    M: np.ndarray
    d: np.ndarray = field(default=None)

    def covariance(self) -> np.ndarray:
        """Real quadrature covariance, ordering (x_1..x_n, p_1..p_n), vacuum = I."""
        n = self.N.shape[-1]
        eye = np.eye(n)
        # Xi_kl = <{dxi_k, dxi_l}> with xi = (a, a^dag)
        top = np.concatenate([2 * self.M, 2 * _T(self.N) + eye], axis=-1)
        bot = np.concatenate([2 * self.N + eye, 2 * np.conj(self.M)], axis=-1)
        Xi = np.concatenate([top, bot], axis=-2)
        L = np.block([[eye, eye], [-1j * eye, 1j * eye]])
        sigma = 0.5 * (L @ Xi @ L.T)
        return np.real(sigma)

    def symplectic_eigenvalues(self) -> np.ndarray:
        sigma = self.covariance()
        n = sigma.shape[-1] // 2
        omega = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
        ev = np.linalg.eigvals(1j * omega @ sigma)
        ev = np.sort(np.abs(ev), axis=-1)
        return ev[..., ::2]

    def is_physical(self, tol: float | None = None) -> bool:
        tol = TOLERANCES.physicality if tol is None else tol
        return bool(np.all(self.symplectic_eigenvalues() >= 1.0 - tol))


def vacuum_state(n_modes: int = N_PHYSICAL) -> GaussianState:
    if n_modes <= 0:
        raise ValueError("n_modes must be positive")
    return GaussianState(
        A=np.eye(n_modes, dtype=complex),
        B=np.zeros((n_modes, n_modes), dtype=complex),
        d=np.zeros(n_modes, dtype=complex),
    )


def _mode(state: GaussianState, mode) -> int:
    idx = int(ModeIndex.parse(mode)) if isinstance(mode, str) else int(mode)
    if not 0 <= idx < state.n_modes:
        raise IndexError(f"mode {mode!r} out of range for {state.n_modes} modes")
    return idx


def displace(state: GaussianState, mode, amplitude) -> GaussianState:
    """Add a coherent amplitude to one mode (``d[mode] += amplitude``)."""
    i = _mode(state, mode)
    amplitude = np.asarray(amplitude, dtype=complex)
    d = np.array(np.broadcast_to(state.d, np.broadcast_shapes(state.d.shape, amplitude.shape + (1,))))
    d[..., i] += amplitude
    return GaussianState(state.A, state.B, d)


def symplectic_residual(U, V) -> float:
    n = U.shape[-1]
    R = U @ _dag(U) - V @ _dag(V) - np.eye(n)
    S = U @ _T(V) - V @ _T(U)
    return float(max(np.max(np.abs(R)), np.max(np.abs(S))))


def unitarity_residual(J) -> float:
    n = J.shape[-1]
    return float(np.max(np.abs(J @ _dag(J) - np.eye(n))))


def apply_bogoliubov(state: GaussianState, U, V, *, validate: bool = True) -> GaussianState:
    r"""Apply :math:`\hat a \to U\hat a + V\hat a^\dagger` to the physical modes.

    Raises
    ------
    InvalidTransformation
        If ``U U^dag - V V^dag != I`` or ``U V^T`` is not symmetric.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape[-2:] != (state.n_modes, state.n_modes) or V.shape != U.shape:
        raise ValueError(f"U, V must be {state.n_modes}x{state.n_modes}, got {U.shape}, {V.shape}")
    if validate:
        res = symplectic_residual(U, V)
        if not res <= TOLERANCES.transform:
            raise InvalidTransformation(f"(U, V) violates the symplectic condition, residual {res:.3e}")
    A, B, d = state.A, state.B, state.d
    return GaussianState(
        A=U @ A + V @ np.conj(B),
        B=U @ B + V @ np.conj(A),
        d=(U @ d[..., None] + V @ np.conj(d)[..., None])[..., 0],
    )


def apply_passive(state: GaussianState, J, *, validate: bool = True) -> GaussianState:
    """Apply a linear-optical unitary ``J`` to the physical modes."""
    J = np.asarray(J, dtype=complex)
    if J.shape[-2:] != (state.n_modes, state.n_modes):
        raise ValueError(f"J must be {state.n_modes}x{state.n_modes}, got {J.shape}")
    if validate:
        res = unitarity_residual(J)
        if not res <= TOLERANCES.transform:
            raise InvalidTransformation(f"J is not unitary, residual {res:.3e}")
    return GaussianState(J @ state.A, J @ state.B, (J @ state.d[..., None])[..., 0])


def apply_loss(state: GaussianState, mode, transmission_t: float) -> GaussianState:
    """Couple one mode to a fresh vacuum ancilla with amplitude transmission t."""
    t = float(transmission_t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {t}")
    i = _mode(state, mode)
    r = np.sqrt(1.0 - t * t)
    scale = np.ones(state.n_modes)
    scale[i] = t
    batch = state.batch_shape
    col_a = np.zeros(batch + (state.n_modes, 1), dtype=complex)
    col_a[..., i, 0] = r
    col_b = np.zeros_like(col_a)
    A = np.concatenate([state.A * scale[:, None], col_a], axis=-1)
    B = np.concatenate([state.B * scale[:, None], col_b], axis=-1)
    return GaussianState(A, B, state.d * scale)


def second_moments(state: GaussianState) -> SecondMoments:
    B = state.B
    return SecondMoments(N=np.conj(B) @ _T(B), M=state.A @ _T(B), d=state.d)


def _subset(subset: Iterable, n_modes: int = N_PHYSICAL) -> list[int]:
    idx = sorted({int(ModeIndex.parse(m)) for m in subset})
    if not idx:
        raise ValueError("detection subset must not be empty")
    if idx[-1] >= n_modes or idx[0] < 0:
        raise ValueError(f"detection subset {idx} reaches beyond the physical modes")
    return idx


def photon_statistics(state: GaussianState, subset: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of the total photon number over ``subset``."""
    S = _subset(subset, state.n_modes)
    mom = second_moments(state)
    N = mom.N[..., S, :][..., :, S]
    M = mom.M[..., S, :][..., :, S]
    d = state.d[..., S]
    occ = np.real(np.diagonal(N, axis1=-2, axis2=-1)) + np.abs(d) ** 2
    mean = occ.sum(axis=-1)
    dd_ = d[..., :, None] * np.conj(d)[..., None, :]
    cc = np.conj(d)[..., :, None] * np.conj(d)[..., None, :]
    var = (
        np.sum(np.abs(N) ** 2 + np.abs(M) ** 2, axis=(-2, -1))
        + 2 * np.sum(np.real(dd_ * N), axis=(-2, -1))
        + 2 * np.sum(np.real(cc * M), axis=(-2, -1))
        + mean
    )
    if np.any(var < 0):
        worst = float(np.min(var))
        scale = max(1.0, float(np.max(mean)))
        if worst < -TOLERANCES.variance_clamp * scale:
            log.warning("negative photon-number variance %.3e clamped to zero", worst)
        var = np.maximum(var, 0.0)
    if np.ndim(mean) == 0:
        return float(mean), float(var)
    return mean, var


def total_photons(state: GaussianState) -> np.ndarray:
    """Mean photon number summed over all physical modes."""
    occ = np.sum(np.abs(state.B) ** 2, axis=-1) + np.abs(state.d) ** 2
    total = occ.sum(axis=-1)
    return float(total) if np.ndim(total) == 0 else total
