"""Brute-force truncated Fock-space simulator used to certify the Gaussian engine.

A pure state of ``n`` modes is a complex tensor of shape ``(cutoff,) * n``.
Gates are exponentials of quadratic generators restricted to the modes they
touch.  Each generator conserves a photon-number combination (total number
for passive optics, number difference for a two-mode squeezer), so it is
block diagonal; every block is exponentiated densely with
:func:`scipy.linalg.expm` (Pade scaling-and-squaring) and the result is
stored sparse.  Memory scales as ``cutoff ** n_modes``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


LEAKAGE_TOL = 1e-8
NORM_TOL = 1e-9
MAX_AMPLITUDES = 2**24  # 256 MiB of complex128


class DimensionBudgetError(MemoryError):
    pass


class NormDrift(RuntimeError):
    pass


@dataclass(frozen=True)
class FockState:
    amplitudes: np.ndarray
    leakage: float = 0.0

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def converged(self) -> bool:
        return self.leakage < LEAKAGE_TOL

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _budget(cutoff: int, n_modes: int, max_amplitudes: int = MAX_AMPLITUDES):
    size = cutoff**n_modes
    if size > max_amplitudes:
        raise DimensionBudgetError(
            f"{n_modes} modes at cutoff {cutoff} need {size} amplitudes "
            f"(budget {max_amplitudes} = cutoff**modes); use a smaller cutoff or fewer modes"
        )


def edge_probability(amplitudes: np.ndarray, margin: int = 2) -> float:
    """Largest probability, over modes, of occupying the top ``margin`` levels."""
    p = np.abs(amplitudes) ** 2
    c = amplitudes.shape[0]
    worst = 0.0
    for m in range(amplitudes.ndim):
        marg = p.sum(axis=tuple(k for k in range(amplitudes.ndim) if k != m))
        worst = max(worst, float(marg[c - margin :].sum()))
    return worst


def _after_gate(state: FockState, psi: np.ndarray) -> FockState:
    norm = float(np.sum(np.abs(psi) ** 2))
    if abs(norm - state.norm()) > NORM_TOL:
        raise NormDrift(f"norm changed by {norm - state.norm():.3e} in one gate")
    return FockState(psi, max(state.leakage, edge_probability(psi)))


def fock_vacuum(n_modes: int, cutoff: int, max_amplitudes: int = MAX_AMPLITUDES) -> FockState:
    _budget(cutoff, n_modes, max_amplitudes)
    psi = np.zeros((cutoff,) * n_modes, dtype=complex)
    psi[(0,) * n_modes] = 1.0
    return FockState(psi)


def coherent_amplitudes(cutoff: int, alpha: complex) -> np.ndarray:
    """Truncated coherent-state amplitudes ``exp(-|a|^2/2) a^n / sqrt(n!)``."""
    out = np.zeros(cutoff, dtype=complex)
    if alpha == 0:
        out[0] = 1.0
        return out
    n = np.arange(cutoff)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(n[1:]))])
    logmag = n * np.log(abs(alpha)) - 0.5 * log_fact - 0.5 * abs(alpha) ** 2
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def coherent_product_state(cutoff: int, amplitudes, max_amplitudes: int = MAX_AMPLITUDES) -> FockState:
    """Product of coherent states, one amplitude per mode."""
    amplitudes = list(amplitudes)
    _budget(cutoff, len(amplitudes), max_amplitudes)
    psi = np.array(1.0 + 0j)
    for a in amplitudes:
        psi = np.multiply.outer(psi, coherent_amplitudes(cutoff, complex(a)))
    return FockState(psi, edge_probability(psi))


# -- generators --------------------------------------------------------------


def _lowering(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff)), 1, format="csr", dtype=complex)


def _mode_ops(cutoff: int, k: int) -> list:
    a = _lowering(cutoff)
    eye = sp.identity(cutoff, format="csr", dtype=complex)
    ops = []
    for m in range(k):
        op = None
        for q in range(k):
            f = a if q == m else eye
            op = f if op is None else sp.kron(op, f, format="csr")
        ops.append(op)
    return ops


def _block_expm(G: sp.spmatrix) -> sp.csr_matrix:
    """exp(G) for a sparse generator whose graph splits into small blocks."""
    G = sp.csr_matrix(G)
    pattern = (abs(G) > 0).astype(np.int8)
    n_blocks, labels = connected_components(pattern, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_blocks + 1))
    rows, cols, vals = [], [], []
    for b in range(n_blocks):
        idx = order[bounds[b] : bounds[b + 1]]
        sub = G[idx][:, idx].toarray()
        E = sla.expm(sub)
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(E.ravel())
    n = G.shape[0]
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


@lru_cache(maxsize=64)
def _squeezer_operator(cutoff: int, g: float) -> sp.csr_matrix:
    a, b = _mode_ops(cutoff, 2)
    K = a.T @ b.T - a @ b  # a^dag b^dag - a b (real lowering matrices)
    return _block_expm(g * K)


def _passive_operator(cutoff: int, H: np.ndarray) -> sp.csr_matrix:
    ops = _mode_ops(cutoff, H.shape[0])
    G = None
    for k in range(H.shape[0]):
        for l in range(H.shape[0]):
            if H[k, l] != 0:
                term = 1j * H[k, l] * (ops[k].conj().T @ ops[l])
                G = term if G is None else G + term
    if G is None:
        return sp.identity(cutoff ** H.shape[0], format="csr", dtype=complex)
    return _block_expm(G)


@lru_cache(maxsize=256)
def _passive_cached(cutoff: int, key: bytes, k: int) -> sp.csr_matrix:
    J = np.frombuffer(key, dtype=complex).reshape(k, k)
    H = -1j * sla.logm(J)
    H = 0.5 * (H + H.conj().T)
    return _passive_operator(cutoff, H)


def _apply_on_modes(state: FockState, modes, op: sp.spmatrix) -> FockState:
    psi = state.amplitudes
    c = state.cutoff
    modes = list(modes)
    dest = list(range(len(modes)))
    moved = np.moveaxis(psi, modes, dest)
    shape = moved.shape
    flat = moved.reshape(c ** len(modes), -1)
    out = (op @ flat).reshape(shape)
    return _after_gate(state, np.moveaxis(out, dest, modes))


# -- gates --------------------------------------------------------------------


def apply_two_mode_squeezer(state: FockState, modes, g: float, sign: int = 1) -> FockState:
    """exp(sign * g * (a_i^dag a_j^dag - a_i a_j)) on the pair ``modes``."""
    i, j = modes
    if g == 0:
        return state
    return _apply_on_modes(state, (i, j), _squeezer_operator(state.cutoff, float(sign * g)))


def apply_phase_fock(state: FockState, mode: int, phase: complex) -> FockState:
    """Multiply mode ``mode`` by a unit-modulus factor (``|n> -> phase**n |n>``)."""
    n = np.arange(state.cutoff)
    shape = [1] * state.n_modes
    shape[mode] = state.cutoff
    psi = state.amplitudes * (complex(phase) ** n).reshape(shape)
    return _after_gate(state, psi)


def apply_passive_fock(state: FockState, J, modes=None) -> FockState:
    """Apply the linear-optical unitary ``J`` acting on ``modes`` (default: the first ``len(J)``).

    ``J`` is split into its connected blocks; single-mode blocks become phase
    factors and larger blocks use the exponentiated quadratic generator.
    """
    J = np.asarray(J, dtype=complex)
    k = J.shape[0]
    modes = list(range(k)) if modes is None else list(modes)
    if np.max(np.abs(J @ J.conj().T - np.eye(k))) > 1e-10:
        raise ValueError("J is not unitary")
    n_blocks, labels = connected_components(sp.csr_matrix(np.abs(J) > 0), directed=False)
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        sub = J[np.ix_(idx, idx)]
        targets = [modes[q] for q in idx]
        if len(idx) == 1:
            if sub[0, 0] != 1:
                state = apply_phase_fock(state, targets[0], sub[0, 0])
            continue
        if np.allclose(sub, np.eye(len(idx)), atol=0, rtol=0):
            continue
        op = _passive_cached(state.cutoff, np.ascontiguousarray(sub).tobytes(), len(idx))
        state = _apply_on_modes(state, targets, op)
    return state


def apply_loss_fock(state: FockState, mode: int, t: float, max_amplitudes: int = MAX_AMPLITUDES) -> FockState:
    """Beam splitter with amplitude transmission ``t`` into a new vacuum ancilla.

    The ancilla is appended as the last mode; statistics on the original modes
    automatically sum over its outcomes.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    _budget(state.cutoff, state.n_modes + 1, max_amplitudes)
    vac = np.zeros(state.cutoff, dtype=complex)
    vac[0] = 1.0
    grown = FockState(np.multiply.outer(state.amplitudes, vac), state.leakage)
    if t == 1.0:
        return grown
    r = np.sqrt(1.0 - t * t)
    # a -> t a + r v on (mode, ancilla)
    bs = np.array([[t, r], [-r, t]], dtype=complex)
    return apply_passive_fock(grown, bs, modes=[mode, grown.n_modes - 1])


def fock_photon_statistics(state: FockState, subset) -> tuple[float, float]:
    """Exact mean and variance of the summed occupation over ``subset``."""
    subset = sorted(set(int(m) for m in subset))
    if not subset:
        raise ValueError("subset must not be empty")
    p = np.abs(state.amplitudes) ** 2
    keep = tuple(subset)
    drop = tuple(k for k in range(state.n_modes) if k not in keep)
    marg = p.sum(axis=drop) if drop else p
    c = state.cutoff
    total = np.zeros((c,) * len(keep))
    n = np.arange(c)
    for q in range(len(keep)):
        shape = [1] * len(keep)
        shape[q] = c
        total = total + n.reshape(shape)
    mean = float(np.sum(marg * total))
    second = float(np.sum(marg * total**2))
    return mean, second - mean**2


# -- full chain ---------------------------------------------------------------


def run_fock_pipeline(cfg, cutoff: int, max_amplitudes: int = MAX_AMPLITUDES, **overrides) -> FockState:
    """Propagate the interferometer chain of ``cfg`` in the truncated Fock basis.

    Lossy stations each add an ancilla mode, so only configurations with at
    most a couple of lossy modes fit in memory.
    """
    from . import elements as el
    from .modes import ModeIndex
    from .pipeline import Basis, Placement

    phi_b = cfg.sample_phase_phi_b if overrides.get("phi_b") is None else overrides["phi_b"]
    delta = cfg.sample_axis_delta if overrides.get("delta") is None else overrides["delta"]
    phi_su = cfg.phi_su if overrides.get("phi_su") is None else overrides["phi_su"]
    alpha, beta, theta = el.bell_config(cfg.bell)

    state = coherent_product_state(cutoff, [cfg.seed.get(m, 0j) for m in ModeIndex], max_amplitudes)

    def opa_pair(state, sign):
        state = apply_two_mode_squeezer(state, (ModeIndex.SH, ModeIndex.IH), cfg.gain_g, sign)
        return apply_two_mode_squeezer(state, (ModeIndex.SV, ModeIndex.IV), cfg.gain_g, sign)

    state = opa_pair(state, 1)
    qwp = el.quarter_wave(theta)
    target = el.polarization_block(el.jones_retarder(float(phi_b), float(delta)))
    stack = {
        Placement.BEFORE: [target, qwp, qwp],
        Placement.BETWEEN: [qwp, target, qwp],
        Placement.AFTER: [qwp, qwp, target],
    }[cfg.placement]
    for J in stack:
        state = apply_passive_fock(state, J)
    state = apply_passive_fock(state, el.make_phase_plate(el.PhasePlateParams(float(phi_su), alpha, beta)))
    ts, ti = cfg.transmissions
    for mode, t in ((ModeIndex.SH, ts), (ModeIndex.SV, ts), (ModeIndex.IH, ti), (ModeIndex.IV, ti)):
        if t < 1.0:
            state = apply_loss_fock(state, int(mode), t, max_amplitudes)
    if cfg.detection.basis is Basis.AD:
        state = apply_passive_fock(state, el.half_wave(np.pi / 8))
    return opa_pair(state, cfg.measurement_sign)
