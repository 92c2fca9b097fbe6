"""Assembly of the full dual SU(1,1) chain.

Element order::

    seeds -> OPA-H, OPA-V -> polarization stack (two quarter-wave plates and
    the sample, in one of three placements) -> phase plate -> loss on all
    four modes -> [half-wave at pi/8 for A-D detection] -> plane (3)
    -> OPA-H, OPA-V -> detection

The sample phase, sample axis and SU(1,1) phase may be passed as arrays to
propagate a whole grid at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from . import elements as el
from .gaussian import (
    GaussianState,
    apply_bogoliubov,
    apply_loss,
    apply_passive,
    displace,
    total_photons,
    vacuum_state,
)
from .modes import ModeIndex, Polarization


class Placement(str, Enum):
    BEFORE = "BeforePlates"
    BETWEEN = "BetweenPlates"
    AFTER = "AfterPlates"


class Basis(str, Enum):
    HV = "HV"
    AD = "AD"


@dataclass(frozen=True)
class DetectionSpec:
    modes: frozenset = frozenset({ModeIndex.IH})
    basis: Basis = Basis.HV

    def __post_init__(self):
        modes = frozenset(ModeIndex.parse(m) for m in self.modes)
        if not modes:
            raise ValueError("detection needs at least one mode")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "basis", Basis(self.basis))

    @property
    def indices(self) -> list[int]:
        return sorted(int(m) for m in self.modes)


@dataclass(frozen=True)
class InterferometerConfig:
    """Complete description of one experiment.

    ``seed`` maps modes to coherent amplitudes at plane (0).  Loss is the
    intensity loss ``l`` in ``[0, 1)``; per-frequency amplitude transmissions
    override the default ``sqrt(1 - l)``.
    """

    gain_g: float = 1.0
    loss_intensity_l: float = 0.0
    seed: Mapping = field(default_factory=lambda: {ModeIndex.SH: 1000.0})
    bell: el.BellState = el.BellState.PHI_PLUS
    placement: Placement = Placement.BETWEEN
    sample_phase_phi_b: float = 0.0
    sample_axis_delta: float = np.pi / 2
    phi_su: float = 0.0
    detection: DetectionSpec = field(default_factory=DetectionSpec)
    transmission_signal: float | None = None
    transmission_idler: float | None = None
    measurement_sign: int = 1

    def __post_init__(self):
        if not np.isfinite(self.gain_g) or self.gain_g < 0:
            raise ValueError(f"gain_g must be finite and >= 0, got {self.gain_g}")
        if not 0.0 <= self.loss_intensity_l < 1.0:
            raise ValueError(f"loss_intensity_l must lie in [0, 1), got {self.loss_intensity_l}")
        for name in ("transmission_signal", "transmission_idler"):
            t = getattr(self, name)
            if t is not None and not 0.0 <= t <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {t}")
        if self.measurement_sign not in (1, -1):
            raise ValueError("measurement_sign must be +1 or -1")
        seed = {ModeIndex.parse(k): complex(v) for k, v in dict(self.seed).items()}
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "bell", el.BellState(self.bell))
        object.__setattr__(self, "placement", Placement(self.placement))
        if not isinstance(self.detection, DetectionSpec):
            raise TypeError("detection must be a DetectionSpec")

    @property
    def transmissions(self) -> tuple[float, float]:
        """Amplitude transmissions (signal, idler)."""
        t = float(np.sqrt(1.0 - self.loss_intensity_l))
        ts = t if self.transmission_signal is None else self.transmission_signal
        ti = t if self.transmission_idler is None else self.transmission_idler
        return ts, ti

    def with_(self, **changes) -> "InterferometerConfig":
        from dataclasses import replace

        return replace(self, **changes)


# -- elements ---------------------------------------------------------------


@dataclass(frozen=True)
class Displacement:
    amplitudes: tuple
    label: str = "seed"

    def apply(self, state, validate=True):
        for mode, a in enumerate(self.amplitudes):
            if a != 0:
                state = displace(state, mode, a)
        return state

    def apply_tangent(self, state, tangent):
        return tangent


@dataclass(frozen=True)
class Bogoliubov:
    U: np.ndarray
    V: np.ndarray
    label: str = "opa"

    def apply(self, state, validate=True):
        return apply_bogoliubov(state, self.U, self.V, validate=validate)

    def apply_tangent(self, state, tangent):
        return apply_bogoliubov(tangent, self.U, self.V, validate=False)


@dataclass(frozen=True)
class Passive:
    J: np.ndarray
    dJ: np.ndarray | None = None
    label: str = "passive"

    def apply(self, state, validate=True):
        return apply_passive(state, self.J, validate=validate)

    def apply_tangent(self, state, tangent):
        out = apply_passive(tangent, self.J, validate=False)
        if self.dJ is None:
            return out
        extra = apply_passive(state, self.dJ, validate=False)
        return GaussianState(out.A + extra.A, out.B + extra.B, out.d + extra.d)


@dataclass(frozen=True)
class Loss:
    mode: int
    t: float
    label: str = "loss"

    def apply(self, state, validate=True):
        return apply_loss(state, self.mode, self.t)

    def apply_tangent(self, state, tangent):
        # the ancilla is a fixed vacuum input: its column has no phase dependence
        scale = np.ones(tangent.n_modes)
        scale[self.mode] = self.t
        pad = np.zeros(tangent.A.shape[:-1] + (1,), dtype=complex)
        return GaussianState(
            np.concatenate([tangent.A * scale[:, None], pad], axis=-1),
            np.concatenate([tangent.B * scale[:, None], pad], axis=-1),
            tangent.d * scale,
        )


def _opa_pair(g: float, sign: int = 1) -> list:
    return [
        Bogoliubov(*el.make_opa(el.OpaParams(g, Polarization.H, sign)), label="opa-H"),
        Bogoliubov(*el.make_opa(el.OpaParams(g, Polarization.V, sign)), label="opa-V"),
    ]


def build_elements(cfg: InterferometerConfig, phi_b=None, delta=None, phi_su=None):
    """Return ``(before_plane3, after_plane3)`` element lists for ``cfg``.

    ``phi_b``, ``delta`` and ``phi_su`` override the config values and may be
    broadcastable arrays.
    """
    phi_b = cfg.sample_phase_phi_b if phi_b is None else phi_b
    delta = cfg.sample_axis_delta if delta is None else delta
    phi_su = cfg.phi_su if phi_su is None else phi_su
    alpha, beta, theta = el.bell_config(cfg.bell)

    seeds = tuple(cfg.seed.get(m, 0j) for m in ModeIndex)
    qwp = Passive(el.quarter_wave(theta), label="qwp")
    target = Passive(
        el.polarization_block(el.jones_retarder(phi_b, delta)),
        el.polarization_block(el.jones_retarder_dpsi(phi_b, delta)),
        label="sample",
    )
    stack = {
        Placement.BEFORE: [target, qwp, qwp],
        Placement.BETWEEN: [qwp, target, qwp],
        Placement.AFTER: [qwp, qwp, target],
    }[cfg.placement]
    plate = Passive(el.make_phase_plate(el.PhasePlateParams(phi_su, alpha, beta)), label="phase-plate")
    ts, ti = cfg.transmissions
    losses = [
        Loss(int(ModeIndex.SH), ts),
        Loss(int(ModeIndex.SV), ts),
        Loss(int(ModeIndex.IH), ti),
        Loss(int(ModeIndex.IV), ti),
    ]
    pre = [Displacement(seeds)] + _opa_pair(cfg.gain_g) + stack + [plate] + losses
    if cfg.detection.basis is Basis.AD:
        pre.append(Passive(el.half_wave(np.pi / 8), label="hwp-AD"))
    post = _opa_pair(cfg.gain_g, cfg.measurement_sign)
    return pre, post


def _zero_like(state: GaussianState) -> GaussianState:
    return GaussianState(np.zeros_like(state.A), np.zeros_like(state.B), np.zeros_like(state.d))


def propagate(
    elements,
    state: GaussianState,
    tangent: GaussianState | None = None,
    *,
    check: bool = True,
    on_element: Callable | None = None,
):
    """Apply ``elements`` in order; optionally carry a phase-derivative tangent."""
    for e in elements:
        if tangent is not None:
            tangent = e.apply_tangent(state, tangent)
        state = e.apply(state, validate=check)
        if check:
            state.check()
        if on_element is not None:
            on_element(e, state)
    return state, tangent


def build_and_run(cfg: InterferometerConfig, *, check: bool = True, on_element=None, **overrides):
    """Propagate vacuum through the chain; returns ``(output, plane3)``."""
    pre, post = build_elements(cfg, **overrides)
    plane3, _ = propagate(pre, vacuum_state(), check=check, on_element=on_element)
    output, _ = propagate(post, plane3, check=check, on_element=on_element)
    return output, plane3


def run_with_derivative(cfg: InterferometerConfig, *, check: bool = False, **overrides):
    """Like :func:`build_and_run` but also returns d(output)/d(sample phase)."""
    pre, post = build_elements(cfg, **overrides)
    vac = vacuum_state()
    plane3, tan = propagate(pre, vac, _zero_like(vac), check=check)
    output, d_output = propagate(post, plane3, tan, check=check)
    return output, plane3, d_output


def total_intensity_at_plane3(plane3: GaussianState):
    """Mean photon number summed over the four physical modes."""
    return total_photons(plane3)
