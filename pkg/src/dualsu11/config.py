"""Loading experiment descriptions from YAML/JSON documents.

Unknown keys are rejected so that a typo in a physics parameter never falls
back silently to a default.  Angles may be written as numbers or as simple
multiples of pi (``"pi/2"``, ``"-3pi/4"``, ``"0.25*pi"``).  Complex seed
amplitudes are numbers, ``[re, im]`` pairs or strings such as ``"3+1j"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .elements import BellState
from .modes import ModeIndex
from .pipeline import Basis, DetectionSpec, InterferometerConfig, Placement


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


_PI = re.compile(r"^\s*([+-]?\d*\.?\d*(?:e[+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$", re.I)

CONFIG_KEYS = {
    "gain_g",
    "loss_intensity_l",
    "seed",
    "bell",
    "placement",
    "sample_phase_phi_b",
    "sample_axis_delta",
    "phi_su",
    "detection",
    "transmission_signal",
    "transmission_idler",
    "measurement_sign",
}
SWEEP_PARAMETERS = ("sample_phase_phi_b", "sample_axis_delta")
TOP_KEYS = CONFIG_KEYS | {"sweep", "map", "validation", "optimizer"}


def parse_angle(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        m = _PI.match(value)
        if m:
            coef = m.group(1)
            coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            x = coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
        else:
            try:
                x = float(value)
            except ValueError:
                raise ConfigError(path, f"cannot parse {value!r} as an angle") from None
    else:
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(x):
        raise ConfigError(path, "must be finite")
    return x


def parse_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return float(value)


def parse_complex(value: Any, path: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(path, "expected a complex amplitude")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(parse_number(value[0], path + "[0]"), parse_number(value[1], path + "[1]"))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(path, f"cannot parse {value!r} as a complex amplitude")


def _enum(cls, value, path):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(path, f"{value!r} is not one of {choices}") from None


def _check_keys(doc: dict, allowed, path: str):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected a mapping")
    for k in doc:
        if k not in allowed:
            where = f"{path}.{k}" if path else str(k)
            raise ConfigError(where, "unknown key")


def config_from_dict(doc: dict, path: str = "") -> InterferometerConfig:
    """Build an :class:`InterferometerConfig` from a plain mapping."""
    _check_keys(doc, TOP_KEYS, path)
    p = (lambda k: f"{path}.{k}" if path else k)
    kw: dict[str, Any] = {}
    for key in ("gain_g", "loss_intensity_l"):
        if key in doc:
            kw[key] = parse_number(doc[key], p(key))
    for key in ("sample_phase_phi_b", "sample_axis_delta", "phi_su"):
        if key in doc:
            kw[key] = parse_angle(doc[key], p(key))
    for key in ("transmission_signal", "transmission_idler"):
        if doc.get(key) is not None:
            kw[key] = parse_number(doc[key], p(key))
    if "measurement_sign" in doc:
        kw["measurement_sign"] = int(parse_number(doc["measurement_sign"], p("measurement_sign")))
    if "bell" in doc:
        kw["bell"] = _enum(BellState, doc["bell"], p("bell"))
    if "placement" in doc:
        kw["placement"] = _enum(Placement, doc["placement"], p("placement"))
    if "seed" in doc:
        seed_doc = doc["seed"] or {}
        if not isinstance(seed_doc, dict):
            raise ConfigError(p("seed"), "expected a mapping of mode label to amplitude")
        seed = {}
        for k, v in seed_doc.items():
            try:
                mode = ModeIndex.parse(k)
            except ValueError as exc:
                raise ConfigError(f"{p('seed')}.{k}", str(exc)) from None
            seed[mode] = parse_complex(v, f"{p('seed')}.{k}")
        kw["seed"] = seed
    if "detection" in doc:
        det = doc["detection"]
        _check_keys(det, {"modes", "basis"}, p("detection"))
        modes = det.get("modes", ["iH"])
        if isinstance(modes, str):
            modes = [modes]
        parsed = []
        for i, m in enumerate(modes):
            try:
                parsed.append(ModeIndex.parse(m))
            except ValueError as exc:
                raise ConfigError(f"{p('detection')}.modes[{i}]", str(exc)) from None
        if not parsed:
            raise ConfigError(f"{p('detection')}.modes", "must not be empty")
        basis = _enum(Basis, det.get("basis", "HV"), f"{p('detection')}.basis")
        kw["detection"] = DetectionSpec(frozenset(parsed), basis)
    try:
        return InterferometerConfig(**kw)
    except ValueError as exc:
        raise ConfigError(path or "config", str(exc)) from None


def config_to_dict(cfg: InterferometerConfig) -> dict:
    """Plain-data view of a config (round-trips through :func:`config_from_dict`)."""

    def cplx(z: complex):
        return [z.real, z.imag]

    return {
        "gain_g": cfg.gain_g,
        "loss_intensity_l": cfg.loss_intensity_l,
        "seed": {m.label: cplx(a) for m, a in sorted(cfg.seed.items())},
        "bell": cfg.bell.value,
        "placement": cfg.placement.value,
        "sample_phase_phi_b": cfg.sample_phase_phi_b,
        "sample_axis_delta": cfg.sample_axis_delta,
        "phi_su": cfg.phi_su,
        "detection": {
            "modes": [m.label for m in sorted(cfg.detection.modes)],
            "basis": cfg.detection.basis.value,
        },
        "transmission_signal": cfg.transmission_signal,
        "transmission_idler": cfg.transmission_idler,
        "measurement_sign": cfg.measurement_sign,
    }


@dataclass(frozen=True)
class Axis:
    parameter: str
    start: float
    stop: float
    count: int

    def values(self):
        import numpy as np

        return np.linspace(self.start, self.stop, self.count)


def parse_axis(doc: Any, path: str) -> Axis:
    _check_keys(doc, {"parameter", "start", "stop", "count"}, path)
    for k in ("parameter", "start", "stop", "count"):
        if k not in doc:
            raise ConfigError(f"{path}.{k}", "missing")
    param = doc["parameter"]
    if param not in SWEEP_PARAMETERS:
        raise ConfigError(f"{path}.parameter", f"{param!r} is not sweepable; use one of {', '.join(SWEEP_PARAMETERS)}")
    count = doc["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 2:
        raise ConfigError(f"{path}.count", "must be an integer >= 2")
    return Axis(param, parse_angle(doc["start"], f"{path}.start"), parse_angle(doc["stop"], f"{path}.stop"), count)


def load_document(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"not valid YAML/JSON: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a mapping")
    _check_keys(doc, TOP_KEYS, "")
    return doc
