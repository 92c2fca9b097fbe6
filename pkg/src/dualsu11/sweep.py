"""Phase sweeps, sensitivity maps, oracle validation and their file outputs."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .config import Axis, ConfigError, config_to_dict
from .fock import LEAKAGE_TOL, fock_photon_statistics, run_fock_pipeline
from .gaussian import photon_statistics
from .metrology import MAP_CAP_DB, capped_db, optimize_phi_su, sensitivity_at
from .modes import ModeIndex
from .pipeline import InterferometerConfig, build_and_run

SWEEP_COLUMNS = ("phi_b", "mean_N", "delta_N", "dN_dphi", "delta_phi_sq", "snl_sq", "S2_db", "phi_su")
MAP_COLUMNS = ("phi_b", "delta", "S2_db", "phi_su")
SCHEMA_VERSION = 1
PGM_RANGE_DB = (-15.0, 15.0)
DEFAULT_MAP_SHAPE = (181, 91)


@dataclass(frozen=True)
class SweepRequest:
    base: InterferometerConfig
    axis1: Axis
    axis2: Axis | None = None
    optimize_phi_su: bool = False
    phi_su_grid_points: int = 64
    outputs: dict = field(default_factory=dict)


def default_map_axes(shape=DEFAULT_MAP_SHAPE) -> tuple[Axis, Axis]:
    return (
        Axis("sample_phase_phi_b", -math.pi, math.pi, shape[0]),
        Axis("sample_axis_delta", 0.0, math.pi, shape[1]),
    )


# -- evaluation ---------------------------------------------------------------


def _evaluate(cfg, phi_b, delta, optimize, grid_points):
    if optimize:
        _, res = optimize_phi_su(cfg, grid_points, phi_b=phi_b, delta=delta)
        return res
    return sensitivity_at(cfg, phi_b=phi_b, delta=delta)


def _map_chunk(args):
    cfg, phi_b, delta, optimize, grid_points = args
    res = _evaluate(cfg, phi_b[:, None], delta[None, :], optimize, grid_points)
    return np.asarray(res.S2_db, float), np.broadcast_to(res.phi_su_used, (len(phi_b), len(delta))).astype(float)


@dataclass
class SweepTable:
    rows: list

    def column(self, name):
        return np.array([r[name] for r in self.rows])


@dataclass
class MapResult:
    config: InterferometerConfig
    phi_b: np.ndarray
    delta: np.ndarray
    S2_db: np.ndarray  # shape (len(phi_b), len(delta)), capped at MAP_CAP_DB
    phi_su: np.ndarray
    optimized: bool = False

    def argmin(self):
        i, j = np.unravel_index(np.argmin(self.S2_db), self.S2_db.shape)
        return float(self.phi_b[i]), float(self.delta[j]), float(self.S2_db[i, j])


def run_phase_sweep(req: SweepRequest) -> SweepTable:
    """One row per sample phase: statistics, slope and relative sensitivity."""
    if req.axis1.parameter != "sample_phase_phi_b":
        raise ConfigError("sweep.axis1.parameter", "a phase sweep runs over sample_phase_phi_b")
    phi = req.axis1.values()
    res = _evaluate(req.base, phi, None, req.optimize_phi_su, req.phi_su_grid_points)
    arr = {k: np.broadcast_to(np.asarray(v, float), phi.shape) for k, v in vars(res).items()}
    rows = []
    for i, p in enumerate(phi):
        rows.append(
            {
                "phi_b": float(p),
                "mean_N": float(arr["mean_N"][i]),
                "delta_N": float(arr["delta_N"][i]),
                "dN_dphi": float(arr["dNdphi"][i]),
                "delta_phi_sq": float(arr["delta_phi_sq"][i]),
                "snl_sq": float(arr["snl_sq"][i]),
                "S2_db": float(arr["S2_db"][i]),
                "phi_su": float(arr["phi_su_used"][i]),
            }
        )
    return SweepTable(rows)


def run_map(req: SweepRequest, threads: int = 1, chunk_rows: int = 16) -> MapResult:
    """Relative sensitivity on a (sample phase, sample axis) grid."""
    if req.axis1.parameter != "sample_phase_phi_b" or req.axis2 is None or req.axis2.parameter != "sample_axis_delta":
        raise ConfigError("map", "a map needs axis1 = sample_phase_phi_b and axis2 = sample_axis_delta")
    phi = req.axis1.values()
    delta = req.axis2.values()
    chunks = [
        (req.base, phi[i : i + chunk_rows], delta, req.optimize_phi_su, req.phi_su_grid_points)
        for i in range(0, len(phi), chunk_rows)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_map_chunk, chunks))
    else:
        parts = [_map_chunk(c) for c in chunks]
    s2 = np.concatenate([p[0] for p in parts], axis=0)
    psu = np.concatenate([p[1] for p in parts], axis=0)
    return MapResult(req.base, phi, delta, capped_db(s2), psu, req.optimize_phi_su)


def locate_minimum(result: MapResult, n_starts: int = 3):
    """Refine the grid minimum of a fixed-phase map by local optimization.

    Starts from the ``n_starts`` best grid points and searches within one grid
    cell of each.  Returns ``(phi_b, delta, S2_db)``.
    """
    cfg = result.config
    flat = np.argsort(result.S2_db, axis=None)[:n_starts]
    dp = result.phi_b[1] - result.phi_b[0]
    dd = result.delta[1] - result.delta[0]

    def f(x):
        r = sensitivity_at(cfg, phi_b=x[0], delta=x[1])
        return MAP_CAP_DB if r.insensitive else min(float(r.S2_db), MAP_CAP_DB)

    best = result.argmin()
    for k in flat:
        i, j = np.unravel_index(k, result.S2_db.shape)
        x0 = np.array([result.phi_b[i], result.delta[j]])
        bounds = [(x0[0] - dp, x0[0] + dp), (x0[1] - dd, x0[1] + dd)]
        sol = minimize(f, x0, method="Nelder-Mead", bounds=bounds, options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 2000})
        # the optimum may sit within a fraction of a cell from a singular point; polish in phi only
        if sol.fun < best[2]:
            best = (float(sol.x[0]), float(sol.x[1]), float(sol.fun))
    return best


# -- validation ---------------------------------------------------------------

VALIDATION_SUBSETS = {
    "sH": [ModeIndex.SH],
    "sV": [ModeIndex.SV],
    "iH": [ModeIndex.IH],
    "iV": [ModeIndex.IV],
    "N_H": [ModeIndex.SH, ModeIndex.IH],
    "N_V": [ModeIndex.SV, ModeIndex.IV],
    "all": list(ModeIndex),
}
VALIDATION_MAX_GAIN = 0.5
VALIDATION_MAX_SEED = 1.0


@dataclass
class ValidationReport:
    rows: list
    max_rel_error: float
    cutoff: int
    leakage: float
    stability: float
    converged: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.converged and self.max_rel_error <= self.tolerance


ABS_FLOOR = 1e-12


def _rel(a, b, floor=ABS_FLOOR):
    # photon numbers near a dark fringe are round-off; compare those absolutely
    return abs(a - b) / max(abs(a), abs(b), floor)


def certified_fock_statistics(cfg, subsets, cutoff=16, max_cutoff=64, step=8, stability_tol=1e-8):
    """Fock statistics at increasing cutoff until two successive runs agree.

    Returns ``(stats, cutoff_used, leakage, stability, converged)`` where
    ``stats`` maps subset names to ``(mean, variance)`` at the larger cutoff.
    """
    prev = None
    c = cutoff
    while True:
        st = run_fock_pipeline(cfg, c)
        stats = {k: fock_photon_statistics(st, s) for k, s in subsets.items()}
        if prev is not None:
            stability = max(max(_rel(stats[k][0], prev[k][0]), _rel(stats[k][1], prev[k][1])) for k in stats)
        else:
            stability = math.inf
        converged = st.leakage < LEAKAGE_TOL and stability < stability_tol
        if converged or c + step > max_cutoff:
            return stats, c, st.leakage, stability, converged
        # skip straight ahead while the distribution is still piled against the cutoff
        prev = stats if st.leakage < 1e-4 else None
        c += step


def run_validation(cfg: InterferometerConfig, cutoff: int = 16, tolerance: float = 1e-6, max_cutoff: int = 64) -> ValidationReport:
    """Compare Gaussian and Fock photon statistics for every standard detection subset."""
    if cfg.gain_g > VALIDATION_MAX_GAIN:
        raise ConfigError("gain_g", f"validation requires g <= {VALIDATION_MAX_GAIN}, got {cfg.gain_g}")
    if any(abs(a) > VALIDATION_MAX_SEED for a in cfg.seed.values()):
        raise ConfigError("seed", f"validation requires |seed| <= {VALIDATION_MAX_SEED}")
    if cfg.loss_intensity_l > 0 or cfg.transmission_signal not in (None, 1.0) or cfg.transmission_idler not in (None, 1.0):
        raise ConfigError("loss_intensity_l", "the four-mode oracle runs lossless chains only")
    subsets = dict(VALIDATION_SUBSETS)
    subsets["detection"] = cfg.detection.indices
    out, _ = build_and_run(cfg)
    fock, used, leak, stab, conv = certified_fock_statistics(cfg, subsets, cutoff, max_cutoff)
    rows = []
    worst = 0.0
    for name, s in subsets.items():
        gm, gv = photon_statistics(out, s)
        fm, fv = fock[name]
        em, ev = _rel(gm, fm), _rel(gv, fv)
        worst = max(worst, em, ev)
        rows.append(
            {
                "subset": name,
                "modes": [ModeIndex(m).label for m in s],
                "gaussian_mean": gm,
                "gaussian_var": gv,
                "fock_mean": fm,
                "fock_var": fv,
                "rel_err_mean": em,
                "rel_err_var": ev,
            }
        )
    return ValidationReport(rows, worst, used, leak, stab, conv, tolerance)


# -- writers ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(table: SweepTable, path) -> None:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(_fmt(r[c]) for c in SWEEP_COLUMNS) for r in table.rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_map_csv(result: MapResult, path) -> None:
    lines = [",".join(MAP_COLUMNS)]
    for i, p in enumerate(result.phi_b):
        for j, d in enumerate(result.delta):
            lines.append(",".join(_fmt(v) for v in (p, d, result.S2_db[i, j], result.phi_su[i, j])))
    Path(path).write_text("\n".join(lines) + "\n")


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def write_sweep_json(table: SweepTable, req: SweepRequest, path) -> None:
    doc = {
        "kind": "sweep",
        "schema_version": SCHEMA_VERSION,
        "columns": list(SWEEP_COLUMNS),
        "config": config_to_dict(req.base),
        "axis1": vars(req.axis1),
        "optimize_phi_su": req.optimize_phi_su,
        "rows": [[_json_float(r[c]) for c in SWEEP_COLUMNS] for r in table.rows],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def write_map_json(result: MapResult, req: SweepRequest, path) -> None:
    doc = {
        "kind": "map",
        "schema_version": SCHEMA_VERSION,
        "config": config_to_dict(req.base),
        "axis1": vars(req.axis1),
        "axis2": vars(req.axis2),
        "optimize_phi_su": req.optimize_phi_su,
        "cap_db": MAP_CAP_DB,
        "phi_b": [float(x) for x in result.phi_b],
        "delta": [float(x) for x in result.delta],
        "S2_db": [[_json_float(v) for v in row] for row in result.S2_db],
        "phi_su": [[float(v) for v in row] for row in result.phi_su],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def pgm_bytes(s2_db: np.ndarray, lo: float = PGM_RANGE_DB[0], hi: float = PGM_RANGE_DB[1]) -> bytes:
    """Binary 8-bit graymap of a map; rows are delta (ascending), columns phi_b (ascending).

    gray = round(255 * (clip(S2_db, lo, hi) - lo) / (hi - lo)), so black is the
    most sensitive point.
    """
    grid = np.asarray(s2_db, float).T
    gray = np.rint(255.0 * (np.clip(grid, lo, hi) - lo) / (hi - lo)).astype(np.uint8)
    h, w = gray.shape
    header = (
        "P5\n"
        f"# S2_db map: gray = round(255*(clip(S2_db,{lo:g},{hi:g})-({lo:g}))/{hi - lo:g})\n"
        "# rows: sample_axis_delta ascending; columns: sample_phase_phi_b ascending\n"
        f"{w} {h}\n255\n"
    )
    return header.encode("ascii") + gray.tobytes()


def write_pgm(result: MapResult, path) -> None:
    Path(path).write_bytes(pgm_bytes(result.S2_db))
