r"""Phase sensitivity relative to the shot-noise limit.

For a detected photon number :math:`N` the minimum detectable sample phase is

.. math::

    \delta\varphi^2 = \left(\Delta N \,/\, \partial_\varphi\langle N\rangle\right)^2 ,

and the reported figure of merit is :math:`S^2 = \delta\varphi^2 / \delta\varphi_c^2`
in dB, where :math:`\delta\varphi_c^2 = 1/N_3` uses the total photon number of
all four modes at plane (3).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianState, photon_statistics
from .pipeline import InterferometerConfig, build_and_run, run_with_derivative, total_intensity_at_plane3

log = logging.getLogger(__name__)

INSENSITIVE_RATIO = 1e-12
MAP_CAP_DB = 60.0
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class NoSensitiveWorkingPoint(RuntimeError):
    pass


@dataclass(frozen=True)
class SensitivityResult:
    """Sensitivity at one working point (fields may be arrays for grids)."""

    mean_N: np.ndarray
    delta_N: np.ndarray
    dNdphi: np.ndarray
    delta_phi_sq: np.ndarray
    snl_sq: np.ndarray
    S2_db: np.ndarray
    phi_su_used: np.ndarray
    insensitive: np.ndarray
    N_plane3: np.ndarray
    derivative_residual: np.ndarray | float = 0.0

    @property
    def heisenberg_sq(self):
        return heisenberg_reference(self.N_plane3)


def heisenberg_reference(n_total):
    """Squared Heisenberg-limited phase uncertainty ``(1/n)^2``."""
    n = np.asarray(n_total, dtype=float)
    if np.any(n <= 0):
        raise ValueError("photon number must be positive")
    out = 1.0 / n**2
    return float(out) if out.ndim == 0 else out


def _mean_derivative(out: GaussianState, d_out: GaussianState, subset) -> np.ndarray:
    """d<N>/dphi from the propagated tangent of (B, d)."""
    S = list(subset)
    B, dB = out.B[..., S, :], d_out.B[..., S, :]
    d, dd = out.d[..., S], d_out.d[..., S]
    occ = 2 * np.real(np.sum(np.conj(B) * dB, axis=-1)) + 2 * np.real(np.conj(d) * dd)
    return occ.sum(axis=-1)


def _assemble(mean, var, dN, n3, phi_su, residual=0.0) -> SensitivityResult:
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    dN = np.asarray(dN, dtype=float)
    n3 = np.asarray(n3, dtype=float)
    if np.any(n3 <= 0):
        raise ValueError("no photons reach plane (3): the shot-noise reference needs a seed or gain")
    # slopes are measured against the light through the sample: at the exact
    # dark fringe both <N> and dN/dphi are round-off, and their ratio is noise
    insensitive = np.abs(dN) <= INSENSITIVE_RATIO * n3
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi2 = np.where(insensitive, np.inf, var / np.where(insensitive, 1.0, dN) ** 2)
        snl = 1.0 / n3
        s2 = 10 * np.log10(dphi2 / snl)
    scal = lambda x: float(x) if np.ndim(x) == 0 else x  # noqa: E731
    return SensitivityResult(
        mean_N=scal(mean),
        delta_N=scal(np.sqrt(var)),
        dNdphi=scal(dN),
        delta_phi_sq=scal(dphi2),
        snl_sq=scal(snl),
        S2_db=scal(s2),
        phi_su_used=scal(np.broadcast_to(np.asarray(phi_su, float), np.shape(mean)).copy()),
        insensitive=np.bool_(insensitive) if np.ndim(insensitive) == 0 else insensitive,
        N_plane3=scal(n3),
        derivative_residual=scal(residual),
    )


def mean_photons(cfg: InterferometerConfig, subset=None, **overrides):
    subset = cfg.detection.indices if subset is None else subset
    out, _ = build_and_run(cfg, check=False, **overrides)
    return photon_statistics(out, subset)[0]


def finite_difference_slope(cfg: InterferometerConfig, step_h: float = 1e-5, **overrides):
    """Central difference in the sample phase with one Richardson step.

    Returns ``(slope, residual)`` where ``residual`` is the change made by the
    Richardson correction.
    """
    if step_h <= 0:
        raise ValueError("step must be positive")
    phi = overrides.pop("phi_b", None)
    phi = np.asarray(cfg.sample_phase_phi_b if phi is None else phi, dtype=float)

    def central(h):
        hi = mean_photons(cfg, phi_b=phi + h, **overrides)
        lo = mean_photons(cfg, phi_b=phi - h, **overrides)
        return (np.asarray(hi) - np.asarray(lo)) / (2 * h)

    d1 = central(step_h)
    d2 = central(step_h / 2)
    rich = (4 * d2 - d1) / 3
    return rich, np.abs(rich - d2)


def sensitivity_at(
    cfg: InterferometerConfig,
    step_h: float = 1e-5,
    *,
    method: str = "analytic",
    phi_b=None,
    delta=None,
    phi_su=None,
) -> SensitivityResult:
    """Evaluate the sensitivity estimator at the working point of ``cfg``.

    ``method="analytic"`` propagates the exact phase derivative alongside the
    state; ``method="fd"`` uses a Richardson-refined central difference with
    step ``step_h``.  Points whose slope vanishes are flagged ``insensitive``
    and carry ``delta_phi_sq = inf`` instead of raising.
    """
    ov = dict(phi_b=phi_b, delta=delta, phi_su=phi_su)
    subset = cfg.detection.indices
    out, plane3, d_out = run_with_derivative(cfg, **ov)
    mean, var = photon_statistics(out, subset)
    n3 = total_intensity_at_plane3(plane3)
    if method == "analytic":
        dN, residual = _mean_derivative(out, d_out, subset), 0.0
    elif method == "fd":
        dN, residual = finite_difference_slope(cfg, step_h, **ov)
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    used = cfg.phi_su if phi_su is None else phi_su
    return _assemble(mean, var, dN, n3, used, residual)


def _objective(result: SensitivityResult):
    return np.where(result.insensitive, np.inf, np.asarray(result.delta_phi_sq))


def golden_section(f, a, b, tol: float = 1e-6, max_iter: int = 200):
    """Elementwise golden-section minimization of ``f`` on ``[a, b]``.

    ``f`` takes and returns arrays of the broadcast shape of ``a`` and ``b``.
    Returns ``(x, f(x))``.
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if np.all(np.abs(b - a) <= tol):
            break
        left = fc <= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        probe = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        fp = f(probe)
        c, d, fc, fd = (
            np.where(left, probe, d),
            np.where(left, c, probe),
            np.where(left, fp, fd),
            np.where(left, fc, fp),
        )
    x = np.where(fc <= fd, c, d)
    return x, np.minimum(fc, fd)


def optimize_phi_su(cfg: InterferometerConfig, grid_points: int = 64, *, tol: float = 1e-6, **overrides):
    """Find the SU(1,1) phase minimising the phase uncertainty at ``cfg``.

    A coarse scan over ``[0, 2 pi)`` is refined by golden-section search in
    the bracket around the best coarse point.  ``phi_b``/``delta`` overrides
    may be arrays; the optimum is then found independently per element.

    Returns ``(phi_su_best, SensitivityResult)`` with ``phi_su_best`` wrapped
    into ``[-pi, pi)``.
    """
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")
    phi_b = overrides.get("phi_b", None)
    delta = overrides.get("delta", None)
    shape = np.broadcast_shapes(np.shape(phi_b if phi_b is not None else 0.0), np.shape(delta if delta is not None else 0.0))
    step = 2 * np.pi / grid_points
    grid = np.arange(grid_points) * step
    pb = None if phi_b is None else np.asarray(phi_b, float)[..., None]
    dl = None if delta is None else np.asarray(delta, float)[..., None]
    coarse = sensitivity_at(cfg, phi_b=pb, delta=dl, phi_su=grid.reshape((1,) * len(shape) + (-1,)))
    obj = np.broadcast_to(_objective(coarse), shape + (grid_points,))
    if np.all(~np.isfinite(obj)):
        raise NoSensitiveWorkingPoint("no sensitive working point for any SU(1,1) phase")
    k = np.argmin(obj, axis=-1)
    best_coarse = grid[k]
    coarse_val = np.take_along_axis(obj, k[..., None], axis=-1)[..., 0]

    def f(x):
        return _objective(sensitivity_at(cfg, phi_b=phi_b, delta=delta, phi_su=x))

    x, fx = golden_section(f, best_coarse - step, best_coarse + step, tol=tol)
    x = np.where(fx <= coarse_val, x, best_coarse)
    x = np.mod(x + np.pi, 2 * np.pi) - np.pi
    if np.ndim(x) == 0:
        x = float(x)
    return x, sensitivity_at(cfg, phi_b=phi_b, delta=delta, phi_su=x)


def dark_fringe_phi_su(cfg: InterferometerConfig, grid_points: int = 72, tol: float = 1e-10) -> float:
    """SU(1,1) phase in ``[-pi, pi)`` minimising the detected mean photon number."""
    grid = np.arange(grid_points) * 2 * np.pi / grid_points
    means = mean_photons(cfg, phi_su=grid)
    k = int(np.argmin(means))
    step = 2 * np.pi / grid_points
    x, _ = golden_section(lambda p: mean_photons(cfg, phi_su=p), grid[k] - step, grid[k] + step, tol=tol)
    return float(np.mod(x + np.pi, 2 * np.pi) - np.pi)


def capped_db(s2_db, cap: float = MAP_CAP_DB):
    """Replace infinities (insensitive points) and values above ``cap`` by ``cap``."""
    s = np.asarray(s2_db, dtype=float)
    return np.where(np.isfinite(s) & (s < cap), s, np.where(s == -np.inf, s, cap))
