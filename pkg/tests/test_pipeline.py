import numpy as np
import pytest

from dualsu11 import fock
from dualsu11.elements import BellState
from dualsu11.gaussian import InvalidTransformation, photon_statistics
from dualsu11.modes import ModeIndex
from dualsu11.pipeline import (
    Basis,
    DetectionSpec,
    InterferometerConfig,
    Placement,
    build_and_run,
    build_elements,
    run_with_derivative,
    total_intensity_at_plane3,
)

ALL = list(ModeIndex)


def test_config_defaults():
    cfg = InterferometerConfig()
    assert cfg.detection.indices == [int(ModeIndex.IH)]
    assert cfg.seed == {ModeIndex.SH: 1000.0}
    assert cfg.transmissions == (1.0, 1.0)
    assert cfg.with_(loss_intensity_l=0.19).transmissions == pytest.approx((0.9, 0.9))
    assert cfg.with_(transmission_idler=0.5).transmissions == (1.0, 0.5)


@pytest.mark.parametrize(
    "kw",
    [dict(gain_g=-1), dict(gain_g=np.nan), dict(loss_intensity_l=1.0), dict(loss_intensity_l=-0.1), dict(measurement_sign=0), dict(transmission_signal=1.5)],
)
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        InterferometerConfig(**kw)


def test_detection_rejects_empty():
    with pytest.raises(ValueError):
        DetectionSpec(frozenset())


def test_seed_keys_accept_labels():
    cfg = InterferometerConfig(seed={"iV": 2})
    assert cfg.seed == {ModeIndex.IV: 2 + 0j}


def test_nothing_happens_at_zero_gain():
    out, plane3 = build_and_run(InterferometerConfig(gain_g=0.0, seed={}))
    for k in range(1, 5):
        assert photon_statistics(out, ALL[:k]) == (0.0, 0.0)
    assert total_intensity_at_plane3(plane3) == 0.0


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("placement", list(Placement))
def test_unseeded_dark_fringe(g, placement):
    cfg = InterferometerConfig(gain_g=g, seed={}, placement=placement, sample_phase_phi_b=0.0)
    out, plane3 = build_and_run(cfg)
    assert photon_statistics(out, ALL)[0] == pytest.approx(0.0, abs=1e-10)
    assert total_intensity_at_plane3(plane3) == pytest.approx(4 * np.sinh(g) ** 2)


def test_plane3_passive_conservation():
    _, plane3 = build_and_run(InterferometerConfig(gain_g=0.0, seed={"sH": 10.0}, sample_phase_phi_b=0.4))
    assert total_intensity_at_plane3(plane3) == pytest.approx(100.0, rel=1e-14)


def test_plane3_with_gain_and_loss():
    g, l, a2 = 1.0, 0.1, 100.0
    cfg = InterferometerConfig(gain_g=g, loss_intensity_l=l, seed={"sH": np.sqrt(a2)}, sample_phase_phi_b=0.3, sample_axis_delta=0.2)
    _, plane3 = build_and_run(cfg)
    expected = (1 - l) * (a2 * np.cosh(2 * g) + 4 * np.sinh(g) ** 2)
    assert total_intensity_at_plane3(plane3) == pytest.approx(expected, rel=1e-12)


def test_plane3_lossy_h_pair_against_fock():
    """Fock check of seed, squeezer and loss on the H pair at unit seed."""
    g, t = 0.5, np.sqrt(0.9)
    st = fock.coherent_product_state(24, [1.0, 0.0])
    st = fock.apply_two_mode_squeezer(st, (0, 1), g)
    st = fock.apply_loss_fock(fock.apply_loss_fock(st, 0, t), 1, t)
    assert st.leakage < 1e-8
    m_fock, _ = fock.fock_photon_statistics(st, [0, 1])
    cfg = InterferometerConfig(gain_g=g, loss_intensity_l=0.1, seed={"sH": 1.0})
    _, plane3 = build_and_run(cfg)
    # the V pair contributes 2 t^2 sinh^2 g on top of the H pair
    assert total_intensity_at_plane3(plane3) - 2 * 0.9 * np.sinh(g) ** 2 == pytest.approx(m_fock, rel=1e-6)


def test_seed_quadratic_scaling():
    base = InterferometerConfig(gain_g=1.0, loss_intensity_l=0.1, seed={"sH": 1.0})
    vac = total_intensity_at_plane3(build_and_run(base.with_(seed={}))[1])
    one = total_intensity_at_plane3(build_and_run(base)[1])
    ten = total_intensity_at_plane3(build_and_run(base.with_(seed={"sH": 10.0}))[1])
    assert ten - vac == pytest.approx(100 * (one - vac), rel=1e-12)


def test_on_element_sees_every_stage():
    seen = []
    build_and_run(InterferometerConfig(loss_intensity_l=0.1), on_element=lambda e, s: seen.append(e.label))
    assert seen == ["seed", "opa-H", "opa-V", "qwp", "sample", "qwp", "phase-plate"] + ["loss"] * 4 + ["opa-H", "opa-V"]


@pytest.mark.parametrize(
    "placement, order",
    [
        (Placement.BEFORE, ["sample", "qwp", "qwp"]),
        (Placement.BETWEEN, ["qwp", "sample", "qwp"]),
        (Placement.AFTER, ["qwp", "qwp", "sample"]),
    ],
)
def test_placement_order(placement, order):
    pre, _ = build_elements(InterferometerConfig(placement=placement))
    assert [e.label for e in pre[3:6]] == order


def test_ad_basis_adds_half_wave():
    pre, _ = build_elements(InterferometerConfig(detection=DetectionSpec(basis=Basis.AD)))
    assert pre[-1].label == "hwp-AD"


def test_ad_basis_on_unseeded_pairs():
    # the half-wave plate maps HH + VV onto itself with pair phase -1, so the
    # Phi+ dark fringe moves by pi; HH - VV becomes the diagonal pair and has
    # no dark fringe in either H or V at all
    cfg = InterferometerConfig(gain_g=0.7, seed={}, sample_phase_phi_b=0.0, detection=DetectionSpec(basis=Basis.AD))
    dark, _ = build_and_run(cfg.with_(phi_su=np.pi))
    bright, _ = build_and_run(cfg)
    assert photon_statistics(dark, ALL)[0] == pytest.approx(0.0, abs=1e-10)
    assert photon_statistics(bright, ALL)[0] == pytest.approx(4 * np.sinh(1.4) ** 2, rel=1e-12)
    for phi_su in (0.0, np.pi):
        out, _ = build_and_run(cfg.with_(bell=BellState.PHI_MINUS, phi_su=phi_su))
        per_mode = [photon_statistics(out, [m])[0] for m in ALL]
        np.testing.assert_allclose(per_mode, np.sinh(1.4) ** 2 / 2, rtol=1e-12)


def test_measurement_sign_amplifies():
    cfg = InterferometerConfig(gain_g=0.5, seed={})
    out, _ = build_and_run(cfg.with_(measurement_sign=-1))
    # second pair re-amplifies: total = sinh^2(2g) per polarization pair, times two pairs
    assert photon_statistics(out, ALL)[0] == pytest.approx(4 * np.sinh(1.0) ** 2, rel=1e-12)


def test_validation_flags_bad_elements():
    cfg = InterferometerConfig()
    pre, _ = build_elements(cfg)
    from dualsu11.pipeline import Passive, propagate
    from dualsu11.gaussian import vacuum_state

    with pytest.raises(InvalidTransformation):
        propagate([Passive(np.diag([1, 1, 1, 2.0]))], vacuum_state())


def test_batched_grid_matches_pointwise():
    cfg = InterferometerConfig(gain_g=1.2, loss_intensity_l=0.1, bell=BellState.PSI_MINUS)
    phi = np.linspace(-1, 1, 4)[:, None]
    delta = np.linspace(0, 3, 3)[None, :]
    out, plane3 = build_and_run(cfg, phi_b=phi, delta=delta)
    mean, var = photon_statistics(out, [2])
    assert mean.shape == (4, 3)
    o, p = build_and_run(cfg, phi_b=float(phi[2, 0]), delta=float(delta[0, 1]))
    m, v = photon_statistics(o, [2])
    assert mean[2, 1] == pytest.approx(m, rel=1e-12)
    assert var[2, 1] == pytest.approx(v, rel=1e-12)
    assert total_intensity_at_plane3(plane3)[2, 1] == pytest.approx(total_intensity_at_plane3(p), rel=1e-13)


def test_tangent_matches_finite_difference():
    cfg = InterferometerConfig(gain_g=0.9, loss_intensity_l=0.2, seed={"sH": 3.0, "iV": 1j}, sample_phase_phi_b=0.4, sample_axis_delta=0.7)
    out, _, d_out = run_with_derivative(cfg)
    h = 1e-6
    hi, _ = build_and_run(cfg, phi_b=0.4 + h)
    lo, _ = build_and_run(cfg, phi_b=0.4 - h)
    np.testing.assert_allclose(d_out.B, (hi.B - lo.B) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(d_out.d, (hi.d - lo.d) / (2 * h), atol=1e-8)
