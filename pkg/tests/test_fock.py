import numpy as np
import pytest
from math import factorial

from randomized import random_config, random_unitary
from dualsu11 import elements as el
from dualsu11.fock import (
    DimensionBudgetError,
    FockState,
    apply_loss_fock,
    apply_passive_fock,
    apply_phase_fock,
    apply_two_mode_squeezer,
    coherent_amplitudes,
    coherent_product_state,
    edge_probability,
    fock_photon_statistics,
    fock_vacuum,
    run_fock_pipeline,
)
from dualsu11.gaussian import apply_bogoliubov, apply_loss, photon_statistics, second_moments, vacuum_state
from dualsu11.modes import ModeIndex
from dualsu11.pipeline import InterferometerConfig, build_and_run


def lower(psi, k):
    """a_k |psi> on a truncated tensor."""
    c = psi.shape[k]
    out = np.zeros_like(psi)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[k], dst[k] = slice(1, c), slice(0, c - 1)
    shape = [1] * psi.ndim
    shape[k] = c - 1
    out[tuple(dst)] = psi[tuple(src)] * np.sqrt(np.arange(1, c)).reshape(shape)
    return out


def test_vacuum_and_coherent():
    v = fock_vacuum(3, 5)
    assert v.norm() == 1.0 and fock_photon_statistics(v, [0, 1, 2]) == (0.0, 0.0)
    amp = coherent_amplitudes(30, 1.3 - 0.4j)
    n = np.arange(30)
    np.testing.assert_allclose(
        amp, np.exp(-abs(1.3 - 0.4j) ** 2 / 2) * (1.3 - 0.4j) ** n / np.sqrt([float(factorial(k)) for k in n]), rtol=1e-12
    )
    st = coherent_product_state(30, [1.3 - 0.4j])
    mean, var = fock_photon_statistics(st, [0])
    assert mean == pytest.approx(abs(1.3 - 0.4j) ** 2, rel=1e-12)
    assert var == pytest.approx(mean, rel=1e-12)


def test_budget():
    with pytest.raises(DimensionBudgetError):
        fock_vacuum(4, 100, max_amplitudes=10**6)
    with pytest.raises(DimensionBudgetError):
        apply_loss_fock(fock_vacuum(3, 10), 0, 0.5, max_amplitudes=5000)


def test_zero_gain_is_identity():
    st = coherent_product_state(8, [0.5, 0.2j])
    assert apply_two_mode_squeezer(st, (0, 1), 0.0) is st


def test_two_mode_squeezed_distribution():
    g = 0.4
    st = apply_two_mode_squeezer(fock_vacuum(2, 30), (0, 1), g)
    p = np.abs(st.amplitudes) ** 2
    for n in range(4):
        assert p[n, n] == pytest.approx(np.tanh(g) ** (2 * n) / np.cosh(g) ** 2, abs=1e-8)
    assert np.sum(p) - np.trace(p) < 1e-20
    assert st.converged


def test_squeeze_then_unsqueeze():
    st = apply_two_mode_squeezer(fock_vacuum(2, 30), (0, 1), 0.5)
    back = apply_two_mode_squeezer(st, (0, 1), 0.5, sign=-1)
    assert abs(back.amplitudes[0, 0]) ** 2 >= 1 - 1e-9


def test_squeezer_matches_gaussian_stats():
    g = 0.5
    st = apply_two_mode_squeezer(fock_vacuum(2, 40), (0, 1), g)
    gs = apply_bogoliubov(vacuum_state(), *el.make_opa(el.OpaParams(g)))
    for fs, gs_modes in (([0], [0]), ([1], [2]), ([0, 1], [0, 2])):
        fm, fv = fock_photon_statistics(st, fs)
        gm, gv = photon_statistics(gs, gs_modes)
        assert fm == pytest.approx(gm, rel=1e-10)
        assert fv == pytest.approx(gv, rel=1e-10)
    assert fock_photon_statistics(st, [0, 1])[1] == pytest.approx(np.sinh(2 * g) ** 2, rel=1e-10)


def test_passive_identity_and_swap():
    st = coherent_product_state(6, [0.3, 0.1j])
    out = apply_passive_fock(st, np.eye(2))
    np.testing.assert_array_equal(out.amplitudes, st.amplitudes)
    one = np.zeros((4, 4), complex)
    one[1, 0] = 1.0
    swapped = apply_passive_fock(FockState(one), el.jones_retarder(np.pi, np.pi / 4))
    assert abs(swapped.amplitudes[0, 1]) == pytest.approx(1.0, abs=1e-12)


def test_single_photon_amplitudes_transform_by_j(rng):
    J = random_unitary(rng, 4)
    for k in range(4):
        psi = np.zeros((3,) * 4, complex)
        idx = [0] * 4
        idx[k] = 1
        psi[tuple(idx)] = 1.0
        out = apply_passive_fock(FockState(psi), J).amplitudes
        for m in range(4):
            idx = [0] * 4
            idx[m] = 1
            assert out[tuple(idx)] == pytest.approx(J[m, k], abs=1e-10)


def test_passive_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_passive_fock(fock_vacuum(2, 3), np.diag([1.0, 2.0]))


def test_phase_gate():
    st = apply_phase_fock(coherent_product_state(30, [1.0]), 0, np.exp(0.3j))
    np.testing.assert_allclose(st.amplitudes, coherent_amplitudes(30, np.exp(0.3j)), atol=1e-14)


def test_loss_cases():
    st = coherent_product_state(20, [1.0])
    assert fock_photon_statistics(apply_loss_fock(st, 0, 1.0), [0]) == pytest.approx(fock_photon_statistics(st, [0]))
    mean, var = fock_photon_statistics(apply_loss_fock(st, 0, np.sqrt(0.8)), [0])
    assert mean == pytest.approx(0.8, rel=1e-12)
    assert var == pytest.approx(0.8, rel=1e-12)


def test_loss_on_thermal_mode_matches_gaussian():
    g, t = 0.4, np.sqrt(0.9)
    st = apply_loss_fock(apply_two_mode_squeezer(fock_vacuum(2, 30), (0, 1), g), 0, t)
    gs = apply_loss(apply_bogoliubov(vacuum_state(), *el.make_opa(el.OpaParams(g))), 0, t)
    for fs, gm in (([0], [0]), ([0, 1], [0, 2])):
        f = fock_photon_statistics(st, fs)
        gg = photon_statistics(gs, gm)
        assert f[0] == pytest.approx(gg[0], abs=1e-7)
        assert f[1] == pytest.approx(gg[1], abs=1e-7)


def test_edge_probability_flags_truncation():
    st = coherent_product_state(6, [2.0])
    assert edge_probability(st.amplitudes) > 1e-2
    assert not st.converged


def test_second_moments_against_fock():
    cfg = InterferometerConfig(gain_g=0.3, seed={}, sample_phase_phi_b=0.4, sample_axis_delta=0.3, phi_su=0.8)
    st = run_fock_pipeline(cfg, 16)
    assert st.converged
    psi = st.amplitudes
    low = [lower(psi, k) for k in range(4)]
    N = np.array([[np.vdot(low[i], low[j]) for j in range(4)] for i in range(4)])
    M = np.array([[np.vdot(psi, lower(low[j], i)) for j in range(4)] for i in range(4)])
    out, _ = build_and_run(cfg)
    mom = second_moments(out)
    np.testing.assert_allclose(mom.N, N, atol=1e-8)
    np.testing.assert_allclose(mom.M, M, atol=1e-8)


@pytest.mark.parametrize("trial", range(3))
def test_pipeline_matches_gaussian(trial):
    cfg = random_config(np.random.default_rng(100 + trial), max_g=0.3, max_seed=0.6)
    st = run_fock_pipeline(cfg, 24)
    assert st.converged
    out, _ = build_and_run(cfg)
    for subset in ([0], [1], [2], [3], [0, 2], [1, 3], [0, 1, 2, 3]):
        fm, fv = fock_photon_statistics(st, subset)
        gm, gv = photon_statistics(out, subset)
        assert fm == pytest.approx(gm, rel=1e-6, abs=1e-12)
        assert fv == pytest.approx(gv, rel=1e-6, abs=1e-12)


def test_pipeline_with_idler_loss():
    cfg = InterferometerConfig(gain_g=0.3, seed={"sH": 0.5}, transmission_idler=0.9, sample_phase_phi_b=0.5)
    st = run_fock_pipeline(cfg, 12)
    assert st.n_modes == 6
    out, _ = build_and_run(cfg)
    fm, fv = fock_photon_statistics(st, [ModeIndex.IH])
    gm, gv = photon_statistics(out, [ModeIndex.IH])
    assert fm == pytest.approx(gm, rel=1e-6)
    assert fv == pytest.approx(gv, rel=1e-6)
