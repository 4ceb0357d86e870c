import numpy as np
import pytest

from pddgp.channel import (
    noise_power_watts,
    normalized_thresholds,
    path_loss_linear,
    sample_channels,
)
from pddgp.config import ScenarioConfig, SystemDims, default_scenario
from pddgp.objective import effective_channel_sr


def test_path_loss_reference_distance():
    # log term vanishes at d = d0, leaving the -30 dB reference loss
    assert path_loss_linear(1.0, 3.75, 1.0) == pytest.approx(1e-3, rel=1e-12)
    for xi in (0.5, 2.2, 3.75):
        assert path_loss_linear(2.5, xi, 2.5) == pytest.approx(1e-3, rel=1e-12)


def test_path_loss_value():
    # -30 - 10*2.2*log10(100) = -74 dB -> 10^-7.4
    assert path_loss_linear(100.0, 2.2, 1.0) == pytest.approx(3.9810717055349695e-08, rel=1e-12)


def test_path_loss_rejects_bad_distances():
    with pytest.raises(ValueError):
        path_loss_linear(0.0, 2.2)
    with pytest.raises(ValueError):
        path_loss_linear(-1.0, 2.2)
    with pytest.raises(ValueError):
        path_loss_linear(10.0, 2.2, d0=0.0)


def test_noise_power_values():
    # -174 dBm/Hz + 70 dB of bandwidth = -104 dBm = 10^-13.4 W
    assert noise_power_watts(-174.0, 10e6) == pytest.approx(3.9810717055349693e-14, rel=1e-12)
    assert noise_power_watts(-30.0, 1.0) == pytest.approx(1e-6, rel=1e-12)
    assert noise_power_watts(0.0, 1.0) == pytest.approx(1e-3, rel=1e-12)


def test_noise_power_rejects_bad_bandwidth():
    with pytest.raises(ValueError):
        noise_power_watts(-174.0, 0.0)


def test_normalized_thresholds():
    noise = noise_power_watts(-174.0, 10e6)
    out = normalized_thresholds([1e-13, 2e-13], noise)
    assert out == pytest.approx([1e-13 / noise, 2e-13 / noise], rel=1e-12)
    with pytest.raises(ValueError):
        normalized_thresholds([1e-13], 0.0)


@pytest.fixture
def small_dims():
    return SystemDims(n_t=3, n_r=2, n_p=2, n_i=4, k=4)


def test_sampling_deterministic(small_dims):
    cfg = default_scenario(seed=7)
    a = sample_channels(small_dims, cfg, 5)
    b = sample_channels(small_dims, cfg, 5)
    for name in ("h_tr", "h_ti", "h_ir", "h_tk", "h_ik"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = sample_channels(small_dims, cfg, 6)
    assert not np.array_equal(a.h_tr, c.h_tr)
    d = sample_channels(small_dims, default_scenario(seed=8), 5)
    assert not np.array_equal(a.h_tr, d.h_tr)


def test_no_irs_shapes(small_dims):
    cfg = default_scenario()
    dims0 = SystemDims(n_t=3, n_r=2, n_p=2, n_i=0, k=4)
    ch = sample_channels(dims0, cfg, 0)
    assert ch.h_ti.shape == (0, 3)
    assert ch.h_ir.shape == (2, 0)
    assert ch.h_ik.shape == (4, 2, 0)
    z_r = effective_channel_sr(ch, np.zeros(0, dtype=complex))
    assert np.array_equal(z_r, ch.h_tr)


def test_entry_second_moment_matches_path_loss():
    # Monte-Carlo check of the per-entry variance contract on the raw draws:
    # >= 1e5 entries of the unnormalized direct channel
    cfg = default_scenario(seed=3)
    dims = SystemDims(n_t=25, n_r=20, n_p=1, n_i=0, k=0)
    cfg = ScenarioConfig(seed=3, p_k_watts=(), pr_pos=((0.0, 1.0),))
    entries = []
    for i in range(200):
        ch = sample_channels(dims, cfg, i, normalize=False)
        entries.append(np.abs(ch.h_tr) ** 2)
    mean = np.mean(entries)
    d_tr = cfg.link_distances()["tr"]
    target = path_loss_linear(d_tr, cfg.pathloss_exp_direct)
    assert mean == pytest.approx(target, rel=0.02)


def test_noise_scaling_halves_transmit_side(small_dims):
    # x4 bandwidth doubles sigma: tx-side matrices halve, IRS-side unchanged
    cfg1 = default_scenario(seed=2)
    cfg2 = default_scenario(seed=2, bandwidth_hz=cfg1.bandwidth_hz * 4.0)
    a = sample_channels(small_dims, cfg1, 0)
    b = sample_channels(small_dims, cfg2, 0)
    np.testing.assert_allclose(b.h_tr, a.h_tr / 2.0, rtol=1e-12)
    np.testing.assert_allclose(b.h_ti, a.h_ti / 2.0, rtol=1e-12)
    np.testing.assert_allclose(b.h_tk, a.h_tk / 2.0, rtol=1e-12)
    np.testing.assert_array_equal(b.h_ir, a.h_ir)
    np.testing.assert_array_equal(b.h_ik, a.h_ik)


def test_realizations_nest_across_element_count():
    # a smaller surface is a prefix of the same realization's larger surface
    cfg = default_scenario(seed=11)
    small = sample_channels(SystemDims(3, 2, 2, 8, 4), cfg, 4)
    large = sample_channels(SystemDims(3, 2, 2, 32, 4), cfg, 4)
    np.testing.assert_array_equal(large.h_ti[:8], small.h_ti)
    np.testing.assert_array_equal(large.h_ir[:, :8], small.h_ir)
    np.testing.assert_array_equal(large.h_ik[:, :, :8], small.h_ik)
    np.testing.assert_array_equal(large.h_tr, small.h_tr)
    np.testing.assert_array_equal(large.h_tk, small.h_tk)


def test_per_receiver_streams_independent_of_k():
    # dropping PRs does not change the remaining PRs' draws
    cfg4 = default_scenario(seed=5)
    cfg1 = ScenarioConfig(seed=5, p_k_watts=(1e-13,), pr_pos=(cfg4.pr_pos[0],))
    ch4 = sample_channels(SystemDims(3, 2, 2, 4, 4), cfg4, 0)
    ch1 = sample_channels(SystemDims(3, 2, 2, 4, 1), cfg1, 0)
    np.testing.assert_array_equal(ch4.h_tk[0], ch1.h_tk[0])
    np.testing.assert_array_equal(ch4.h_ik[0], ch1.h_ik[0])
