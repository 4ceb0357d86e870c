import numpy as np
import pytest

from helpers import det2_cofactor, rand_channelset, rand_phase, rand_psd, rate_slogdet

from pddgp.channel import ChannelSet
from pddgp.objective import (
    DualState,
    augmented_objective,
    constraint_residual,
    effective_channel_pr,
    effective_channel_sr,
    interference_power,
    rate,
)


def scalar_channelset(h_tr=0.0, h_ti=0.0, h_ir=0.0, h_tk=0.0, h_ik=0.0):
    return ChannelSet(
        h_tr=np.array([[h_tr]], dtype=complex),
        h_ti=np.array([[h_ti]], dtype=complex),
        h_ir=np.array([[h_ir]], dtype=complex),
        h_tk=np.array([[[h_tk]]], dtype=complex),
        h_ik=np.array([[[h_ik]]], dtype=complex),
    )


def test_effective_channel_scalar():
    ch = scalar_channelset(h_tr=0.0, h_ti=3.0, h_ir=2.0)
    z = effective_channel_sr(ch, np.ones(1, dtype=complex))
    assert z == pytest.approx(np.array([[6.0 + 0.0j]]))


def test_effective_channel_no_irs():
    rng = np.random.default_rng(0)
    ch = rand_channelset(rng, n_t=3, n_r=2, n_p=2, n_i=0, k=1)
    assert np.array_equal(effective_channel_sr(ch, np.zeros(0)), ch.h_tr)
    assert np.array_equal(effective_channel_pr(ch, np.zeros(0), 0), ch.h_tk[0])


def test_effective_channel_triple_loop():
    # entry-wise oracle: z[r,t] = sum_l h_ir[r,l] theta[l] h_ti[l,t] + h_tr[r,t]
    rng = np.random.default_rng(1)
    ch = rand_channelset(rng, n_t=3, n_r=2, n_p=2, n_i=4, k=2)
    theta = rand_phase(rng, 4)
    z = effective_channel_sr(ch, theta)
    expect = np.zeros((2, 3), dtype=complex)
    for r in range(2):
        for t in range(3):
            acc = ch.h_tr[r, t]
            for l in range(4):
                acc += ch.h_ir[r, l] * theta[l] * ch.h_ti[l, t]
            expect[r, t] = acc
    np.testing.assert_allclose(z, expect, rtol=1e-13)
    zk = effective_channel_pr(ch, theta, 1)
    expect_k = np.zeros((2, 3), dtype=complex)
    for p in range(2):
        for t in range(3):
            acc = ch.h_tk[1, p, t]
            for l in range(4):
                acc += ch.h_ik[1, p, l] * theta[l] * ch.h_ti[l, t]
            expect_k[p, t] = acc
    np.testing.assert_allclose(zk, expect_k, rtol=1e-13)


def test_effective_channel_dim_mismatch():
    rng = np.random.default_rng(2)
    ch = rand_channelset(rng, n_i=4)
    with pytest.raises(ValueError):
        effective_channel_sr(ch, np.ones(3, dtype=complex))


def test_rate_zero_covariance():
    rng = np.random.default_rng(3)
    ch = rand_channelset(rng)
    theta = rand_phase(rng, 3)
    assert rate(np.zeros((2, 2), dtype=complex), theta, ch) == 0.0


def test_rate_scalar():
    ch = scalar_channelset(h_tr=1.0)
    r = rate(np.array([[3.0 + 0.0j]]), np.ones(1, dtype=complex) * 1j, ch)
    # theta contributes nothing (h_ti = h_ir = 0); z = 1, x = 3 -> ln 4
    assert r == pytest.approx(np.log(4.0), rel=1e-12)


def test_rate_against_cofactor_determinant():
    rng = np.random.default_rng(4)
    for _ in range(20):
        ch = rand_channelset(rng, n_t=2, n_r=2, n_i=3, k=1)
        theta = rand_phase(rng, 3)
        x = rand_psd(rng, 2, trace=2.0)
        z = effective_channel_sr(ch, theta)
        m = np.eye(2, dtype=complex) + z @ x @ z.conj().T
        expect = np.log(np.real(det2_cofactor(m)))
        assert rate(x, theta, ch) == pytest.approx(expect, rel=1e-10)


def test_rate_rejects_non_psd():
    rng = np.random.default_rng(5)
    ch = rand_channelset(rng)
    theta = rand_phase(rng, 3)
    with pytest.raises(ValueError):
        rate(-np.eye(2, dtype=complex), theta, ch)
    skew = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        rate(skew, theta, ch)


def test_rate_monotone_in_psd_order():
    rng = np.random.default_rng(6)
    for _ in range(25):
        ch = rand_channelset(rng)
        theta = rand_phase(rng, 3)
        x = rand_psd(rng, 2, trace=1.0)
        delta = rand_psd(rng, 2, trace=rng.uniform(0.01, 1.0))
        assert rate(x + delta, theta, ch) >= rate(x, theta, ch) - 1e-12


def test_interference_zero_and_scalar():
    rng = np.random.default_rng(7)
    ch = rand_channelset(rng)
    theta = rand_phase(rng, 3)
    assert interference_power(np.zeros((2, 2), dtype=complex), theta, ch, 0) == 0.0
    ch1 = scalar_channelset(h_tk=2.0)
    val = interference_power(np.eye(1, dtype=complex), np.ones(1, dtype=complex), ch1, 0)
    assert val == pytest.approx(4.0, rel=1e-12)


def test_interference_rowwise_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        ch = rand_channelset(rng, n_t=3, n_p=2, n_i=4, k=2)
        theta = rand_phase(rng, 4)
        x = rand_psd(rng, 3, trace=1.5)
        for k in range(2):
            zk = effective_channel_pr(ch, theta, k)
            expect = sum(np.real(zk[i] @ x @ zk[i].conj()) for i in range(zk.shape[0]))
            assert interference_power(x, theta, ch, k) == pytest.approx(expect, rel=1e-12)
        val = interference_power(x, theta, ch, 0)
        assert isinstance(val, float) and val >= 0.0


def test_constraint_residual_arithmetic():
    rng = np.random.default_rng(9)
    ch = rand_channelset(rng)
    theta = rand_phase(rng, 3)
    x = rand_psd(rng, 2, trace=1.0)
    ipc = interference_power(x, theta, ch, 0)
    # active constraint: residual zero when s = 0 and threshold equals the power
    assert constraint_residual(x, theta, ipc, 0.0, ch, 0) == pytest.approx(0.0, abs=1e-12)
    # slack absorbs all headroom
    assert constraint_residual(np.zeros_like(x), theta, 2.0, 2.0, ch, 0) == pytest.approx(0.0)
    # plain arithmetic: interference 3, s 1, threshold 2 -> 2
    assert constraint_residual(x * 3.0 / ipc, theta, 2.0, 1.0, ch, 0) == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(ValueError):
        constraint_residual(x, theta, 1.0, -0.1, ch, 0)


def test_augmented_objective_examples():
    rng = np.random.default_rng(10)
    ch = rand_channelset(rng, k=2)
    theta = rand_phase(rng, 3)
    x = rand_psd(rng, 2, trace=1.0)
    ipc = np.array([interference_power(x, theta, ch, k) for k in range(2)])
    # all residuals zero -> penalized objective equals the rate
    p_norm = ipc + np.array([0.5, 1.0])
    s = p_norm - ipc
    dual = DualState(np.array([0.3, -0.2]), 0.7)
    assert augmented_objective(x, theta, s, dual, ch, p_norm) == pytest.approx(
        rate(x, theta, ch), rel=1e-12
    )
    # upsilon = 0, single residual g = 2, rho = 1: quadratic term only -> R - 2
    ch1 = rand_channelset(rng, k=1)
    theta1 = rand_phase(rng, 3)
    x1 = rand_psd(rng, 2, trace=1.0)
    ipc1 = interference_power(x1, theta1, ch1, 0)
    p1 = np.array([ipc1 + 1.0])
    s1 = np.array([3.0])  # g = ipc + 3 - (ipc + 1) = 2
    val = augmented_objective(x1, theta1, s1, DualState(np.zeros(1), 1.0), ch1, p1)
    assert val == pytest.approx(rate(x1, theta1, ch1) - 2.0, rel=1e-10)


def test_augmented_objective_term_by_term():
    # independent re-evaluation: slogdet rate plus per-k penalty terms
    rng = np.random.default_rng(11)
    for _ in range(10):
        ch = rand_channelset(rng, k=2)
        theta = rand_phase(rng, 3)
        x = rand_psd(rng, 2, trace=1.0)
        s = rng.uniform(0.0, 1.0, 2)
        p_norm = rng.uniform(0.5, 2.0, 2)
        dual = DualState(rng.uniform(-1.0, 1.0, 2), rng.uniform(0.1, 5.0))
        z_r = effective_channel_sr(ch, theta)
        expect = rate_slogdet(z_r, x)
        for k in range(2):
            g = interference_power(x, theta, ch, k) + s[k] - p_norm[k]
            expect -= dual.upsilon[k] * g + g * g / (2.0 * dual.rho)
        val = augmented_objective(x, theta, s, dual, ch, p_norm)
        assert val == pytest.approx(expect, rel=1e-11)


def test_augmented_at_most_rate_when_dual_terms_nonneg():
    rng = np.random.default_rng(12)
    for _ in range(10):
        ch = rand_channelset(rng, k=2)
        theta = rand_phase(rng, 3)
        x = rand_psd(rng, 2, trace=1.0)
        ipc = np.array([interference_power(x, theta, ch, k) for k in range(2)])
        s = rng.uniform(0.0, 1.0, 2)
        p_norm = ipc + s - rng.uniform(0.0, 0.5, 2)  # g >= 0
        upsilon = rng.uniform(0.0, 1.0, 2)           # so upsilon_k g_k >= 0
        dual = DualState(upsilon, rng.uniform(0.1, 2.0))
        assert augmented_objective(x, theta, s, dual, ch, p_norm) <= rate(x, theta, ch) + 1e-12


def test_rate_global_phase_invariance_without_direct_links():
    # rotating every phase by a common angle only matters through the direct
    # links; with those zeroed the rate is invariant
    rng = np.random.default_rng(13)
    ch = rand_channelset(rng, k=1)
    ch0 = ChannelSet(h_tr=np.zeros_like(ch.h_tr), h_ti=ch.h_ti, h_ir=ch.h_ir,
                     h_tk=ch.h_tk, h_ik=ch.h_ik)
    theta = rand_phase(rng, 3)
    x = rand_psd(rng, 2, trace=1.0)
    for psi in (0.7, 2.1):
        assert rate(x, np.exp(1j * psi) * theta, ch0) == pytest.approx(
            rate(x, theta, ch0), rel=1e-12)


def test_dual_state_validation():
    with pytest.raises(ValueError):
        DualState(np.zeros(1), 0.0)
    with pytest.raises(ValueError):
        DualState(np.zeros(1), -1.0)
