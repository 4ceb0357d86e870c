"""Shared builders and independent oracles for the test suite.

Oracles here deliberately avoid the library's computation paths: rate checks
go through slogdet or explicit determinant expansion, the water level is
found by bisection (the library sorts and scans), and MIMO capacity is an
eigenvalue water-fill evaluated by bisection.
"""

import numpy as np

from pddgp.channel import ChannelSet


def crandn(rng, *shape):
    """CN(0, 1) entries: two real Gaussians of variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rand_channelset(rng, n_t=2, n_r=2, n_p=2, n_i=3, k=2, scale=1.0):
    return ChannelSet(
        h_tr=scale * crandn(rng, n_r, n_t),
        h_ti=scale * crandn(rng, n_i, n_t),
        h_ir=scale * crandn(rng, n_r, n_i),
        h_tk=scale * crandn(rng, k, n_p, n_t),
        h_ik=scale * crandn(rng, k, n_p, n_i),
        noise_normalized=True,
    )


def rand_psd(rng, n, trace=1.0):
    a = crandn(rng, n, n)
    x = a @ a.conj().T
    return x * (trace / np.real(np.trace(x)))


def rand_phase(rng, n):
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))


def rand_hermitian(rng, n, scale=1.0):
    a = scale * crandn(rng, n, n)
    return 0.5 * (a + a.conj().T)


# --- independent oracles -----------------------------------------------------


def rate_slogdet(z_r, x):
    """ln det(I + z x z^H) via LU-based slogdet (independent of Cholesky)."""
    m = np.eye(z_r.shape[0], dtype=complex) + z_r @ x @ z_r.conj().T
    sign, logdet = np.linalg.slogdet(m)
    assert abs(sign - 1.0) < 1e-9
    return float(logdet.real)


def det2_cofactor(m):
    """2x2 determinant by explicit expansion."""
    assert m.shape == (2, 2)
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def project_covariance_oracle(w, p_max, tol=1e-13):
    """KKT-enumeration projection onto {X >= 0, tr X <= p_max}.

    Case 1: clip the eigenvalues of the Hermitian part at zero; accept if the
    trace budget holds.  Case 2: trace constraint active; the water level is
    found by bisection instead of the library's sort-and-scan.
    """
    a = 0.5 * (w + w.conj().T)
    lam, u = np.linalg.eigh(a)
    clipped = np.maximum(lam, 0.0)
    if clipped.sum() <= p_max:
        vals = clipped
    else:
        lo, hi = 0.0, float(lam.max())
        for _ in range(200):
            nu = 0.5 * (lo + hi)
            if np.maximum(lam - nu, 0.0).sum() > p_max:
                lo = nu
            else:
                hi = nu
        nu = 0.5 * (lo + hi)
        vals = np.maximum(lam - nu, 0.0)
        assert abs(vals.sum() - p_max) < tol * max(1.0, p_max)
    return (u * vals) @ u.conj().T


def waterfill_capacity(h, p_total):
    """Closed-form MIMO capacity max ln det(I + h x h^H), tr x <= p_total.

    Eigenvalue water-filling with the level found by bisection.
    """
    g = np.linalg.eigvalsh(h.conj().T @ h)
    g = g[g > 1e-15]
    lo, hi = 0.0, p_total + float(np.max(1.0 / g))
    for _ in range(200):
        nu = 0.5 * (lo + hi)
        if np.maximum(nu - 1.0 / g, 0.0).sum() > p_total:
            hi = nu
        else:
            lo = nu
    nu = 0.5 * (lo + hi)
    powers = np.maximum(nu - 1.0 / g, 0.0)
    return float(np.sum(np.log1p(g * powers)))


# --- solver-contract assertions ----------------------------------------------


def stage_increments(trace):
    """Consecutive rhat differences within each outer stage."""
    rows = trace.rows
    return np.array([
        rows[i].rhat_nats - rows[i - 1].rhat_nats
        for i in range(1, len(rows))
        if rows[i].outer_stage == rows[i - 1].outer_stage
    ])


def assert_inner_monotone(trace, tol=1e-10):
    inc = stage_increments(trace)
    if inc.size:
        assert inc.min() >= -tol, f"inner objective decreased by {-inc.min():.3e}"


def assert_converged_contract(res, gap_tol=1e-5, viol_tol=1e-5):
    """Termination-gap criterion for converged runs."""
    assert res.converged
    assert res.gap_nats < gap_tol, f"gap {res.gap_nats:.3e}"
    if res.p_norm.size:
        rel = res.ipc_violation / np.maximum(res.p_norm, np.finfo(float).tiny)
        assert rel.max() < viol_tol, f"relative IPC violation {rel.max():.3e}"
    assert np.real(np.trace(res.x)) <= res.p_max * (1.0 + 1e-10)
    if res.theta.size:
        assert np.max(np.abs(np.abs(res.theta) - 1.0)) < 1e-12
