"""Effective channels, achievable rate, interference residuals, and the
penalized objective maximized by the inner loop.

Rates are in nats throughout (natural log).  The penalized objective for
multipliers ``upsilon`` and penalty ``rho`` is

    rhat = rate(x, theta) - sum_k upsilon_k * g_k - (1 / (2 rho)) * sum_k g_k**2

with residual ``g_k = tr(z_k x z_k^H) + s_k - p_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet

_HERM_TOL = 1e-12
_PSD_TOL = 1e-10


@dataclass
class DualState:
    """Multipliers and penalty parameter of the outer loop."""

    upsilon: np.ndarray  # (k,), real
    rho: float

    def __post_init__(self) -> None:
        self.upsilon = np.asarray(self.upsilon, dtype=float)
        if not self.rho > 0:
            raise ValueError(f"penalty parameter must be positive, got {self.rho}")


def validate_phase(theta: np.ndarray, tol: float = _HERM_TOL) -> np.ndarray:
    """Check |theta_l| = 1 within ``tol``; returns theta unchanged."""
    theta = np.asarray(theta)
    if theta.ndim != 1:
        raise ValueError(f"phase vector must be 1-D, got shape {theta.shape}")
    if theta.size and np.max(np.abs(np.abs(theta) - 1.0)) > tol:
        raise ValueError("phase vector entries must have unit modulus")
    return theta


def validate_covariance(x: np.ndarray, p_max: float | None = None) -> np.ndarray:
    """Check Hermitian PSD (and trace bound when ``p_max`` given)."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"covariance must be square, got shape {x.shape}")
    scale = max(1.0, float(np.abs(x).max(initial=0.0)))
    if np.max(np.abs(x - x.conj().T), initial=0.0) > _HERM_TOL * scale:
        raise ValueError("covariance must be Hermitian")
    if x.size and np.linalg.eigvalsh(x).min() < -_PSD_TOL * scale:
        raise ValueError("covariance must be positive semidefinite")
    if p_max is not None and x.trace().real > p_max + _PSD_TOL * max(1.0, p_max):
        raise ValueError(f"trace {x.trace().real} exceeds power budget {p_max}")
    return x


def effective_channel_sr(ch: ChannelSet, theta: np.ndarray) -> np.ndarray:
    """Cascaded-plus-direct channel to the secondary receiver."""
    theta = np.asarray(theta)
    if theta.shape != (ch.h_ti.shape[0],):
        raise ValueError(f"theta shape {theta.shape} does not match n_i={ch.h_ti.shape[0]}")
    return (ch.h_ir * theta) @ ch.h_ti + ch.h_tr


def effective_channel_pr(ch: ChannelSet, theta: np.ndarray, k: int) -> np.ndarray:
    """Cascaded-plus-direct channel to primary receiver ``k``."""
    theta = np.asarray(theta)
    if theta.shape != (ch.h_ti.shape[0],):
        raise ValueError(f"theta shape {theta.shape} does not match n_i={ch.h_ti.shape[0]}")
    return (ch.h_ik[k] * theta) @ ch.h_ti + ch.h_tk[k]


def effective_channels(ch: ChannelSet, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(z_r, z_k-stack) for one phase vector; z_k stacked as (k, n_p, n_t)."""
    z_r = effective_channel_sr(ch, theta)
    z_k = (ch.h_ik * theta[None, None, :]) @ ch.h_ti + ch.h_tk
    return z_r, z_k


def rate_from_effective(z_r: np.ndarray, x: np.ndarray) -> float:
    """ln det(I + z_r x z_r^H) via Cholesky with a symmetrization guard."""
    m = np.eye(z_r.shape[0], dtype=complex) + z_r @ x @ z_r.conj().T
    m = 0.5 * (m + m.conj().T)  # strip Hermiticity drift before factorizing
    chol = np.linalg.cholesky(m)
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))))


def rate(x: np.ndarray, theta: np.ndarray, ch: ChannelSet) -> float:
    """Achievable rate in nats; requires Hermitian PSD ``x``."""
    validate_covariance(x)
    return rate_from_effective(effective_channel_sr(ch, theta), x)


def interference_from_effective(z_k: np.ndarray, x: np.ndarray) -> np.ndarray:
    """tr(z_k x z_k^H) for every PR; imaginary residue discarded."""
    if z_k.shape[0] == 0:
        return np.zeros(0)
    return np.einsum("kpt,ts,kps->k", z_k, x, z_k.conj(), optimize=True).real


def interference_power(x: np.ndarray, theta: np.ndarray, ch: ChannelSet, k: int) -> float:
    """Noise-normalized interference power at primary receiver ``k``."""
    validate_covariance(x)
    z = effective_channel_pr(ch, theta, k)
    return float(np.einsum("pt,ts,ps->", z, x, z.conj(), optimize=True).real)


def constraint_residual(
    x: np.ndarray, theta: np.ndarray, p_k_norm: float, s_k: float, ch: ChannelSet, k: int
) -> float:
    """Signed equality residual g_k = interference + s_k - p_k."""
    if s_k < 0:
        raise ValueError(f"slack must be nonnegative, got {s_k}")
    return interference_power(x, theta, ch, k) + s_k - p_k_norm


def residuals_from_effective(
    z_k: np.ndarray, x: np.ndarray, s: np.ndarray, p_norm: np.ndarray
) -> np.ndarray:
    """All residuals g_k at once."""
    return interference_from_effective(z_k, x) + s - p_norm


def augmented_objective_from_effective(
    z_r: np.ndarray,
    z_k: np.ndarray,
    x: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    p_norm: np.ndarray,
) -> float:
    g = residuals_from_effective(z_k, x, s, p_norm)
    return (
        rate_from_effective(z_r, x)
        - float(dual.upsilon @ g)
        - float(g @ g) / (2.0 * dual.rho)
    )


def augmented_objective(
    x: np.ndarray,
    theta: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    ch: ChannelSet,
    p_norm: np.ndarray,
) -> float:
    """Penalized objective rhat; equals the rate when every g_k = 0."""
    s = np.asarray(s, dtype=float)
    p_norm = np.asarray(p_norm, dtype=float)
    z_r, z_k = effective_channels(ch, theta)
    return augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)
