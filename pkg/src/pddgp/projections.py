"""Euclidean projections onto the two feasible sets, and the closed-form
slack update.

The phase set is entrywise unit-modulus; the covariance set is the Hermitian
PSD matrices with bounded trace, whose projection is an eigenvalue
water-filling (shift eigenvalues down by a common water level and clip at
zero).
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .objective import DualState, effective_channels, interference_from_effective


def project_phase(theta_hat: np.ndarray) -> np.ndarray:
    """Normalize every entry to unit modulus; zeros map to 1+0j."""
    theta_hat = np.asarray(theta_hat, dtype=complex)
    mod = np.abs(theta_hat)
    out = np.where(mod > 0.0, theta_hat / np.where(mod > 0.0, mod, 1.0), 1.0 + 0.0j)
    return out


def project_covariance(w: np.ndarray, p_max: float) -> np.ndarray:
    """Frobenius projection of ``w`` onto {X >= 0, tr(X) <= p_max}.

    ``w`` is Hermitianized first (gradient steps carry float-level
    asymmetry), then the eigenvalues are clipped at zero; if their sum still
    exceeds the budget they are shifted down by the unique water level
    ``nu >= 0`` with sum(max(lam - nu, 0)) = p_max, found exactly by
    sort-and-scan.
    """
    if p_max <= 0:
        raise ValueError(f"power budget must be positive, got {p_max}")
    w = np.asarray(w, dtype=complex)
    a = 0.5 * (w + w.conj().T)
    lam, u = np.linalg.eigh(a)
    clipped = np.maximum(lam, 0.0)
    total = clipped.sum()
    if total > p_max:
        clipped = np.maximum(lam - _water_level(lam, p_max), 0.0)
    x = (u * clipped) @ u.conj().T
    return 0.5 * (x + x.conj().T)


def _water_level(lam: np.ndarray, budget: float) -> float:
    """Water level nu with sum(max(lam - nu, 0)) = budget, via sort-and-scan.

    Assumes sum(max(lam, 0)) > budget, which makes nu > 0 unique.
    """
    desc = np.sort(lam)[::-1]
    csum = np.cumsum(desc)
    idx = np.arange(1, lam.size + 1)
    nu_cand = (csum - budget) / idx
    active = desc > nu_cand  # top-m eigenvalues stay positive under nu_cand[m-1]
    m = int(np.nonzero(active)[0][-1]) + 1
    return float((csum[m - 1] - budget) / m)


def update_slack(
    x: np.ndarray,
    theta: np.ndarray,
    ch: ChannelSet,
    p_norm: np.ndarray,
    dual: DualState | None = None,
) -> np.ndarray:
    """Optimal slack for fixed (x, theta): s_k = max(0, p_k - interference).

    With ``dual`` given, the maximizer of the penalized objective shifts by
    rho * upsilon_k: s_k = max(0, p_k - interference - rho * upsilon_k).
    Both forms coincide at upsilon = 0 and as rho -> 0; the solver uses the
    dual-aware form so every block update is an exact maximization.
    """
    p_norm = np.asarray(p_norm, dtype=float)
    _, z_k = effective_channels(ch, theta)
    headroom = p_norm - interference_from_effective(z_k, x)
    if dual is not None:
        headroom = headroom - dual.rho * dual.upsilon
    return np.maximum(0.0, headroom)


def slack_from_effective(
    z_k: np.ndarray, x: np.ndarray, p_norm: np.ndarray, dual: DualState | None = None
) -> np.ndarray:
    headroom = p_norm - interference_from_effective(z_k, x)
    if dual is not None:
        headroom = headroom - dual.rho * dual.upsilon
    return np.maximum(0.0, headroom)
