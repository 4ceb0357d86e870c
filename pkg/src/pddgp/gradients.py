"""Closed-form gradients of the penalized objective, plus finite-difference
oracles for verifying them.

Conventions.  For a real function of a complex vector the gradient is taken
with respect to the conjugate variable, so the first-order change along a
step ``d`` is ``2 Re(grad^H d)``.  For a real function of a Hermitian matrix
the gradient is the Hermitian matrix ``G`` with first-order change
``tr(G dX)`` over Hermitian steps ``dX``.  These are the conventions under
which the closed forms below hold:

    grad_theta = diag(h_ir^H (I + z_r x z_r^H)^{-1} z_r x h_ti^H)
                 - sum_k w_k diag(h_ik^H z_k x h_ti^H)
    grad_x     = z_r^H (I + z_r x z_r^H)^{-1} z_r - sum_k w_k z_k^H z_k

with the shared penalty weight ``w_k = upsilon_k + g_k / rho``.

The inverse is never formed; ``(I + z_r x z_r^H)^{-1} z_r`` is obtained from
a Cholesky solve, which keeps the per-iteration cost linear in the number of
IRS elements.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ChannelSet
from .objective import DualState, effective_channels, residuals_from_effective

# optional multiply counter for complexity instrumentation (see enable_flop_count)
_FLOPS: list[int] | None = None


def enable_flop_count() -> None:
    """Start counting complex multiplies inside grad_theta/grad_x."""
    global _FLOPS
    _FLOPS = [0]


def disable_flop_count() -> int:
    """Stop counting and return the accumulated multiply count."""
    global _FLOPS
    total = _FLOPS[0] if _FLOPS else 0
    _FLOPS = None
    return total


def _count(n: int) -> None:
    if _FLOPS is not None:
        _FLOPS[0] += n


def penalty_weights(g: np.ndarray, dual: DualState) -> np.ndarray:
    """w_k = upsilon_k + g_k / rho, shared by both gradients."""
    return dual.upsilon + g / dual.rho


def _solve_m_inv_z(z_r: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(I + z_r x z_r^H)^{-1} z_r via a Hermitian positive-definite solve."""
    n_r = z_r.shape[0]
    m = np.eye(n_r, dtype=complex) + z_r @ x @ z_r.conj().T
    m = 0.5 * (m + m.conj().T)
    _count(z_r.shape[0] * z_r.shape[1] * (z_r.shape[1] + n_r) + n_r**3 // 3)
    return cho_solve(cho_factor(m, lower=True), z_r)


def grad_theta_from_effective(
    z_r: np.ndarray,
    z_k: np.ndarray,
    x: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    p_norm: np.ndarray,
    ch: ChannelSet,
) -> np.ndarray:
    n_i = ch.h_ti.shape[0]
    if n_i == 0:
        return np.zeros(0, dtype=complex)
    xi = _solve_m_inv_z(z_r, x)                       # (n_r, n_t)
    b = xi @ x @ ch.h_ti.conj().T                     # (n_r, n_i)
    _count(xi.shape[0] * x.shape[0] * (x.shape[1] + n_i))
    lead = np.einsum("rl,rl->l", ch.h_ir.conj(), b)   # diag(h_ir^H b), linear in n_i
    _count(ch.h_ir.size)
    if z_k.shape[0] == 0:
        return lead
    g = residuals_from_effective(z_k, x, s, p_norm)
    w = penalty_weights(g, dual)
    zx = z_k @ x                                      # (k, n_p, n_t)
    e = zx @ ch.h_ti.conj().T                         # (k, n_p, n_i)
    _count(z_k.shape[0] * z_k.shape[1] * x.shape[0] * (x.shape[1] + n_i))
    pen = np.einsum("k,kpl,kpl->l", w, ch.h_ik.conj(), e)
    _count(ch.h_ik.size)
    return lead - pen


def grad_theta(
    x: np.ndarray,
    theta: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    ch: ChannelSet,
    p_norm: np.ndarray,
) -> np.ndarray:
    """Gradient of the penalized objective w.r.t. the phase vector."""
    z_r, z_k = effective_channels(ch, theta)
    return grad_theta_from_effective(z_r, z_k, x, np.asarray(s, float), dual,
                                     np.asarray(p_norm, float), ch)


def grad_x_from_effective(
    z_r: np.ndarray,
    z_k: np.ndarray,
    x: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    p_norm: np.ndarray,
) -> np.ndarray:
    xi = _solve_m_inv_z(z_r, x)
    lead = z_r.conj().T @ xi
    _count(z_r.shape[1] ** 2 * z_r.shape[0])
    if z_k.shape[0]:
        g = residuals_from_effective(z_k, x, s, p_norm)
        w = penalty_weights(g, dual)
        lead = lead - np.einsum("k,kpt,kps->ts", w, z_k.conj(), z_k, optimize=True)
        _count(z_k.shape[0] * z_k.shape[1] * z_k.shape[2] ** 2)
    return 0.5 * (lead + lead.conj().T)  # exact Hermiticity for the projection step


def grad_x(
    x: np.ndarray,
    theta: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    ch: ChannelSet,
    p_norm: np.ndarray,
) -> np.ndarray:
    """Gradient of the penalized objective w.r.t. the transmit covariance."""
    z_r, z_k = effective_channels(ch, theta)
    return grad_x_from_effective(z_r, z_k, x, np.asarray(s, float),
                                 dual, np.asarray(p_norm, float))


# --- finite-difference oracles ---------------------------------------------


def finite_diff_gradient(f, z: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of real ``f`` over a free complex array.

    Per coordinate the result is (df/dRe + 1j df/dIm) / 2, i.e. the gradient
    in the conjugate convention: f(z + d) - f(z) ~ 2 Re(sum(conj(grad) * d)).
    The step adapts to the coordinate magnitude, h = step * max(1, |z_i|).
    """
    z = np.asarray(z, dtype=complex)
    grad = np.zeros_like(z)
    it = np.nditer(z, flags=["multi_index"])
    for v in it:
        idx = it.multi_index
        h = step * max(1.0, abs(complex(v)))
        d_re = _central(f, z, idx, h, 1.0)
        d_im = _central(f, z, idx, h, 1.0j)
        grad[idx] = 0.5 * (d_re + 1j * d_im)
    return grad


def finite_diff_gradient_hermitian(f, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of real ``f`` over Hermitian matrices.

    Perturbations stay Hermitian (paired off-diagonal entries, real
    diagonal).  The result is the Hermitian matrix G with
    f(x + dX) - f(x) ~ tr(G dX); for f = tr this yields the identity.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    grad = np.zeros_like(x)
    for i in range(n):
        h = step * max(1.0, abs(x[i, i]))
        e = np.zeros_like(x)
        e[i, i] = 1.0
        grad[i, i] = _central_dir(f, x, e, h)
        for j in range(i + 1, n):
            h = step * max(1.0, abs(x[i, j]))
            e_re = np.zeros_like(x)
            e_re[i, j] = 1.0
            e_re[j, i] = 1.0
            e_im = np.zeros_like(x)
            e_im[i, j] = 1.0j
            e_im[j, i] = -1.0j
            a = _central_dir(f, x, e_re, h)
            b = _central_dir(f, x, e_im, h)
            grad[i, j] = 0.5 * (a + 1j * b)
            grad[j, i] = np.conj(grad[i, j])
    return grad


def _central(f, z: np.ndarray, idx, h: float, direction: complex) -> float:
    zp = z.copy()
    zp[idx] += h * direction
    zm = z.copy()
    zm[idx] -= h * direction
    return (f(zp) - f(zm)) / (2.0 * h)


def _central_dir(f, x: np.ndarray, e: np.ndarray, h: float) -> float:
    return (f(x + h * e) - f(x - h * e)) / (2.0 * h)


def flop_count_grad_theta(n_t: int, n_r: int, n_p: int, n_i: int, k: int) -> int:
    """Complex multiplies one grad_theta call charges to the counter.

    Mirrors the _count calls along the implementation's operation list; the
    n_i-dependent part is (2 n_r + k n_t + (k + 1) n_p) * n_i * n_t plus the
    two diagonal reductions, so the count is linear in n_i.
    """
    total = n_r * n_t * (n_t + n_r) + n_r**3 // 3          # build M, factor it
    total += n_r * n_t * (n_t + n_i)                       # xi x, then (..) h_ti^H
    total += n_r * n_i                                     # diag reduction
    if k:
        total += k * n_p * n_t * (n_t + n_i)               # z_k x, then (..) h_ti^H
        total += k * n_p * n_i                             # diag reduction
    return total
