"""Random channel realizations: path loss, Rayleigh small-scale fading, and
noise normalization.

Every matrix entry is drawn i.i.d. circularly-symmetric complex Gaussian
with unit variance (two real Gaussians of variance 1/2) and scaled by the
square root of the link's path-loss gain.  The transmitter-side matrices
(``h_tr``, ``h_ti``, ``h_tk``) are then divided by the noise standard
deviation so the rate and interference expressions need no explicit noise
term; the IRS-receive-side matrices (``h_ir``, ``h_ik``) stay unscaled.

Reproducibility: realization ``i`` of link ``L`` draws from the dedicated
stream ``default_rng((seed, i, LINK_TAG[L]))``, so realizations are
independent of each other and of how many links or receivers exist.  IRS
matrices are drawn with the element axis leading (and transposed where
needed) with interleaved real/imag samples, so a surface of ``n_i``
elements is entry-for-entry a prefix of the same realization with a larger
``n_i``.  That keeps element-count sweeps on "the same" channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig, SystemDims

# per-link stream tags; per-PR links fold the receiver index in as a fourth word
_TAG_TR, _TAG_TI, _TAG_IR, _TAG_TK, _TAG_IK = 11, 12, 13, 14, 15


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    ``h_tk``/``h_ik`` are stacked over the PR index as (k, n_p, n_t) and
    (k, n_p, n_i) arrays.  ``noise_normalized`` records whether the
    transmitter-side matrices were divided by the noise standard deviation.
    """

    h_tr: np.ndarray   # (n_r, n_t)
    h_ti: np.ndarray   # (n_i, n_t)
    h_ir: np.ndarray   # (n_r, n_i)
    h_tk: np.ndarray   # (k, n_p, n_t)
    h_ik: np.ndarray   # (k, n_p, n_i)
    noise_normalized: bool = True

    @property
    def dims(self) -> SystemDims:
        return SystemDims(
            n_t=self.h_tr.shape[1],
            n_r=self.h_tr.shape[0],
            n_p=self.h_tk.shape[1],
            n_i=self.h_ti.shape[0],
            k=self.h_tk.shape[0],
        )

    def __post_init__(self) -> None:
        n_r, n_t = self.h_tr.shape
        n_i = self.h_ti.shape[0]
        if self.h_ti.shape != (n_i, n_t):
            raise ValueError(f"h_ti shape {self.h_ti.shape} != ({n_i}, {n_t})")
        if self.h_ir.shape != (n_r, n_i):
            raise ValueError(f"h_ir shape {self.h_ir.shape} != ({n_r}, {n_i})")
        if self.h_tk.ndim != 3 or self.h_ik.ndim != 3:
            raise ValueError("h_tk and h_ik must be stacked (k, n_p, ...) arrays")
        k, n_p = self.h_tk.shape[:2]
        if self.h_tk.shape != (k, n_p, n_t):
            raise ValueError(f"h_tk shape {self.h_tk.shape} != ({k}, {n_p}, {n_t})")
        if self.h_ik.shape != (k, n_p, n_i):
            raise ValueError(f"h_ik shape {self.h_ik.shape} != ({k}, {n_p}, {n_i})")


def db_to_linear(x_db: float) -> float:
    """Power ratio for a dB value."""
    return 10.0 ** (0.1 * x_db)


def linear_to_db(x: float) -> float:
    """dB value for a power ratio."""
    return 10.0 * np.log10(x)


def path_loss_linear(d: float, exponent: float, d0: float = 1.0, ref_loss_db: float = -30.0) -> float:
    """Linear power gain of a link of length ``d`` meters.

    The loss in dB is ``ref_loss_db - 10*exponent*log10(d/d0)``.
    """
    if d <= 0 or d0 <= 0:
        raise ValueError(f"distances must be positive, got d={d}, d0={d0}")
    return db_to_linear(ref_loss_db - 10.0 * exponent * np.log10(d / d0))


def noise_power_watts(psd_dbm_hz: float, bandwidth_hz: float) -> float:
    """Total noise power in watts over ``bandwidth_hz``."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    return db_to_linear(psd_dbm_hz + 10.0 * np.log10(bandwidth_hz) - 30.0)


def normalized_thresholds(p_k_watts, noise_watts: float) -> np.ndarray:
    """Interference thresholds divided by the noise power.

    The solver consumes these because the transmitter-side channels are
    noise-normalized; physical interference tr(Zk X Zk^H) <= p_k then reads
    tr(Zk_norm X Zk_norm^H) <= p_k / noise_watts.
    """
    if noise_watts <= 0:
        raise ValueError(f"noise power must be positive, got {noise_watts}")
    return np.asarray(p_k_watts, dtype=float) / noise_watts


def _draw(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    # interleaved re/im so a row prefix of a taller draw reproduces the shorter draw
    z = rng.standard_normal((rows, cols, 2))
    return np.sqrt(gain / 2.0) * (z[..., 0] + 1j * z[..., 1])


def sample_channels(
    dims: SystemDims,
    cfg: ScenarioConfig,
    realization_index: int = 0,
    normalize: bool = True,
) -> ChannelSet:
    """Draw one channel realization for ``(cfg.seed, realization_index)``.

    Deterministic: the same (seed, realization_index, dims, geometry) always
    produces the same matrices.  With ``normalize=False`` the raw (physical)
    channels are returned and ``noise_normalized`` is False.
    """
    cfg.check_dims(dims)
    d = cfg.link_distances()
    xi_d, xi_i = cfg.pathloss_exp_direct, cfg.pathloss_exp_irs
    d0, ref = cfg.ref_distance_m, cfg.ref_loss_db

    def rng(tag: int, k: int | None = None) -> np.random.Generator:
        key = (cfg.seed, realization_index, tag) if k is None else (cfg.seed, realization_index, tag, k)
        return np.random.default_rng(key)

    h_tr = _draw(rng(_TAG_TR), dims.n_r, dims.n_t, path_loss_linear(d["tr"], xi_d, d0, ref))
    # IRS matrices: element axis leads the draw so realizations nest across n_i
    h_ti = _draw(rng(_TAG_TI), dims.n_i, dims.n_t, path_loss_linear(d["ti"], xi_i, d0, ref))
    h_ir = _draw(rng(_TAG_IR), dims.n_i, dims.n_r, path_loss_linear(d["ir"], xi_i, d0, ref)).T
    h_tk = np.stack(
        [
            _draw(rng(_TAG_TK, k), dims.n_p, dims.n_t, path_loss_linear(d[f"tk{k}"], xi_d, d0, ref))
            for k in range(dims.k)
        ]
    ) if dims.k else np.zeros((0, dims.n_p, dims.n_t), dtype=complex)
    h_ik = np.stack(
        [
            _draw(rng(_TAG_IK, k), dims.n_i, dims.n_p, path_loss_linear(d[f"ik{k}"], xi_i, d0, ref)).T
            for k in range(dims.k)
        ]
    ) if dims.k else np.zeros((0, dims.n_p, dims.n_i), dtype=complex)

    if normalize:
        sigma = np.sqrt(noise_power_watts(cfg.noise_psd_dbm_hz, cfg.bandwidth_hz))
        h_tr = h_tr / sigma
        h_ti = h_ti / sigma
        h_tk = h_tk / sigma

    return ChannelSet(h_tr=h_tr, h_ti=h_ti, h_ir=h_ir, h_tk=h_tk, h_ik=h_ik,
                      noise_normalized=normalize)
