"""Scenario geometry, system dimensions, and YAML config loading.

Units are fixed throughout: positions in meters, powers in watts, noise
power spectral density in dBm/Hz, bandwidth in Hz.  Config-file keys carry
unit suffixes (``pmax_dbm``, ``pk_watts``, ``positions_m``) so a value can
never be read in the wrong unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


@dataclass(frozen=True)
class SystemDims:
    """Antenna/element counts for one scenario.

    ``n_i = 0`` encodes the no-IRS baseline and ``k = 0`` a link with no
    licensed receivers; every other count must be at least 1.
    """

    n_t: int  # transmit antennas at the secondary transmitter
    n_r: int  # receive antennas at the secondary receiver
    n_p: int  # antennas per primary receiver
    n_i: int  # reflecting elements at the IRS
    k: int    # number of primary receivers

    def __post_init__(self) -> None:
        for name in ("n_t", "n_r", "n_p"):
            if getattr(self, name) < 1:
                raise ConfigError(f"dims.{name} must be >= 1, got {getattr(self, name)}")
        if self.n_i < 0:
            raise ConfigError(f"dims.n_i must be >= 0, got {self.n_i}")
        if self.k < 0:
            raise ConfigError(f"dims.k must be >= 0, got {self.k}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical scenario: node positions, propagation and power budget.

    Positions are 2-D Cartesian coordinates in meters.  ``p_k_watts`` holds
    one interference threshold per primary receiver; a zero threshold is
    accepted (the solver then reports infeasibility rather than the loader
    rejecting the file).
    """

    st_pos: tuple[float, float] = (300.0, 0.0)
    sr_pos: tuple[float, float] = (600.0, 0.0)
    irs_pos: tuple[float, float] = (300.0, 30.0)
    pr_pos: tuple[tuple[float, float], ...] = ((0.0, 0.0), (0.0, 5.0), (0.0, 10.0), (0.0, 15.0))
    pathloss_exp_direct: float = 3.75   # ST-SR and ST-PR links
    pathloss_exp_irs: float = 2.2       # ST-IRS, IRS-SR and IRS-PR links
    ref_distance_m: float = 1.0
    ref_loss_db: float = -30.0          # path loss at the reference distance
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 10e6
    p_max_watts: float = 0.1            # 20 dBm
    p_k_watts: tuple[float, ...] = (1e-13, 1e-13, 1e-13, 1e-13)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ConfigError(f"scenario.bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if self.p_max_watts <= 0:
            raise ConfigError(f"scenario.pmax must be > 0, got {self.p_max_watts} W")
        if self.ref_distance_m <= 0:
            raise ConfigError(f"scenario.ref_distance_m must be > 0, got {self.ref_distance_m}")
        for i, p in enumerate(self.p_k_watts):
            if p < 0:
                raise ConfigError(f"scenario.pk_watts[{i}] must be >= 0, got {p}")
        for name, d in self.link_distances().items():
            if not d > 0:
                raise ConfigError(f"scenario positions give non-positive {name} distance")

    # --- distances -------------------------------------------------------

    def link_distances(self) -> dict[str, float]:
        """All link distances in meters, keyed by link name (``tk0``, ``ik1``, ...)."""
        d = {
            "tr": _dist(self.st_pos, self.sr_pos),
            "ti": _dist(self.st_pos, self.irs_pos),
            "ir": _dist(self.irs_pos, self.sr_pos),
        }
        for i, pr in enumerate(self.pr_pos):
            d[f"tk{i}"] = _dist(self.st_pos, pr)
            d[f"ik{i}"] = _dist(self.irs_pos, pr)
        return d

    def check_dims(self, dims: SystemDims) -> None:
        """Cross-validate against ``dims`` (threshold/position counts vs ``k``)."""
        if len(self.p_k_watts) != dims.k:
            raise ConfigError(
                f"scenario.pk_watts has {len(self.p_k_watts)} entries but dims.k = {dims.k}"
            )
        if len(self.pr_pos) < dims.k:
            raise ConfigError(
                f"scenario.positions_m.pr has {len(self.pr_pos)} entries but dims.k = {dims.k}"
            )


def default_scenario(**overrides: Any) -> ScenarioConfig:
    """The default four-PR scenario; keyword overrides replace single fields."""
    return replace(ScenarioConfig(), **overrides) if overrides else ScenarioConfig()


def _dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


# --- YAML loading ---------------------------------------------------------

_SCENARIO_KEYS = {
    "seed", "pathloss_exp_direct", "pathloss_exp_irs", "ref_distance_m",
    "ref_loss_db", "noise_psd_dbm_hz", "bandwidth_hz", "pmax_dbm",
    "pmax_watts", "pk_watts", "positions_m",
}
_POSITION_KEYS = {"st", "sr", "irs", "pr"}
_DIMS_KEYS = {"n_t", "n_r", "n_p", "n_i", "k"}
_TOP_KEYS = {"scenario", "dims", "solver", "experiment"}


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a YAML experiment file into raw section mappings.

    Returns a dict with (possibly empty) ``scenario``, ``dims``, ``solver``
    and ``experiment`` sections.  Unknown top-level keys are rejected with a
    diagnostic naming the key.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be a mapping, got {type(raw).__name__}")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{p}: unknown top-level key '{key}' (expected {sorted(_TOP_KEYS)})")
    out = {sec: raw.get(sec) or {} for sec in _TOP_KEYS}
    for sec, val in out.items():
        if not isinstance(val, dict):
            raise ConfigError(f"{p}: section '{sec}' must be a mapping")
    return out


def scenario_from_mapping(m: Mapping[str, Any]) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a config-file section."""
    for key in m:
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"scenario: unknown key '{key}'")
    if "pmax_dbm" in m and "pmax_watts" in m:
        raise ConfigError("scenario: give pmax_dbm or pmax_watts, not both")
    kwargs: dict[str, Any] = {}
    for key in ("seed",):
        if key in m:
            kwargs[key] = int(m[key])
    for key in ("pathloss_exp_direct", "pathloss_exp_irs", "ref_distance_m",
                "ref_loss_db", "noise_psd_dbm_hz", "bandwidth_hz"):
        if key in m:
            kwargs[key] = _as_float(f"scenario.{key}", m[key])
    if "pmax_dbm" in m:
        kwargs["p_max_watts"] = 10.0 ** ((_as_float("scenario.pmax_dbm", m["pmax_dbm"]) - 30.0) / 10.0)
    if "pmax_watts" in m:
        kwargs["p_max_watts"] = _as_float("scenario.pmax_watts", m["pmax_watts"])
    if "pk_watts" in m:
        vals = m["pk_watts"]
        if not isinstance(vals, (list, tuple)):
            raise ConfigError("scenario.pk_watts must be a list of watts")
        kwargs["p_k_watts"] = tuple(_as_float("scenario.pk_watts[...]", v) for v in vals)
    if "positions_m" in m:
        pos = m["positions_m"]
        if not isinstance(pos, dict):
            raise ConfigError("scenario.positions_m must be a mapping with st/sr/irs/pr")
        for key in pos:
            if key not in _POSITION_KEYS:
                raise ConfigError(f"scenario.positions_m: unknown key '{key}'")
        if "st" in pos:
            kwargs["st_pos"] = _as_point("scenario.positions_m.st", pos["st"])
        if "sr" in pos:
            kwargs["sr_pos"] = _as_point("scenario.positions_m.sr", pos["sr"])
        if "irs" in pos:
            kwargs["irs_pos"] = _as_point("scenario.positions_m.irs", pos["irs"])
        if "pr" in pos:
            if not isinstance(pos["pr"], (list, tuple)):
                raise ConfigError("scenario.positions_m.pr must be a list of [x, y] pairs")
            kwargs["pr_pos"] = tuple(
                _as_point(f"scenario.positions_m.pr[{i}]", p) for i, p in enumerate(pos["pr"])
            )
    return ScenarioConfig(**kwargs)


def dims_from_mapping(m: Mapping[str, Any]) -> SystemDims:
    """Build a :class:`SystemDims` from a config-file section."""
    for key in m:
        if key not in _DIMS_KEYS:
            raise ConfigError(f"dims: unknown key '{key}'")
    missing = _DIMS_KEYS - set(m)
    if missing:
        raise ConfigError(f"dims: missing key(s) {sorted(missing)}")
    return SystemDims(**{key: int(m[key]) for key in _DIMS_KEYS})


def _as_float(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


def _as_point(name: str, value: Any) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name} must be an [x, y] pair in meters")
    return (_as_float(name + "[0]", value[0]), _as_float(name + "[1]", value[1]))
