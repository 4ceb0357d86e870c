"""Monte-Carlo experiment harness: convergence traces, power/element sweeps
with baselines, and the per-iteration timing benchmark.

Every realization ``i`` draws its channels from the counter-based streams of
``(scenario.seed, i)``, so all methods at a sweep point consume the identical
realization, power sweeps reuse identical channels across sweep values, and
element-count sweeps see nested surfaces.  Results land in CSV files (one
row per realization) plus an aggregated summary CSV and a JSON report that
echoes the full configuration.
"""

from __future__ import annotations

import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .channel import ChannelSet, noise_power_watts, normalized_thresholds, sample_channels
from .config import ConfigError, ScenarioConfig, SystemDims
from .gradients import (
    disable_flop_count,
    enable_flop_count,
    flop_count_grad_theta,
    grad_theta,
)
from .objective import DualState, effective_channels
from .projections import slack_from_effective
from .solver import (
    InnerState,
    PddgpResult,
    SolverConfig,
    default_init,
    inner_apgm,
    pddgp,
)

LN2 = math.log(2.0)

METHODS = ("pddgp", "no_irs", "random_phase")

SWEEP_COLUMNS = ("method", "sweep_var", "sweep_value", "realization", "rate_nats",
                 "rate_bps_hz", "iters_inner_total", "iters_outer", "wall_ms",
                 "max_ipc_residual", "termination")
SWEEP_SUMMARY_COLUMNS = ("method", "sweep_var", "sweep_value", "realizations",
                         "failures", "rate_nats_mean", "rate_nats_std",
                         "rate_bps_hz_mean", "rate_bps_hz_std", "wall_ms_mean",
                         "iters_inner_mean")
BENCHMARK_COLUMNS = ("n_i", "iterations", "inner_iter_ms_mean", "grad_theta_multiplies")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: scenario + dims + solver config + harness knobs."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    dims: SystemDims = field(default_factory=lambda: SystemDims(4, 4, 4, 64, 4))
    solver: SolverConfig = field(default_factory=SolverConfig)
    methods: tuple[str, ...] = ("pddgp",)
    realizations: int = 20
    sweep: str = "none"                      # pmax | ni | none
    pmax_dbm: tuple[float, ...] = ()
    ni_values: tuple[int, ...] = ()
    nt_values: tuple[int, ...] = ()          # convergence family; empty -> (dims.n_t,)
    benchmark_ni: tuple[int, ...] = (64, 128, 256, 512)
    out_prefix: str = "results/run"
    threads: int = 1

    def __post_init__(self) -> None:
        if self.realizations < 1:
            raise ConfigError(f"experiment.realizations must be >= 1, got {self.realizations}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"experiment.methods: unknown method '{m}' (choose from {METHODS})")
        if self.sweep not in ("pmax", "ni", "none"):
            raise ConfigError(f"experiment.sweep must be pmax|ni|none, got '{self.sweep}'")
        if self.sweep == "pmax":
            _check_sweep_list("experiment.pmax_dbm", self.pmax_dbm)
        if self.sweep == "ni":
            _check_sweep_list("experiment.ni", self.ni_values)
        self.scenario.check_dims(self.dims)


def _check_sweep_list(name: str, values: tuple) -> None:
    if len(values) == 0:
        raise ConfigError(f"{name} must be a non-empty sorted list")
    if list(values) != sorted(values):
        raise ConfigError(f"{name} must be sorted ascending, got {list(values)}")


def environment_info() -> dict:
    return {
        "pddgp_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def config_echo(spec: ExperimentSpec) -> dict:
    """Everything needed to reproduce the run, post-overrides."""
    sc = spec.scenario
    return {
        "scenario": {
            "seed": sc.seed,
            "pathloss_exp_direct": sc.pathloss_exp_direct,
            "pathloss_exp_irs": sc.pathloss_exp_irs,
            "ref_distance_m": sc.ref_distance_m,
            "ref_loss_db": sc.ref_loss_db,
            "noise_psd_dbm_hz": sc.noise_psd_dbm_hz,
            "bandwidth_hz": sc.bandwidth_hz,
            "pmax_watts": sc.p_max_watts,
            "pk_watts": list(sc.p_k_watts),
            "positions_m": {
                "st": list(sc.st_pos),
                "sr": list(sc.sr_pos),
                "irs": list(sc.irs_pos),
                "pr": [list(p) for p in sc.pr_pos],
            },
        },
        "dims": {"n_t": spec.dims.n_t, "n_r": spec.dims.n_r, "n_p": spec.dims.n_p,
                 "n_i": spec.dims.n_i, "k": spec.dims.k},
        "solver": {
            "rho0": spec.solver.rho0, "kappa": spec.solver.kappa,
            "gamma": spec.solver.gamma, "mu0": spec.solver.mu0,
            "alpha0": spec.solver.alpha0, "inner_tol": spec.solver.inner_tol,
            "outer_tol": spec.solver.outer_tol,
            "max_inner_iters": spec.solver.max_inner_iters,
            "max_outer_iters": spec.solver.max_outer_iters,
            "rho_min": spec.solver.rho_min,
            "feasibility_rel_tol": spec.solver.feasibility_rel_tol,
        },
        "experiment": {
            "methods": list(spec.methods),
            "realizations": spec.realizations,
            "sweep": spec.sweep,
            "pmax_dbm": list(spec.pmax_dbm),
            "ni": list(spec.ni_values),
            "nt": list(spec.nt_values),
            "benchmark_ni": list(spec.benchmark_ni),
            "out": spec.out_prefix,
            "threads": spec.threads,
        },
    }


# --- single-realization solves ---------------------------------------------


def reduce_to_no_irs(ch: ChannelSet) -> ChannelSet:
    """View of the same realization with the IRS removed (n_i = 0)."""
    return ChannelSet(
        h_tr=ch.h_tr,
        h_ti=ch.h_ti[:0, :],
        h_ir=ch.h_ir[:, :0],
        h_tk=ch.h_tk,
        h_ik=ch.h_ik[:, :, :0],
        noise_normalized=ch.noise_normalized,
    )


def baseline_no_irs(ch: ChannelSet, p_norm: np.ndarray, p_max: float,
                    cfg: SolverConfig, seed: int | tuple[int, ...] = 0) -> PddgpResult:
    """Solve the same instance with the IRS removed."""
    return pddgp(reduce_to_no_irs(ch), p_norm, p_max, cfg=cfg, seed=seed)


def baseline_random_phase(ch: ChannelSet, p_norm: np.ndarray, p_max: float,
                          cfg: SolverConfig, seed: int | tuple[int, ...] = 0) -> PddgpResult:
    """Freeze the phases at the seeded uniform draw; optimize x and s only.

    The frozen vector equals the full solver's starting point for the same
    seed, so the full solver starts from a point this baseline can never
    leave.
    """
    n_t, n_i = ch.h_tr.shape[1], ch.h_ti.shape[0]
    init = default_init(n_t, n_i, p_max, seed)
    return pddgp(ch, p_norm, p_max, init=init, cfg=cfg, freeze_theta=True)


def solve_method(method: str, ch: ChannelSet, p_norm: np.ndarray, p_max: float,
                 cfg: SolverConfig, seed: int | tuple[int, ...]) -> PddgpResult:
    if method == "pddgp":
        return pddgp(ch, p_norm, p_max, cfg=cfg, seed=seed)
    if method == "no_irs":
        return baseline_no_irs(ch, p_norm, p_max, cfg, seed=seed)
    if method == "random_phase":
        return baseline_random_phase(ch, p_norm, p_max, cfg, seed=seed)
    raise ConfigError(f"unknown method '{method}'")


# --- sweeps -----------------------------------------------------------------


@dataclass
class SweepCell:
    """Aggregate over realizations for one (method, sweep value)."""

    method: str
    sweep_value: float
    rates_nats: np.ndarray       # one entry per realization, NaN where failed
    wall_ms: np.ndarray
    iters_inner: np.ndarray
    failures: int

    @property
    def mean_rate_nats(self) -> float:
        ok = self.rates_nats[~np.isnan(self.rates_nats)]
        return float(np.mean(ok)) if ok.size else float("nan")

    @property
    def std_rate_nats(self) -> float:
        ok = self.rates_nats[~np.isnan(self.rates_nats)]
        return float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0

    @property
    def mean_wall_ms(self) -> float:
        ok = self.wall_ms[~np.isnan(self.rates_nats)]
        return float(np.mean(ok)) if ok.size else float("nan")

    @property
    def mean_iters_inner(self) -> float:
        ok = self.iters_inner[~np.isnan(self.rates_nats)]
        return float(np.mean(ok)) if ok.size else float("nan")


@dataclass
class SweepResult:
    sweep_var: str
    sweep_values: list[float]
    methods: list[str]
    cells: dict[tuple[str, float], SweepCell]
    rows: list[dict]

    def cell(self, method: str, sweep_value: float) -> SweepCell:
        return self.cells[(method, float(sweep_value))]


def _sweep_points(spec: ExperimentSpec) -> list[tuple[float, ScenarioConfig, SystemDims]]:
    if spec.sweep == "pmax":
        return [
            (float(v), replace(spec.scenario, p_max_watts=10.0 ** ((v - 30.0) / 10.0)), spec.dims)
            for v in spec.pmax_dbm
        ]
    if spec.sweep == "ni":
        return [(float(v), spec.scenario, replace(spec.dims, n_i=int(v))) for v in spec.ni_values]
    return [(float("nan"), spec.scenario, spec.dims)]


def run_sweep(spec: ExperimentSpec, progress=None) -> SweepResult:
    """Solve every (sweep value, realization, method) cell and aggregate.

    Realization ``i`` uses channels and solver init derived from
    ``(scenario.seed, i)``; methods share the realization.  Failed solves
    (anything not 'converged') keep their row, are excluded from means, and
    are counted per cell.
    """
    points = _sweep_points(spec)
    rows: list[dict] = []
    cells: dict[tuple[str, float], SweepCell] = {}

    def one_realization(args):
        value, scenario, dims, i = args
        noise = noise_power_watts(scenario.noise_psd_dbm_hz, scenario.bandwidth_hz)
        p_norm = normalized_thresholds(scenario.p_k_watts, noise)
        ch = sample_channels(dims, scenario, i)
        out = []
        for method in spec.methods:
            res = solve_method(method, ch, p_norm, scenario.p_max_watts,
                               spec.solver, seed=(scenario.seed, i))
            out.append((method, value, i, res))
        return out

    jobs = [(value, scenario, dims, i)
            for value, scenario, dims in points
            for i in range(spec.realizations)]
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(one_realization, jobs))
    else:
        results = []
        for job in jobs:
            results.append(one_realization(job))
            if progress is not None:
                progress(f"{spec.sweep}={job[0]} realization={job[3]}")

    # stable aggregation: jobs are already ordered by (sweep point, realization)
    per_cell: dict[tuple[str, float], list[tuple[int, PddgpResult]]] = {}
    for group in results:
        for method, value, i, res in group:
            rows.append({
                "method": method,
                "sweep_var": spec.sweep,
                "sweep_value": value,
                "realization": i,
                "rate_nats": res.rate_nats,
                "rate_bps_hz": res.rate_nats / LN2,
                "iters_inner_total": res.inner_iterations,
                "iters_outer": res.outer_stages,
                "wall_ms": res.wall_s * 1e3,
                "max_ipc_residual": float(np.max(res.ipc_violation, initial=float("-inf"))) if res.p_norm.size else float("nan"),
                "termination": res.termination,
            })
            per_cell.setdefault((method, value), []).append((i, res))

    for (method, value), items in per_cell.items():
        items.sort(key=lambda t: t[0])
        rates = np.array([r.rate_nats if r.converged else float("nan") for _, r in items])
        cells[(method, value)] = SweepCell(
            method=method,
            sweep_value=value,
            rates_nats=rates,
            wall_ms=np.array([r.wall_s * 1e3 for _, r in items]),
            iters_inner=np.array([float(r.inner_iterations) for _, r in items]),
            failures=int(np.isnan(rates).sum()),
        )

    return SweepResult(
        sweep_var=spec.sweep,
        sweep_values=[p[0] for p in points],
        methods=list(spec.methods),
        cells=cells,
        rows=rows,
    )


def write_sweep_outputs(spec: ExperimentSpec, result: SweepResult) -> list[Path]:
    """Per-realization CSV, aggregated summary CSV, and JSON report."""
    prefix = _prefix_path(spec.out_prefix)
    csv_path = prefix.with_name(prefix.name + "_sweep.csv")
    summary_csv = prefix.with_name(prefix.name + "_sweep_summary.csv")
    json_path = prefix.with_name(prefix.name + "_sweep.json")

    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(row[c]) for c in SWEEP_COLUMNS) + "\n")

    with open(summary_csv, "w", newline="") as fh:
        fh.write(",".join(SWEEP_SUMMARY_COLUMNS) + "\n")
        for value in result.sweep_values:
            for method in result.methods:
                cell = result.cells[(method, value)]
                n = cell.rates_nats.size
                fh.write(",".join(_fmt(v) for v in (
                    method, result.sweep_var, value, n, cell.failures,
                    cell.mean_rate_nats, cell.std_rate_nats,
                    cell.mean_rate_nats / LN2, cell.std_rate_nats / LN2,
                    cell.mean_wall_ms, cell.mean_iters_inner,
                )) + "\n")

    report = {
        "command": "sweep",
        "config": config_echo(spec),
        "environment": environment_info(),
        "files": [str(csv_path), str(summary_csv)],
        "cells": [
            {
                "method": m,
                "sweep_var": result.sweep_var,
                "sweep_value": v,
                "realizations": int(result.cells[(m, v)].rates_nats.size),
                "failures": result.cells[(m, v)].failures,
                "rate_nats_mean": result.cells[(m, v)].mean_rate_nats,
                "rate_nats_std": result.cells[(m, v)].std_rate_nats,
                "rate_bps_hz_mean": result.cells[(m, v)].mean_rate_nats / LN2,
                "wall_ms_mean": result.cells[(m, v)].mean_wall_ms,
            }
            for v in result.sweep_values for m in result.methods
        ],
    }
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return [csv_path, summary_csv, json_path]


# --- convergence traces ------------------------------------------------------


def run_convergence(spec: ExperimentSpec) -> tuple[list[Path], list[PddgpResult]]:
    """One full solve per configured n_t; per-iteration trace CSVs plus JSON."""
    prefix = _prefix_path(spec.out_prefix)
    nt_list = spec.nt_values or (spec.dims.n_t,)
    noise = noise_power_watts(spec.scenario.noise_psd_dbm_hz, spec.scenario.bandwidth_hz)
    p_norm = normalized_thresholds(spec.scenario.p_k_watts, noise)
    files: list[Path] = []
    results: list[PddgpResult] = []
    runs = []
    for nt in nt_list:
        dims = replace(spec.dims, n_t=int(nt))
        ch = sample_channels(dims, spec.scenario, 0)
        res = pddgp(ch, p_norm, spec.scenario.p_max_watts, cfg=spec.solver,
                    seed=(spec.scenario.seed, 0))
        path = prefix.with_name(prefix.name + f"_convergence_nt{nt}.csv")
        res.trace.to_csv(path)
        files.append(path)
        results.append(res)
        runs.append({"n_t": int(nt), "file": str(path), **res.summary()})
    report = {
        "command": "convergence",
        "config": config_echo(spec),
        "environment": environment_info(),
        "files": [str(f) for f in files],
        "runs": runs,
    }
    json_path = prefix.with_name(prefix.name + "_convergence.json")
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    files.append(json_path)
    return files, results


# --- timing benchmark --------------------------------------------------------


def benchmark_scaling(spec: ExperimentSpec, iters: int = 30, warmup: int = 5) -> list[dict]:
    """Mean per-inner-iteration wall time and multiply count per n_i."""
    rows = []
    noise = noise_power_watts(spec.scenario.noise_psd_dbm_hz, spec.scenario.bandwidth_hz)
    p_norm = normalized_thresholds(spec.scenario.p_k_watts, noise)
    for ni in spec.benchmark_ni:
        dims = replace(spec.dims, n_i=int(ni))
        ch = sample_channels(dims, spec.scenario, 0)
        x0, theta0 = default_init(dims.n_t, dims.n_i, spec.scenario.p_max_watts,
                                  (spec.scenario.seed, 0))
        _, z_k = effective_channels(ch, theta0)
        s0 = slack_from_effective(z_k, x0, p_norm)
        dual = DualState(np.zeros(dims.k), spec.solver.rho0)
        warm = InnerState(x0, theta0, s0, spec.solver.mu0, spec.solver.alpha0)
        run_cfg = replace(spec.solver, max_inner_iters=warmup, inner_tol=1e-300)
        inner_apgm(ch, p_norm, spec.scenario.p_max_watts, dual, warm, run_cfg)
        run_cfg = replace(run_cfg, max_inner_iters=iters)
        t0 = time.perf_counter()
        res = inner_apgm(ch, p_norm, spec.scenario.p_max_watts, dual, warm, run_cfg)
        dt = (time.perf_counter() - t0) / res.iterations
        enable_flop_count()
        grad_theta(x0, theta0, s0, dual, ch, p_norm)
        multiplies = disable_flop_count()
        rows.append({
            "n_i": int(ni),
            "iterations": res.iterations,
            "inner_iter_ms_mean": dt * 1e3,
            "grad_theta_multiplies": multiplies,
        })
    return rows


def write_benchmark_outputs(spec: ExperimentSpec, rows: list[dict]) -> list[Path]:
    prefix = _prefix_path(spec.out_prefix)
    csv_path = prefix.with_name(prefix.name + "_benchmark.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(BENCHMARK_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in BENCHMARK_COLUMNS) + "\n")
    report = {
        "command": "benchmark",
        "config": config_echo(spec),
        "environment": environment_info(),
        "files": [str(csv_path)],
        "rows": rows,
    }
    json_path = prefix.with_name(prefix.name + "_benchmark.json")
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return [csv_path, json_path]


def _prefix_path(prefix: str) -> Path:
    p = Path(prefix)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def flop_model_grad_theta(dims: SystemDims) -> int:
    """Analytic multiply count; must equal the instrumented counter."""
    return flop_count_grad_theta(dims.n_t, dims.n_r, dims.n_p, dims.n_i, dims.k)
