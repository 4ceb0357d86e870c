"""Command-line entry point.

Subcommands map onto the experiment harness:

  pddgp solve CONFIG        one solve, JSON summary on stdout
  pddgp convergence CONFIG  per-iteration trace CSV per configured n_t
  pddgp sweep CONFIG        Monte-Carlo sweep CSVs (per-realization + summary)
  pddgp benchmark CONFIG    per-iteration timing vs element count

Exit codes: 0 success, 1 usage/config error, 2 infeasible or non-converged
solve.  All physical quantities in config files carry unit-suffixed keys.
"""

from __future__ import annotations

import json
import sys
from dataclasses import fields, replace
from pathlib import Path

import click

from .channel import noise_power_watts, normalized_thresholds, sample_channels
from .config import ConfigError, dims_from_mapping, load_config_file, scenario_from_mapping
from .experiments import (
    ExperimentSpec,
    benchmark_scaling,
    config_echo,
    environment_info,
    run_convergence,
    run_sweep,
    write_benchmark_outputs,
    write_sweep_outputs,
)
from .solver import SolverConfig, pddgp

_EXPERIMENT_KEYS = {"methods", "realizations", "sweep", "pmax_dbm", "ni", "nt",
                    "benchmark_ni", "out", "threads"}


def _solver_from_mapping(m: dict) -> SolverConfig:
    names = {f.name for f in fields(SolverConfig)}
    for key in m:
        if key not in names:
            raise ConfigError(f"solver: unknown key '{key}' (expected one of {sorted(names)})")
    kwargs = {}
    for key, val in m.items():
        kwargs[key] = int(val) if key.startswith("max_") or key.endswith("_cap") else float(val)
    return SolverConfig(**kwargs)


def _spec_from_file(config_path: str, seed, realizations, methods, out, threads) -> ExperimentSpec:
    raw = load_config_file(config_path)
    scenario = scenario_from_mapping(raw["scenario"])
    dims = dims_from_mapping(raw["dims"])
    solver = _solver_from_mapping(raw["solver"])
    exp = raw["experiment"]
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"experiment: unknown key '{key}' (expected one of {sorted(_EXPERIMENT_KEYS)})")
    # flag overrides take precedence over file values
    if seed is not None:
        scenario = replace(scenario, seed=int(seed))
    spec = ExperimentSpec(
        scenario=scenario,
        dims=dims,
        solver=solver,
        methods=tuple(methods.split(",")) if methods else tuple(exp.get("methods", ["pddgp"])),
        realizations=int(realizations if realizations is not None else exp.get("realizations", 20)),
        sweep=str(exp.get("sweep", "none")),
        pmax_dbm=tuple(float(v) for v in exp.get("pmax_dbm", [])),
        ni_values=tuple(int(v) for v in exp.get("ni", [])),
        nt_values=tuple(int(v) for v in exp.get("nt", [])),
        benchmark_ni=tuple(int(v) for v in exp.get("benchmark_ni", [64, 128, 256, 512])),
        out_prefix=str(out if out is not None else exp.get("out", "results/run")),
        threads=int(threads if threads is not None else exp.get("threads", 1)),
    )
    return spec


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _fail_config(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Rate maximization for IRS-assisted MIMO spectrum sharing."""


@main.command()
@click.argument("config_path", type=str)
@click.option("--seed", type=int, default=None, help="Override scenario seed.")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def solve(config_path: str, seed, quiet) -> None:
    """Run one solve on the configured scenario; JSON summary on stdout."""
    try:
        spec = _spec_from_file(config_path, seed, 1, None, None, 1)
    except ConfigError as exc:
        _fail_config(exc)
    noise = noise_power_watts(spec.scenario.noise_psd_dbm_hz, spec.scenario.bandwidth_hz)
    p_norm = normalized_thresholds(spec.scenario.p_k_watts, noise)
    ch = sample_channels(spec.dims, spec.scenario, 0)
    res = pddgp(ch, p_norm, spec.scenario.p_max_watts, cfg=spec.solver,
                seed=(spec.scenario.seed, 0))
    payload = {
        "command": "solve",
        "config": config_echo(spec),
        "environment": environment_info(),
        "files": [],
        **res.summary(),
    }
    _emit(payload)
    if not (res.converged and res.feasible):
        if not quiet:
            click.echo(f"infeasible or non-converged solve: {res.termination}", err=True)
        sys.exit(2)


@main.command()
@click.argument("config_path", type=str)
@click.option("--seed", type=int, default=None, help="Override scenario seed.")
@click.option("--out", type=str, default=None, help="Override output path prefix.")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def convergence(config_path: str, seed, out, quiet) -> None:
    """Per-iteration trace of one solve per configured n_t."""
    try:
        spec = _spec_from_file(config_path, seed, 1, None, out, 1)
    except ConfigError as exc:
        _fail_config(exc)
    files, results = run_convergence(spec)
    payload = json.loads(Path(files[-1]).read_text())
    _emit(payload)
    if not all(r.converged for r in results):
        if not quiet:
            click.echo("one or more runs did not converge", err=True)
        sys.exit(2)


@main.command()
@click.argument("config_path", type=str)
@click.option("--seed", type=int, default=None, help="Override scenario seed.")
@click.option("--realizations", type=int, default=None, help="Override realization count.")
@click.option("--methods", type=str, default=None, help="Comma-separated method list.")
@click.option("--out", type=str, default=None, help="Override output path prefix.")
@click.option("--threads", type=int, default=None, help="Parallel realizations (default 1).")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def sweep(config_path: str, seed, realizations, methods, out, threads, quiet) -> None:
    """Monte-Carlo sweep over pmax or element count, with baselines."""
    try:
        spec = _spec_from_file(config_path, seed, realizations, methods, out, threads)
        if spec.sweep == "none" and not quiet:
            click.echo("note: experiment.sweep is 'none'; single-point run", err=True)
    except ConfigError as exc:
        _fail_config(exc)
    progress = None if quiet else (lambda msg: click.echo(msg, err=True))
    result = run_sweep(spec, progress=progress)
    files = write_sweep_outputs(spec, result)
    payload = json.loads(files[-1].read_text())
    _emit(payload)


@main.command()
@click.argument("config_path", type=str)
@click.option("--seed", type=int, default=None, help="Override scenario seed.")
@click.option("--out", type=str, default=None, help="Override output path prefix.")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def benchmark(config_path: str, seed, out, quiet) -> None:
    """Per-inner-iteration timing across element counts."""
    try:
        spec = _spec_from_file(config_path, seed, 1, None, out, 1)
    except ConfigError as exc:
        _fail_config(exc)
    rows = benchmark_scaling(spec)
    files = write_benchmark_outputs(spec, rows)
    payload = json.loads(files[-1].read_text())
    _emit(payload)


if __name__ == "__main__":
    main()
