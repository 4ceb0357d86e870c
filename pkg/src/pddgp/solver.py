"""Penalty-dual-decomposition gradient-projection solver.

Inner loop (one "iteration" = one update of theta, x and s, in that order):

    theta_n = proj_phase(theta_{n-1} + mu_n * grad_theta(x_{n-1}, theta_{n-1}, s_{n-1}))
    x_n     = proj_cov(x_{n-1} + alpha_n * grad_x(x_{n-1}, theta_n, s_{n-1}))
    s_n     = argmax over s >= 0 of the penalized objective at (x_n, theta_n)

Step sizes come from a backtracking line search with a sufficient-increase
condition; each trial starts one growth step (mu_prev / gamma) above the
previously accepted step so steps can recover after a conservative phase.
Every block update is a non-decrease of the penalized objective, so the
recorded objective sequence is monotone for fixed multipliers.

Outer loop: solve the inner problem, update the multipliers
``upsilon_k += g_k / rho``, shrink ``rho *= kappa``; declare convergence
when |rate - penalized objective| < outer_tol at a point satisfying the
interference constraints within tolerance.  If the penalty floor is reached
first, the result carries an explicit infeasibility report.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import ChannelSet
from .gradients import grad_theta_from_effective, grad_x_from_effective
from .objective import (
    DualState,
    augmented_objective_from_effective,
    effective_channels,
    interference_from_effective,
    rate_from_effective,
    residuals_from_effective,
    validate_covariance,
    validate_phase,
)
from .projections import project_covariance, project_phase, slack_from_effective

_MU_MAX = 1e12  # keeps repeated growth steps finite when gradients vanish

TRACE_COLUMNS = ("iter", "outer_stage", "rho", "R_nats", "Rhat_nats",
                 "max_abs_g", "mu", "alpha", "wall_ms")


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of both loops; defaults follow the reference setup."""

    rho0: float = 10.0          # initial penalty parameter
    kappa: float = 0.1          # penalty decrease factor
    gamma: float = 0.5          # backtracking factor
    mu0: float = 1.0            # initial phase step
    alpha0: float = 1.0         # initial covariance step
    inner_tol: float = 1e-5     # relative-progress threshold
    outer_tol: float = 1e-5     # |R - Rhat| threshold, nats
    max_inner_iters: int = 2000
    max_outer_iters: int = 25
    rho_min: float = 1e-8
    line_search_cap: int = 50
    feasibility_rel_tol: float = 1e-5  # per-constraint, relative to p_k

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must be in (0, 1), got {self.kappa}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        for name in ("rho0", "mu0", "alpha0", "inner_tol", "outer_tol", "rho_min"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TraceRow:
    iter: int
    outer_stage: int
    rho: float
    r_nats: float
    rhat_nats: float
    max_abs_g: float
    tr_x: float
    mu: float
    alpha: float
    wall_s: float


@dataclass
class ConvergenceTrace:
    """Per-inner-iteration record across all outer stages."""

    rows: list[TraceRow] = field(default_factory=list)

    def rhat_series(self) -> np.ndarray:
        return np.array([r.rhat_nats for r in self.rows])

    def r_series(self) -> np.ndarray:
        return np.array([r.r_nats for r in self.rows])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(
                    f"{r.iter},{r.outer_stage},{r.rho!r},{r.r_nats!r},{r.rhat_nats!r},"
                    f"{r.max_abs_g!r},{r.mu!r},{r.alpha!r},{r.wall_s * 1e3!r}\n"
                )


@dataclass
class LineSearchStep:
    """Accepted step of one backtracking search."""

    step: float
    point: np.ndarray
    value: float
    stagnated: bool
    trials: int


def backtracking_search(
    f: Callable[[np.ndarray], float],
    point: np.ndarray,
    grad: np.ndarray,
    project: Callable[[np.ndarray], np.ndarray],
    f0: float,
    step_start: float,
    gamma: float,
    cap: int,
    hermitian: bool = False,
) -> LineSearchStep:
    """Projected-ascent backtracking.

    Shrinks the trial step by ``gamma`` until the sufficient-increase
    condition holds at cand = project(point + step * grad):

        vector case:    f(cand) >= f0 + 2 Re(grad^H d) - ||d||^2 / step
        hermitian case: f(cand) >= f0 + Re tr(grad d)  - ||d||_F^2 / (2 step)

    with d = cand - point.  In either geometry the projection inequality
    makes the right-hand side at least f0, so an accepted step never
    decreases the objective.  If ``cap`` trials all fail, the last candidate
    is returned flagged as stagnated.
    """
    step = step_start
    cand, val = point, f0
    for trial in range(1, cap + 1):
        cand = project(point + step * grad)
        d = cand - point
        sq = float(np.real(np.vdot(d, d)))
        if hermitian:
            linear = float(np.real(np.trace(grad @ d)))
            rhs = f0 + linear - sq / (2.0 * step)
        else:
            linear = 2.0 * float(np.real(np.vdot(grad, d)))
            rhs = f0 + linear - sq / step
        val = f(cand)
        if val >= rhs:
            return LineSearchStep(step, cand, val, False, trial)
        step *= gamma
    return LineSearchStep(step, cand, val, True, cap)


@dataclass
class _ThetaStep:
    step: float
    theta: np.ndarray
    z_r: np.ndarray
    z_k: np.ndarray
    value: float
    stagnated: bool
    trials: int


def line_search_theta(
    x: np.ndarray,
    theta: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    ch: ChannelSet,
    p_norm: np.ndarray,
    mu_prev: float,
    cfg: SolverConfig,
) -> LineSearchStep:
    """Backtracking phase step from ``theta``; trial starts at mu_prev/gamma."""
    z_r, z_k = effective_channels(ch, theta)
    f0 = augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)
    g = grad_theta_from_effective(z_r, z_k, x, s, dual, p_norm, ch)
    step = _theta_step(x, theta, s, dual, ch, p_norm, f0, g, mu_prev, cfg)
    return LineSearchStep(step.step, step.theta, step.value, step.stagnated, step.trials)


def _theta_step(
    x, theta, s, dual, ch, p_norm, f0, g, mu_prev, cfg
) -> _ThetaStep:
    cache: dict = {}

    def f(cand: np.ndarray) -> float:
        z_r, z_k = effective_channels(ch, cand)
        cache["z"] = (z_r, z_k)
        return augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)

    res = backtracking_search(
        f, theta, g, project_phase, f0,
        min(mu_prev / cfg.gamma, _MU_MAX), cfg.gamma, cfg.line_search_cap,
    )
    if res.stagnated and res.value < f0:
        # reject a worsening candidate: keep the block fixed this iteration
        z_r, z_k = effective_channels(ch, theta)
        return _ThetaStep(res.step, theta, z_r, z_k, f0, True, res.trials)
    z_r, z_k = cache["z"]
    return _ThetaStep(res.step, res.point, z_r, z_k, res.value, res.stagnated, res.trials)


def line_search_x(
    x: np.ndarray,
    theta: np.ndarray,
    s: np.ndarray,
    dual: DualState,
    ch: ChannelSet,
    p_norm: np.ndarray,
    p_max: float,
    alpha_prev: float,
    cfg: SolverConfig,
) -> LineSearchStep:
    """Backtracking covariance step at fixed ``theta``."""
    z_r, z_k = effective_channels(ch, theta)
    f0 = augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)
    return _x_step(z_r, z_k, x, s, dual, p_norm, p_max, f0, alpha_prev, cfg)


def _x_step(z_r, z_k, x, s, dual, p_norm, p_max, f0, alpha_prev, cfg) -> LineSearchStep:
    g = grad_x_from_effective(z_r, z_k, x, s, dual, p_norm)

    def f(cand: np.ndarray) -> float:
        return augmented_objective_from_effective(z_r, z_k, cand, s, dual, p_norm)

    res = backtracking_search(
        f, x, g, lambda w: project_covariance(w, p_max), f0,
        min(alpha_prev / cfg.gamma, _MU_MAX), cfg.gamma, cfg.line_search_cap,
        hermitian=True,
    )
    if res.stagnated and res.value < f0:
        return LineSearchStep(res.step, x, f0, True, res.trials)
    return res


@dataclass
class InnerState:
    """Warm-startable state of the inner loop."""

    x: np.ndarray
    theta: np.ndarray
    s: np.ndarray
    mu: float
    alpha: float


@dataclass
class InnerResult:
    state: InnerState
    rows: list[TraceRow]
    iterations: int
    converged: bool
    rhat: float


def inner_apgm(
    ch: ChannelSet,
    p_norm: np.ndarray,
    p_max: float,
    dual: DualState,
    warm: InnerState,
    cfg: SolverConfig,
    outer_stage: int = 1,
    iter_offset: int = 0,
    t0: float | None = None,
    freeze_theta: bool = False,
) -> InnerResult:
    """Alternating projected-gradient ascent for fixed multipliers/penalty.

    Stops when the relative progress |rhat_n - rhat_{n-1}| / (1 + |rhat_n|)
    falls below ``cfg.inner_tol`` or the iteration budget runs out.  The
    recorded rhat sequence is non-decreasing.
    """
    if t0 is None:
        t0 = time.perf_counter()
    p_norm = np.asarray(p_norm, dtype=float)
    x, theta, s = warm.x, warm.theta, np.asarray(warm.s, dtype=float)
    mu, alpha = warm.mu, warm.alpha
    z_r, z_k = effective_channels(ch, theta)
    rhat_prev = augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)
    rows: list[TraceRow] = []
    converged = False
    rhat = rhat_prev
    for n in range(1, cfg.max_inner_iters + 1):
        if freeze_theta:
            f_after_theta = rhat_prev
        else:
            g_th = grad_theta_from_effective(z_r, z_k, x, s, dual, p_norm, ch)
            th_step = _theta_step(x, theta, s, dual, ch, p_norm, rhat_prev, g_th, mu, cfg)
            theta, z_r, z_k, mu = th_step.theta, th_step.z_r, th_step.z_k, th_step.step
            f_after_theta = th_step.value

        x_step = _x_step(z_r, z_k, x, s, dual, p_norm, p_max, f_after_theta, alpha, cfg)
        x, alpha = x_step.point, x_step.step

        s = slack_from_effective(z_k, x, p_norm, dual)

        rhat = augmented_objective_from_effective(z_r, z_k, x, s, dual, p_norm)
        g = residuals_from_effective(z_k, x, s, p_norm)
        rows.append(TraceRow(
            iter=iter_offset + n,
            outer_stage=outer_stage,
            rho=dual.rho,
            r_nats=rate_from_effective(z_r, x),
            rhat_nats=rhat,
            max_abs_g=float(np.max(np.abs(g), initial=0.0)),
            tr_x=float(np.real(np.trace(x))),
            mu=mu,
            alpha=alpha,
            wall_s=time.perf_counter() - t0,
        ))
        if abs(rhat - rhat_prev) / (1.0 + abs(rhat)) < cfg.inner_tol:
            converged = True
            break
        rhat_prev = rhat
    return InnerResult(
        state=InnerState(x=x, theta=theta, s=s, mu=mu, alpha=alpha),
        rows=rows,
        iterations=len(rows),
        converged=converged,
        rhat=rhat,
    )


def default_init(
    n_t: int, n_i: int, p_max: float, seed: int | tuple[int, ...] = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Feasible starting point: uniform power split, random uniform phases."""
    x0 = (p_max / n_t) * np.eye(n_t, dtype=complex)
    key = (seed,) if isinstance(seed, int) else tuple(seed)
    rng = np.random.default_rng((*key, 77))
    theta0 = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n_i))
    return x0, theta0


@dataclass
class PddgpResult:
    """Solution, trace, and termination/feasibility report of one solve."""

    x: np.ndarray
    theta: np.ndarray
    s: np.ndarray
    upsilon: np.ndarray
    rho: float
    trace: ConvergenceTrace
    termination: str          # converged | penalty_floor | max_outer_iters
    feasible: bool
    rate_nats: float
    rhat_nats: float
    gap_nats: float
    ipc: np.ndarray           # tr(z_k x z_k^H), noise-normalized
    ipc_violation: np.ndarray # ipc - p_norm (positive = violated)
    p_norm: np.ndarray
    p_max: float
    outer_stages: int
    inner_iterations: int
    wall_s: float

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    def summary(self) -> dict:
        rel = self.ipc_violation / np.maximum(self.p_norm, np.finfo(float).tiny)
        return {
            "rate_nats": self.rate_nats,
            "rate_bps_hz": self.rate_nats / math.log(2.0),
            "rhat_nats": self.rhat_nats,
            "gap_nats": self.gap_nats,
            "termination": self.termination,
            "feasible": self.feasible,
            "outer_stages": self.outer_stages,
            "inner_iterations": self.inner_iterations,
            "wall_s": self.wall_s,
            "tr_x_watts": float(np.real(np.trace(self.x))),
            "p_max_watts": self.p_max,
            "rho_final": self.rho,
            "ipc_normalized": self.ipc.tolist(),
            "ipc_thresholds_normalized": self.p_norm.tolist(),
            "ipc_violation": self.ipc_violation.tolist(),
            "ipc_rel_violation": rel.tolist(),
            "upsilon": self.upsilon.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def pddgp(
    ch: ChannelSet,
    p_norm: np.ndarray,
    p_max: float,
    init: tuple[np.ndarray, np.ndarray] | None = None,
    cfg: SolverConfig | None = None,
    seed: int | tuple[int, ...] = 0,
    freeze_theta: bool = False,
) -> PddgpResult:
    """Full outer loop; see the module docstring for the scheme.

    ``init`` is an optional (x0, theta0) pair, feasible for the power budget
    and unit-modulus sets; by default :func:`default_init` is used with
    ``seed``.  Convergence requires both the rate/penalized-objective gap to
    close and the interference constraints to hold within the relative
    feasibility tolerance; anything else is reported explicitly.
    """
    cfg = cfg or SolverConfig()
    p_norm = np.asarray(p_norm, dtype=float)
    n_t = ch.h_tr.shape[1]
    n_i = ch.h_ti.shape[0]
    if init is None:
        init = default_init(n_t, n_i, p_max, seed)
    x0, theta0 = init
    validate_covariance(np.asarray(x0), p_max)
    validate_phase(np.asarray(theta0))
    dual = DualState(np.zeros(p_norm.size), cfg.rho0)
    _, z_k0 = effective_channels(ch, theta0)
    s0 = slack_from_effective(z_k0, x0, p_norm)  # upsilon = 0 at start
    state = InnerState(x=np.asarray(x0, dtype=complex), theta=np.asarray(theta0, dtype=complex),
                       s=s0, mu=cfg.mu0, alpha=cfg.alpha0)

    t0 = time.perf_counter()
    trace = ConvergenceTrace()
    termination = "max_outer_iters"
    stages = 0
    for stage in range(1, cfg.max_outer_iters + 1):
        stages = stage
        res = inner_apgm(ch, p_norm, p_max, dual, state, cfg,
                         outer_stage=stage, iter_offset=len(trace.rows), t0=t0,
                         freeze_theta=freeze_theta)
        state = res.state
        trace.rows.extend(res.rows)

        z_r, z_k = effective_channels(ch, state.theta)
        r = rate_from_effective(z_r, state.x)
        rhat = augmented_objective_from_effective(z_r, z_k, state.x, state.s, dual, p_norm)
        gap = abs(r - rhat)
        ipc = interference_from_effective(z_k, state.x)
        viol = ipc - p_norm
        feasible = bool(np.all(viol <= cfg.feasibility_rel_tol * p_norm))
        if gap < cfg.outer_tol and feasible:
            termination = "converged"
            break

        g = residuals_from_effective(z_k, state.x, state.s, p_norm)
        upsilon = dual.upsilon + g / dual.rho
        new_rho = cfg.kappa * dual.rho
        if new_rho < cfg.rho_min:
            dual = DualState(upsilon, dual.rho)
            termination = "penalty_floor"
            break
        dual = DualState(upsilon, new_rho)

    z_r, z_k = effective_channels(ch, state.theta)
    r = rate_from_effective(z_r, state.x)
    rhat = augmented_objective_from_effective(z_r, z_k, state.x, state.s, dual, p_norm)
    ipc = interference_from_effective(z_k, state.x)
    viol = ipc - p_norm
    feasible = bool(np.all(viol <= cfg.feasibility_rel_tol * p_norm))
    return PddgpResult(
        x=state.x,
        theta=state.theta,
        s=state.s,
        upsilon=dual.upsilon,
        rho=dual.rho,
        trace=trace,
        termination=termination,
        feasible=feasible,
        rate_nats=r,
        rhat_nats=rhat,
        gap_nats=abs(r - rhat),
        ipc=ipc,
        ipc_violation=viol,
        p_norm=p_norm,
        p_max=p_max,
        outer_stages=stages,
        inner_iterations=len(trace.rows),
        wall_s=time.perf_counter() - t0,
    )
