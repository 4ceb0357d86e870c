"""Rate-maximization toolkit for an IRS-assisted MIMO link that shares
spectrum with licensed receivers under interference-power limits.

The solver jointly optimizes the transmit covariance and the reflecting
surface's unit-modulus phase vector with a penalty-dual-decomposition
outer loop around an alternating projected-gradient inner loop.
"""

from .config import ConfigError, ScenarioConfig, SystemDims, default_scenario
from .channel import (
    ChannelSet,
    db_to_linear,
    linear_to_db,
    noise_power_watts,
    normalized_thresholds,
    path_loss_linear,
    sample_channels,
)
from .objective import (
    augmented_objective,
    constraint_residual,
    effective_channel_pr,
    effective_channel_sr,
    interference_power,
    rate,
)
from .gradients import finite_diff_gradient, finite_diff_gradient_hermitian, grad_theta, grad_x
from .projections import project_covariance, project_phase, update_slack
from .solver import (
    ConvergenceTrace,
    DualState,
    PddgpResult,
    SolverConfig,
    default_init,
    inner_apgm,
    pddgp,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "ConfigError",
    "ConvergenceTrace",
    "DualState",
    "PddgpResult",
    "ScenarioConfig",
    "SolverConfig",
    "SystemDims",
    "augmented_objective",
    "constraint_residual",
    "db_to_linear",
    "default_init",
    "default_scenario",
    "effective_channel_pr",
    "effective_channel_sr",
    "finite_diff_gradient",
    "finite_diff_gradient_hermitian",
    "grad_theta",
    "grad_x",
    "inner_apgm",
    "interference_power",
    "linear_to_db",
    "noise_power_watts",
    "normalized_thresholds",
    "path_loss_linear",
    "pddgp",
    "project_covariance",
    "project_phase",
    "rate",
    "sample_channels",
    "update_slack",
]
