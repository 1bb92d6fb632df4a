"""Distributed adaptive parameter estimation over sensor networks.

Incremental (ring) and diffusion (combine-then-adapt) strategies built on
conjugate-gradient updates, with LMS, RLS and affine-projection baselines,
plus a Monte-Carlo harness for excess mean-square error benchmarking.

The hot per-node update loops run in a compiled extension when available
and fall back to a pure-NumPy implementation otherwise; see
:mod:`dcgnet.backend`.
"""

from .backend import HAVE_COMPILED, default_backend
from .config import ALGORITHMS, STRATEGIES, AlgorithmConfig, make_config
from .core import (
    CgParams,
    CgState,
    DegenerateDirectionError,
    NormalEquationsError,
    RegressionSample,
    SecondOrderState,
    beta_fletcher_reeves,
    beta_polak_ribiere,
    ccg_inner_solve,
    direction_update,
    mcg_gradient_update,
    residual_gradient,
    solve_normal_equations,
    step_size_alpha,
    update_statistics,
)
from .complexity import ap_budget, complexity_count, runtime_counts
from .diffusion import (
    DiffusionNetwork,
    TopologyGenerationError,
    TopologyGraph,
    combine_estimates,
    load_topology,
    metropolis_combiner,
    random_topology,
    run_diffusion,
    save_topology,
)
from .filters import ApFilter, CcgFilter, LmsFilter, McgFilter, RlsFilter
from .incremental import RingNetwork, run_incremental
from .simulate import (
    ExperimentConfig,
    MetricSeries,
    Scenario,
    draw_scenario,
    emse_at,
    run_experiment,
    steady_state_emse_db,
    to_db,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "STRATEGIES",
    "AlgorithmConfig",
    "ApFilter",
    "CcgFilter",
    "CgParams",
    "CgState",
    "DegenerateDirectionError",
    "DiffusionNetwork",
    "ExperimentConfig",
    "HAVE_COMPILED",
    "LmsFilter",
    "McgFilter",
    "MetricSeries",
    "NormalEquationsError",
    "RegressionSample",
    "RingNetwork",
    "RlsFilter",
    "Scenario",
    "SecondOrderState",
    "TopologyGenerationError",
    "TopologyGraph",
    "ap_budget",
    "beta_fletcher_reeves",
    "beta_polak_ribiere",
    "ccg_inner_solve",
    "combine_estimates",
    "complexity_count",
    "default_backend",
    "direction_update",
    "draw_scenario",
    "emse_at",
    "load_topology",
    "make_config",
    "mcg_gradient_update",
    "metropolis_combiner",
    "random_topology",
    "residual_gradient",
    "run_diffusion",
    "run_experiment",
    "run_incremental",
    "runtime_counts",
    "save_topology",
    "solve_normal_equations",
    "steady_state_emse_db",
    "step_size_alpha",
    "to_db",
    "update_statistics",
]
