"""Scenario generation, Monte-Carlo execution and EMSE/MSD metrics.

A scenario is a stationary system-identification task: every node observes
``d = w_o^H x + n`` with its own i.i.d. circular complex Gaussian input and
noise, and all nodes share the unknown ``w_o`` (drawn unit-norm once per
repetition).  ``run_experiment`` averages the excess mean-square error and
mean-square deviation per instant across repetitions (and across nodes for
diffusion runs), using the a-priori convention: the estimate entering
instant ``i`` is the one produced at instant ``i - 1``.

Repetitions use child seeds spawned from the master seed by a fixed rule,
so results are reproducible bit-for-bit and independent of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import complexity
from .config import AlgorithmConfig
from .diffusion import metropolis_combiner, random_topology, run_diffusion
from .incremental import run_incremental

#: Reporting floor for dB conversion of (possibly zero) error powers.
DB_FLOOR = -120.0


@dataclass(frozen=True)
class Scenario:
    """Stationary system-identification scenario."""

    taps: int = 10
    nodes: int = 20
    instants: int = 1000
    input_variance: float = 1.0
    noise_variance: float = 0.001

    def __post_init__(self):
        if self.taps < 1 or self.nodes < 1 or self.instants < 1:
            raise ValueError("taps, nodes and instants must be positive")
        if self.input_variance <= 0.0 or self.noise_variance < 0.0:
            raise ValueError("input variance must be positive and noise variance nonnegative")


def draw_scenario(scenario: Scenario, rng: np.random.Generator):
    """Draw one repetition: returns ``(w_true, x, d)``.

    ``w_true`` is unit-norm complex; ``x`` has shape (instants, nodes, taps)
    with per-entry variance ``input_variance``; ``d = w_true^H x + noise``.
    """
    m, n, t = scenario.taps, scenario.nodes, scenario.instants
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w /= np.linalg.norm(w)
    x = np.sqrt(scenario.input_variance / 2.0) * (
        rng.standard_normal((t, n, m)) + 1j * rng.standard_normal((t, n, m))
    )
    noise = np.sqrt(scenario.noise_variance / 2.0) * (
        rng.standard_normal((t, n)) + 1j * rng.standard_normal((t, n))
    )
    d = x @ np.conj(w) + noise
    return w, x, d


def emse_at(omega_est, omega_true, input_variance: float) -> float:
    """Excess mean-square error ``input_variance * ||w_true - w_est||^2``.

    For i.i.d. inputs this equals the mean-square a-priori error beyond the
    noise floor, ``E |(w_true - w_est)^H x|^2``.
    """
    omega_est = np.asarray(omega_est, dtype=np.complex128)
    omega_true = np.asarray(omega_true, dtype=np.complex128)
    if omega_est.shape != omega_true.shape:
        raise ValueError("estimate and truth must have the same length")
    diff = omega_true - omega_est
    return float(input_variance * np.real(np.vdot(diff, diff)))


def to_db(values, floor: float = DB_FLOOR) -> np.ndarray:
    """Convert linear powers to dB, flooring at ``floor`` (zeros included)."""
    values = np.asarray(values, dtype=float)
    lin_floor = 10.0 ** (floor / 10.0)
    return 10.0 * np.log10(np.maximum(values, lin_floor))


@dataclass
class MetricSeries:
    """Per-instant EMSE/MSD (dB) averaged over repetitions, plus op counts."""

    emse_db: np.ndarray
    msd_db: np.ndarray
    adds: int
    mults: int
    repetitions: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    strategy: str
    algorithm: AlgorithmConfig
    scenario: Scenario = field(default_factory=Scenario)
    repetitions: int = 1000
    seed: int = 0
    edge_prob: float | None = None
    redraw_topology: bool = False
    ring_order: tuple | None = None
    backend: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.strategy not in ("incremental", "diffusion"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")


def _seed_tree(cfg: ExperimentConfig):
    """Fixed splitting rule: one topology seed (or one per repetition when
    redrawing) and one data seed per repetition, all derived from the master."""
    root = np.random.SeedSequence(cfg.seed)
    topo_ss, data_ss = root.spawn(2)
    if cfg.redraw_topology:
        topo_seeds = topo_ss.spawn(cfg.repetitions)
    else:
        topo_seeds = [topo_ss] * cfg.repetitions
    return topo_seeds, data_ss.spawn(cfg.repetitions)


def _effective_edge_prob(cfg: ExperimentConfig) -> float:
    if cfg.edge_prob is not None:
        return cfg.edge_prob
    n = cfg.scenario.nodes
    # mean degree ~= 4 by default, clipped into (0, 1]
    return min(1.0, 4.0 / max(n - 1, 1))


def _run_repetition(cfg: ExperimentConfig, rep: int, rep_seed, topo_seed):
    """One repetition: returns (emse_linear, msd_linear, events)."""
    sc = cfg.scenario
    rng = np.random.default_rng(rep_seed)
    w_true, x, d = draw_scenario(sc, rng)
    if cfg.strategy == "incremental":
        est, events = run_incremental(x, d, cfg.algorithm, ring_order=cfg.ring_order, backend=cfg.backend)
        prior = np.vstack([np.zeros((1, sc.taps), dtype=np.complex128), est[:-1]])
        diff = w_true[None, :] - prior
        sq = np.real(np.sum(diff * diff.conj(), axis=1))
    else:
        graph = random_topology(sc.nodes, _effective_edge_prob(cfg), np.random.default_rng(topo_seed))
        psi, events = run_diffusion(x, d, metropolis_combiner(graph), cfg.algorithm, backend=cfg.backend)
        prior = np.concatenate([np.zeros((1, sc.nodes, sc.taps), dtype=np.complex128), psi[:-1]])
        diff = w_true[None, None, :] - prior
        sq = np.real(np.sum(diff * diff.conj(), axis=2)).mean(axis=1)
    return sc.input_variance * sq, sq, events


def _worker(args):
    cfg, rep, rep_seed, topo_seed = args
    try:
        return _run_repetition(cfg, rep, rep_seed, topo_seed)
    except Exception as exc:
        raise RuntimeError(f"repetition {rep} failed: {exc}") from exc


def run_experiment(cfg: ExperimentConfig) -> MetricSeries:
    """Run all repetitions and aggregate metrics in fixed repetition order."""
    topo_seeds, rep_seeds = _seed_tree(cfg)
    jobs = [(cfg, r, rep_seeds[r], topo_seeds[r]) for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_worker, jobs, chunksize=max(1, cfg.repetitions // (4 * cfg.workers))))
    else:
        results = [_worker(job) for job in jobs]

    t = cfg.scenario.instants
    emse_acc = np.zeros(t)
    msd_acc = np.zeros(t)
    events_total: dict = {}
    for emse_lin, msd_lin, events in results:
        emse_acc += emse_lin
        msd_acc += msd_lin
        for key, value in events.items():
            events_total[key] = events_total.get(key, 0) + int(value)

    adds, mults = complexity.runtime_counts(
        cfg.strategy,
        cfg.algorithm.algorithm,
        cfg.scenario.taps,
        events_total,
        projection_order=cfg.algorithm.projection_order,
    )
    return MetricSeries(
        emse_db=to_db(emse_acc / cfg.repetitions),
        msd_db=to_db(msd_acc / cfg.repetitions),
        adds=adds,
        mults=mults,
        repetitions=cfg.repetitions,
    )


def steady_state_emse_db(series: MetricSeries, window: int = 100) -> float:
    """Mean of the last ``window`` per-instant EMSE values, in dB."""
    return float(np.mean(series.emse_db[-window:]))
