"""Command-line front end: configuration, experiment dispatch, CSV emission.

Single runs write one CSV (``instant,emse_db,msd_db``) plus a ``.meta``
sidecar in a flat ``key=value`` format.  ``--compare`` runs several
algorithms on identical data streams (same master seed, same scenario) and
writes one CSV per algorithm, a merged table for overlay plotting and a
gnuplot script.

Exit codes: 0 success, 2 usage/configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import backend as _backend
from .config import ALGORITHMS, STRATEGIES, make_config
from .simulate import ExperimentConfig, MetricSeries, Scenario, run_experiment

_USAGE_ERROR = 2
_RUNTIME_ERROR = 3

#: Tokens accepted by --compare, mapped to (strategy, algorithm).
_COMPARE_TOKENS = {
    f"{prefix}{alg}": (strategy, alg)
    for prefix, strategy in (("id", "incremental"), ("dd", "diffusion"))
    for alg in ALGORITHMS
}


class UsageError(ValueError):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    """Fully validated run description; round-trips through key=value text."""

    strategy: str = "incremental"
    algorithm: str = "mcg"
    compare: str = ""
    taps: int = 10
    nodes: int = 20
    instants: int = 1000
    repetitions: int = 1000
    input_variance: float = 1.0
    noise_variance: float = 0.001
    seed: int = 1
    lambda_f: float | None = None
    eta: float | None = None
    inner_iterations: int | None = None
    mu: float | None = None
    rls_lambda: float | None = None
    projection_order: int | None = None
    edge_prob: float | None = None
    redraw_topology: bool = False
    workers: int = 1
    backend: str = "auto"
    output: str = "results.csv"

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}
_FLOAT_KEYS = {
    "input_variance", "noise_variance", "lambda_f", "eta", "mu",
    "rls_lambda", "edge_prob",
}
_INT_KEYS = {"taps", "nodes", "instants", "repetitions", "seed", "inner_iterations",
             "projection_order", "workers"}
_BOOL_KEYS = {"redraw_topology"}


def _coerce(key: str, raw: str):
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _INT_KEYS:
        return int(raw)
    if key in _BOOL_KEYS:
        lowered = raw.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise UsageError(f"invalid boolean for {key}: {raw!r}")
    return raw.strip()


def read_config_file(path) -> dict:
    """Parse a flat key=value config file; unknown keys are rejected."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown configuration key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def _build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcgnet",
        description="Distributed adaptive estimation experiments over sensor networks",
    )
    parser.add_argument("--config", metavar="FILE", help="key=value config file; flags override it")
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--algorithm", choices=ALGORITHMS)
    parser.add_argument("--compare", metavar="LIST",
                        help="comma-separated algorithms (idlms,idccg,... or ddlms,...) run on identical streams")
    parser.add_argument("--taps", type=int, help="adaptive filter length M")
    parser.add_argument("--nodes", type=int, help="network size N")
    parser.add_argument("--instants", type=int, help="time instants per repetition")
    parser.add_argument("--repetitions", type=int, help="independent Monte-Carlo repetitions")
    parser.add_argument("--input-variance", type=float, dest="input_variance")
    parser.add_argument("--noise-variance", type=float, dest="noise_variance")
    parser.add_argument("--seed", type=int, help="master seed; reruns are byte-identical")
    parser.add_argument("--lambda-f", type=float, dest="lambda_f", help="CG forgetting factor")
    parser.add_argument("--eta", type=float, help="CG step scaling, within [lambda_f-0.5, lambda_f]")
    parser.add_argument("--inner-iterations", type=int, dest="inner_iterations",
                        help="conjugate-direction iterations per update (full-CG variant)")
    parser.add_argument("--mu", type=float, help="LMS/AP step size")
    parser.add_argument("--rls-lambda", type=float, dest="rls_lambda", help="RLS forgetting factor")
    parser.add_argument("--projection-order", type=int, dest="projection_order", help="AP block size K")
    parser.add_argument("--edge-prob", type=float, dest="edge_prob",
                        help="diffusion link probability (default targets mean degree 4)")
    parser.add_argument("--redraw-topology", action="store_true", default=None,
                        help="draw a fresh topology per repetition (default: fixed per run)")
    parser.add_argument("--workers", type=int, help="parallel repetition workers")
    parser.add_argument("--backend", choices=("auto", "compiled", "python"))
    parser.add_argument("--output", help="CSV output path (default results.csv)")
    return parser


def parse_config(argv) -> RunConfig:
    """Build a validated RunConfig from CLI flags and an optional config file."""
    args = _build_argparser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(RunConfig):
        cli_value = getattr(args, f.name, None)
        if cli_value is not None:
            values[f.name] = cli_value
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.compare:
        bad = [t for t in _split_compare(cfg.compare) if t not in _COMPARE_TOKENS]
        if bad:
            raise UsageError(f"unknown compare algorithms: {', '.join(bad)}")
        for key in ("lambda_f", "eta", "inner_iterations", "mu", "rls_lambda", "projection_order"):
            if getattr(cfg, key) is not None:
                raise UsageError(f"--{key.replace('_', '-')} conflicts with --compare; "
                                 "compare runs use each algorithm's benchmark defaults")
    # Algorithm parameters are validated by make_config / CgParams so band
    # violations carry the admissible interval in the message.
    try:
        if not cfg.compare:
            _algorithm_config(cfg, cfg.strategy, cfg.algorithm)
        Scenario(taps=cfg.taps, nodes=cfg.nodes, instants=cfg.instants,
                 input_variance=cfg.input_variance, noise_variance=cfg.noise_variance)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.repetitions < 1:
        raise UsageError("repetitions must be positive")
    if cfg.workers < 1:
        raise UsageError("workers must be positive")
    if cfg.backend not in ("auto", "compiled", "python"):
        raise UsageError(f"unknown backend {cfg.backend!r}")


def _split_compare(compare: str):
    return [token.strip().lower() for token in compare.split(",") if token.strip()]


def _algorithm_config(cfg: RunConfig, strategy: str, algorithm: str):
    overrides = {}
    for key in ("lambda_f", "eta", "inner_iterations", "mu", "rls_lambda", "projection_order"):
        value = getattr(cfg, key)
        if value is not None:
            overrides[key] = value
    return make_config(strategy, algorithm, **overrides)


def _experiment_config(cfg: RunConfig, strategy: str, algorithm: str, algo_cfg) -> ExperimentConfig:
    scenario = Scenario(taps=cfg.taps, nodes=cfg.nodes, instants=cfg.instants,
                        input_variance=cfg.input_variance, noise_variance=cfg.noise_variance)
    return ExperimentConfig(
        strategy=strategy,
        algorithm=algo_cfg,
        scenario=scenario,
        repetitions=cfg.repetitions,
        seed=cfg.seed,
        edge_prob=cfg.edge_prob,
        redraw_topology=cfg.redraw_topology,
        backend=None if cfg.backend == "auto" else cfg.backend,
        workers=cfg.workers,
    )


def _format_value(v: float) -> str:
    return f"{v:.12g}"


def write_metrics_csv(path, series: MetricSeries):
    lines = ["instant,emse_db,msd_db"]
    for i in range(series.emse_db.shape[0]):
        lines.append(f"{i + 1},{_format_value(series.emse_db[i])},{_format_value(series.msd_db[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_metadata(path, cfg: RunConfig, strategy: str, algorithm: str, series: MetricSeries, algo_cfg):
    pairs = {
        "strategy": strategy,
        "algorithm": algorithm,
        "taps": cfg.taps,
        "nodes": cfg.nodes,
        "instants": cfg.instants,
        "repetitions": series.repetitions,
        "input_variance": cfg.input_variance,
        "noise_variance": cfg.noise_variance,
        "seed": cfg.seed,
        "backend": _backend.resolve(None if cfg.backend == "auto" else cfg.backend),
        "adds": series.adds,
        "mults": series.mults,
    }
    if algo_cfg.cg is not None:
        pairs["lambda_f"] = algo_cfg.cg.lambda_f
        pairs["eta"] = algo_cfg.cg.eta
        if algorithm == "ccg":
            pairs["inner_iterations"] = algo_cfg.cg.inner_iterations
    if algo_cfg.mu is not None:
        pairs["mu"] = algo_cfg.mu
    if algo_cfg.rls_lambda is not None:
        pairs["rls_lambda"] = algo_cfg.rls_lambda
    if algo_cfg.projection_order is not None:
        pairs["projection_order"] = algo_cfg.projection_order
    if strategy == "diffusion":
        pairs["edge_prob"] = cfg.edge_prob if cfg.edge_prob is not None else "auto"
        pairs["redraw_topology"] = cfg.redraw_topology
    Path(path).write_text("\n".join(f"{k}={v}" for k, v in pairs.items()) + "\n")


def _gnuplot_script(path, csv_paths, labels):
    header = [
        "set datafile separator ','",
        "set xlabel 'time instant'",
        "set ylabel 'EMSE (dB)'",
        "set key outside",
    ]
    plots = ",\\\n".join(
        f"  '{csv}' using 1:2 every ::1 with lines title '{label}'"
        for csv, label in zip(csv_paths, labels)
    )
    Path(path).write_text("\n".join(header) + "\nplot \\\n" + plots + "\n")


def run_and_emit(cfg: RunConfig) -> int:
    """Execute the configured run(s) and write CSV/metadata files."""
    out = Path(cfg.output)
    if cfg.compare:
        tokens = _split_compare(cfg.compare)
        stem = out.with_suffix("")
        csv_paths, all_series = [], []
        for token in tokens:
            strategy, algorithm = _COMPARE_TOKENS[token]
            algo_cfg = make_config(strategy, algorithm)
            series = run_experiment(_experiment_config(cfg, strategy, algorithm, algo_cfg))
            csv_path = Path(f"{stem}_{token}.csv")
            write_metrics_csv(csv_path, series)
            write_metadata(csv_path.with_suffix(".meta"), cfg, strategy, algorithm, series, algo_cfg)
            csv_paths.append(csv_path)
            all_series.append(series)
        merged = Path(f"{stem}_merged.csv")
        header = "instant," + ",".join(f"{t}_emse_db" for t in tokens)
        rows = [header]
        for i in range(cfg.instants):
            row = [str(i + 1)] + [_format_value(s.emse_db[i]) for s in all_series]
            rows.append(",".join(row))
        merged.write_text("\n".join(rows) + "\n")
        _gnuplot_script(Path(f"{stem}.gp"), csv_paths, tokens)
        return 0
    algo_cfg = _algorithm_config(cfg, cfg.strategy, cfg.algorithm)
    series = run_experiment(_experiment_config(cfg, cfg.strategy, cfg.algorithm, algo_cfg))
    write_metrics_csv(out, series)
    write_metadata(out.with_suffix(".meta"), cfg, cfg.strategy, cfg.algorithm, series, algo_cfg)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_ERROR
    try:
        return run_and_emit(cfg)
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return _RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
