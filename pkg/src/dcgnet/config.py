"""Algorithm selection and per-algorithm parameters.

``AlgorithmConfig`` carries exactly the parameters the selected algorithm
needs; supplying parameters of another algorithm is rejected so that a
mis-typed flag never silently falls back to a default.

``default_config`` returns the benchmark parameter sets used by the EMSE
comparison runs (one set per strategy/algorithm pair).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import CgParams

ALGORITHMS = ("ccg", "mcg", "lms", "rls", "ap")
STRATEGIES = ("incremental", "diffusion")

#: Benchmark defaults per (strategy, algorithm): the parameter sets of the
#: standard comparison runs.
BENCHMARK_DEFAULTS = {
    ("incremental", "ccg"): {"lambda_f": 0.25, "eta": 0.15, "inner_iterations": 5},
    ("incremental", "mcg"): {"lambda_f": 0.25, "eta": 0.15},
    ("incremental", "lms"): {"mu": 0.005},
    ("incremental", "rls"): {"rls_lambda": 0.2},
    ("incremental", "ap"): {"mu": 0.06, "projection_order": 2},
    ("diffusion", "ccg"): {"lambda_f": 0.25, "eta": 0.25, "inner_iterations": 5},
    ("diffusion", "mcg"): {"lambda_f": 0.46, "eta": 0.45},
    ("diffusion", "lms"): {"mu": 0.0075},
    ("diffusion", "rls"): {"rls_lambda": 0.998},
    ("diffusion", "ap"): {"mu": 0.075, "projection_order": 2},
}


@dataclass(frozen=True)
class AlgorithmConfig:
    """Which algorithm to run and the parameters it needs.

    cg: CG parameters (``ccg``/``mcg`` only)
    mu: step size (``lms``/``ap`` only)
    rls_lambda: forgetting factor (``rls`` only)
    projection_order: regressor block size (``ap`` only)
    ap_ridge: diagonal load of the affine-projection system (``ap`` only)
    """

    algorithm: str
    cg: CgParams | None = None
    mu: float | None = None
    rls_lambda: float | None = None
    projection_order: int | None = None
    ap_ridge: float = 1e-6

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        required = {
            "ccg": ("cg",),
            "mcg": ("cg",),
            "lms": ("mu",),
            "rls": ("rls_lambda",),
            "ap": ("mu", "projection_order"),
        }[self.algorithm]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"algorithm {self.algorithm!r} requires {name}")
        for name in ("cg", "mu", "rls_lambda", "projection_order"):
            if name not in required and getattr(self, name) is not None:
                raise ValueError(f"parameter {name!r} does not apply to {self.algorithm!r}")
        if self.algorithm == "rls" and not 0.0 < self.rls_lambda <= 1.0:
            raise ValueError(f"rls_lambda must be in (0, 1], got {self.rls_lambda}")
        if self.algorithm in ("lms", "ap") and self.mu < 0.0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if self.algorithm == "ap" and self.projection_order < 1:
            raise ValueError("projection_order must be >= 1")


def make_config(strategy: str, algorithm: str, **overrides) -> AlgorithmConfig:
    """Build an :class:`AlgorithmConfig` from benchmark defaults plus overrides.

    Overrides use flat parameter names (``lambda_f``, ``eta``,
    ``inner_iterations``, ``delta``, ``alpha_mode``, ``mu``, ``rls_lambda``,
    ``projection_order``, ``ap_ridge``).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    params = dict(BENCHMARK_DEFAULTS[(strategy, algorithm)])
    cg_keys = ("lambda_f", "eta", "inner_iterations", "delta", "alpha_mode")
    for key, value in overrides.items():
        if value is None:
            continue
        if key in cg_keys:
            if algorithm not in ("ccg", "mcg"):
                raise ValueError(f"parameter {key!r} does not apply to {algorithm!r}")
            params[key] = value
        elif key in ("mu", "rls_lambda", "projection_order", "ap_ridge"):
            params[key] = value
        else:
            raise ValueError(f"unknown parameter {key!r}")
    if algorithm in ("ccg", "mcg"):
        if algorithm == "mcg":
            params.pop("inner_iterations", None)
        cg = CgParams(**{k: v for k, v in params.items() if k in cg_keys})
        return AlgorithmConfig(algorithm=algorithm, cg=cg)
    kwargs = {k: v for k, v in params.items() if k in ("mu", "rls_lambda", "projection_order", "ap_ridge")}
    return AlgorithmConfig(algorithm=algorithm, **kwargs)
