"""Complex-valued second-order statistics and conjugate-gradient step primitives.

Every estimator in this package is built from the same blocks: an
exponentially weighted pair of correlation estimates ``(R, b)`` and the
conjugate-direction steps that move a weight vector toward the solution of
``R w = b``.  Arithmetic is complex throughout; real-valued data is the
zero-imaginary-part special case.

Inner products use the convention ``a^H b = sum(conj(a) * b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Magnitude below which a quadratic form or squared gradient norm is
#: treated as numerically zero (convergence, not failure).
DEGENERATE_THRESHOLD = 1e-30

#: Default diagonal loading used to seed correlation estimates, mirroring
#: exponentially weighted RLS seeding; keeps R positive definite from the
#: first update on.
DEFAULT_DIAGONAL_LOAD = 1e-2


class DegenerateDirectionError(ArithmeticError):
    """A search direction or reference gradient has numerically vanished."""


class NormalEquationsError(RuntimeError):
    """Direct solution of ``R w = b`` failed or did not meet its tolerance."""


class RegressionSample(NamedTuple):
    """One node-time datum: complex input vector ``x``, complex desired ``d``."""

    x: np.ndarray
    d: complex


def as_vector(v, m: int | None = None) -> np.ndarray:
    """Coerce ``v`` to a complex 1-D array, optionally checking its length."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    if m is not None and v.shape[0] != m:
        raise ValueError(f"vector length mismatch: expected {m}, got {v.shape[0]}")
    return v


def as_matrix(a, m: int | None = None) -> np.ndarray:
    """Coerce ``a`` to a complex square matrix, optionally checking its size."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if m is not None and a.shape[0] != m:
        raise ValueError(f"matrix size mismatch: expected {m}, got {a.shape[0]}")
    return a


@dataclass(frozen=True)
class CgParams:
    """Parameters of the conjugate-gradient updates.

    ``eta`` scales the step size and must lie in the admissible band
    ``[lambda_f - 0.5, lambda_f]``.  ``inner_iterations`` is the number of
    conjugate-direction iterations per update (full-CG variants only; the
    one-shot variant ignores it).  ``delta`` is the diagonal load used to
    seed ``R``.  ``alpha_mode`` selects the step-size rule: ``"scaled"``
    (the default, ``eta * p^H g / p^H R p``) or ``"classic"``
    (``g^H g / p^H R p``).
    """

    eta: float
    lambda_f: float
    inner_iterations: int = 1
    delta: float = DEFAULT_DIAGONAL_LOAD
    alpha_mode: str = "scaled"

    def __post_init__(self):
        if not 0.0 < self.lambda_f <= 1.0:
            raise ValueError(f"lambda_f must be in (0, 1], got {self.lambda_f}")
        lo, hi = self.lambda_f - 0.5, self.lambda_f
        if not lo <= self.eta <= hi:
            raise ValueError(
                f"eta={self.eta} outside the admissible band [{lo}, {hi}] "
                f"for lambda_f={self.lambda_f}"
            )
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if self.alpha_mode not in ("scaled", "classic"):
            raise ValueError(f"unknown alpha_mode {self.alpha_mode!r}")


@dataclass
class SecondOrderState:
    """Running pair of exponentially weighted correlation estimates.

    ``R`` is the M x M Hermitian input correlation estimate and ``b`` the
    M x 1 input/desired cross-correlation estimate, both decayed by the
    forgetting factor ``lambda_f`` at every update.
    """

    R: np.ndarray
    b: np.ndarray
    lambda_f: float

    @classmethod
    def initial(cls, m: int, lambda_f: float, delta: float = DEFAULT_DIAGONAL_LOAD):
        """Fresh state with ``R = delta * I`` and ``b = 0``."""
        return cls(
            R=delta * np.eye(m, dtype=np.complex128),
            b=np.zeros(m, dtype=np.complex128),
            lambda_f=lambda_f,
        )

    @property
    def m(self) -> int:
        return self.b.shape[0]


@dataclass
class CgState:
    """Conjugate-gradient working set: estimate, negative gradient, direction."""

    psi: np.ndarray
    g: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, m: int):
        return cls(
            psi=np.zeros(m, dtype=np.complex128),
            g=np.zeros(m, dtype=np.complex128),
            p=np.zeros(m, dtype=np.complex128),
        )


def update_statistics(state: SecondOrderState, sample: RegressionSample) -> SecondOrderState:
    """Fold one sample into the exponentially weighted estimates.

    Returns a new state with ``R' = lambda_f * R + x x^H`` and
    ``b' = lambda_f * b + conj(d) * x``.  Hermitian symmetry of ``R`` is
    preserved exactly because the rank-one update is Hermitian by
    construction.
    """
    x = as_vector(sample.x, state.m)
    lam = state.lambda_f
    R = lam * state.R + np.outer(x, x.conj())
    b = lam * state.b + np.conj(sample.d) * x
    return SecondOrderState(R=R, b=b, lambda_f=lam)


def residual_gradient(R, b, omega) -> np.ndarray:
    """Negative gradient ``g = b - R omega`` of the quadratic cost at ``omega``."""
    R = as_matrix(R)
    b = as_vector(b, R.shape[0])
    omega = as_vector(omega, R.shape[0])
    return b - R @ omega


def step_size_alpha(p, g_prev, R, eta: float) -> complex:
    """Scaled conjugate-gradient step size ``eta * (p^H g_prev) / (p^H R p)``.

    Raises :class:`DegenerateDirectionError` when the quadratic form
    ``p^H R p`` is numerically zero; callers treat that as a reset/skip
    trigger rather than a failure.
    """
    p = as_vector(p)
    g_prev = as_vector(g_prev, p.shape[0])
    R = as_matrix(R, p.shape[0])
    den = np.vdot(p, R @ p)
    if abs(den) < DEGENERATE_THRESHOLD:
        raise DegenerateDirectionError("p^H R p is numerically zero")
    return complex(eta * np.vdot(p, g_prev) / den)


def beta_fletcher_reeves(g_new, g_prev) -> float:
    """Ratio of squared gradient norms ``||g_new||^2 / ||g_prev||^2``."""
    g_new = as_vector(g_new)
    g_prev = as_vector(g_prev, g_new.shape[0])
    den = float(np.real(np.vdot(g_prev, g_prev)))
    if den < DEGENERATE_THRESHOLD:
        raise DegenerateDirectionError("previous gradient has vanished")
    return float(np.real(np.vdot(g_new, g_new))) / den


def beta_polak_ribiere(g_new, g_prev) -> complex:
    """Polak-Ribiere coefficient ``((g_new - g_prev)^H g_new) / ||g_prev||^2``."""
    g_new = as_vector(g_new)
    g_prev = as_vector(g_prev, g_new.shape[0])
    den = float(np.real(np.vdot(g_prev, g_prev)))
    if den < DEGENERATE_THRESHOLD:
        raise DegenerateDirectionError("previous gradient has vanished")
    return complex(np.vdot(g_new - g_prev, g_new) / den)


def direction_update(g, beta, p, data_reuse_term=None) -> np.ndarray:
    """Next conjugate direction ``g + beta * p`` plus an optional reuse term.

    The one-shot incremental variant adds the instantaneous-error vector
    ``x (conj(d) - x^H psi)`` to the direction; pass it precomputed as
    ``data_reuse_term``.  Diffusion variants leave it absent.
    """
    g = as_vector(g)
    p = as_vector(p, g.shape[0])
    out = g + beta * p
    if data_reuse_term is not None:
        out = out + as_vector(data_reuse_term, g.shape[0])
    return out


def mcg_gradient_update(g_prev, alpha, R, p, sample: RegressionSample, psi_ref, lambda_f: float) -> np.ndarray:
    """Recursive negative-gradient update of the one-shot CG variant.

    Returns ``lambda_f * g_prev - alpha * R p + x (conj(d) - x^H psi_ref)``.
    With ``psi_ref`` equal to the pre-update estimate and ``R`` the
    post-update correlation estimate this keeps ``g`` equal to the exact
    residual ``b - R psi`` at every step.  The conjugate on ``d`` matches
    the cross-correlation convention of :func:`update_statistics`; the two
    cancel so the identity holds for complex data.
    """
    g_prev = as_vector(g_prev)
    m = g_prev.shape[0]
    R = as_matrix(R, m)
    p = as_vector(p, m)
    x = as_vector(sample.x, m)
    psi_ref = as_vector(psi_ref, m)
    err = np.conj(sample.d) - np.vdot(x, psi_ref)
    return lambda_f * g_prev - alpha * (R @ p) + x * err


def solve_normal_equations(R, b) -> np.ndarray:
    """Solve ``R w = b`` directly for Hermitian positive-definite ``R``.

    Used as the oracle against which the iterative solvers are tested.
    Raises :class:`NormalEquationsError` for singular or indefinite ``R``
    or when the residual exceeds ``1e-8 * ||b||``.
    """
    R = as_matrix(R)
    b = as_vector(b, R.shape[0])
    try:
        # Cholesky both certifies positive definiteness and rejects
        # non-Hermitian input cheaply.
        np.linalg.cholesky(0.5 * (R + R.conj().T))
        w = np.linalg.solve(R, b)
    except np.linalg.LinAlgError as exc:
        raise NormalEquationsError(f"normal-equation solve failed: {exc}") from exc
    resid = np.linalg.norm(R @ w - b)
    if resid > 1e-8 * max(np.linalg.norm(b), 1e-300):
        raise NormalEquationsError(f"residual {resid:.3e} exceeds tolerance")
    return w


def ccg_inner_solve(stats: SecondOrderState, psi0, params: CgParams) -> np.ndarray:
    """Run ``inner_iterations`` conjugate-direction steps on ``R w = b``.

    Starts from ``psi0`` with a fresh direction (``g(0) = b - R psi0``,
    ``p(1) = g(0)``) and returns the estimate after the final iteration.
    A numerically degenerate direction or vanished gradient ends the loop
    early and returns the current estimate.

    With ``eta = 1`` and ``inner_iterations = m`` this is exact CG and
    recovers the direct solution of the normal equations.
    """
    R, b = stats.R, stats.b
    w = as_vector(psi0, stats.m).copy()
    g = b - R @ w
    p = g.copy()
    rho = float(np.real(np.vdot(g, g)))
    for _ in range(params.inner_iterations):
        c = R @ p
        den = np.vdot(p, c)
        if abs(den) < DEGENERATE_THRESHOLD or rho < DEGENERATE_THRESHOLD:
            break
        if params.alpha_mode == "classic":
            alpha = rho / den
        else:
            alpha = params.eta * np.vdot(p, g) / den
        w += alpha * p
        g -= alpha * c
        rho_new = float(np.real(np.vdot(g, g)))
        beta = rho_new / rho
        p = g + beta * p
        rho = rho_new
    return w
