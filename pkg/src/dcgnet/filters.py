"""Single-node adaptive filters.

Each class estimates an unknown weight vector from a stream of
``(x, d)`` pairs with ``d = w_o^H x + noise``.  These filters are the
per-node update engines of the distributed strategies: an incremental
network is one filter fed the node-multiplexed sample stream, and a
diffusion network runs one filter per node on combined estimates.
"""

from __future__ import annotations

import warnings
from collections import deque

import numpy as np

from . import core
from .core import CgParams, CgState, DegenerateDirectionError, RegressionSample

#: Default inverse-correlation seed of the least-squares filters:
#: ``P(0) = I / RLS_SEED``.  Large initial gain is the usual RLS seeding and
#: keeps the early estimate essentially the (unregularized) LS solution.
RLS_SEED = 1e-8


class LmsFilter:
    """Least-mean-squares filter ``w += mu * x * conj(d - w^H x)``."""

    def __init__(self, m: int, mu: float):
        self.m = m
        self.mu = mu
        self.reset()

    def reset(self):
        self.w = np.zeros(self.m, dtype=np.complex128)

    def update(self, x, d):
        x = core.as_vector(x, self.m)
        err = np.conj(d) - np.vdot(x, self.w)
        self.w = self.w + (self.mu * err) * x


class RlsFilter:
    """Exponentially weighted recursive least squares via rank-1 inverse updates.

    Parameters
    ----------
    m: filter length
    forgetting: forgetting factor in (0, 1]
    delta: inverse of the initial inverse-correlation scale, ``P(0) = I/delta``
    """

    def __init__(self, m: int, forgetting: float, delta: float = RLS_SEED):
        if not 0.0 < forgetting <= 1.0:
            raise ValueError(f"forgetting factor must be in (0, 1], got {forgetting}")
        self.m = m
        self.lam = forgetting
        self.delta = delta
        self.reinit_count = 0
        self.reset()

    def reset(self):
        self.w = np.zeros(self.m, dtype=np.complex128)
        self.P = np.eye(self.m, dtype=np.complex128) / self.delta

    def update(self, x, d):
        x = core.as_vector(x, self.m)
        pi = self.P @ x
        # Hermitian P makes x^H P x real; taking the real part keeps the
        # rank-1 update Hermitian under rounding.
        den = self.lam + float(np.real(np.vdot(x, pi)))
        if den <= 0.0:
            self.reinit_count += 1
            warnings.warn("inverse-correlation estimate went indefinite; reseeding")
            self.P = np.eye(self.m, dtype=np.complex128) / self.delta
            pi = self.P @ x
            den = self.lam + float(np.real(np.vdot(x, pi)))
        k = pi * (1.0 / den)
        err = np.conj(d) - np.vdot(x, self.w)
        self.w = self.w + k * err
        P = (self.P - np.outer(k, pi.conj())) * (1.0 / self.lam)
        # re-symmetrize: the rank-1 inverse update drifts off Hermitian under
        # rounding, which is what eventually makes it indefinite
        self.P = 0.5 * (P + P.conj().T)


def ap_update(w, X, d, mu: float, ridge: float):
    """One affine-projection step over the regressor block ``X`` (m x k).

    Solves the ridge-regularized k x k system and moves ``w`` by
    ``mu * X z``; returns ``(w_new, skipped)`` where ``skipped`` flags a
    singular system that left ``w`` unchanged.
    """
    err = np.conj(d) - X.conj().T @ w
    G = X.conj().T @ X + ridge * np.eye(X.shape[1])
    try:
        z = np.linalg.solve(G, err)
    except np.linalg.LinAlgError:
        return w, True
    return w + mu * (X @ z), False


class ApFilter:
    """Affine-projection filter of order ``k`` over the last ``k`` regressors."""

    def __init__(self, m: int, mu: float, order: int, ridge: float = 1e-6):
        if order < 1:
            raise ValueError("projection order must be >= 1")
        self.m = m
        self.mu = mu
        self.order = order
        self.ridge = ridge
        self.skip_count = 0
        self.reset()

    def reset(self):
        self.w = np.zeros(self.m, dtype=np.complex128)
        self.history: deque = deque(maxlen=self.order)

    def update(self, x, d):
        x = core.as_vector(x, self.m)
        self.history.appendleft((x, complex(d)))
        X = np.stack([h[0] for h in self.history], axis=1)
        dvec = np.array([h[1] for h in self.history], dtype=np.complex128)
        self.w, skipped = ap_update(self.w, X, dvec, self.mu, self.ridge)
        if skipped:
            self.skip_count += 1


class CcgFilter:
    """Conjugate-gradient filter re-solving its normal equations every sample.

    Each update folds the sample into the exponentially weighted ``(R, b)``
    pair and runs ``params.inner_iterations`` conjugate-direction steps from
    the current estimate with a fresh direction.
    """

    def __init__(self, m: int, params: CgParams):
        self.m = m
        self.params = params
        self.inner_iterations_run = 0
        self.reset()

    def reset(self):
        self.stats = core.SecondOrderState.initial(self.m, self.params.lambda_f, self.params.delta)
        self.w = np.zeros(self.m, dtype=np.complex128)

    def update(self, x, d):
        self.stats = core.update_statistics(self.stats, RegressionSample(x, d))
        self.w = core.ccg_inner_solve(self.stats, self.w, self.params)
        self.inner_iterations_run += self.params.inner_iterations

    def update_from(self, psi, x, d):
        """Update starting from an externally supplied estimate (network use)."""
        self.w = core.as_vector(psi, self.m)
        self.update(x, d)


class McgFilter:
    """One-shot conjugate-gradient filter with a recursively tracked gradient.

    A single conjugate-direction step per sample; the negative gradient is
    carried across samples so it stays equal to the exact residual
    ``b - R w``, and the direction is regenerated with the Polak-Ribiere
    coefficient plus an instantaneous-error reuse term.
    """

    def __init__(self, m: int, params: CgParams, data_reuse: bool = True):
        self.m = m
        self.params = params
        self.data_reuse = data_reuse
        self.reset()

    def reset(self):
        self.stats = core.SecondOrderState.initial(self.m, self.params.lambda_f, self.params.delta)
        self.w = np.zeros(self.m, dtype=np.complex128)
        self.g = self.stats.b.copy()
        self.p = self.g.copy()

    def update(self, x, d):
        self._step(self.w, x, d)

    def _step(self, psi_ref, x, d):
        """Single update from reference estimate ``psi_ref`` (may be ``self.w``)."""
        params = self.params
        sample = RegressionSample(core.as_vector(x, self.m), complex(d))
        self.stats = core.update_statistics(self.stats, sample)
        R = self.stats.R
        try:
            alpha = core.step_size_alpha(self.p, self.g, R, params.eta)
        except DegenerateDirectionError:
            alpha = 0.0
        self.w = psi_ref + alpha * self.p
        g_new = core.mcg_gradient_update(self.g, alpha, R, self.p, sample, psi_ref, params.lambda_f)
        try:
            beta = core.beta_polak_ribiere(g_new, self.g)
        except DegenerateDirectionError:
            beta = 0.0
        term = None
        if self.data_reuse:
            err = np.conj(sample.d) - np.vdot(sample.x, psi_ref)
            term = sample.x * err
        self.p = core.direction_update(g_new, beta, self.p, term)
        self.g = g_new

    def update_from(self, psi, x, d):
        """Update starting from an externally supplied estimate (network use)."""
        self._step(core.as_vector(psi, self.m), x, d)

    @property
    def state(self) -> CgState:
        """Snapshot of the conjugate-gradient working set."""
        return CgState(psi=self.w.copy(), g=self.g.copy(), p=self.p.copy())
