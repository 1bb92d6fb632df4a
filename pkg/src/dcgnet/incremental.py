"""Incremental (ring) cooperation: one pass over all nodes per time instant.

The running estimate travels around a Hamiltonian cycle; each node refines
it once per instant using its own datum and hands it to the next node.  The
second-order statistics (and, for the one-shot CG variant, the gradient and
direction) travel along the same ring and are carried across instants, so
the whole network behaves like a single filter fed the node-multiplexed
sample stream.  The network estimate at instant ``i`` is the value after the
last node's update.
"""

from __future__ import annotations

import numpy as np

from . import backend as _backend
from .config import AlgorithmConfig
from .filters import RLS_SEED, CcgFilter, LmsFilter, McgFilter, RlsFilter, ap_update


def validate_ring_order(order, n_nodes: int) -> np.ndarray:
    """Check that ``order`` is a permutation of ``0..n_nodes-1``."""
    order = np.asarray(order, dtype=np.intp)
    if order.shape != (n_nodes,) or not np.array_equal(np.sort(order), np.arange(n_nodes)):
        raise ValueError(f"ring order must be a permutation of 0..{n_nodes - 1}")
    return order


class RingNetwork:
    """Stateful incremental network: ``step`` processes one time instant.

    Parameters
    ----------
    taps: filter length M
    n_nodes: number of nodes N in the cycle
    config: algorithm selection and parameters
    ring_order: optional visiting permutation (default: node index order)
    """

    def __init__(self, taps: int, n_nodes: int, config: AlgorithmConfig, ring_order=None):
        if n_nodes < 1:
            raise ValueError("need at least one node")
        self.m = taps
        self.n_nodes = n_nodes
        self.config = config
        if ring_order is None:
            ring_order = np.arange(n_nodes)
        self.ring_order = validate_ring_order(ring_order, n_nodes)
        alg = config.algorithm
        if alg == "lms":
            self._filter = LmsFilter(taps, config.mu)
        elif alg == "rls":
            self._filter = RlsFilter(taps, config.rls_lambda)
        elif alg == "ccg":
            self._filter = CcgFilter(taps, config.cg)
        elif alg == "mcg":
            self._filter = McgFilter(taps, config.cg, data_reuse=True)
        else:  # ap: one shared estimate, one regressor history per node
            self._filter = None
            self._ap_w = np.zeros(taps, dtype=np.complex128)
            self._ap_hist = [[] for _ in range(n_nodes)]
            self.ap_skip_count = 0
        self.node_updates = 0
        self.inner_iterations = 0

    @property
    def omega(self) -> np.ndarray:
        """Current network estimate."""
        if self.config.algorithm == "ap":
            return self._ap_w.copy()
        return self._filter.w.copy()

    def step(self, x_nodes, d_nodes, trace: bool = False):
        """Process one instant: ``x_nodes`` is (N, M), ``d_nodes`` is (N,).

        With ``trace=True`` also returns the hand-off estimates, one per
        visited node in ring order (node k's update sees exactly the
        estimate left by node k-1 and nothing later).
        """
        x_nodes = np.asarray(x_nodes, dtype=np.complex128)
        d_nodes = np.asarray(d_nodes, dtype=np.complex128)
        if x_nodes.shape != (self.n_nodes, self.m) or d_nodes.shape != (self.n_nodes,):
            raise ValueError("sample block does not match the network dimensions")
        handoffs = [] if trace else None
        if self.config.algorithm == "ap":
            self._step_ap(x_nodes, d_nodes, handoffs)
        else:
            for k in self.ring_order:
                self._filter.update(x_nodes[k], d_nodes[k])
                if trace:
                    handoffs.append(self._filter.w.copy())
        self.node_updates += self.n_nodes
        if self.config.algorithm == "ccg":
            self.inner_iterations = self._filter.inner_iterations_run
        elif self.config.algorithm == "mcg":
            self.inner_iterations = self.node_updates
        if trace:
            return self.omega, handoffs
        return self.omega

    def _step_ap(self, x_nodes, d_nodes, handoffs=None):
        cfg = self.config
        for k in self.ring_order:
            hist = self._ap_hist[k]
            hist.insert(0, (x_nodes[k].copy(), complex(d_nodes[k])))
            del hist[cfg.projection_order:]
            X = np.stack([h[0] for h in hist], axis=1)
            dvec = np.array([h[1] for h in hist], dtype=np.complex128)
            self._ap_w, skipped = ap_update(self._ap_w, X, dvec, cfg.mu, cfg.ap_ridge)
            if skipped:
                self.ap_skip_count += 1
            if handoffs is not None:
                handoffs.append(self._ap_w.copy())


def _run_python(x, d, config: AlgorithmConfig, ring_order) -> tuple[np.ndarray, dict]:
    instants, n_nodes, m = x.shape
    net = RingNetwork(m, n_nodes, config, ring_order)
    est = np.empty((instants, m), dtype=np.complex128)
    for t in range(instants):
        est[t] = net.step(x[t], d[t])
    events = {"node_updates": net.node_updates, "inner_iterations": net.inner_iterations}
    if config.algorithm == "ap":
        events["ap_skips"] = net.ap_skip_count
    return est, events


def _run_compiled(x, d, config: AlgorithmConfig, ring_order) -> tuple[np.ndarray, dict]:
    k = _backend.kernels()
    order = validate_ring_order(ring_order, x.shape[1]) if ring_order is not None else None
    if order is not None and not np.array_equal(order, np.arange(x.shape[1])):
        x = np.ascontiguousarray(x[:, order, :])
        d = np.ascontiguousarray(d[:, order])
    else:
        x = np.ascontiguousarray(x)
        d = np.ascontiguousarray(d)
    instants, n_nodes, _ = x.shape
    alg = config.algorithm
    events = {"node_updates": instants * n_nodes, "inner_iterations": 0}
    if alg == "lms":
        est = k.incremental_lms(x, d, config.mu)
    elif alg == "rls":
        est = k.incremental_rls(x, d, config.rls_lambda, RLS_SEED)
    elif alg == "ap":
        est, skips = k.incremental_ap(x, d, config.mu, config.projection_order, config.ap_ridge)
        events["ap_skips"] = int(skips)
    elif alg == "ccg":
        cg = config.cg
        est, iters = k.incremental_ccg(
            x, d, cg.lambda_f, cg.eta, cg.inner_iterations, cg.delta, cg.alpha_mode == "classic"
        )
        events["inner_iterations"] = int(iters)
    else:
        cg = config.cg
        est = k.incremental_mcg(x, d, cg.lambda_f, cg.eta, cg.delta)
        events["inner_iterations"] = instants * n_nodes
    return est, events


def run_incremental(x, d, config: AlgorithmConfig, ring_order=None, backend=None):
    """Run a full incremental trajectory.

    Parameters
    ----------
    x: complex array (instants, nodes, taps) of per-node inputs
    d: complex array (instants, nodes) of per-node desired samples
    config: algorithm selection and parameters
    ring_order: optional node-visiting permutation
    backend: ``"compiled"``, ``"python"`` or ``None``/"auto"

    Returns
    -------
    est: (instants, taps) network estimate after each instant
    events: executed-work counters (node updates, CG inner iterations, ...)
    """
    x = np.asarray(x, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    if x.ndim != 3 or d.shape != x.shape[:2]:
        raise ValueError("expected x of shape (instants, nodes, taps) and matching d")
    which = _backend.resolve(backend)
    if which == "compiled":
        return _run_compiled(x, d, config, ring_order)
    return _run_python(x, d, config, ring_order)
