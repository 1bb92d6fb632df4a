"""Diffusion cooperation: combine neighbor estimates, then adapt locally.

Each node holds its own estimate.  At every instant it forms a convex
combination of its neighborhood's previous-instant estimates (Metropolis
weights by default) and applies its local update to the combined value.
All nodes act on the same frozen snapshot, so the instant is a synchronous
two-phase step and the per-node updates are order-independent.
"""

from __future__ import annotations

import numpy as np

from . import backend as _backend
from . import core
from .config import AlgorithmConfig
from .core import DegenerateDirectionError, RegressionSample, SecondOrderState
from .filters import RLS_SEED, ap_update


class TopologyGenerationError(RuntimeError):
    """Could not draw a connected topology within the attempt budget."""


def _is_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


class TopologyGraph:
    """Undirected connected graph over ``n`` nodes.

    Stores a symmetric boolean adjacency with a zero diagonal; queried
    neighborhoods are closed (they include the node itself).
    """

    def __init__(self, adjacency):
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency must have a zero diagonal")
        if not _is_connected(adj):
            raise ValueError("graph must be connected")
        self.adjacency = adj

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighborhood(self, k: int) -> np.ndarray:
        """Closed neighborhood of node ``k`` (sorted, includes ``k``)."""
        nbrs = np.flatnonzero(self.adjacency[k])
        return np.sort(np.append(nbrs, k))

    def closed_degrees(self) -> np.ndarray:
        """Closed-neighborhood sizes, node plus its links."""
        return self.adjacency.sum(axis=1).astype(np.intp) + 1

    def is_connected(self) -> bool:
        return _is_connected(self.adjacency)

    def edges(self):
        """Sorted list of (k, l) pairs with k < l, 0-indexed."""
        rows, cols = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(rows.tolist(), cols.tolist()))


def random_topology(n: int, edge_prob: float, seed) -> TopologyGraph:
    """Draw a connected Erdos-Renyi graph, resampling up to 1000 times.

    ``seed`` may be an integer, ``SeedSequence`` or ``Generator``; the draw
    is deterministic for a fixed seed.
    """
    if not 0.0 < edge_prob <= 1.0:
        raise ValueError(f"edge_prob must be in (0, 1], got {edge_prob}")
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        upper = rng.random((n, n)) < edge_prob
        adj = np.triu(upper, 1)
        adj = adj | adj.T
        if n == 1 or _is_connected(adj):
            return TopologyGraph(adj)
    raise TopologyGenerationError(f"no connected graph in 1000 draws (n={n}, edge_prob={edge_prob})")


def metropolis_combiner(graph: TopologyGraph) -> np.ndarray:
    """Metropolis combination weights for a connected topology.

    Linked off-diagonal entries are ``1 / max(n_k, n_l)`` with ``n_k`` the
    closed-neighborhood size of node ``k``; the diagonal absorbs the
    remainder so every row sums to one.  The result is symmetric with all
    entries in [0, 1].
    """
    n = graph.n
    deg = graph.closed_degrees()
    C = np.zeros((n, n))
    for k in range(n):
        for l in np.flatnonzero(graph.adjacency[k]):
            C[k, l] = 1.0 / max(deg[k], deg[l])
        C[k, k] = 1.0 - C[k].sum()
    return C


def combine_estimates(weights, estimates) -> np.ndarray:
    """Convex combination ``sum_l weights[l] * estimates[l]`` of neighbor estimates."""
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or len(estimates) != weights.shape[0]:
        raise ValueError("one weight per supplied estimate is required")
    est = np.asarray(estimates, dtype=np.complex128)
    out = np.zeros(est.shape[1], dtype=np.complex128)
    for w, psi in zip(weights, est):
        out += w * psi
    return out


def save_topology(graph: TopologyGraph, path):
    """Write the edge-list text format: first line N, then 1-indexed 'k l' pairs."""
    lines = [str(graph.n)]
    lines += [f"{k + 1} {l + 1}" for k, l in graph.edges()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_topology(path) -> TopologyGraph:
    """Read the edge-list text format written by :func:`save_topology`."""
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError("empty topology file")
    n = int(tokens[0])
    pairs = tokens[1:]
    if len(pairs) % 2:
        raise ValueError("odd number of node indices in edge list")
    adj = np.zeros((n, n), dtype=bool)
    for a, b in zip(pairs[::2], pairs[1::2]):
        k, l = int(a) - 1, int(b) - 1
        if not (0 <= k < n and 0 <= l < n) or k == l:
            raise ValueError(f"invalid edge ({a}, {b}) for {n} nodes")
        adj[k, l] = adj[l, k] = True
    return TopologyGraph(adj)


def _combiner_support(C: np.ndarray):
    """Per-row nonzero indices and weights of a combination matrix."""
    supports = []
    for k in range(C.shape[0]):
        idx = np.flatnonzero(C[k])
        supports.append((idx, C[k, idx].copy()))
    return supports


def validate_combiner(C, graph: TopologyGraph | None = None, atol: float = 1e-12):
    """Check row-stochasticity, entry range and (optionally) graph support."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("combiner must be square")
    if np.any(C < -atol) or np.any(C > 1.0 + atol):
        raise ValueError("combiner entries must lie in [0, 1]")
    if np.max(np.abs(C.sum(axis=1) - 1.0)) > atol:
        raise ValueError("combiner rows must sum to one")
    if graph is not None:
        off_support = (np.abs(C) > 0) & ~np.eye(C.shape[0], dtype=bool)
        if np.any(off_support & ~graph.adjacency):
            raise ValueError("combiner uses links absent from the topology")
    return C


class DiffusionNetwork:
    """Stateful diffusion network: ``step`` processes one synchronous instant."""

    def __init__(self, taps: int, combiner, config: AlgorithmConfig):
        C = np.asarray(combiner, dtype=float)
        validate_combiner(C)
        self.m = taps
        self.n_nodes = C.shape[0]
        self.C = C
        self._support = _combiner_support(C)
        self.config = config
        self.psi = np.zeros((self.n_nodes, taps), dtype=np.complex128)
        alg = config.algorithm
        if alg in ("ccg", "mcg"):
            cg = config.cg
            self._stats = [SecondOrderState.initial(taps, cg.lambda_f, cg.delta) for _ in range(self.n_nodes)]
            if alg == "mcg":
                self._g = [s.b.copy() for s in self._stats]
                self._p = [g.copy() for g in self._g]
        elif alg == "rls":
            self._P = [np.eye(taps, dtype=np.complex128) / RLS_SEED for _ in range(self.n_nodes)]
        elif alg == "ap":
            self._hist = [[] for _ in range(self.n_nodes)]
            self.ap_skip_count = 0
        self.node_updates = 0
        self.inner_iterations = 0
        #: total linked neighbors (excluding self) used by combinations so far
        self.neighbor_links = 0

    def _combined(self, psi_prev):
        phi = np.empty_like(self.psi)
        for k in range(self.n_nodes):
            idx, w = self._support[k]
            acc = np.zeros(self.m, dtype=np.complex128)
            for j, l in enumerate(idx):
                acc += w[j] * psi_prev[l]
            phi[k] = acc
            self.neighbor_links += len(idx) - (1 if k in idx else 0)
        return phi

    def step(self, x_nodes, d_nodes, node_order=None) -> np.ndarray:
        """Process one instant; ``node_order`` only exercises order-independence."""
        x_nodes = np.asarray(x_nodes, dtype=np.complex128)
        d_nodes = np.asarray(d_nodes, dtype=np.complex128)
        if x_nodes.shape != (self.n_nodes, self.m) or d_nodes.shape != (self.n_nodes,):
            raise ValueError("sample block does not match the network dimensions")
        psi_prev = self.psi.copy()
        phi = self._combined(psi_prev)
        order = range(self.n_nodes) if node_order is None else node_order
        alg = self.config.algorithm
        for k in order:
            self.psi[k] = self._update_node(int(k), phi[int(k)], x_nodes[int(k)], d_nodes[int(k)])
        self.node_updates += self.n_nodes
        if alg == "ccg":
            self.inner_iterations += self.n_nodes * self.config.cg.inner_iterations
        elif alg == "mcg":
            self.inner_iterations += self.n_nodes
        return self.psi.copy()

    def _update_node(self, k: int, phi, x, d):
        cfg = self.config
        alg = cfg.algorithm
        if alg == "lms":
            err = np.conj(d) - np.vdot(x, phi)
            return phi + (cfg.mu * err) * x
        if alg == "rls":
            P = self._P[k]
            pi = P @ x
            den = cfg.rls_lambda + float(np.real(np.vdot(x, pi)))
            if den <= 0.0:
                P = np.eye(self.m, dtype=np.complex128) / RLS_SEED
                pi = P @ x
                den = cfg.rls_lambda + float(np.real(np.vdot(x, pi)))
            gain = pi * (1.0 / den)
            err = np.conj(d) - np.vdot(x, phi)
            P = (P - np.outer(gain, pi.conj())) * (1.0 / cfg.rls_lambda)
            self._P[k] = 0.5 * (P + P.conj().T)
            return phi + gain * err
        if alg == "ap":
            hist = self._hist[k]
            hist.insert(0, (x.copy(), complex(d)))
            del hist[cfg.projection_order:]
            X = np.stack([h[0] for h in hist], axis=1)
            dvec = np.array([h[1] for h in hist], dtype=np.complex128)
            w, skipped = ap_update(phi, X, dvec, cfg.mu, cfg.ap_ridge)
            if skipped:
                self.ap_skip_count += 1
            return w
        if alg == "ccg":
            self._stats[k] = core.update_statistics(self._stats[k], RegressionSample(x, d))
            return core.ccg_inner_solve(self._stats[k], phi, cfg.cg)
        # mcg: one conjugate step from the combined estimate, carried gradient
        stats = core.update_statistics(self._stats[k], RegressionSample(x, d))
        self._stats[k] = stats
        g, p = self._g[k], self._p[k]
        try:
            alpha = core.step_size_alpha(p, g, stats.R, cfg.cg.eta)
        except DegenerateDirectionError:
            alpha = 0.0
        psi_new = phi + alpha * p
        g_new = core.mcg_gradient_update(g, alpha, stats.R, p, RegressionSample(x, d), phi, cfg.cg.lambda_f)
        try:
            beta = core.beta_polak_ribiere(g_new, g)
        except DegenerateDirectionError:
            beta = 0.0
        self._p[k] = core.direction_update(g_new, beta, p)
        self._g[k] = g_new
        return psi_new


def _run_python(x, d, C, config: AlgorithmConfig) -> tuple[np.ndarray, dict]:
    instants, n_nodes, m = x.shape
    net = DiffusionNetwork(m, C, config)
    psi = np.empty((instants, n_nodes, m), dtype=np.complex128)
    for t in range(instants):
        psi[t] = net.step(x[t], d[t])
    events = {
        "node_updates": net.node_updates,
        "inner_iterations": net.inner_iterations,
        "neighbor_links": net.neighbor_links,
    }
    if config.algorithm == "ap":
        events["ap_skips"] = net.ap_skip_count
    return psi, events


def _run_compiled(x, d, C, config: AlgorithmConfig) -> tuple[np.ndarray, dict]:
    k = _backend.kernels()
    x = np.ascontiguousarray(x)
    d = np.ascontiguousarray(d)
    instants, n_nodes, _ = x.shape
    supports = _combiner_support(np.asarray(C, dtype=float))
    indptr = np.zeros(n_nodes + 1, dtype=np.intp)
    for i, (idx, _) in enumerate(supports):
        indptr[i + 1] = indptr[i] + len(idx)
    indices = np.concatenate([idx for idx, _ in supports]).astype(np.intp)
    weights = np.concatenate([w for _, w in supports])
    links = sum(len(idx) - (1 if i in idx else 0) for i, (idx, _) in enumerate(supports))
    events = {
        "node_updates": instants * n_nodes,
        "inner_iterations": 0,
        "neighbor_links": instants * links,
    }
    alg = config.algorithm
    if alg == "lms":
        psi = k.diffusion_lms(x, d, indptr, indices, weights, config.mu)
    elif alg == "rls":
        psi = k.diffusion_rls(x, d, indptr, indices, weights, config.rls_lambda, RLS_SEED)
    elif alg == "ap":
        psi, skips = k.diffusion_ap(x, d, indptr, indices, weights, config.mu, config.projection_order, config.ap_ridge)
        events["ap_skips"] = int(skips)
    elif alg == "ccg":
        cg = config.cg
        psi, iters = k.diffusion_ccg(
            x, d, indptr, indices, weights,
            cg.lambda_f, cg.eta, cg.inner_iterations, cg.delta, cg.alpha_mode == "classic",
        )
        events["inner_iterations"] = int(iters)
    else:
        cg = config.cg
        psi = k.diffusion_mcg(x, d, indptr, indices, weights, cg.lambda_f, cg.eta, cg.delta)
        events["inner_iterations"] = instants * n_nodes
    return psi, events


def run_diffusion(x, d, combiner, config: AlgorithmConfig, backend=None):
    """Run a full diffusion trajectory.

    Parameters
    ----------
    x: complex array (instants, nodes, taps) of per-node inputs
    d: complex array (instants, nodes) of per-node desired samples
    combiner: row-stochastic (nodes, nodes) combination matrix
    config: algorithm selection and parameters
    backend: ``"compiled"``, ``"python"`` or ``None``/"auto"

    Returns
    -------
    psi: (instants, nodes, taps) per-node estimates after each instant
    events: executed-work counters
    """
    x = np.asarray(x, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    if x.ndim != 3 or d.shape != x.shape[:2]:
        raise ValueError("expected x of shape (instants, nodes, taps) and matching d")
    C = validate_combiner(combiner)
    if C.shape[0] != x.shape[1]:
        raise ValueError("combiner size does not match the node count")
    which = _backend.resolve(backend)
    if which == "compiled":
        return _run_compiled(x, d, C, config)
    return _run_python(x, d, C, config)
