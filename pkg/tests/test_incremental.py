"""Tests for the ring (incremental) cooperation strategies."""

import numpy as np
import pytest

from dcgnet.config import make_config
from dcgnet.core import CgParams
from dcgnet.filters import ApFilter, CcgFilter, LmsFilter, McgFilter, RlsFilter
from dcgnet.incremental import RingNetwork, run_incremental, validate_ring_order

ALL_ALGORITHMS = ("lms", "rls", "ap", "ccg", "mcg")


def make_data(rng, t, n, m, noise=0.03):
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w /= np.linalg.norm(w)
    x = (rng.standard_normal((t, n, m)) + 1j * rng.standard_normal((t, n, m))) / np.sqrt(2)
    nn = noise * (rng.standard_normal((t, n)) + 1j * rng.standard_normal((t, n))) / np.sqrt(2)
    d = x @ np.conj(w) + nn
    return w, x, d


def reference_filter(algorithm, m):
    cfg = make_config("incremental", algorithm)
    if algorithm == "lms":
        return LmsFilter(m, cfg.mu)
    if algorithm == "rls":
        return RlsFilter(m, cfg.rls_lambda)
    if algorithm == "ccg":
        return CcgFilter(m, cfg.cg)
    if algorithm == "mcg":
        return McgFilter(m, cfg.cg)
    return ApFilter(m, cfg.mu, cfg.projection_order, cfg.ap_ridge)


@pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
def test_single_node_ring_bit_matches_single_filter(algorithm):
    """A one-node network is exactly the plain single filter."""
    rng = np.random.default_rng(30)
    _, x, d = make_data(rng, 60, 1, 5)
    cfg = make_config("incremental", algorithm)
    est, _ = run_incremental(x, d, cfg, backend="python")
    f = reference_filter(algorithm, 5)
    for t in range(60):
        f.update(x[t, 0], d[t, 0])
        assert np.array_equal(est[t], f.w)


@pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
def test_all_zero_samples_are_a_fixed_point(algorithm):
    cfg = make_config("incremental", algorithm)
    x = np.zeros((5, 3, 4), dtype=complex)
    d = np.zeros((5, 3), dtype=complex)
    est, _ = run_incremental(x, d, cfg, backend="python")
    assert np.array_equal(est, np.zeros_like(est))


def test_mcg_replay_two_nodes_equals_one_node_doubled():
    """The ring chain is the node-multiplexed sample stream, step for step."""
    rng = np.random.default_rng(31)
    _, x, d = make_data(rng, 40, 2, 4)
    cfg = make_config("incremental", "mcg")
    est2, _ = run_incremental(x, d, cfg, backend="python")
    x1 = x.reshape(80, 1, 4)
    d1 = d.reshape(80, 1)
    est1, _ = run_incremental(x1, d1, cfg, backend="python")
    # the two-node estimate after instant t equals the one-node estimate
    # after sample 2t+1
    assert np.array_equal(est2, est1[1::2])


@pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
def test_ring_determinism(algorithm):
    rng = np.random.default_rng(32)
    _, x, d = make_data(rng, 20, 4, 4)
    cfg = make_config("incremental", algorithm)
    a, ev_a = run_incremental(x, d, cfg, backend="python")
    b, ev_b = run_incremental(x, d, cfg, backend="python")
    assert np.array_equal(a, b)
    assert ev_a == ev_b


@pytest.mark.parametrize("algorithm", ALL_ALGORITHMS)
def test_handoff_reads_only_earlier_nodes(algorithm):
    """Poisoning a later node's datum cannot change earlier hand-offs."""
    rng = np.random.default_rng(33)
    _, x, d = make_data(rng, 3, 4, 3)
    x_poisoned = x.copy()
    d_poisoned = d.copy()
    x_poisoned[-1, 3] += 100.0
    d_poisoned[-1, 3] -= 50.0j
    cfg = make_config("incremental", algorithm)
    net_a = RingNetwork(3, 4, cfg)
    net_b = RingNetwork(3, 4, cfg)
    for t in range(2):
        net_a.step(x[t], d[t])
        net_b.step(x_poisoned[t], d_poisoned[t])
    _, trace_a = net_a.step(x[2], d[2], trace=True)
    _, trace_b = net_b.step(x_poisoned[2], d_poisoned[2], trace=True)
    for k in range(3):
        assert np.array_equal(trace_a[k], trace_b[k])
    assert not np.allclose(trace_a[3], trace_b[3])


def test_mcg_single_iteration_per_node_per_instant():
    rng = np.random.default_rng(34)
    _, x, d = make_data(rng, 15, 4, 3)
    _, events = run_incremental(x, d, make_config("incremental", "mcg"), backend="python")
    assert events["inner_iterations"] == 15 * 4
    assert events["node_updates"] == 15 * 4


def test_ccg_inner_iteration_budget():
    rng = np.random.default_rng(35)
    _, x, d = make_data(rng, 10, 3, 3)
    cfg = make_config("incremental", "ccg", inner_iterations=4)
    _, events = run_incremental(x, d, cfg, backend="python")
    assert events["inner_iterations"] == 10 * 3 * 4


def test_ring_order_permutes_visits():
    rng = np.random.default_rng(36)
    _, x, d = make_data(rng, 12, 3, 4)
    cfg = make_config("incremental", "mcg")
    order = np.array([2, 0, 1])
    est_a, _ = run_incremental(x, d, cfg, ring_order=order, backend="python")
    est_b, _ = run_incremental(x[:, order, :], d[:, order], cfg, backend="python")
    assert np.array_equal(est_a, est_b)


def test_ring_order_validation():
    with pytest.raises(ValueError, match="permutation"):
        validate_ring_order([0, 0, 1], 3)
    with pytest.raises(ValueError, match="permutation"):
        validate_ring_order([0, 1], 3)
    validate_ring_order([2, 1, 0], 3)


def test_noise_free_convergence_all_algorithms():
    rng = np.random.default_rng(37)
    w, x, d = make_data(rng, 400, 5, 4, noise=0.0)
    for algorithm in ALL_ALGORITHMS:
        est, _ = run_incremental(x, d, make_config("incremental", algorithm), backend="python")
        assert np.linalg.norm(est[-1] - w) < 1e-3, algorithm


def test_shape_validation():
    cfg = make_config("incremental", "lms")
    with pytest.raises(ValueError):
        run_incremental(np.zeros((3, 2, 4)), np.zeros((3, 3)), cfg, backend="python")
    net = RingNetwork(4, 2, cfg)
    with pytest.raises(ValueError):
        net.step(np.zeros((3, 4)), np.zeros(3))
