import math

import numpy as np
import pytest

from graphforge import growth, stats
from graphforge.graph import Graph, measure_graph

ARCH1 = growth.ArchitectureModel(1.0)


def test_attempt_certain_success_adds_edge(rng):
    g = Graph.from_edges(3, [(0, 1)])
    ok, h = growth.attempt_entangle(g, 1, 2, ARCH1, rng)
    assert ok and h.edge_list() == [(0, 1), (1, 2)]
    ok, h = growth.attempt_entangle(h, 1, 2, ARCH1, rng)
    assert h.edge_list() == [(0, 1)]


def test_attempt_certain_failure_damages_only_targets(rng):
    g = Graph.chain(5)
    ok, h = growth.attempt_entangle(g, 1, 3, growth.ArchitectureModel(0.0), rng)
    assert not ok
    assert set(h.edge_list()) == set()
    g = Graph.from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    _, h = growth.attempt_entangle(g, 0, 5, growth.ArchitectureModel(0.0), rng)
    # damage is local: the surviving pieces keep their edges
    assert set(h.edge_list()) == {(1, 2), (3, 4)}


def test_failure_branch_matches_z_measurements(rng):
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    _, h = growth.attempt_entangle(g, 0, 2, growth.ArchitectureModel(0.0), rng)
    candidates = [measure_graph(measure_graph(g, 0, "Z", a), 2, "Z", b) for a in (1, -1) for b in (1, -1)]
    assert h in candidates


def test_attempt_success_fraction():
    rng = np.random.default_rng(4)
    arch = growth.ArchitectureModel(0.3)
    g = Graph.chain(2)
    n = 5000
    k = sum(growth.attempt_entangle(g, 0, 1, arch, rng)[0] for _ in range(n))
    assert stats.Estimate(k, n).agrees(0.3)


def test_parity_effect_and_connectivity(rng):
    arch = growth.ArchitectureModel(1.0, success_effect="parity")
    ok, h = growth.attempt_entangle(Graph.from_edges(2, []), 0, 1, arch, rng)
    assert ok and h.n == 2
    limited = growth.ArchitectureModel(1.0, connectivity=frozenset({frozenset((0, 1))}))
    with pytest.raises(growth.ConnectivityError):
        growth.attempt_entangle(Graph.chain(3), 0, 2, limited, rng)
    with pytest.raises(ValueError):
        growth.ArchitectureModel(1.2)


@pytest.mark.parametrize("p,L", [(1 / 3, 6), (0.5, 3), (0.8, 2)])
def test_single_join_mean(p, L):
    x = growth.single_join_samples(p, L, 100_000, seed=9)
    se = x.std(ddof=1) / math.sqrt(len(x))
    assert abs(x.mean() - growth.expected_join_length(p, L)) < 3 * se


def test_critical_length():
    assert growth.critical_length(1 / 3) == pytest.approx(2.0)
    assert growth.critical_length(0.5) == pytest.approx(1.0)
    assert growth.expected_join_length(0.5, 1) == pytest.approx(1.0)


def test_chain_at_unit_success_doubles():
    st = growth.run_chain_strategy(1.0, 100, np.random.default_rng(0))
    assert st.status == "target" and st.elapsed_steps == math.ceil(math.log2(100))
    assert st.final_size >= 100 and st.qubits_consumed == st.final_size


@pytest.mark.parametrize("policy", growth.POLICIES)
def test_chain_graph_tracking_consistent(policy):
    rng = np.random.default_rng(5)
    st = growth.run_chain_strategy(0.6, 16, rng, policy=policy, track_graph=True)
    assert st.extra["graph_consistent"]
    assert st.status in ("target", "exhausted")


def test_chain_budget_and_validation():
    st = growth.run_chain_strategy(0.0, 8, np.random.default_rng(1), bank=[1] * 64, max_rounds=1)
    assert st.status in ("budget", "exhausted")
    with pytest.raises(ValueError):
        growth.run_chain_strategy(0.5, 1, np.random.default_rng(1))
    with pytest.raises(ValueError):
        growth.run_chain_strategy(0.5, 4, np.random.default_rng(1), policy="greedy")


@pytest.mark.parametrize("k", [2, 4, 8])
def test_link_failure_rate(k):
    rng = np.random.default_rng(k)
    n = 20_000
    fails = sum(not growth.link_attempts(1 / 3, k, k, rng)[0] for _ in range(n))
    assert stats.Estimate(fails, n).agrees(growth.link_failure_probability(1 / 3, k))


def test_cross_strategy_extremes():
    st = growth.run_cross_strategy(1.0, 3, 4, np.random.default_rng(0))
    assert st.status == "complete" and st.extra["z_damaged"] == 0
    assert st.attempts == st.extra["links"] == 24
    st = growth.run_cross_strategy(0.0, 2, 3, np.random.default_rng(0))
    assert st.status == "link_failed" and st.extra["failed_links"] == 12


def test_cross_buffer_grows_as_p_falls():
    ks = [growth.buffer_for(p) for p in (0.9, 0.5, 0.2, 0.05)]
    assert ks == sorted(ks) and ks[0] < ks[-1]
    assert growth.link_failure_probability(0.2, growth.buffer_for(0.2)) <= 1e-3
    with pytest.raises(ValueError):
        growth.buffer_for(0.0)


def test_microcluster_accounting():
    st = growth.run_microcluster_strategy(1.0, 5, 2, np.random.default_rng(0))
    assert st.status == "complete" and st.qubits_consumed == 4 * 5
    led = st.extra["leaf_ledger"]
    assert all(v["burned"] == 0 and v["fused"] + v["leftover"] == 4 for v in led.values())
    st = growth.run_microcluster_strategy(0.4, 6, 3, np.random.default_rng(1))
    for v in st.extra["leaf_ledger"].values():
        assert v["burned"] + v["fused"] + v["leftover"] == 5
    assert sum(v["fused"] for v in st.extra["leaf_ledger"].values()) == 2 * st.successes


def test_percolation_extremes(rng):
    ok, lattice, st = growth.run_percolation(growth.PercolationConfig(16, 1.0, block=8, overlap=2), rng)
    assert ok and lattice is not None and st.status == "complete"
    ok, lattice, st = growth.run_percolation(growth.PercolationConfig(16, 0.0), rng)
    assert not ok and lattice is None
    with pytest.raises(ValueError):
        growth.PercolationConfig(8, 0.5, block=16)


def test_spanning_near_half():
    pstar = growth.critical_samples(64, 1000, seed=2)
    assert growth.spanning_curve(pstar, [0.5])[0] == pytest.approx(0.5, abs=0.05)


def test_spanning_matches_critical_samples():
    rng = np.random.default_rng(8)
    L = 12
    bonds = growth.lattice_bonds(L)
    for _ in range(20):
        u = rng.random(len(bonds))
        pc = growth.critical_bond_probability(L, u, bonds)
        assert growth.spans_left_right(L, u <= pc, bonds)
        assert not growth.spans_left_right(L, u < pc, bonds)


def test_threshold_stable_under_more_trials():
    a = growth.estimate_threshold([8, 16, 32], 300, seed=1)
    b = growth.estimate_threshold([8, 16, 32], 600, seed=1)
    assert abs(a.estimate - b.estimate) < 3 * math.hypot(a.error, b.error) + 0.005
