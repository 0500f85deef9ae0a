"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line and records it for the terminal
summary.  Run this file directly (``python3 tests/test_acceptance.py``) to
get just the eleven lines.
"""

from __future__ import annotations

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import (  # noqa: E402
    ACCEPTANCE_RESULTS,
    atlas_graphs,
    graph_form,
    labelled_graphs,
    random_jcz_circuit,
    same_state,
)

from graphforge import growth, mbqc, oracle, protocols, stats  # noqa: E402
from graphforge.graph import (  # noqa: E402
    Graph,
    graph_to_tableau,
    lc_equivalent,
    measure_graph,
    measurement_is_deterministic,
    parity_project,
    tableau_to_graph,
)
from graphforge.stabilizer import (  # noqa: E402
    StabilizerTableau,
    random_clifford_circuit,
    run_clifford_circuit,
    same_group,
)

SEED = 20240611


def criterion(k: int, name: str):
    def wrap(fn):
        @functools.wraps(fn)
        def test():
            try:
                detail = fn() or "ok"
            except AssertionError as exc:
                ACCEPTANCE_RESULTS[k] = (name, False, str(exc).splitlines()[0] if str(exc) else "assertion failed")
                print(f"FAIL [{k}] {name}: {ACCEPTANCE_RESULTS[k][2]}")
                raise
            ACCEPTANCE_RESULTS[k] = (name, True, detail)
            print(f"PASS [{k}] {name}: {detail}")

        test.criterion = k
        return test

    return wrap


def _constructive_tableau(n: int, edges) -> StabilizerTableau:
    circ = [{"gate": "H", "targets": [q]} for q in range(n)]
    circ += [{"gate": "CZ", "targets": [u, v]} for u, v in edges]
    return run_clifford_circuit(StabilizerTableau.zero_state(n), circ)[1]


@criterion(1, "graph-state generators for small graphs")
def test_criterion_01_generator_tables():
    t0 = time.perf_counter()
    cases = {
        "2-chain": (2, [(0, 1)], ["+XZ", "+ZX"]),
        "4-chain": (4, [(0, 1), (1, 2), (2, 3)], ["+XZII", "+ZXZI", "+IZXZ", "+IIZX"]),
        "5-vertex tree": (
            5,
            [(0, 1), (1, 2), (2, 3), (1, 4)],
            ["+XZIII", "+ZXZIZ", "+IZXZI", "+IIZXI", "+IZIIX"],
        ),
    }
    for label, (n, edges, want) in cases.items():
        g = Graph.from_edges(n, edges)
        got = graph_to_tableau(g).to_strings()
        assert got == want, f"{label}: generators {got} != {want}"
        assert same_group(_constructive_tableau(n, edges), graph_to_tableau(g)), f"{label}: circuit mismatch"
        psi = oracle.build_constructive_graph_state(g)
        worst = min(oracle.expectation(psi, w) for w in want)
        assert worst >= 1 - 1e-10, f"{label}: oracle expectation {worst}"
    # two-vertex wavefunction: (|0+> + |1->)/sqrt2
    plus, minus = oracle.PLUS, oracle.MINUS
    ref = oracle.from_amplitudes((np.kron(oracle.KET0, plus) + np.kron(oracle.KET1, minus)) / math.sqrt(2))
    assert same_state(oracle.build_constructive_graph_state(Graph.chain(2)), ref), "2-chain wavefunction"
    dt = time.perf_counter() - t0
    assert dt < 1.0, f"took {dt:.2f}s"
    return f"3 graphs exact, {dt * 1e3:.0f} ms"


@criterion(2, "tableau to graph conversion and LC witness")
def test_criterion_02_tableau_to_graph():
    t0 = time.perf_counter()
    t = StabilizerTableau.from_generators(["XX", "ZZ"])
    g = tableau_to_graph(t)
    assert g.edge_list() == [(0, 1)], f"edges {g.edge_list()}"
    tags = {v: g.vertex_word(v) for v in g.vertices if g.vertex_op(v)}
    assert len(tags) == 1 and "H" in next(iter(tags.values())), f"tags {tags}"
    bell = oracle.from_amplitudes(np.array([1, 0, 0, 1]) / math.sqrt(2))
    fid = oracle.overlap(oracle.build_constructive_graph_state(g), bell)
    assert fid > 1 - 1e-12, f"fidelity {fid}"
    res = lc_equivalent(Graph.chain(3), Graph.complete(3))
    assert res.equivalent and res.witness == [1], f"witness {res.witness}"
    assert time.perf_counter() - t0 < 1.0
    return f"fidelity {fid:.12f}; tags {tags}; witness LC at middle vertex"


def _pauli_rule_cases(max_n: int):
    for g in atlas_graphs(max_n):
        for a in g.vertices:
            for basis in "XYZ":
                det = measurement_is_deterministic(g, a, basis)
                for outcome in (1, -1):
                    if det and outcome != det:
                        continue
                    yield g, a, basis, outcome


@criterion(3, "Pauli measurement rules against the oracle")
def test_criterion_03_measurement_rules_exhaustive():
    t0 = time.perf_counter()
    count = 0
    for g, a, basis, outcome in _pauli_rule_cases(6):
        psi = oracle.build_constructive_graph_state(g)
        idx = g.vertices.index(a)
        _, post, prob = oracle.measure_site(psi, idx, oracle.pauli_basis(basis), forced=0 if outcome == 1 else 1)
        assert prob > 1e-12
        rule = measure_graph(g, a, basis, outcome)
        rest = [v for v in g.vertices if v != a]
        assert list(rule.vertices) == rest
        if rest:
            ref = graph_form(post, rest)
            assert lc_equivalent(rule, ref), f"{g.edge_list()} {basis}@{a} {outcome}: not LC-equivalent"
            got = oracle.build_constructive_graph_state(rule)
            assert same_state(got, post), f"{g.edge_list()} {basis}@{a} {outcome}: state differs"
        count += 1
    dt = time.perf_counter() - t0
    assert dt < 600, f"took {dt:.0f}s"
    return f"{count} (graph, vertex, basis, outcome) cases, {dt:.1f}s"


def _timed_random_run(n: int, seed: int) -> tuple[float, StabilizerTableau]:
    rng = np.random.default_rng(seed)
    circ = random_clifford_circuit(n, 100_000, 1000, rng)
    t = StabilizerTableau.zero_state(n)
    t0 = time.perf_counter()
    _, out = run_clifford_circuit(t, circ, rng)
    return time.perf_counter() - t0, out


@criterion(4, "tableau engine scaling")
def test_criterion_04_tableau_scaling():
    t1, out = _timed_random_run(1000, SEED)
    out.check_invariants()
    assert t1 < 10.0, f"n=1000 took {t1:.2f}s"
    t2, out2 = _timed_random_run(2000, SEED + 1)
    out2.check_invariants()
    ratio = t2 / t1
    assert ratio < 4 * 1.5, f"doubling n scaled time by {ratio:.2f}"
    return f"n=1000 {t1:.2f}s, n=2000 {t2:.2f}s (x{ratio:.2f}); invariants hold"


@criterion(5, "MBQC patterns are deterministic")
def test_criterion_05_mbqc_determinism():
    rng = np.random.default_rng(SEED)
    worst_pair, worst_target = 1.0, 1.0
    for c in range(100):
        n_wires = 1 + c % 2
        circ = random_jcz_circuit(rng, n_wires, int(rng.integers(1, 4)))
        mode = "bridge" if n_wires == 2 and c % 4 == 3 else "edge"
        p = mbqc.compile_circuit(circ, n_wires, cz_mode=mode)
        inp = mbqc.random_input(n_wires, rng)
        target = oracle.apply_unitary(inp, mbqc.circuit_unitary(circ, n_wires), list(range(n_wires)))
        outs = np.array([mbqc.run_pattern(p, inp, rng).corrected(p).normalized().amps for _ in range(100)])
        gram = np.abs(outs.conj() @ outs.T) ** 2
        worst_pair = min(worst_pair, float(gram.min()))
        worst_target = min(worst_target, float(np.min(np.abs(outs.conj() @ target.normalized().amps) ** 2)))
    assert worst_pair >= 1 - 1e-8, f"pairwise fidelity {worst_pair}"
    assert worst_target >= 1 - 1e-8, f"fidelity to circuit {worst_target}"
    return f"min pairwise {worst_pair:.12f}, min vs circuit {worst_target:.12f}"


@criterion(6, "single-click protocol statistics")
def test_criterion_06_single_click_grid():
    t0 = time.perf_counter()
    thetas = [0.1, 0.4, math.pi / 4]
    worst = 0.0
    for i, th in enumerate(thetas):
        for j, T in enumerate([0.2, 0.6, 1.0]):
            r = protocols.simulate(
                {"protocol": "cabrillo", "theta": th, "T": T}, trials=100_000, seed=SEED + 3 * i + j
            )
            p_succ = protocols.analytic("cabrillo_p1", th, T) + protocols.analytic("cabrillo_p2", th, T)
            eta = protocols.analytic("cabrillo_eta", th, T)
            k = round(r["success_rate"] * 100_000)
            est = stats.Estimate(k, 100_000)
            assert est.agrees(p_succ), f"theta={th:.3f} T={T}: rate {est.rate} vs {p_succ}"
            n_11 = r["branch_counts"].get("single:11", 0)
            eta_est = stats.Estimate(n_11, k)
            assert eta_est.agrees(eta), f"theta={th:.3f} T={T}: eta {eta_est.rate} vs {eta}"
            worst = max(worst, abs(est.rate - p_succ) / est.stderr, abs(eta_est.rate - eta) / eta_est.stderr)
            if i == 2 and j == 2:
                lo, hi = eta_est.ci95()
                assert lo <= 1 / 3 <= hi, f"eta(pi/4, 1) CI [{lo}, {hi}] misses 1/3"
    dt = time.perf_counter() - t0
    assert dt < 120, f"took {dt:.0f}s"
    return f"9 grid points within 3 sigma (worst {worst:.2f} sigma), {dt:.1f}s"


@criterion(7, "double-heralding protocol")
def test_criterion_07_double_heralding():
    out = []
    for n, T in enumerate([0.25, 0.5, 1.0]):
        w_bell, w_11 = protocols.double_heralding_round1_weights(T)
        assert abs(w_11 - (2 - T) / (4 - T)) < 1e-12 and abs(w_bell - 2 / (4 - T)) < 1e-12
        r = protocols.simulate({"protocol": "double_herald", "T": T}, trials=100_000, seed=SEED + n)
        exact = protocols.double_heralding_success_probability(T)
        assert abs(exact - T * T / 2) < 1e-12
        est = stats.Estimate(round(r["success_rate"] * 100_000), 100_000)
        assert est.agrees(exact), f"T={T}: success {est.rate} vs {exact}"
        r1 = sum(v for key, v in r["branch_counts"].items() if key.startswith("r1:single:"))
        r1_11 = sum(v for key, v in r["branch_counts"].items() if key.startswith("r1:single:11"))
        e11 = stats.Estimate(r1_11, r1)
        assert e11.agrees(w_11), f"T={T}: round-1 |11> weight {e11.rate} vs {w_11}"
        out.append(f"T={T}: {est.rate:.4f}~{exact:.4f}")
    rng = np.random.default_rng(SEED)
    worst, seen = 1.0, 0
    for _ in range(2000):
        h = protocols.run_double_heralding(1.0, rng)
        if h.success:
            seen += 1
            ref = np.array([0, 1, np.exp(1j * h.phase), 0]) / math.sqrt(2)
            worst = min(worst, abs(np.vdot(ref, h.state)) ** 2)
    assert seen > 800 and worst >= 1 - 1e-10, f"Bell fidelity {worst} over {seen} successes"
    return "; ".join(out) + f"; Bell fidelity {worst:.12f} over {seen} successes"


@criterion(8, "two-photon interference")
def test_criterion_08_hom_and_bell_coincidences():
    from graphforge.optics import BeamSplitter, apply_element, coincidence_probability, fock

    bs = BeamSplitter(math.pi / 4, 0.0, "1", "2", "3", "4")
    hom = apply_element(fock({(("1", "h"), ("2", "h")): 1.0}), bs)
    c_hom = coincidence_probability(hom, "3", "4")
    assert c_hom < 1e-12, f"HOM coincidence {c_hom}"
    h1, v1, h2, v2 = ("1", "h"), ("1", "v"), ("2", "h"), ("2", "v")
    bell = {
        "psi-": ({(h1, v2): 1, (v1, h2): -1}, 1.0),
        "psi+": ({(h1, v2): 1, (v1, h2): 1}, 0.0),
        "phi+": ({(h1, h2): 1, (v1, v2): 1}, 0.0),
        "phi-": ({(h1, h2): 1, (v1, v2): -1}, 0.0),
    }
    got = {}
    for name, (poly, want) in bell.items():
        st = apply_element(fock({k: v / math.sqrt(2) for k, v in poly.items()}), bs)
        got[name] = coincidence_probability(st, "3", "4")
        assert abs(got[name] - want) < 1e-12, f"{name}: coincidence {got[name]}"
    return f"HOM {c_hom:.1e}; " + ", ".join(f"{k} {v:.3f}" for k, v in got.items())


@criterion(9, "chain growth statistics and critical length")
def test_criterion_09_chain_growth():
    trials = 100_000
    worst = 0.0
    for i, p in enumerate([0.25, 1 / 3, 0.5]):
        for L in range(2, 11):
            x = growth.single_join_samples(p, L, trials, SEED + 100 * i + L)
            se = x.std(ddof=1) / math.sqrt(trials)
            z = abs(x.mean() - growth.expected_join_length(p, L)) / se
            assert z < 3, f"p={p:.3f} L={L}: mean {x.mean():.4f} is {z:.2f} sigma off"
            worst = max(worst, z)
        # the vectorized sampler matches graph-tracked joins draw for draw
        for L in (2, 5, 10):
            seed = SEED + 7 * L
            fast = growth.single_join_samples(p, L, 200, seed)
            (n, g), = stats.chunk_generators(seed, 200)
            slow = [growth.single_join(p, L, g, track_graph=True) for _ in range(n)]
            assert list(fast) == slow, f"p={p:.3f} L={L}: graph-tracked joins differ"
    verdicts = []
    for i, p in enumerate([0.25, 1 / 3, 0.5]):
        lc = growth.critical_length(p)
        below, above = max(round(lc) - 1, 1), round(lc) + 1
        for L, grows in ((below, False), (above, True)):
            x = growth.single_join_samples(p, L, trials, SEED + 1000 * i + L)
            se = x.std(ddof=1) / math.sqrt(trials)
            gain = x.mean() - L
            if grows:
                assert gain > 3 * se, f"p={p:.3f} L={L}: expected growth, gain {gain:.4f}"
                verdict = "grows"
            elif L < lc:
                assert gain < -3 * se, f"p={p:.3f} L={L}: expected shrinkage, gain {gain:.4f}"
                verdict = "shrinks"
            else:
                # L_c - 1 = 0 is not a chain, so test L = L_c itself: no drift
                assert abs(gain) < 3 * se, f"p={p:.3f} L={L}: expected zero drift, gain {gain:.4f}"
                verdict = "stalls"
            verdicts.append(f"p={p:.2f} L={L} {verdict}")
    return f"27 means within 3 sigma (worst {worst:.2f}); " + ", ".join(verdicts)


@criterion(10, "bond percolation threshold")
def test_criterion_10_percolation_threshold():
    t0 = time.perf_counter()
    est = growth.estimate_threshold([16, 32, 64], 1000, SEED)
    assert abs(est.estimate - 0.5) <= 0.02, f"threshold {est.estimate:.4f}"
    # monotone coupling: the same uniforms span at every larger p
    rng = np.random.default_rng(SEED)
    L = 16
    bonds = growth.lattice_bonds(L)
    ps = np.linspace(0.3, 0.7, 21)
    for _ in range(100):
        u = rng.random(len(bonds))
        spans = [growth.spans_left_right(L, u < p, bonds) for p in ps]
        assert all(not a or b for a, b in zip(spans, spans[1:])), "spanning is not monotone in p"
        blocks = [growth.run_percolation(growth.PercolationConfig(L, p, block=8, overlap=2), rng, u)[0] for p in ps]
        assert all(not a or b for a, b in zip(blocks, blocks[1:])), "block success is not monotone in p"
    dt = time.perf_counter() - t0
    assert dt < 300, f"took {dt:.0f}s"
    return f"p* = {est.estimate:.4f} +- {est.error:.4f}; monotone on 100 coupled samples; {dt:.1f}s"


@criterion(11, "parity projection against the oracle")
def test_criterion_11_parity_projection():
    t0 = time.perf_counter()
    count = 0
    for g in labelled_graphs(4):
        psi = oracle.build_constructive_graph_state(g)
        for a in range(4):
            for b in range(4):
                if a == b:
                    continue
                for parity in (-1, 1):
                    zz = np.diag([1, -1, -1, 1]).astype(complex)
                    proj = (np.eye(4) + parity * zz) / 2
                    ref = oracle.apply_operator(psi, proj, [a, b]).normalized()
                    out = parity_project(g, a, b, parity)
                    assert lc_equivalent(out, graph_form(ref, range(4))), f"{g.edge_list()} ({a},{b}) {parity}"
                    assert same_state(oracle.build_constructive_graph_state(out), ref)
                    count += 1
    dt = time.perf_counter() - t0
    assert dt < 60, f"took {dt:.0f}s"
    return f"{count} (graph, ordered pair, parity) cases, {dt:.1f}s"


if __name__ == "__main__":
    tests = sorted(
        (v for v in dict(globals()).values() if callable(v) and hasattr(v, "criterion")),
        key=lambda f: f.criterion,
    )
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
