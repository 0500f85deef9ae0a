from __future__ import annotations

import math

import networkx as nx
import numpy as np
import pytest

from graphforge import oracle
from graphforge.graph import Graph, tableau_to_graph
from graphforge.stabilizer import StabilizerTableau

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def atlas_graphs(max_n: int, connected: bool = True, min_n: int = 1) -> list[Graph]:
    out = []
    for g in nx.graph_atlas_g()[1:]:
        k = g.number_of_nodes()
        if k > max_n:
            break
        if k < min_n or (connected and not nx.is_connected(g)):
            continue
        out.append(Graph.from_networkx(g))
    return out


def labelled_graphs(n: int) -> list[Graph]:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return [
        Graph.from_edges(n, [p for k, p in enumerate(pairs) if mask >> k & 1])
        for mask in range(1 << len(pairs))
    ]


def graph_form(state: oracle.StateVector, vertices) -> Graph:
    """Graph (with local Cliffords) describing a stabilizer state vector."""
    gens = oracle.stabilizer_generators(state)
    t = StabilizerTableau.from_generators([("+" if s > 0 else "-") + w for s, w in gens])
    h = tableau_to_graph(t)
    verts = list(vertices)
    return Graph(
        verts,
        [(verts[u], verts[v]) for u, v in h.edge_list()],
        {verts[v]: h.vertex_op(v) for v in h.vertices},
    )


def same_state(a: oracle.StateVector, b: oracle.StateVector, tol: float = 1e-9) -> bool:
    return oracle.overlap(a, b) > 1 - tol


def random_jcz_circuit(rng: np.random.Generator, n_wires: int, layers: int) -> list[dict]:
    """J layers on every wire, with CZs never in neighbouring layers."""
    circ: list[dict] = []
    last = -2
    for k in range(layers):
        for w in range(n_wires):
            circ.append({"J": float(rng.uniform(-math.pi, math.pi)), "wire": w})
        if n_wires == 2 and k - last > 1 and rng.random() < 0.7:
            circ.append({"CZ": [0, 1]})
            last = k
    return circ


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"[{k:2d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}")
