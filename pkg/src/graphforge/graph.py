"""Graph states with per-vertex local Clifford annotations.

A :class:`Graph` denotes the state ``prod_v C_v |G>`` where ``|G>`` is the
constructive graph state (CZ on every edge of ``|+>^n``) and ``C_v`` is the
vertex's local Clifford (an index into :mod:`graphforge.clifford`).  Every
rewrite below returns a new graph whose annotated state is exactly the
post-operation state, up to global phase, so the annotation can be checked
against the state-vector oracle amplitude by amplitude.
"""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import clifford as lc
from .pauli import PauliString
from .stabilizer import StabilizerTableau, TableauError

BASES = ("X", "Y", "Z")


class GraphError(ValueError):
    """Invalid vertex, edge or rewrite request."""


class OrbitBudgetExceeded(RuntimeError):
    """The local-complementation orbit is larger than the node budget."""


class Graph:
    """Immutable graph value with local Clifford tags.

    Vertices are arbitrary non-negative integers; they need not be
    contiguous once vertices have been measured away.
    """

    __slots__ = ("_adj", "_ops", "_hash")

    def __init__(
        self,
        vertices: Iterable[int] = (),
        edges: Iterable[Iterable[int]] = (),
        vertex_ops: Mapping[int, int | str] | None = None,
    ):
        adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise GraphError(f"self-loop on vertex {u}")
            for x in (u, v):
                if x not in adj:
                    raise GraphError(f"edge ({u}, {v}) uses unknown vertex {x}")
            adj[u].add(v)
            adj[v].add(u)
        ops: dict[int, int] = {}
        for v, c in (vertex_ops or {}).items():
            v = int(v)
            if v not in adj:
                raise GraphError(f"vertex_ops names unknown vertex {v}")
            idx = lc.from_word(c) if isinstance(c, str) else int(c)
            if not 0 <= idx < 24:
                raise GraphError(f"bad Clifford index {c!r}")
            if idx:
                ops[v] = idx
        self._adj = {v: frozenset(nb) for v, nb in adj.items()}
        self._ops = ops
        self._hash: int | None = None

    # -- constructors -------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]], vertex_ops=None) -> Graph:
        return cls(range(n), edges, vertex_ops)

    @classmethod
    def chain(cls, n: int, start: int = 0) -> Graph:
        vs = range(start, start + n)
        return cls(vs, [(v, v + 1) for v in vs[:-1]])

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def star(cls, n_leaves: int) -> Graph:
        return cls(range(n_leaves + 1), [(0, i) for i in range(1, n_leaves + 1)])

    @classmethod
    def from_networkx(cls, g) -> Graph:
        return cls(g.nodes, g.edges)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edge_list())
        return g

    # -- inspection ---------------------------------------------------
    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self._adj))

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def edges(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset((u, v)) for u, nb in self._adj.items() for v in nb)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in self._adj.items() for v in nb if u < v)

    def neighbors(self, v: int) -> frozenset[int]:
        self._require(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    def vertex_op(self, v: int) -> int:
        self._require(v)
        return self._ops.get(v, 0)

    def vertex_word(self, v: int) -> str:
        return lc.word(self.vertex_op(v))

    @property
    def vertex_ops(self) -> dict[int, str]:
        return {v: lc.word(c) for v, c in sorted(self._ops.items())}

    def bare(self) -> Graph:
        """Same edges, all vertex_ops cleared."""
        return Graph(self._adj, self.edge_list())

    def _require(self, v: int) -> None:
        if v not in self._adj:
            raise GraphError(f"vertex {v} not in graph")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj == other._adj and self._ops == other._ops

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._adj.items()), frozenset(self._ops.items())))
        return self._hash

    def __repr__(self) -> str:
        ops = f", vertex_ops={self.vertex_ops}" if self._ops else ""
        return f"Graph(vertices={list(self.vertices)}, edges={self.edge_list()}{ops})"

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        verts = self.vertices
        d: dict = {
            "n": self.n,
            "edges": [list(e) for e in self.edge_list()],
            "vertex_ops": {str(v): w for v, w in self.vertex_ops.items()},
        }
        if verts != tuple(range(self.n)):
            d["vertices"] = list(verts)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> Graph:
        if not isinstance(d, Mapping):
            raise GraphError("graph JSON must be an object")
        if "n" not in d or not isinstance(d["n"], int) or d["n"] < 0:
            raise GraphError("field 'n': expected a non-negative integer")
        verts = d.get("vertices", list(range(d["n"])))
        if len(verts) != d["n"]:
            raise GraphError("field 'vertices': length differs from 'n'")
        edges = d.get("edges", [])
        for i, e in enumerate(edges):
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise GraphError(f"field 'edges[{i}]': expected a pair")
        ops = d.get("vertex_ops", {}) or {}
        if not isinstance(ops, Mapping):
            raise GraphError("field 'vertex_ops': expected an object")
        try:
            return cls(verts, edges, {int(k): v for k, v in ops.items()})
        except lc.CliffordError as exc:
            raise GraphError(f"field 'vertex_ops': {exc}") from exc
        except ValueError as exc:
            raise GraphError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> Graph:
        return cls.from_dict(json.loads(text))

    # -- internal mutation (used on private copies only) -------------
    def _mutable(self) -> tuple[dict[int, set[int]], dict[int, int]]:
        return {v: set(nb) for v, nb in self._adj.items()}, dict(self._ops)

    @classmethod
    def _build(cls, adj: dict[int, set[int]], ops: dict[int, int]) -> Graph:
        g = cls.__new__(cls)
        g._adj = {v: frozenset(nb) for v, nb in adj.items()}
        g._ops = {v: c for v, c in ops.items() if c and v in adj}
        g._hash = None
        return g


# -- edge-set helpers ---------------------------------------------------


def edge_pairs(a: Iterable[int], b: Iterable[int]) -> set[frozenset[int]]:
    """E(A, B): every unordered pair {x, y} with x in A, y in B, x != y."""
    bs = list(b)
    return {frozenset((x, y)) for x in a for y in bs if x != y}


def _toggle(adj: dict[int, set[int]], pairs: Iterable[frozenset[int]]) -> None:
    for pr in pairs:
        u, v = tuple(pr)
        if v in adj[u]:
            adj[u].discard(v)
            adj[v].discard(u)
        else:
            adj[u].add(v)
            adj[v].add(u)


def symmetric_difference(g: Graph, pairs: Iterable[frozenset[int]]) -> Graph:
    """G delta F: toggle every listed pair."""
    adj, ops = g._mutable()
    _toggle(adj, pairs)
    return Graph._build(adj, ops)


def _remove(adj: dict[int, set[int]], ops: dict[int, int], v: int) -> None:
    for u in adj.pop(v):
        adj[u].discard(v)
    ops.pop(v, None)


def _right_mul(ops: dict[int, int], v: int, c: int) -> None:
    """C_v <- C_v @ c."""
    ops[v] = lc.compose(ops.get(v, 0), c)


# -- tableau conversion -----------------------------------------------

_GATE = {"H": "h", "P": "s", "X": "x", "Y": "y", "Z": "z"}


def graph_to_tableau(g: Graph) -> StabilizerTableau:
    """Run the constructive circuit; qubit i is the i-th smallest vertex."""
    verts = g.vertices
    if not verts:
        raise GraphError("empty graph has no tableau")
    pos = {v: i for i, v in enumerate(verts)}
    t = StabilizerTableau.zero_state(len(verts))
    for i in range(len(verts)):
        t.h(i)
    for u, v in g.edge_list():
        t.cz(pos[u], pos[v])
    for v in verts:
        for ch in reversed(g.vertex_word(v)):
            getattr(t, _GATE[ch])(pos[v])
    return t


def tableau_to_graph(t: StabilizerTableau) -> Graph:
    """Local-Clifford reduction of a stabilizer state to graph form.

    The returned graph (vertices 0..n-1) with its vertex_ops generates the
    same stabilizer group as ``t``.
    """
    try:
        t.check_invariants(destabilizers=False)
    except TableauError as exc:
        raise GraphError(f"malformed tableau: {exc}") from exc
    n = t.n
    w = t.copy()
    xb = w.x_block().T.copy()  # rows = generators
    zb = w.z_block().T.copy()
    u = [0] * n  # accumulated local unitary per qubit

    def rowmul(i: int, j: int) -> None:
        w.stabilizer_rowmul(i, j)
        xb[i] ^= xb[j]
        zb[i] ^= zb[j]

    def swap(i: int, j: int) -> None:
        if i != j:
            w.swap_generators(i, j)
            xb[[i, j]] = xb[[j, i]]
            zb[[i, j]] = zb[[j, i]]

    def gate(name: str, q: int) -> None:
        if name == "H":
            w.h(q)
            xb[:, q], zb[:, q] = zb[:, q].copy(), xb[:, q].copy()
            u[q] = lc.compose(lc.H, u[q])
        elif name == "Pdag":
            w.s_dag(q)
            zb[:, q] ^= xb[:, q]
            u[q] = lc.compose(lc.P_DAG, u[q])
        elif name == "Z":
            w.z(q)
            u[q] = lc.compose(lc.Z, u[q])

    def eliminate(block: np.ndarray, other: np.ndarray, start: int) -> list[int]:
        """Row-reduce ``block`` from row ``start``; returns pivot columns."""
        r = start
        piv = []
        for col in range(n):
            rows = [i for i in range(r, n) if block[i, col]]
            if not rows:
                continue
            swap(r, rows[0])
            for i in range(n):
                if i != r and block[i, col]:
                    rowmul(i, r)
            piv.append(col)
            r += 1
        return piv

    rank = len(eliminate(xb, zb, 0))
    if rank < n:
        # Rows rank..n-1 are Z-only; Hadamard on their pivot columns.
        zpiv = []
        r = rank
        for col in range(n):
            rows = [i for i in range(r, n) if zb[i, col]]
            if not rows:
                continue
            swap(r, rows[0])
            for i in range(rank, n):
                if i != r and zb[i, col]:
                    rowmul(i, r)
            zpiv.append(col)
            r += 1
        for q in zpiv:
            gate("H", q)
        if len(eliminate(xb, zb, 0)) != n:
            raise GraphError("internal error: X block not invertible after Hadamards")
    # X block is now the identity with row i pivoting on qubit i.
    for q in range(n):
        if zb[q, q]:
            gate("Pdag", q)
    signs = w.signs()
    for q in range(n):
        if signs[q] < 0:
            gate("Z", q)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if zb[i, j]]
    ops = {q: lc.inverse(u[q]) for q in range(n)}
    return Graph(range(n), edges, ops)


# -- local complementation ----------------------------------------------

# |tau_a(G)> = e^{-i pi/4 X_a} prod_{b in N_a} e^{i pi/4 Z_b} |G>
_SQRT_X = lc.from_matrix(np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))  # e^{+i pi/4 X}
_SQRT_Z_NEG = lc.P  # e^{-i pi/4 Z} up to phase


def local_complement(g: Graph, a: int) -> Graph:
    """tau_a: toggle every pair of neighbours of ``a``; state unchanged."""
    nb = g.neighbors(a)
    adj, ops = g._mutable()
    _toggle(adj, edge_pairs(nb, nb))
    _right_mul(ops, a, _SQRT_X)
    for b in nb:
        _right_mul(ops, b, _SQRT_Z_NEG)
    return Graph._build(adj, ops)


def local_complement_edges(g: Graph, a: int) -> Graph:
    """tau_a on the edge set only; vertex_ops copied unchanged."""
    nb = g.neighbors(a)
    adj, ops = g._mutable()
    _toggle(adj, edge_pairs(nb, nb))
    return Graph._build(adj, ops)


# -- Pauli measurements -------------------------------------------------


def _bare_basis(g: Graph, a: int, basis: str, outcome: int) -> tuple[str, int]:
    """Rewrite a measurement of ``basis`` on C_a|.> as one on the bare vertex."""
    if basis not in BASES:
        raise GraphError(f"unknown basis {basis!r}")
    if outcome not in (1, -1):
        raise GraphError("outcome must be +1 or -1")
    sign, q = lc.conjugate_dagger(g.vertex_op(a), basis)
    return q, sign * outcome


def measurement_is_deterministic(g: Graph, a: int, basis: str) -> int:
    """Return the forced outcome (+1/-1) or 0 when both outcomes occur."""
    q, s = _bare_basis(g, a, basis, 1)
    if q == "X" and not g.neighbors(a):
        return s
    return 0


def measure_graph(
    g: Graph,
    a: int,
    basis: str,
    outcome: int | None = 1,
    b: int | None = None,
    rng: np.random.Generator | None = None,
) -> Graph:
    """Measure vertex ``a`` in the X, Y or Z basis and remove it.

    ``outcome`` selects the branch (+1 or -1); pass ``None`` with an ``rng``
    to sample it.  ``b`` is the special neighbour for the X rule (smallest
    neighbour by default).  The result's annotated state equals the
    normalized post-measurement state of the remaining vertices.
    """
    g._require(a)
    det = measurement_is_deterministic(g, a, basis)
    if outcome is None:
        if det:
            outcome = det
        elif rng is None:
            raise GraphError("random outcome requested without an rng")
        else:
            outcome = 1 if rng.integers(2) == 0 else -1
    elif det and outcome != det:
        raise GraphError(f"outcome {outcome} has probability zero")
    q, m = _bare_basis(g, a, basis, outcome)
    flip = m == -1
    adj, ops = g._mutable()
    na = set(adj[a])
    if q == "Z":
        _remove(adj, ops, a)
        if flip:
            for v in na:
                _right_mul(ops, v, lc.Z)
    elif q == "Y":
        _toggle(adj, edge_pairs(na, na))
        _remove(adj, ops, a)
        for v in na:
            _right_mul(ops, v, lc.P_DAG if flip else lc.P)
    else:
        if not na:
            if b is not None:
                raise GraphError("isolated vertex has no neighbour b")
            _remove(adj, ops, a)
        else:
            if b is None:
                b = min(na)
            elif b not in na:
                raise GraphError(f"b={b} is not a neighbour of {a}")
            nb = set(adj[b])
            _toggle(adj, edge_pairs(nb, na))
            _toggle(adj, edge_pairs(nb & na, nb & na))
            _toggle(adj, edge_pairs({b}, na - {b}))
            _remove(adj, ops, a)
            rest_a = na - {b}
            m_set = nb - {a}
            _right_mul(ops, b, lc.compose(lc.H, lc.Z) if flip else lc.H)
            for c in rest_a & m_set:
                _right_mul(ops, c, lc.Z)
            if flip:
                for c in m_set:
                    _right_mul(ops, c, lc.Z)
    return Graph._build(adj, ops)


def measure_graph_z(g: Graph, a: int, outcome: int = 1) -> Graph:
    return measure_graph(g, a, "Z", outcome)


def measure_graph_y(g: Graph, a: int, outcome: int = 1) -> Graph:
    return measure_graph(g, a, "Y", outcome)


def measure_graph_x(g: Graph, a: int, b: int | None = None, outcome: int = 1) -> Graph:
    return measure_graph(g, a, "X", outcome, b=b)


def reduce_clifford_part(
    g: Graph, pauli_measurements: Sequence[tuple], default_outcome: int = 1
) -> Graph:
    """Apply Pauli measurements in order, leaving the minimal graph.

    Entries are ``(vertex, basis)`` or ``(vertex, basis, outcome)``.
    """
    seen = set()
    for entry in pauli_measurements:
        v = entry[0]
        if v in seen:
            raise GraphError(f"vertex {v} measured twice")
        seen.add(v)
    out = g
    for entry in pauli_measurements:
        v, basis = entry[0], entry[1]
        outcome = entry[2] if len(entry) > 2 else default_outcome
        det = measurement_is_deterministic(out, v, basis)
        out = measure_graph(out, v, basis, det or outcome)
    return out


def apply_local_clifford(g: Graph, v: int, c: int | str) -> Graph:
    """Act with a Clifford after the state: C_v <- c @ C_v."""
    g._require(v)
    c = lc.from_word(c) if isinstance(c, str) else c
    adj, ops = g._mutable()
    ops[v] = lc.compose(c, ops.get(v, 0))
    return Graph._build(adj, ops)


# -- parity projection ----------------------------------------------------


def parity_project(g: Graph, a: int, b: int, parity: int = -1) -> Graph:
    """Project onto the ``parity`` eigenspace of Z_a Z_b (-1 = odd).

    Vertex ``a`` takes over the symmetric difference of both neighbourhoods
    and ``b`` hangs off ``a`` as a cherry carrying a Hadamard-type tag.
    Tags on a or b must map Z to +-Z.
    """
    if a == b:
        raise GraphError("parity projection needs two distinct vertices")
    if parity not in (1, -1):
        raise GraphError("parity must be +1 (even) or -1 (odd)")
    g._require(a)
    g._require(b)
    eff = parity
    for v in (a, b):
        sign, q = lc.conjugate_dagger(g.vertex_op(v), "Z")
        if q != "Z":
            raise GraphError(f"vertex {v} carries a tag that does not preserve Z")
        eff *= sign
    adj, ops = g._mutable()
    adjacent = b in adj[a]
    na = adj[a] - {b}
    nb = adj[b] - {a}
    for v in (a, b):
        for u in list(adj[v]):
            adj[u].discard(v)
        adj[v] = set()
    for u in (na ^ nb) | {b}:
        adj[a].add(u)
        adj[u].add(a)
    if eff == -1:
        _right_mul(ops, b, lc.from_word("XH"))
        for y in nb:
            _right_mul(ops, y, lc.Z)
    else:
        _right_mul(ops, b, lc.H)
        if adjacent:
            _right_mul(ops, a, lc.Z)
    return Graph._build(adj, ops)


# -- LC orbit search ----------------------------------------------------


@dataclass
class LCResult:
    equivalent: bool
    witness: list[int] | None = None
    explored: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


@dataclass
class Orbit:
    """All edge sets reachable from a start graph by local complementation."""

    vertices: tuple[int, ...]
    keys: list[tuple[int, ...]] = field(default_factory=list)
    parent: dict[tuple[int, ...], tuple[tuple[int, ...] | None, int | None]] = field(
        default_factory=dict
    )

    def graph(self, key: tuple[int, ...]) -> Graph:
        return _key_to_graph(self.vertices, key)

    def witness(self, key: tuple[int, ...]) -> list[int]:
        seq: list[int] = []
        while True:
            prev, v = self.parent[key]
            if prev is None:
                break
            seq.append(v)
            key = prev
        return seq[::-1]

    def __len__(self) -> int:
        return len(self.keys)


def _graph_key(g: Graph) -> tuple[int, ...]:
    verts = g.vertices
    pos = {v: i for i, v in enumerate(verts)}
    return tuple(sum(1 << pos[u] for u in g.neighbors(v)) for v in verts)


def _key_to_graph(verts: tuple[int, ...], key: tuple[int, ...]) -> Graph:
    edges = [
        (verts[i], verts[j]) for i in range(len(verts)) for j in range(i + 1, len(verts))
        if (key[i] >> j) & 1
    ]
    return Graph(verts, edges)


def _lc_key(key: tuple[int, ...], i: int) -> tuple[int, ...]:
    nb = key[i]
    out = list(key)
    m = nb
    while m:
        low = m & -m
        j = low.bit_length() - 1
        out[j] ^= nb & ~low
        m ^= low
    return tuple(out)


DEFAULT_BUDGET = 10**6


def _bfs(start: tuple[int, ...], budget: int, target: tuple[int, ...] | None, orbit: Orbit):
    orbit.parent[start] = (None, None)
    orbit.keys.append(start)
    if start == target:
        return start
    queue = deque([start])
    n = len(start)
    while queue:
        key = queue.popleft()
        for i in range(n):
            if bin(key[i]).count("1") < 2:
                continue
            nk = _lc_key(key, i)
            if nk in orbit.parent:
                continue
            orbit.parent[nk] = (key, orbit.vertices[i])
            orbit.keys.append(nk)
            if nk == target:
                return nk
            if len(orbit.keys) > budget:
                raise OrbitBudgetExceeded(f"orbit exceeds {budget} graphs")
            queue.append(nk)
    return None


def lc_orbit(g: Graph, budget: int = DEFAULT_BUDGET) -> Orbit:
    """Enumerate the local-complementation orbit of ``g``'s edge set."""
    orbit = Orbit(g.vertices)
    _bfs(_graph_key(g), budget, None, orbit)
    return orbit


def lc_equivalent(g1: Graph, g2: Graph, budget: int = DEFAULT_BUDGET) -> LCResult:
    """Decide LC-equivalence of two graphs on the same vertex set.

    vertex_ops are ignored.  On success the witness lists the vertices to
    complement, in order, to turn g1's edge set into g2's.
    """
    if set(g1.vertices) != set(g2.vertices):
        raise GraphError("graphs must share the same vertex set")
    if _component_sizes(g1) != _component_sizes(g2):
        return LCResult(False, None, 0)
    orbit = Orbit(g1.vertices)
    hit = _bfs(_graph_key(g1), budget, _graph_key(g2), orbit)
    if hit is None:
        return LCResult(False, None, len(orbit))
    return LCResult(True, orbit.witness(hit), len(orbit))


def _component_sizes(g: Graph) -> list[frozenset[int]]:
    # Local complementation never changes connected components.
    seen: set[int] = set()
    comps = []
    for v in g.vertices:
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(g.neighbors(x) - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return sorted(comps, key=sorted)


def apply_witness(g: Graph, witness: Sequence[int]) -> Graph:
    for v in witness:
        g = local_complement(g, v)
    return g


def pauli_for_vertices(g: Graph, ops: Mapping[int, str], sign: int = 1) -> PauliString:
    """PauliString on g's sorted vertex order from a sparse {vertex: letter}."""
    pos = {v: i for i, v in enumerate(g.vertices)}
    return PauliString.from_sparse(g.n, {pos[v]: p for v, p in ops.items()}, sign)
