"""Probabilistic graph-state growth strategies.

Entangling attempts succeed with a fixed probability ``p``.  A failure
Z-measures both qubits involved, which removes them from the graph and
leaves Pauli corrections on their neighbours.

Every attempt consumes exactly three uniforms from the generator (success
draw, then one outcome draw per endpoint), whether or not the graph is
tracked.  This keeps the fast length-only chain accounting and the
full graph-tracking mode on identical random streams.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import clifford as lc
from . import stats
from .graph import Graph, GraphError, graph_to_tableau, measure_graph, measurement_is_deterministic, parity_project, tableau_to_graph

DIAGONAL_OPS = frozenset(lc.from_word(w) for w in ("", "Z", "P", "PZ"))


class ConnectivityError(GraphError):
    """Attempted to entangle a pair the architecture does not connect."""


@dataclass(frozen=True)
class ArchitectureModel:
    p: float
    success_effect: str = "cz"  # or "parity"
    connectivity: frozenset[frozenset[int]] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise ValueError("success probability must lie in [0, 1]")
        if self.success_effect not in ("cz", "parity"):
            raise ValueError("success_effect must be 'cz' or 'parity'")

    def allows(self, a: int, b: int) -> bool:
        return self.connectivity is None or frozenset((a, b)) in self.connectivity


@dataclass
class GrowthTrialStats:
    attempts: int = 0
    successes: int = 0
    qubits_consumed: int = 0
    final_size: int = 0
    elapsed_steps: int = 0
    status: str = "running"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# -- single attempt ------------------------------------------------------------


def _apply_cz(g: Graph, a: int, b: int) -> Graph:
    if g.vertex_op(a) in DIAGONAL_OPS and g.vertex_op(b) in DIAGONAL_OPS:
        adj, ops = g._mutable()
        if b in adj[a]:
            adj[a].discard(b)
            adj[b].discard(a)
        else:
            adj[a].add(b)
            adj[b].add(a)
        return Graph._build(adj, ops)
    # general tags: go through the tableau and relabel back
    verts = g.vertices
    t = graph_to_tableau(g)
    t.cz(verts.index(a), verts.index(b))
    h = tableau_to_graph(t)
    return Graph(verts, [(verts[u], verts[v]) for u, v in h.edge_list()], {verts[v]: h.vertex_op(v) for v in h.vertices})


def _z_damage(g: Graph, v: int, u: float) -> Graph:
    det = measurement_is_deterministic(g, v, "Z")
    outcome = det or (1 if u < 0.5 else -1)
    return measure_graph(g, v, "Z", outcome)


def attempt_entangle(
    g: Graph, a: int, b: int, arch: ArchitectureModel, rng: np.random.Generator
) -> tuple[bool, Graph]:
    """One probabilistic entangling attempt between vertices a and b."""
    if a == b:
        raise GraphError("cannot entangle a vertex with itself")
    if a not in g or b not in g:
        raise GraphError(f"vertices {a}, {b} must both be present")
    if not arch.allows(a, b):
        raise ConnectivityError(f"architecture does not connect {a} and {b}")
    u = rng.random(3)
    if u[0] < arch.p:
        if arch.success_effect == "cz":
            return True, _apply_cz(g, a, b)
        return True, parity_project(g, a, b, -1)
    g = _z_damage(g, a, u[1])
    return False, _z_damage(g, b, u[2])


# -- chain strategy -------------------------------------------------------------

POLICIES = ("longest", "random", "shortest")


def expected_join_length(p: float, L: int) -> float:
    """Mean of the surviving longest chain after joining two length-L chains."""
    return p * 2 * L + (1 - p) * (L - 1)


def critical_length(p: float) -> float:
    return 1 / p - 1


class _LengthBank:
    def __init__(self, lengths: Sequence[int]):
        self.chains = [int(x) for x in lengths]

    def lengths(self) -> list[int]:
        return list(self.chains)

    def join(self, i: int, j: int, p: float, rng: np.random.Generator) -> bool:
        u = rng.random(3)
        if u[0] < p:
            self.chains[i] += self.chains[j]
            self.chains[j] = 0
            return True
        self.chains[i] -= 1
        self.chains[j] -= 1
        return False

    def compact(self) -> None:
        self.chains = [c for c in self.chains if c > 0]


class _GraphBank:
    """Chains stored as vertex lists inside one tracked graph."""

    def __init__(self, lengths: Sequence[int]):
        edges, chains, nxt = [], [], 0
        for L in lengths:
            vs = list(range(nxt, nxt + L))
            edges += list(zip(vs, vs[1:]))
            chains.append(vs)
            nxt += L
        self.graph = Graph(range(nxt), edges)
        self.chains = chains

    def lengths(self) -> list[int]:
        return [len(c) for c in self.chains]

    def join(self, i: int, j: int, p: float, rng: np.random.Generator) -> bool:
        a, b = self.chains[i][-1], self.chains[j][0]
        ok, self.graph = attempt_entangle(self.graph, a, b, ArchitectureModel(p), rng)
        if ok:
            self.chains[i] = self.chains[i] + self.chains[j]
            self.chains[j] = []
        else:
            self.chains[i] = self.chains[i][:-1]
            self.chains[j] = self.chains[j][1:]
        return ok

    def compact(self) -> None:
        self.chains = [c for c in self.chains if c]

    def check_paths(self) -> bool:
        """Every stored chain is an induced path of the tracked graph."""
        bare = self.graph
        for c in self.chains:
            for k, v in enumerate(c):
                want = {c[k - 1]} if k else set()
                if k + 1 < len(c):
                    want.add(c[k + 1])
                if set(bare.neighbors(v)) != want:
                    return False
        return sum(len(c) for c in self.chains) == bare.n


def _pairs(lengths: list[int], policy: str, rng: np.random.Generator) -> list[tuple[int, int]]:
    idx = list(range(len(lengths)))
    if policy == "longest":
        idx.sort(key=lambda i: (-lengths[i], i))
    elif policy == "shortest":
        idx.sort(key=lambda i: (lengths[i], i))
    elif policy == "random":
        idx = [int(i) for i in rng.permutation(len(lengths))]
    else:
        raise ValueError(f"unknown bank policy {policy!r}")
    return [(idx[k], idx[k + 1]) for k in range(0, len(idx) - 1, 2)]


def run_chain_strategy(
    p: float,
    target_length: int,
    rng: np.random.Generator,
    policy: str = "longest",
    bank: Sequence[int] | None = None,
    max_rounds: int = 10_000,
    track_graph: bool = False,
) -> GrowthTrialStats:
    """Grow a chain of ``target_length`` by repeated end-to-end joins.

    Each round pairs the bank's chains according to ``policy`` and attempts
    every pair once.  The default bank holds ``2**ceil(log2(target))``
    unit chains.  ``extra["trajectory"]`` lists the bank lengths after
    every round.
    """
    if target_length < 2:
        raise ValueError("target_length must be at least 2")
    if policy not in POLICIES:
        raise ValueError(f"unknown bank policy {policy!r}")
    if bank is None:
        bank = [1] * (1 << math.ceil(math.log2(target_length)))
    store = _GraphBank(bank) if track_graph else _LengthBank(bank)
    st = GrowthTrialStats()
    damaged = 0
    traj = [sorted(store.lengths(), reverse=True)]
    while True:
        lengths = store.lengths()
        if lengths and max(lengths) >= target_length:
            st.status = "target"
            break
        if len(lengths) < 2:
            st.status = "exhausted"
            break
        if st.elapsed_steps >= max_rounds:
            st.status = "budget"
            break
        for i, j in _pairs(lengths, policy, rng):
            st.attempts += 1
            if store.join(i, j, p, rng):
                st.successes += 1
            else:
                damaged += 2
        store.compact()
        st.elapsed_steps += 1
        traj.append(sorted(store.lengths(), reverse=True))
    final = max(store.lengths(), default=0)
    st.final_size = final
    st.qubits_consumed = damaged + final
    st.extra["trajectory"] = traj
    if track_graph:
        st.extra["graph_consistent"] = store.check_paths()
    return st


def single_join(p: float, L: int, rng: np.random.Generator, track_graph: bool = False) -> int:
    """Join two length-L chains once; return the longest surviving chain."""
    store = _GraphBank([L, L]) if track_graph else _LengthBank([L, L])
    store.join(0, 1, p, rng)
    return max(store.lengths())


def single_join_samples(p: float, L: int, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Vectorized ``single_join`` draws with the same three-uniform layout."""

    def chunk(n, rng):
        u = rng.random((n, 3))
        return np.where(u[:, 0] < p, 2 * L, L - 1)

    parts = stats.run_chunked(chunk, trials, seed, threads)
    return np.concatenate(parts) if parts else np.zeros(0, int)


# -- cross strategy -------------------------------------------------------------


def link_attempts(p: float, k_left: int, k_right: int, rng: np.random.Generator) -> tuple[bool, int]:
    """Retry a link until success or one side runs out of buffer qubits.

    Returns (success, attempts).  Each failure burns one qubit per side.
    """
    k = min(k_left, k_right)
    for t in range(1, k + 1):
        u = rng.random(3)
        if u[0] < p:
            return True, t
    return False, k


def link_failure_probability(p: float, k: int) -> float:
    return (1 - p) ** k


def buffer_for(p: float, eps: float = 1e-3) -> int:
    """Smallest buffer with single-link failure probability at most ``eps``."""
    if p >= 1:
        return 1
    if p <= 0:
        raise ValueError("no finite buffer works at p=0")
    return max(1, math.ceil(math.log(eps) / math.log(1 - p)))


def _grid_links(n: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    links = []
    for r in range(n):
        for c in range(n):
            if c + 1 < n:
                links.append(((r, c), (r, c + 1)))
            if r + 1 < n:
                links.append(((r, c), (r + 1, c)))
    return links


def run_cross_strategy(p: float, arm_buffer_length: int, n: int, rng: np.random.Generator) -> GrowthTrialStats:
    """Connect an n x n grid of prepared crosses.

    Each cross is a centre plus four arms of ``arm_buffer_length`` qubits;
    the arm facing a neighbour serves as that link's buffer.  Crosses
    themselves are treated as an offline resource.  Leftover buffer is
    removed by X/Y measurements and counted in ``extra``.
    """
    if arm_buffer_length < 1:
        raise ValueError("arm_buffer_length must be at least 1")
    if n < 1:
        raise ValueError("lattice side must be positive")
    st = GrowthTrialStats()
    per_cross = 4 * arm_buffer_length + 1
    st.qubits_consumed = n * n * per_cross
    burned = 0
    failed_links = 0
    longest = 0
    for _ in _grid_links(n):
        ok, t = link_attempts(p, arm_buffer_length, arm_buffer_length, rng)
        st.attempts += t
        longest = max(longest, t)
        if ok:
            st.successes += 1
            burned += 2 * (t - 1)
        else:
            failed_links += 1
            burned += 2 * t
    n_links = len(_grid_links(n))
    st.elapsed_steps = longest
    st.final_size = int(failed_links == 0)
    st.status = "complete" if failed_links == 0 else "link_failed"
    # centre qubits survive; the two qubits fused on success are measured out too
    st.extra = {
        "links": n_links,
        "failed_links": failed_links,
        "z_damaged": burned,
        "pauli_removed": st.qubits_consumed - n * n - burned,
        "qubits_per_vertex": st.qubits_consumed / (n * n),
    }
    return st


# -- micro-cluster strategy ------------------------------------------------------


def run_microcluster_strategy(p: float, star_size: int, n: int, rng: np.random.Generator) -> GrowthTrialStats:
    """Connect an n x n grid of star micro-clusters leaf to leaf.

    A star of ``star_size`` qubits has ``star_size - 1`` leaves shared by
    all of its links.  Links are processed row-major; every attempt uses one
    leaf from each side.  ``extra["leaf_ledger"]`` records, per star, the
    leaves burned by failures, used by successes and left over.
    """
    if star_size < 2:
        raise ValueError("star_size must be at least 2")
    st = GrowthTrialStats()
    leaves = {(r, c): star_size - 1 for r in range(n) for c in range(n)}
    ledger = {s: {"burned": 0, "fused": 0, "leftover": 0} for s in leaves}
    failed = 0
    for a, b in _grid_links(n):
        done = False
        while leaves[a] > 0 and leaves[b] > 0:
            st.attempts += 1
            st.elapsed_steps += 1
            leaves[a] -= 1
            leaves[b] -= 1
            if rng.random(3)[0] < p:
                st.successes += 1
                ledger[a]["fused"] += 1
                ledger[b]["fused"] += 1
                done = True
                break
            ledger[a]["burned"] += 1
            ledger[b]["burned"] += 1
        if not done:
            failed += 1
    for s, k in leaves.items():
        ledger[s]["leftover"] = k
    st.qubits_consumed = n * n * star_size
    st.final_size = int(failed == 0)
    st.status = "complete" if failed == 0 else "link_failed"
    st.extra = {
        "failed_links": failed,
        "leaf_ledger": {f"{r},{c}": v for (r, c), v in ledger.items()},
    }
    return st


# -- percolation ----------------------------------------------------------------


@dataclass(frozen=True)
class PercolationConfig:
    L: int
    p: float
    block: int | None = None
    overlap: int = 1
    arms: int = 4

    def __post_init__(self) -> None:
        b = self.L if self.block is None else self.block
        if self.L < 1 or not 1 <= b <= self.L:
            raise ValueError("need 1 <= block <= L")
        if self.overlap < 1 or self.overlap >= b and b < self.L:
            raise ValueError("overlap must be at least 1 and smaller than the block")
        if not 0 <= self.p <= 1:
            raise ValueError("bond probability must lie in [0, 1]")

    @property
    def block_size(self) -> int:
        return self.L if self.block is None else self.block


def lattice_bonds(L: int) -> np.ndarray:
    """Bonds of an L x L site grid as (E, 2) site indices, horizontal first."""
    idx = np.arange(L * L).reshape(L, L)
    h = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    v = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([h, v])


def _components(n_sites: int, bonds: np.ndarray, open_mask: np.ndarray) -> np.ndarray:
    e = bonds[open_mask]
    m = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n_sites, n_sites))
    return connected_components(m, directed=False)[1]


def _crosses(L: int, labels: np.ndarray, rows: range, cols: range, direction: str) -> set[int]:
    """Cluster labels spanning the window left-right ("lr") or top-bottom ("tb")."""
    grid = labels.reshape(L, L)
    if direction == "lr":
        a = set(grid[rows.start : rows.stop, cols.start])
        b = set(grid[rows.start : rows.stop, cols.stop - 1])
    else:
        a = set(grid[rows.start, cols.start : cols.stop])
        b = set(grid[rows.stop - 1, cols.start : cols.stop])
    return {int(x) for x in a & b}


def _window_labels(L: int, bonds: np.ndarray, open_mask: np.ndarray, rows: range, cols: range) -> np.ndarray:
    r = bonds // L
    c = bonds % L
    inside = (
        (r >= rows.start).all(axis=1)
        & (r < rows.stop).all(axis=1)
        & (c >= cols.start).all(axis=1)
        & (c < cols.stop).all(axis=1)
    )
    return _components(L * L, bonds, open_mask & inside)


def spans_left_right(L: int, open_mask: np.ndarray, bonds: np.ndarray | None = None) -> bool:
    bonds = lattice_bonds(L) if bonds is None else bonds
    labels = _components(L * L, bonds, open_mask)
    return bool(_crosses(L, labels, range(L), range(L), "lr"))


def block_windows(L: int, b: int, overlap: int) -> list[int]:
    """Start offsets of blocks along one axis (stride ``b - overlap``)."""
    if b == L:
        return [0]
    stride = b - overlap
    starts = list(range(0, L - b + 1, stride))
    if starts[-1] != L - b:
        starts.append(L - b)
    return starts


def evaluate_blocks(L: int, b: int, overlap: int, open_mask: np.ndarray) -> tuple[bool, dict, dict]:
    """Apply the block predicate to one bond configuration.

    A block succeeds when its own bonds give both a left-right and a
    top-bottom crossing (in the plane these must share a cluster).  Two
    neighbouring blocks are linked when their shared overlap strip has a
    crossing along its long side, which meets both blocks' crossings.
    Returns (success, representatives, details).
    """
    bonds = lattice_bonds(L)
    starts = block_windows(L, b, overlap)
    m = len(starts)
    reps: dict[tuple[int, int], int] = {}
    ok = True
    failed_blocks = []
    for bi, r0 in enumerate(starts):
        for bj, c0 in enumerate(starts):
            rows, cols = range(r0, r0 + b), range(c0, c0 + b)
            lab = _window_labels(L, bonds, open_mask, rows, cols)
            both = _crosses(L, lab, rows, cols, "lr") & _crosses(L, lab, rows, cols, "tb")
            if not both:
                ok = False
                failed_blocks.append((bi, bj))
                continue
            cl = min(both)
            grid = lab.reshape(L, L)
            cr, cc = r0 + b // 2, c0 + b // 2
            cand = [
                (abs(r - cr) + abs(c - cc), r * L + c)
                for r in rows
                for c in cols
                if grid[r, c] == cl
            ]
            reps[(bi, bj)] = min(cand)[1]
    failed_overlaps = []
    if m > 1:
        for bi in range(m):
            for bj in range(m):
                for di, dj in ((0, 1), (1, 0)):
                    ni, nj = bi + di, bj + dj
                    if ni >= m or nj >= m:
                        continue
                    if dj:
                        c_lo, c_hi = starts[nj], starts[bj] + b
                        rows = range(starts[bi], starts[bi] + b)
                        cols = range(c_lo, c_hi)
                        d = "tb"
                    else:
                        r_lo, r_hi = starts[ni], starts[bi] + b
                        rows = range(r_lo, r_hi)
                        cols = range(starts[bj], starts[bj] + b)
                        d = "lr"
                    lab = _window_labels(L, bonds, open_mask, rows, cols)
                    if not _crosses(L, lab, rows, cols, d):
                        ok = False
                        failed_overlaps.append(((bi, bj), (ni, nj)))
    details = {"blocks": m * m, "failed_blocks": failed_blocks, "failed_overlaps": failed_overlaps}
    return ok, reps, details


def run_percolation(
    cfg: PercolationConfig, rng: np.random.Generator, uniforms: np.ndarray | None = None
) -> tuple[bool, Graph | None, GrowthTrialStats]:
    """One percolation attempt on an L x L grid of micro-clusters.

    Every bond is tried once; it is open when its uniform is below ``p``.
    Passing ``uniforms`` couples runs at different ``p``.  On success the
    block representatives form the renormalized square lattice and every
    other qubit is counted for Pauli-basis removal.
    """
    L, b = cfg.L, cfg.block_size
    bonds = lattice_bonds(L)
    u = rng.random(len(bonds)) if uniforms is None else np.asarray(uniforms)
    open_mask = u < cfg.p
    ok, reps, det = evaluate_blocks(L, b, cfg.overlap, open_mask)
    st = GrowthTrialStats()
    st.attempts = len(bonds)
    st.successes = int(open_mask.sum())
    st.qubits_consumed = L * L * (cfg.arms + 1)
    st.elapsed_steps = 1
    st.status = "complete" if ok else "failed"
    st.final_size = int(ok)
    m = int(round(math.sqrt(det["blocks"])))
    st.extra = dict(det, pauli_removed=st.qubits_consumed - (m * m if ok else 0))
    if not ok:
        return False, None, st
    lattice = Graph(range(m * m), [(a[0] * m + a[1], c[0] * m + c[1]) for a, c in _grid_links(m)])
    st.extra["representatives"] = {f"{k[0]},{k[1]}": v for k, v in sorted(reps.items())}
    return True, lattice, st


def critical_bond_probability(L: int, u: np.ndarray, bonds: np.ndarray | None = None) -> float:
    """Smallest p at which the grid spans left to right for these uniforms.

    Kruskal-style union-find over bonds in increasing uniform order; the
    answer is the uniform of the bond that first joins the two sides.
    """
    bonds = lattice_bonds(L) if bonds is None else bonds
    n = L * L
    parent = list(range(n + 2))
    left, right = n, n + 1

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in range(L):
        parent[r * L] = left
        parent[r * L + L - 1] = right if L > 1 else left
    if L == 1:
        return 0.0
    for e in np.argsort(u, kind="stable"):
        a, c = find(int(bonds[e, 0])), find(int(bonds[e, 1]))
        if a != c:
            parent[a] = c
            if find(left) == find(right):
                return float(u[e])
    return 1.0


def critical_samples(L: int, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Per-trial spanning thresholds; the spanning curve is their ECDF."""
    bonds = lattice_bonds(L)

    def chunk(n, rng):
        return np.array([critical_bond_probability(L, rng.random(len(bonds)), bonds) for _ in range(n)])

    parts = stats.run_chunked(chunk, trials, seed, threads, chunk=256)
    return np.concatenate(parts) if parts else np.zeros(0)


def spanning_curve(pstar: np.ndarray, ps: Iterable[float]) -> np.ndarray:
    s = np.sort(pstar)
    return np.searchsorted(s, np.asarray(list(ps)), side="right") / len(s)


def _crossing(pa: np.ndarray, pb: np.ndarray, grid: np.ndarray) -> float | None:
    ya, yb = spanning_curve(pa, grid), spanning_curve(pb, grid)
    d = ya - yb
    mid = (ya + yb) / 2
    # flat tails (both curves at 0 or 1) are not crossings
    live = (mid > 0) & (mid < 1)
    best, score = None, math.inf
    for k in range(len(grid) - 1):
        if not live[k]:
            continue
        if d[k] == 0 or d[k] * d[k + 1] < 0:
            x = grid[k] if d[k] == 0 else grid[k] + (grid[k + 1] - grid[k]) * d[k] / (d[k] - d[k + 1])
            # several noisy crossings: keep the one mid-transition
            if abs(mid[k] - 0.5) < score:
                best, score = float(x), abs(mid[k] - 0.5)
    return best


@dataclass(frozen=True)
class ThresholdEstimate:
    estimate: float
    error: float
    pairwise: dict

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "error": self.error, "pairwise": self.pairwise}


def estimate_threshold(
    sizes: Sequence[int],
    trials: int,
    seed: int,
    grid: np.ndarray | None = None,
    n_boot: int = 200,
    threads: int = 1,
) -> ThresholdEstimate:
    """Crossing point of spanning curves for several lattice sizes.

    The estimate averages the crossings of every size pair; its error is
    the bootstrap standard deviation of that average.
    """
    sizes = sorted(set(int(s) for s in sizes))
    if len(sizes) < 2:
        raise ValueError("need at least two lattice sizes")
    grid = np.linspace(0.3, 0.7, 401) if grid is None else np.asarray(grid)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes) + 1)
    samples = {
        L: critical_samples(L, trials, int(s.generate_state(1)[0]), threads) for L, s in zip(sizes, seqs)
    }

    def combine(smp):
        xs = {}
        for i, a in enumerate(sizes):
            for b in sizes[i + 1 :]:
                x = _crossing(smp[a], smp[b], grid)
                if x is not None:
                    xs[f"{a}-{b}"] = x
        return xs

    base = combine(samples)
    if not base:
        raise ValueError("spanning curves do not cross on the grid")
    est = float(np.mean(list(base.values())))
    boot_rng = np.random.default_rng(seqs[-1])
    boots = []
    for _ in range(n_boot):
        rs = {L: s[boot_rng.integers(0, len(s), len(s))] for L, s in samples.items()}
        xs = combine(rs)
        if xs:
            boots.append(np.mean(list(xs.values())))
    err = float(np.std(boots, ddof=1)) if len(boots) > 1 else float("nan")
    return ThresholdEstimate(est, err, base)
