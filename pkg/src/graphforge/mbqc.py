"""Measurement patterns on graph states with Pauli-frame feed-forward.

Conventions
-----------
* An XY-plane measurement at angle ``alpha`` projects onto
  ``(|0> +- e^{i alpha}|1>)/sqrt2``; outcome 0 is the ``+`` branch.
  X is ``alpha = 0`` and Y is ``alpha = pi/2``.
* Measuring the first site of an edge in XY(alpha) with outcome m teleports
  ``X^m H diag(1, e^{-i alpha})`` onto the second site.  Since
  ``diag(1, e^{-i alpha})`` is ``e^{i alpha/2 Z}`` up to phase, the gate
  ``J(theta) = H e^{i theta Z}`` is one step at ``alpha = 2 theta``.
* The adaptive angle is ``(-1)^s alpha + t pi`` where s and t are the parities
  of the step's domains.  With that choice the recorded outcome is already
  the logical one.  For Z steps the logical outcome is ``m xor s``.
"""

from __future__ import annotations

import heapq
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import clifford as lc
from . import oracle
from .graph import Graph, reduce_clifford_part

MAX_PATTERN_QUBITS = 12
MAX_WIRES = 3


class PatternError(ValueError):
    """Pattern invariant violation or unsupported request."""


@dataclass(frozen=True)
class Step:
    """One measurement.

    ``basis`` is ``"XY"`` (with ``angle``) or ``"Z"``.  Domains name the
    vertices whose logical outcomes enter the feed-forward parities.
    """

    vertex: int
    basis: str
    angle: float = 0.0
    s_domain: frozenset[int] = frozenset()
    t_domain: frozenset[int] = frozenset()

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "basis": self.basis,
            "angle": self.angle,
            "s_domain": sorted(self.s_domain),
            "t_domain": sorted(self.t_domain),
        }


@dataclass(frozen=True)
class PauliFrame:
    """Byproduct ``X^x Z^z`` per output vertex (actual = frame @ ideal)."""

    x: dict[int, int]
    z: dict[int, int]

    def compose(self, other: PauliFrame) -> PauliFrame:
        keys = set(self.x) | set(other.x)
        return PauliFrame(
            {k: self.x.get(k, 0) ^ other.x.get(k, 0) for k in keys},
            {k: self.z.get(k, 0) ^ other.z.get(k, 0) for k in keys},
        )


@dataclass
class MeasurementPattern:
    graph: Graph
    inputs: list[int]
    outputs: list[int]
    steps: list[Step]
    output_x: dict[int, frozenset[int]] = field(default_factory=dict)
    output_z: dict[int, frozenset[int]] = field(default_factory=dict)
    # Known local Clifford left on each output by the ideal run.
    output_cliffords: dict[int, int] = field(default_factory=dict)

    def validate(self) -> None:
        verts = set(self.graph.vertices)
        if self.graph.vertex_ops:
            raise PatternError("pattern graphs must carry no vertex_ops")
        measured = [s.vertex for s in self.steps]
        if len(set(measured)) != len(measured):
            raise PatternError("a vertex is measured twice")
        if set(measured) & set(self.outputs):
            raise PatternError("an output vertex is measured")
        if not set(measured) | set(self.outputs) == verts:
            raise PatternError("every non-output vertex must be measured")
        if not set(self.inputs) <= verts or not set(self.outputs) <= verts:
            raise PatternError("inputs and outputs must be graph vertices")
        done: set[int] = set()
        for s in self.steps:
            if s.basis not in ("XY", "Z"):
                raise PatternError(f"unknown basis {s.basis!r}")
            if not (s.s_domain | s.t_domain) <= done:
                raise PatternError(f"step on {s.vertex} depends on a later outcome")
            done.add(s.vertex)
        for o in self.outputs:
            if not (self.output_x.get(o, frozenset()) | self.output_z.get(o, frozenset())) <= done:
                raise PatternError("output domain references an unmeasured vertex")
        if self.graph.n > MAX_PATTERN_QUBITS:
            raise PatternError(
                f"pattern has {self.graph.n} qubits; oracle limit is {MAX_PATTERN_QUBITS}"
            )

    # -- JSON -----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "steps": [s.to_dict() for s in self.steps],
            "output_x": {str(k): sorted(v) for k, v in self.output_x.items()},
            "output_z": {str(k): sorted(v) for k, v in self.output_z.items()},
            "output_cliffords": {str(k): lc.word(v) for k, v in self.output_cliffords.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> MeasurementPattern:
        try:
            steps = [
                Step(
                    int(s["vertex"]),
                    s["basis"],
                    float(s.get("angle", 0.0)),
                    frozenset(s.get("s_domain", [])),
                    frozenset(s.get("t_domain", [])),
                )
                for s in d["steps"]
            ]
            p = cls(
                Graph.from_dict(d["graph"]),
                [int(v) for v in d["inputs"]],
                [int(v) for v in d["outputs"]],
                steps,
                {int(k): frozenset(v) for k, v in d.get("output_x", {}).items()},
                {int(k): frozenset(v) for k, v in d.get("output_z", {}).items()},
                {int(k): lc.from_word(v) for k, v in d.get("output_cliffords", {}).items()},
            )
        except (KeyError, TypeError) as exc:
            raise PatternError(f"malformed pattern JSON: {exc}") from exc
        p.validate()
        return p


# -- gate matrices --------------------------------------------------------


def j_gate(theta: float) -> np.ndarray:
    """J(theta) = H exp(i theta Z)."""
    return oracle.H @ np.diag([np.exp(1j * theta), np.exp(-1j * theta)])


def rz(angle: float) -> np.ndarray:
    """exp(i angle Z)."""
    return np.diag([np.exp(1j * angle), np.exp(-1j * angle)])


def rx(angle: float) -> np.ndarray:
    """exp(i angle X)."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 1j * s], [1j * s, c]])


# -- pattern construction -------------------------------------------------


class _Builder:
    """Accumulates a graph plus measurement specs; ``build`` orders them.

    Each XY step either has a flow successor (chain steps: the outcome is
    corrected by X on the successor and Z on the successor's other
    neighbours) or none (bridge steps: corrected by Z on its neighbours).
    Z steps correct by Z on their neighbours.
    """

    def __init__(self) -> None:
        self.n = 0
        self.edges: set[tuple[int, int]] = set()
        self.meas: dict[int, tuple[str, float, int | None]] = {}

    def vertex(self) -> int:
        self.n += 1
        return self.n - 1

    def edge(self, u: int, v: int) -> None:
        e = (min(u, v), max(u, v))
        self.edges ^= {e}

    def measure(self, v: int, basis: str, angle: float = 0.0, flow: int | None = None) -> None:
        self.meas[v] = (basis, angle, flow)

    def build(
        self,
        inputs: list[int],
        outputs: list[int],
        output_cliffords: dict[int, int] | None = None,
    ) -> MeasurementPattern:
        graph = Graph(range(self.n), sorted(self.edges))
        return derive_pattern(graph, inputs, outputs, self.meas, None, output_cliffords)


def measurement_order(graph: Graph, meas: Mapping[int, tuple[str, float, int | None]]) -> list[int]:
    """Topological order satisfying the causal-flow constraints.

    Z steps go first.  A flow step v -> w precedes w's other measured
    neighbours; a flow-less XY step precedes all its measured neighbours.
    Ties break by vertex label.
    """
    after: dict[int, set[int]] = {v: set() for v in meas}
    for v, (basis, _, flow) in meas.items():
        if basis == "Z":
            continue
        if flow is not None:
            later = (set(graph.neighbors(flow)) - {v}) | {flow}
        else:
            later = set(graph.neighbors(v))
        for u in later:
            if u in meas and meas[u][0] != "Z":
                after[v].add(u)
    indeg = {v: 0 for v in meas}
    for v in after:
        for u in after[v]:
            indeg[u] += 1
    heap = [(0 if meas[v][0] == "Z" else 1, v) for v in meas if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, v = heapq.heappop(heap)
        order.append(v)
        for u in after[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(heap, (1, u))
    if len(order) != len(meas):
        raise PatternError("no measurement order satisfies the flow constraints")
    return order


def derive_pattern(
    graph: Graph,
    inputs: list[int],
    outputs: list[int],
    meas: Mapping[int, tuple[str, float, int | None]],
    order: Sequence[int] | None = None,
    output_cliffords: dict[int, int] | None = None,
) -> MeasurementPattern:
    """Compute feed-forward domains.

    ``meas[v] = (basis, angle, flow)`` with basis ``"XY"`` or ``"Z"``.
    Domains are symbolic: each unmeasured vertex carries the sets of
    outcomes whose parity gives its X and Z byproducts.
    """
    if order is None:
        order = measurement_order(graph, meas)
    fx: dict[int, frozenset[int]] = {v: frozenset() for v in graph.vertices}
    fz: dict[int, frozenset[int]] = {v: frozenset() for v in graph.vertices}
    measured: set[int] = set()
    z_measured: set[int] = set()
    steps: list[Step] = []

    def live_nb(v: int) -> set[int]:
        return set(graph.neighbors(v)) - measured

    def check_live(vs: set[int], what: str) -> None:
        if vs & (measured - z_measured):
            raise PatternError(f"flow condition violated at {what}")

    for v in order:
        basis, angle, flow = meas[v]
        if basis == "Z":
            steps.append(Step(v, "Z", 0.0, fx[v], frozenset()))
            signal = fx[v] ^ {v}
            for u in live_nb(v):
                fz[u] = fz[u] ^ signal
            z_measured.add(v)
        elif basis == "XY":
            steps.append(Step(v, "XY", float(angle), fx[v], fz[v]))
            signal = frozenset({v})
            if flow is not None:
                if flow not in graph.neighbors(v) or flow in measured or flow in inputs:
                    raise PatternError(f"flow {v}->{flow} is not a valid live edge")
                check_live(set(graph.neighbors(flow)) - {v}, f"{v}->{flow}")
                fx[flow] = fx[flow] ^ signal
                for u in live_nb(flow) - {v}:
                    fz[u] = fz[u] ^ signal
            else:
                if v in inputs:
                    raise PatternError("a flow-less XY step cannot sit on an input")
                check_live(set(graph.neighbors(v)), f"bridge {v}")
                for u in live_nb(v):
                    fz[u] = fz[u] ^ signal
        else:
            raise PatternError(f"unknown basis {basis!r}")
        measured.add(v)
    p = MeasurementPattern(
        graph,
        list(inputs),
        list(outputs),
        steps,
        {o: fx[o] for o in outputs},
        {o: fz[o] for o in outputs},
        dict(output_cliffords or {}),
    )
    p.validate()
    return p


def chain_pattern(alphas: Sequence[float]) -> MeasurementPattern:
    """Linear chain measured at XY angles ``alphas``; one output at the end."""
    b = _Builder()
    vs = [b.vertex() for _ in range(len(alphas) + 1)]
    for u, v in zip(vs, vs[1:]):
        b.edge(u, v)
    for i, a in enumerate(alphas):
        b.measure(vs[i], "XY", a, flow=vs[i + 1])
    return b.build([vs[0]], [vs[-1]])


def j_chain_pattern(thetas: Sequence[float]) -> MeasurementPattern:
    """Chain implementing J(theta_k) ... J(theta_1) (first listed acts first)."""
    return chain_pattern([2 * t for t in thetas])


def euler_angles(u: np.ndarray) -> tuple[float, float, float]:
    """``(theta, zeta, xi)`` with u = e^{i xi Z} e^{i zeta X} e^{i theta Z} up to phase."""
    u = np.asarray(u, complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10):
        raise PatternError("expected a 2x2 unitary")
    su = u / np.sqrt(np.linalg.det(u))
    a, b = su[0, 0], su[0, 1]
    zeta = math.atan2(abs(b), abs(a))
    s = math.atan2(a.imag, a.real) if abs(a) > 1e-12 else 0.0
    d = (math.atan2(b.imag, b.real) - math.pi / 2) if abs(b) > 1e-12 else 0.0
    if abs(a) <= 1e-12:
        s = d  # only xi - theta is defined; pick theta = 0
    if abs(b) <= 1e-12:
        d = s
    return (s - d) / 2, zeta, (s + d) / 2


def single_qubit_thetas(u: np.ndarray) -> list[float]:
    """Shortest J sequence (first acts first) equal to ``u`` up to phase."""
    u = np.asarray(u, complex)
    hu = oracle.H @ u
    if abs(hu[0, 1]) < 1e-12 and abs(hu[1, 0]) < 1e-12:
        # u = H e^{i theta Z}: a single step
        return [0.5 * float(np.angle(hu[0, 0] / hu[1, 1]))]
    if abs(u[0, 1]) < 1e-12 and abs(u[1, 0]) < 1e-12:
        # u = e^{i theta Z} = J(0) J(theta)
        return [0.5 * float(np.angle(u[0, 0] / u[1, 1])), 0.0]
    theta, zeta, xi = euler_angles(u)
    return [theta, zeta, xi, 0.0]


def pattern_for_single_qubit_unitary(u: np.ndarray) -> MeasurementPattern:
    """Chain whose corrected output is ``u |psi>`` up to global phase.

    A general unitary uses four XY steps: the Euler triple followed by an
    X step that cancels the residual Hadamard.  Diagonal unitaries and
    ``H e^{i theta Z}`` use fewer sites.
    """
    return j_chain_pattern(single_qubit_thetas(u))


ENTANGLING_MODES = ("direct", "Y", "Z")
# Ideal action of the intermediate-vertex bridge on the two wires, as
# (clifford on wire 1, clifford on wire 2, applies CZ).  Confirmed by an
# exhaustive oracle search over local Clifford pairs in the test suite.
BRIDGE_ACTION = {"Y": (lc.P, lc.P, True), "Z": (0, 0, False)}


def entangling_pattern(mode: str = "direct") -> MeasurementPattern:
    """Two identity wires (three sites each) coupled at their inputs.

    ``direct`` joins the inputs by an edge (target CZ).  ``Y`` and ``Z``
    insert an intermediate vertex adjacent to both inputs, measured first;
    Y yields ``(P x P) CZ`` and Z yields the identity.  The known local
    Cliffords are recorded in ``output_cliffords``.
    """
    if mode not in ENTANGLING_MODES:
        raise PatternError(f"mode must be one of {ENTANGLING_MODES}")
    b = _Builder()
    w1 = [b.vertex() for _ in range(3)]
    w2 = [b.vertex() for _ in range(3)]
    for w in (w1, w2):
        b.edge(w[0], w[1])
        b.edge(w[1], w[2])
    cl: dict[int, int] = {}
    if mode == "direct":
        b.edge(w1[0], w2[0])
    else:
        c = b.vertex()
        b.edge(c, w1[0])
        b.edge(c, w2[0])
        if mode == "Y":
            b.measure(c, "XY", math.pi / 2)
        else:
            b.measure(c, "Z")
        c1, c2, _ = BRIDGE_ACTION[mode]
        cl = {w1[2]: c1, w2[2]: c2}
    for w in (w1, w2):
        b.measure(w[0], "XY", 0.0, flow=w[1])
        b.measure(w[1], "XY", 0.0, flow=w[2])
    return b.build([w1[0], w2[0]], [w1[2], w2[2]], {k: v for k, v in cl.items() if v})


def entangling_target(mode: str) -> np.ndarray:
    """Two-wire unitary the corrected entangling pattern implements."""
    if mode == "direct":
        return oracle.CZ.copy()
    if mode == "Z":
        return np.eye(4, dtype=complex)
    return oracle.CZ.copy()


# -- circuit compilation ----------------------------------------------------


def validate_circuit(circ: Sequence[Mapping], n_wires: int) -> None:
    if not 1 <= n_wires <= MAX_WIRES:
        raise PatternError(f"between 1 and {MAX_WIRES} wires supported")
    for i, g in enumerate(circ):
        if "J" in g:
            w = g.get("wire")
            if not isinstance(w, int) or not 0 <= w < n_wires:
                raise PatternError(f"gate {i}: bad wire {w!r}")
            float(g["J"])
        elif "CZ" in g:
            pr = g["CZ"]
            if (
                len(pr) != 2
                or pr[0] == pr[1]
                or any(not isinstance(w, int) or not 0 <= w < n_wires for w in pr)
            ):
                raise PatternError(f"gate {i}: bad CZ wires {pr!r}")
        else:
            raise PatternError(f"gate {i}: expected a 'J' or 'CZ' entry")


def circuit_unitary(circ: Sequence[Mapping], n_wires: int) -> np.ndarray:
    """Dense unitary of a J/CZ circuit; wire 0 is the most significant."""
    validate_circuit(circ, n_wires)
    u = np.eye(2**n_wires, dtype=complex)
    for g in circ:
        if "J" in g:
            ops = [np.eye(2)] * n_wires
            ops[g["wire"]] = j_gate(float(g["J"]))
            m = ops[0]
            for o in ops[1:]:
                m = np.kron(m, o)
        else:
            a, b = g["CZ"]
            idx = np.arange(2**n_wires)
            bit = lambda w: (idx >> (n_wires - 1 - w)) & 1  # noqa: E731
            m = np.diag(1 - 2 * (bit(a) & bit(b))).astype(complex)
        u = m @ u
    return u


def compile_circuit(
    circ: Sequence[Mapping],
    n_wires: int,
    cz_mode: str = "edge",
    padded: bool = False,
) -> MeasurementPattern:
    """Compile a J/CZ circuit into one measurement pattern.

    ``cz_mode="edge"`` realises each CZ as a graph edge between the wires'
    current sites.  ``cz_mode="bridge"`` lays wire w out on row 2w of a
    square cluster, uses a Y-measured separator-row site for each CZ, and
    removes every unused lattice site with the graph Z rule.  With
    ``padded=True`` the unused sites stay in the pattern as Z steps.
    """
    validate_circuit(circ, n_wires)
    if cz_mode not in ("edge", "bridge"):
        raise PatternError("cz_mode must be 'edge' or 'bridge'")
    if padded and cz_mode != "bridge":
        raise PatternError("padding needs the lattice layout of bridge mode")

    # A Y bridge leaves P on both wires.  Fold it into the wire's next J as
    # a pi/4 shift, or into the output Clifford if no J follows.
    pos = [0] * n_wires
    pending = [0] * n_wires
    thetas: list[list[float]] = [[] for _ in range(n_wires)]
    czs: list[tuple[int, int, int, int]] = []
    for g in circ:
        if "J" in g:
            w = g["wire"]
            thetas[w].append(float(g["J"]) + pending[w] * math.pi / 4)
            pending[w] = 0
            pos[w] += 1
        else:
            a, b = g["CZ"]
            czs.append((a, pos[a], b, pos[b]))
            if cz_mode == "bridge":
                pending[a] += 1
                pending[b] += 1
    out_cl = {w: lc.from_word("P" * (pending[w] % 4)) for w in range(n_wires)}

    if cz_mode == "edge":
        bld = _Builder()
        sites = [[bld.vertex() for _ in range(len(thetas[w]) + 1)] for w in range(n_wires)]
        for w in range(n_wires):
            for u, v in zip(sites[w], sites[w][1:]):
                bld.edge(u, v)
            for k, th in enumerate(thetas[w]):
                bld.measure(sites[w][k], "XY", 2 * th, flow=sites[w][k + 1])
        for a, pa, b, pb in czs:
            bld.edge(sites[a][pa], sites[b][pb])
        return bld.build([s[0] for s in sites], [s[-1] for s in sites])

    for a, pa, b, pb in czs:
        if abs(a - b) != 1:
            raise PatternError("bridge mode couples neighbouring wires only")
        if pa != pb:
            raise PatternError(
                "bridge mode needs both wires at the same column when a CZ acts; "
                "pad the shorter wire with J(0) J(0) pairs"
            )
    cols = max(len(t) for t in thetas) + 1
    rows = 2 * n_wires - 1

    def site(r: int, c: int) -> int:
        return r * cols + c

    lattice_edges = [(site(r, c), site(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    lattice_edges += [(site(r, c), site(r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    sites = [[site(2 * w, c) for c in range(len(thetas[w]) + 1)] for w in range(n_wires)]
    meas: dict[int, tuple[str, float, int | None]] = {}
    for w in range(n_wires):
        for k, th in enumerate(thetas[w]):
            meas[sites[w][k]] = ("XY", 2 * th, sites[w][k + 1])
    bridges: set[tuple[int, int]] = set()
    for a, pa, b, _ in czs:
        c = site(2 * min(a, b) + 1, pa)
        if c in meas:
            raise PatternError("two CZs need the same bridge site; separate them by J gates")
        r = 2 * min(a, b) + 1
        if any((r, pa + d) in bridges for d in (-1, 1)):
            # Adjacent bridge sites would each have to be measured first.
            raise PatternError("CZs in neighbouring columns share a lattice edge; insert a J pair")
        bridges.add((r, pa))
        meas[c] = ("XY", math.pi / 2, None)
    used = set(meas) | {s[-1] for s in sites}
    padding = [v for v in range(rows * cols) if v not in used]
    full = Graph(range(rows * cols), lattice_edges)
    if padded:
        graph = full
        for v in padding:
            meas[v] = ("Z", 0.0, None)
    else:
        graph = reduce_clifford_part(full, [(v, "Z") for v in padding])
        if graph.vertex_ops:
            raise PatternError("internal error: Z-removal left local Cliffords")
    outputs = [s[-1] for s in sites]
    return derive_pattern(
        graph,
        [s[0] for s in sites],
        outputs,
        meas,
        None,
        {outputs[w]: c for w, c in out_cl.items() if c},
    )


# -- execution --------------------------------------------------------------


@dataclass
class RunResult:
    output: oracle.StateVector
    frame: PauliFrame
    outcomes: dict[int, int]

    def corrected(self, pattern: MeasurementPattern) -> oracle.StateVector:
        return correct_output(pattern, self.output, self.frame)


def run_pattern(
    p: MeasurementPattern,
    input_state: oracle.StateVector,
    rng: np.random.Generator | None = None,
    forced: Mapping[int, int] | None = None,
) -> RunResult:
    """Execute a pattern on the state-vector oracle.

    Input sites map to ``p.inputs`` in order; every other vertex starts in
    ``|+>``.  ``forced`` optionally fixes raw outcomes per vertex.
    """
    p.validate()
    if input_state.n != len(p.inputs) or any(d != 2 for d in input_state.dims):
        raise PatternError("input state does not match the pattern inputs")
    verts = list(p.graph.vertices)
    others = [v for v in verts if v not in p.inputs]
    state = oracle.StateVector(
        (2,) * len(verts),
        np.kron(input_state.normalized().amps, oracle.plus_state(len(others)).amps)
        if others
        else input_state.normalized().amps,
    )
    sites = list(p.inputs) + others
    pos = {v: i for i, v in enumerate(sites)}
    n = len(sites)
    idx = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    for u, v in p.graph.edge_list():
        parity ^= ((idx >> (n - 1 - pos[u])) & 1) & ((idx >> (n - 1 - pos[v])) & 1)
    state = oracle.StateVector(state.dims, state.amps * (1 - 2 * parity))
    outcomes: dict[int, int] = {}

    def par(dom: frozenset[int]) -> int:
        return sum(outcomes[d] for d in dom) & 1

    for st in p.steps:
        site = sites.index(st.vertex)
        f = None if forced is None else forced.get(st.vertex)
        s = par(st.s_domain)
        if st.basis == "Z":
            m, state, _ = oracle.measure_site(state, site, oracle.pauli_basis("Z"), rng, f)
            outcomes[st.vertex] = m ^ s
        else:
            t = par(st.t_domain)
            angle = (-1) ** s * st.angle + t * math.pi
            m, state, _ = oracle.measure_site(state, site, oracle.xy_basis(angle), rng, f)
            outcomes[st.vertex] = m
        sites.pop(site)
    perm = [sites.index(o) for o in p.outputs]
    out = oracle.StateVector(state.dims, np.transpose(state.tensor(), perm).reshape(-1))
    frame = PauliFrame(
        {o: par(p.output_x.get(o, frozenset())) for o in p.outputs},
        {o: par(p.output_z.get(o, frozenset())) for o in p.outputs},
    )
    return RunResult(out, frame, outcomes)


def correct_output(
    p: MeasurementPattern, out: oracle.StateVector, frame: PauliFrame
) -> oracle.StateVector:
    """Undo the Pauli frame, then the pattern's known output Cliffords."""
    s = out
    for i, o in enumerate(p.outputs):
        if frame.z.get(o):
            s = oracle.apply_unitary(s, oracle.Z, [i])
        if frame.x.get(o):
            s = oracle.apply_unitary(s, oracle.X, [i])
        c = p.output_cliffords.get(o, 0)
        if c:
            s = oracle.apply_unitary(s, lc.matrix(lc.inverse(c)), [i], check=False)
    return s


def random_input(n: int, rng: np.random.Generator) -> oracle.StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return oracle.StateVector((2,) * n, v / np.linalg.norm(v))
