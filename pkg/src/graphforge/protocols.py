"""Heralded entanglement between two matter nodes.

Three schemes are modelled at the photon level on top of
:mod:`graphforge.optics`:

* single-click (weak excitation, one beam splitter, one detector click);
* polarization (both nodes emit; one click left and one click right);
* double heralding (two single-click rounds with a bit flip in between).

Every protocol is first expanded into its complete list of emission, loss
and click branches.  Monte Carlo runs then sample those branches, so the
exact enumeration serves as the oracle for the sampled statistics.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import clifford as lc
from . import stats
from .graph import Graph, GraphError, apply_local_clifford, measure_graph, parity_project
from .optics import (
    E,
    BeamSplitter,
    Branch,
    DetectorModel,
    HybridState,
    OpticsError,
    PhaseShifter,
    PolarizingBeamSplitter,
    Waveplate,
    apply_elements,
    detect_branches,
    emit,
    pi_pulse,
)

ProtocolError = OpticsError

_SINGLE_CLICK_DETECTORS = {"D3": [("3", "h"), ("3", "v")], "D4": [("4", "h"), ("4", "v")]}


def _check_T(T: float, allow_zero: bool = False) -> float:
    T = float(T)
    lo_ok = T >= 0 if allow_zero else T > 0
    if not (lo_ok and T <= 1):
        raise ProtocolError(f"transmission T={T} outside {'[0, 1]' if allow_zero else '(0, 1]'}")
    return T


# -- closed forms ----------------------------------------------------------


def analytic(kind: str, theta: float, T: float) -> float:
    """Closed-form single-click predictions.

    ``cabrillo_p1``: one photon emitted and detected.
    ``cabrillo_p2``: two photons emitted, at least one detected.
    ``cabrillo_eta``: weight of |11> in the heralded mixture.
    """
    if not 0 <= theta <= math.pi / 2:
        raise ProtocolError("theta must lie in [0, pi/2]")
    _check_T(T, allow_zero=True)
    s2 = math.sin(theta) ** 2
    c2 = math.cos(theta) ** 2
    if kind == "cabrillo_p1":
        return 2 * s2 * c2 * T
    if kind == "cabrillo_p2":
        return s2 * s2 * (1 - (1 - T) ** 2)
    if kind == "cabrillo_eta":
        den = 2 - s2 * T
        return s2 * (2 - T) / den
    raise ProtocolError(f"unknown analytic kind {kind!r}")


# -- helpers ----------------------------------------------------------------


def _branch_vector(matter: Mapping[tuple[int, ...], complex]) -> np.ndarray:
    """Two-qubit vector (node 0 most significant); raises if a node is excited."""
    v = np.zeros(4, complex)
    for (i, j), a in matter.items():
        if i > 1 or j > 1:
            raise ProtocolError("matter state still excited after detection")
        v[2 * i + j] += a
    return v


def bell_fidelity(vec: np.ndarray) -> tuple[float, str, float]:
    """Best fidelity with a maximally entangled two-qubit state of Bell form.

    Returns ``(fidelity, kind, phase)`` with kind ``"psi"`` for
    ``(|01> + e^{i phase}|10>)/sqrt2`` or ``"phi"`` for
    ``(|00> + e^{i phase}|11>)/sqrt2``.
    """
    v = np.asarray(vec, complex)
    v = v / np.linalg.norm(v)
    best = (0.0, "psi", 0.0)
    for kind, (i, j) in (("psi", (1, 2)), ("phi", (0, 3))):
        f = (abs(v[i]) + abs(v[j])) ** 2 / 2
        ph = cmath.phase(v[j] / v[i]) if abs(v[i]) > 1e-12 and abs(v[j]) > 1e-12 else 0.0
        if f > best[0] + 1e-12:
            best = (float(f), kind, float(ph))
    return best


def _is_basis(vec: np.ndarray, idx: int, tol: float = 1e-9) -> bool:
    n = np.linalg.norm(vec)
    return n > 0 and abs(abs(vec[idx]) - n) < tol * max(1.0, n)


def _single_click_round(matter: Mapping[tuple[int, int], complex], T: float, path_phase: float) -> list[Branch]:
    """Excite |1> on both nodes, emit, interfere on a 50/50 splitter, detect.

    ``matter`` holds levels 0/1/E; any |E> population emits immediately.
    """
    h = HybridState.from_matter(matter, ports={"1", "2"})
    for node in (0, 1):
        port = "12"[node]
        h = emit(h, node, [(1, 1, (port, "h"))])
    h = apply_elements(
        h,
        [
            PhaseShifter(path_phase, "2"),
            BeamSplitter(math.pi / 4, 0.0, "1", "2", "3", "4"),
        ],
    )
    return detect_branches(h, DetectorModel(T), _SINGLE_CLICK_DETECTORS)


# -- single-click scheme -----------------------------------------------------


@dataclass(frozen=True)
class CabrilloBranch:
    clicks: frozenset[str]
    probability: float
    kind: str  # "psi" (one-photon), "11", "00", or "other"
    state: np.ndarray


@lru_cache(maxsize=64)
def cabrillo_branches(theta: float, T: float, path_phase: float = 0.0) -> tuple[CabrilloBranch, ...]:
    """Exhaustive branch list: both nodes start in cos|0> + sin|e>."""
    if not 0 < theta < math.pi / 2:
        raise ProtocolError("theta must lie strictly between 0 and pi/2")
    _check_T(T)
    c, s = math.cos(theta), math.sin(theta)
    node = {0: c, E: s}
    matter = {(i, j): node[i] * node[j] for i in node for j in node}
    out = []
    for b in _single_click_round(matter, T, path_phase):
        vec = _branch_vector(b.matter)
        if _is_basis(vec, 3):
            kind = "11"
        elif _is_basis(vec, 0):
            kind = "00"
        elif abs(vec[0]) < 1e-12 and abs(vec[3]) < 1e-12:
            kind = "psi"
        else:
            kind = "other"
        out.append(CabrilloBranch(b.clicks, b.probability, kind, vec / np.linalg.norm(vec)))
    return tuple(out)


@dataclass
class CabrilloOutcome:
    success: bool
    clicks: frozenset[str]
    phi: float | None
    ensemble: list[tuple[float, np.ndarray]]
    sampled: CabrilloBranch

    @property
    def eta(self) -> float:
        """Weight of the |11> branch in the heralded ensemble."""
        return sum(w for w, v in self.ensemble if _is_basis(v, 3))


def _ensemble(branches, clicks) -> list[tuple[float, np.ndarray]]:
    sel = [b for b in branches if b.clicks == clicks]
    tot = sum(b.probability for b in sel)
    merged: dict[tuple, list] = {}
    for b in sel:
        lead = b.state[np.argmax(np.abs(b.state) > 1e-9)]
        key = tuple(np.round(b.state * abs(lead) / lead, 10))
        if key in merged:
            merged[key][0] += b.probability / tot
        else:
            merged[key] = [b.probability / tot, b.state]
    return [(w, v) for w, v in merged.values()]


def run_cabrillo(theta: float, T: float, rng: np.random.Generator, path_phase: float = 0.0) -> CabrilloOutcome:
    """One heralding attempt; success means exactly one detector clicked."""
    branches = cabrillo_branches(float(theta), float(T), float(path_phase))
    p = np.array([b.probability for b in branches])
    b = branches[int(rng.choice(len(branches), p=p / p.sum()))]
    success = len(b.clicks) == 1
    ens = _ensemble(branches, b.clicks) if success else []
    phi = None
    if success:
        psi = [v for w, v in ens if abs(v[1]) > 1e-12 and abs(v[2]) > 1e-12]
        phi = float(cmath.phase(psi[0][2] / psi[0][1])) if psi else 0.0
    return CabrilloOutcome(success, b.clicks, phi, ens, b)


# -- double heralding -------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    """Complete history of a two-round attempt.

    ``vector`` is the final unnormalized two-qubit state (norm^2 is the
    probability).  ``round1_kind`` classifies the state after round one.
    """

    clicks1: frozenset[str]
    clicks2: frozenset[str] | None
    config: tuple
    round1_kind: str
    vector: np.ndarray

    @property
    def probability(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    @property
    def success(self) -> bool:
        return len(self.clicks1) == 1 and self.clicks2 is not None and len(self.clicks2) == 1


def _classify(vec: np.ndarray) -> str:
    if _is_basis(vec, 3):
        return "11"
    if _is_basis(vec, 0):
        return "00"
    if abs(vec[0]) < 1e-12 and abs(vec[3]) < 1e-12:
        return "bell" if bell_fidelity(vec)[0] > 1 - 1e-9 else "odd"
    return "other"


def _to_levels(vec: np.ndarray) -> dict[tuple[int, int], complex]:
    return {(i >> 1, i & 1): complex(vec[i]) for i in range(4) if abs(vec[i]) > 1e-15}


def _herald_round(vec: np.ndarray, T: float, path_phase: float) -> list[tuple[Branch, np.ndarray]]:
    h = HybridState.from_matter(_to_levels(vec))
    for node in (0, 1):
        h = pi_pulse(h, node, 1)
    matter = {m: c for (m, _), c in h.terms.items()}
    return [(b, _branch_vector(b.matter)) for b in _single_click_round(matter, T, path_phase)]


def _flip_both(vec: np.ndarray) -> np.ndarray:
    # X (x) X reverses the computational index order
    return vec[::-1].copy()


def double_heralding_leaves(
    T: float, initial: np.ndarray | None = None, path_phase: float = 0.0, undo_flip: bool = False
) -> list[Leaf]:
    """Every branch of the two-round protocol.

    ``initial`` is a two-qubit vector (default |+>|+>).  A failed first
    round ends the attempt.  With ``undo_flip`` the X (x) X of step three is
    reversed after a successful second round.
    """
    T = _check_T(T, allow_zero=True)
    init = np.full(4, 0.5, complex) if initial is None else np.asarray(initial, complex)
    leaves = []
    for b1, v1 in _herald_round(init, T, path_phase):
        kind = _classify(v1)
        cfg1 = (b1.surviving, b1.lost)
        if len(b1.clicks) != 1:
            leaves.append(Leaf(b1.clicks, None, (cfg1,), kind, v1))
            continue
        for b2, v2 in _herald_round(_flip_both(v1), T, path_phase):
            ok = len(b2.clicks) == 1
            if ok and undo_flip:
                v2 = _flip_both(v2)
            leaves.append(Leaf(b1.clicks, b2.clicks, (cfg1, (b2.surviving, b2.lost)), kind, v2))
    return leaves


def double_heralding_success_probability(T: float, path_phase: float = 0.0) -> float:
    """Exhaustive-enumeration success probability from |+>|+>."""
    return sum(l.probability for l in double_heralding_leaves(T, path_phase=path_phase) if l.success)


def double_heralding_round1_weights(T: float) -> tuple[float, float]:
    """(entangled, |11>) weights of the mixture heralded by round one."""
    tot = {"bell": 0.0, "11": 0.0}
    for b, v in _herald_round(np.full(4, 0.5, complex), _check_T(T), 0.0):
        if len(b.clicks) == 1:
            k = _classify(v)
            tot[k] = tot.get(k, 0.0) + float(np.vdot(v, v).real)
    s = tot["bell"] + tot["11"]
    return tot["bell"] / s, tot["11"] / s


@dataclass(frozen=True)
class HeraldingChannel:
    """Kraus data of the protocol acting on two arbitrary qubits.

    ``success`` lists ``(probability-weight matrix K, clicks)`` per success
    history; ``fail_prob[i]`` is the failure probability for computational
    input ``i``.
    """

    success: tuple[tuple[np.ndarray, tuple], ...]
    fail_kraus: tuple[np.ndarray, ...]
    fail_prob: np.ndarray


@lru_cache(maxsize=32)
def heralding_channel(T: float, path_phase: float = 0.0) -> HeraldingChannel:
    """Kraus operators per history, with the final X (x) X undone."""
    cols: dict[tuple, np.ndarray] = {}
    meta: dict[tuple, tuple] = {}
    for i in range(4):
        e = np.zeros(4, complex)
        e[i] = 1
        for leaf in double_heralding_leaves(T, e, path_phase, undo_flip=True):
            key = (leaf.success, leaf.clicks1, leaf.clicks2, leaf.config)
            if key not in cols:
                cols[key] = np.zeros((4, 4), complex)
                meta[key] = (leaf.clicks1, leaf.clicks2)
            cols[key][:, i] += leaf.vector
    succ = tuple((k_, meta[key]) for key, k_ in sorted(cols.items(), key=lambda kv: repr(kv[0])) if key[0])
    fail = tuple(k_ for key, k_ in cols.items() if not key[0])
    fail_prob = np.array([sum(np.linalg.norm(k_[:, i]) ** 2 for k_ in fail) for i in range(4)])
    return HeraldingChannel(succ, fail, fail_prob)


@dataclass
class HeraldOutcome:
    success: bool
    clicks: tuple
    state: np.ndarray | None = None
    phase: float | None = None
    graph: Graph | None = None
    damaged: tuple = field(default_factory=tuple)


def _z_preserving(g: Graph, v: int) -> bool:
    return lc.conjugate_dagger(g.vertex_op(v), "Z")[1] == "Z"


def run_double_heralding(
    T: float,
    rng: np.random.Generator,
    initial: tuple[Graph, int, int] | None = None,
    path_phase: float = 0.0,
) -> HeraldOutcome:
    """One attempt.

    Without ``initial`` the nodes start in |+>|+> and success returns the
    heralded two-qubit state.  With ``initial=(graph, a, b)`` the protocol
    acts on vertices a and b of a graph state: success applies the odd
    parity projection (plus a Z on ``a`` when the heralded sign is
    negative) and failure measures both vertices in Z.
    """
    T = _check_T(T)
    if initial is None:
        leaves = double_heralding_leaves(T, path_phase=path_phase)
        p = np.array([l.probability for l in leaves])
        leaf = leaves[int(rng.choice(len(leaves), p=p / p.sum()))]
        clicks = (leaf.clicks1, leaf.clicks2)
        if not leaf.success:
            return HeraldOutcome(False, clicks)
        v = leaf.vector / np.linalg.norm(leaf.vector)
        _, _, ph = bell_fidelity(v)
        return HeraldOutcome(True, clicks, v, ph)

    g, a, b = initial
    if a == b or a not in g or b not in g:
        raise GraphError("double heralding needs two distinct vertices of the graph")
    for v in (a, b):
        if not _z_preserving(g, v):
            raise GraphError(f"vertex {v} carries a tag that does not preserve Z")
    ch = heralding_channel(T, float(path_phase))
    # Z_a, Z_b of a graph state with Z-preserving tags are unbiased and independent.
    w_succ = [np.linalg.norm(k_, "fro") ** 2 / 4 for k_, _ in ch.success]
    p_fail = float(ch.fail_prob.sum() / 4)
    probs = np.array(w_succ + [p_fail])
    pick = int(rng.choice(len(probs), p=probs / probs.sum()))
    if pick < len(w_succ):
        k_, clicks = ch.success[pick]
        sign = _odd_sign(k_)
        # physical parity seen by the projector accounts for Z-flipping tags inside parity_project
        out = parity_project(g, a, b, -1)
        if sign < 0:
            out = apply_local_clifford(out, a, lc.Z)
        return HeraldOutcome(True, clicks, graph=out)
    q = ch.fail_prob / ch.fail_prob.sum()
    idx = int(rng.choice(4, p=q))
    za, zb = (1 if idx >> 1 == 0 else -1), (1 if idx & 1 == 0 else -1)
    out = measure_graph(g, a, "Z", za)
    out = measure_graph(out, b, "Z", zb)
    return HeraldOutcome(False, (), graph=out, damaged=((a, za), (b, zb)))


def _odd_sign(k_: np.ndarray) -> int:
    """Sign s of a success Kraus proportional to |01><01| + s|10><10|."""
    off = k_.copy()
    off[1, 1] = off[2, 2] = 0
    if np.abs(off).max() > 1e-9 or abs(k_[1, 1]) < 1e-12:
        raise ProtocolError("success operator is not an odd-parity projector")
    r = k_[2, 2] / k_[1, 1]
    if abs(r - 1) < 1e-9:
        return 1
    if abs(r + 1) < 1e-9:
        return -1
    raise ProtocolError("heralded relative phase is not a Pauli correction")


# -- polarization scheme -------------------------------------------------------

_DK_DETECTORS = {
    "L1": [("L1", "h"), ("L1", "v")],
    "L2": [("L2", "h"), ("L2", "v")],
    "R1": [("R1", "h"), ("R1", "v")],
    "R2": [("R2", "h"), ("R2", "v")],
}


def _check_amplitudes(g0: complex, g1: complex) -> None:
    if abs(abs(g0) ** 2 + abs(g1) ** 2 - 1) > 1e-9:
        raise ProtocolError("|g0|^2 + |g1|^2 must equal 1")


def duan_kimble_state(g0: complex, g1: complex, T: float = 1.0) -> HybridState:
    """Both nodes emitted; photons after the full network, before detection."""
    _check_amplitudes(g0, g1)
    h = HybridState.from_matter({(E, E): 1.0}, ports={"a", "b", "x", "y"})
    for node, port in ((0, "a"), (1, "b")):
        h = emit(h, node, [(g0, 0, (port, "h")), (g1, 1, (port, "v"))])
    return apply_elements(
        h,
        [
            Waveplate(math.pi / 2, 0.0, "b"),
            PolarizingBeamSplitter("a", "b", "c", "d"),
            Waveplate(math.pi / 4, 0.0, "c"),
            Waveplate(math.pi / 4, 0.0, "d"),
            PolarizingBeamSplitter("c", "x", "L1", "L2"),
            PolarizingBeamSplitter("d", "y", "R1", "R2"),
        ],
    )


def _dk_success(clicks: frozenset[str]) -> bool:
    return len([c for c in clicks if c[0] == "L"]) == 1 and len([c for c in clicks if c[0] == "R"]) == 1


def duan_kimble_branches(g0: complex, g1: complex, T: float) -> list[tuple[Branch, np.ndarray]]:
    T = _check_T(T, allow_zero=True)
    h = duan_kimble_state(g0, g1)
    return [(b, _branch_vector(b.matter)) for b in detect_branches(h, DetectorModel(T), _DK_DETECTORS)]


def duan_kimble_success_probability(g0: complex, g1: complex, T: float) -> float:
    return sum(b.probability for b, _ in duan_kimble_branches(g0, g1, T) if _dk_success(b.clicks))


@dataclass
class DuanKimbleOutcome:
    success: bool
    clicks: frozenset[str]
    state: np.ndarray | None
    phase: float | None


def run_duan_kimble(g0: complex, g1: complex, T: float, rng: np.random.Generator) -> DuanKimbleOutcome:
    T = _check_T(T)
    br = duan_kimble_branches(g0, g1, T)
    p = np.array([b.probability for b, _ in br])
    b, v = br[int(rng.choice(len(br), p=p / p.sum()))]
    if not _dk_success(b.clicks):
        return DuanKimbleOutcome(False, b.clicks, None, None)
    v = v / np.linalg.norm(v)
    return DuanKimbleOutcome(True, b.clicks, v, bell_fidelity(v)[2])


# -- Monte Carlo drivers --------------------------------------------------------


def _counts(labels: list[str], probs: list[float], trials: int, seed: int, threads: int) -> Counter:
    c = stats.sample_counts(np.array(probs), trials, seed, threads)
    out: Counter = Counter()
    for lab, k in zip(labels, c):
        out[lab] += int(k)
    return out


def _summary(success: int, trials: int, eta_k: int | None, eta_n: int | None, counts: Counter) -> dict:
    est = stats.Estimate(success, trials)
    res = {
        "trials": trials,
        "successes": success,
        "success_rate": est.rate,
        "ci_95": list(est.ci95()),
        "branch_counts": dict(sorted(counts.items())),
        "eta_estimate": None,
    }
    if eta_n:
        res["eta_estimate"] = eta_k / eta_n
        res["eta_ci_95"] = list(stats.binomial_ci(eta_k, eta_n))
    return res


def simulate(config: Mapping, trials: int | None = None, seed: int | None = None, threads: int = 1) -> dict:
    """Monte Carlo run of one protocol described by a config mapping.

    Keys: ``protocol`` (cabrillo, double_herald, duan_kimble), ``theta``,
    ``T``, ``g0``, ``trials``, ``seed``, optional ``path_phase``.
    """
    proto = config.get("protocol")
    trials = int(trials if trials is not None else config.get("trials", 10_000))
    seed = stats.resolve_seed(seed if seed is not None else config.get("seed"))
    T = float(config.get("T", 1.0))
    phase = float(config.get("path_phase", 0.0))
    if proto == "cabrillo":
        br = cabrillo_branches(float(config.get("theta", math.pi / 4)), T, phase)
        labels = [("single:" if len(b.clicks) == 1 else f"{len(b.clicks)}click:") + b.kind for b in br]
        cnt = _counts(labels, [b.probability for b in br], trials, seed, threads)
        succ = sum(k for lab, k in cnt.items() if lab.startswith("single:"))
        res = _summary(succ, trials, cnt["single:11"], succ, cnt)
        theta = float(config.get("theta", math.pi / 4))
        res["expected"] = {
            "success_rate": analytic("cabrillo_p1", theta, T) + analytic("cabrillo_p2", theta, T),
            "eta": analytic("cabrillo_eta", theta, T),
        }
    elif proto == "double_herald":
        _check_T(T)
        leaves = double_heralding_leaves(T, path_phase=phase)
        labels = []
        for l in leaves:
            r1 = "single" if len(l.clicks1) == 1 else f"{len(l.clicks1)}click"
            r2 = "-" if l.clicks2 is None else ("single" if len(l.clicks2) == 1 else f"{len(l.clicks2)}click")
            labels.append(f"r1:{r1}:{l.round1_kind}/r2:{r2}")
        cnt = _counts(labels, [l.probability for l in leaves], trials, seed, threads)
        succ = sum(k for lab, k in cnt.items() if lab.endswith("r2:single"))
        r1_single = sum(k for lab, k in cnt.items() if lab.startswith("r1:single"))
        r1_11 = sum(k for lab, k in cnt.items() if lab.startswith("r1:single:11"))
        res = _summary(succ, trials, r1_11, r1_single, cnt)
        w = double_heralding_round1_weights(T)
        res["round1_weights"] = [1 - res["eta_estimate"], res["eta_estimate"]] if r1_single else None
        res["expected"] = {
            "success_rate": double_heralding_success_probability(T, phase),
            "round1_weights": list(w),
        }
    elif proto == "duan_kimble":
        g0 = complex(config.get("g0", 1 / math.sqrt(2)))
        g1 = complex(config.get("g1", math.sqrt(max(0.0, 1 - abs(g0) ** 2))))
        br = duan_kimble_branches(g0, g1, T)
        labels = ["success" if _dk_success(b.clicks) else f"fail:{len(b.clicks)}click" for b, _ in br]
        cnt = _counts(labels, [b.probability for b, _ in br], trials, seed, threads)
        res = _summary(cnt["success"], trials, None, None, cnt)
        res["expected"] = {"success_rate": duan_kimble_success_probability(g0, g1, T)}
    else:
        raise ProtocolError(f"unknown protocol {proto!r}")
    res["protocol"] = proto
    res["seed"] = seed
    return res
