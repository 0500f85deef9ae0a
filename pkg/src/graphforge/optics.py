"""Few-photon Fock states coupled to matter levels.

A :class:`HybridState` is a polynomial in photon creation operators with
matter-level coefficients::

    sum  c[m, k] |m> (x) prod_j a^dag_{k_j} |vac>

keyed by the matter tuple ``m`` and the sorted tuple of mode labels ``k``
(a multiset, so ``(("1","h"), ("1","h"))`` is two photons in one mode).
The monomials are orthogonal but not normalized: ``prod a^dag |vac>`` has
squared norm ``prod_modes n!``.  Linear optical elements act by
substituting each creation operator with a combination of output-mode
creation operators.

Matter levels are small integers; the protocols use 0, 1 and ``E = 2``
for the excited state.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

Mode = tuple[str, str]  # (spatial port, polarization "h" or "v")
Key = tuple[tuple[int, ...], tuple[Mode, ...]]
E = 2
POLS = ("h", "v")
LOSS_PREFIX = "loss:"


class OpticsError(ValueError):
    """Unknown port, invalid parameter or malformed state."""


def _mono_weight(photons: Sequence[Mode]) -> int:
    w = 1
    for c in Counter(photons).values():
        w *= math.factorial(c)
    return w


@dataclass
class HybridState:
    """Matter levels (one entry per node) times a photon polynomial."""

    terms: dict[Key, complex] = field(default_factory=dict)
    ports: frozenset[str] = frozenset()

    @classmethod
    def from_matter(cls, amps: Mapping[tuple[int, ...], complex], ports: Iterable[str] = ()) -> HybridState:
        return cls({(tuple(m), ()): complex(a) for m, a in amps.items() if a != 0}, frozenset(ports))

    @classmethod
    def photons(cls, poly: Mapping[tuple[Mode, ...], complex], ports: Iterable[str] | None = None) -> HybridState:
        """Pure photonic state (no matter) from ``{monomial: coefficient}``."""
        terms = {((), tuple(sorted(k))): complex(v) for k, v in poly.items()}
        if ports is None:
            ports = {p for k in poly for p, _ in k}
        return cls(terms, frozenset(ports))

    def copy(self) -> HybridState:
        return HybridState(dict(self.terms), self.ports)

    def norm2(self) -> float:
        return float(sum(abs(c) ** 2 * _mono_weight(k[1]) for k, c in self.terms.items()))

    def normalized(self) -> HybridState:
        n = math.sqrt(self.norm2())
        if n == 0:
            raise OpticsError("cannot normalize a zero state")
        return HybridState({k: c / n for k, c in self.terms.items()}, self.ports)

    def photon_numbers(self) -> set[int]:
        return {len(k[1]) for k, c in self.terms.items() if abs(c) > 1e-15}

    def prune(self, tol: float = 1e-15) -> HybridState:
        return HybridState({k: c for k, c in self.terms.items() if abs(c) > tol}, self.ports)

    def amplitude(self, matter: Sequence[int], photons: Sequence[Mode]) -> complex:
        return self.terms.get((tuple(matter), tuple(sorted(photons))), 0j)

    def probability(self, predicate) -> float:
        """Total squared weight of monomials whose photon tuple passes ``predicate``."""
        tot = sum(
            abs(c) ** 2 * _mono_weight(k[1]) for k, c in self.terms.items() if predicate(k[1])
        )
        return float(tot) / self.norm2()


def fock(poly: Mapping[tuple[Mode, ...], complex]) -> HybridState:
    """Shorthand for a purely photonic state."""
    return HybridState.photons(poly)


# -- optical elements -------------------------------------------------------


@dataclass(frozen=True)
class PhaseShifter:
    phi: float
    port: str

    def rules(self) -> dict[Mode, list[tuple[complex, Mode]]]:
        e = np.exp(1j * self.phi)
        return {(self.port, p): [(e, (self.port, p))] for p in POLS}

    def inputs(self) -> set[str]:
        return {self.port}

    def outputs(self) -> set[str]:
        return {self.port}


@dataclass(frozen=True)
class Waveplate:
    """Polarization rotation on one port.

    h -> cos(t) h + e^{i phi} sin(t) v and v -> cos(t) v - e^{-i phi} sin(t) h.
    """

    theta: float
    phi: float
    port: str

    def rules(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        e = np.exp(1j * self.phi)
        h, v = (self.port, "h"), (self.port, "v")
        return {h: [(c, h), (e * s, v)], v: [(c, v), (-np.conj(e) * s, h)]}

    def inputs(self):
        return {self.port}

    def outputs(self):
        return {self.port}


@dataclass(frozen=True)
class BeamSplitter:
    """Ports (in1, in2) -> (out3, out4), polarization independent.

    in1 -> cos(t) out3 + e^{i phi} sin(t) out4
    in2 -> cos(t) out4 - e^{-i phi} sin(t) out3
    """

    theta: float
    phi: float
    in1: str
    in2: str
    out3: str
    out4: str

    def rules(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        e = np.exp(1j * self.phi)
        r = {}
        for p in POLS:
            r[(self.in1, p)] = [(c, (self.out3, p)), (e * s, (self.out4, p))]
            r[(self.in2, p)] = [(c, (self.out4, p)), (-np.conj(e) * s, (self.out3, p))]
        return r

    def inputs(self):
        return {self.in1, self.in2}

    def outputs(self):
        return {self.out3, self.out4}


@dataclass(frozen=True)
class PolarizingBeamSplitter:
    """Transmits h, reflects v: 1h->3h, 1v->4v, 2h->4h, 2v->-3v."""

    in1: str
    in2: str
    out3: str
    out4: str

    def rules(self):
        return {
            (self.in1, "h"): [(1, (self.out3, "h"))],
            (self.in1, "v"): [(1, (self.out4, "v"))],
            (self.in2, "h"): [(1, (self.out4, "h"))],
            (self.in2, "v"): [(-1, (self.out3, "v"))],
        }

    def inputs(self):
        return {self.in1, self.in2}

    def outputs(self):
        return {self.out3, self.out4}


Element = PhaseShifter | Waveplate | BeamSplitter | PolarizingBeamSplitter


def apply_element(state: HybridState, element: Element) -> HybridState:
    """Substitute creation operators according to ``element``."""
    unknown = element.inputs() - state.ports
    if unknown:
        raise OpticsError(f"unknown port(s) {sorted(unknown)}")
    rules = element.rules()
    out: dict[Key, complex] = defaultdict(complex)
    for (matter, photons), c in state.terms.items():
        choices = [rules.get(m, [(1, m)]) for m in photons]
        for combo in itertools.product(*choices):
            coef = c
            modes = []
            for k, m in combo:
                coef *= k
                modes.append(m)
            out[(matter, tuple(sorted(modes)))] += coef
    ports = (state.ports - (element.inputs() - element.outputs())) | element.outputs()
    return HybridState(dict(out), frozenset(ports)).prune()


def apply_elements(state: HybridState, elements: Iterable[Element]) -> HybridState:
    for el in elements:
        state = apply_element(state, el)
    return state


# -- matter operations --------------------------------------------------------

LevelMap = Mapping[int, Sequence[tuple[complex, int, Mode | None]]]


def matter_map(state: HybridState, node: int, rule: LevelMap) -> HybridState:
    """Apply ``level -> sum coef |level'> (x) a^dag_mode`` on one node.

    Levels missing from ``rule`` are left unchanged.  ``mode=None`` means
    no photon is created, so the map also covers plain level rotations.
    """
    out: dict[Key, complex] = defaultdict(complex)
    ports = set(state.ports)
    for (matter, photons), c in state.terms.items():
        lev = matter[node]
        for coef, new, mode in rule.get(lev, [(1, lev, None)]):
            m = matter[:node] + (new,) + matter[node + 1 :]
            ph = photons if mode is None else tuple(sorted(photons + (mode,)))
            if mode is not None:
                ports.add(mode[0])
            out[(m, ph)] += c * coef
    return HybridState(dict(out), frozenset(ports)).prune()


def pi_pulse(state: HybridState, node: int, lower: int, upper: int = E) -> HybridState:
    """Swap ``lower`` and ``upper`` on a node."""
    return matter_map(state, node, {lower: [(1, upper, None)], upper: [(1, lower, None)]})


def bit_flip(state: HybridState, node: int) -> HybridState:
    return matter_map(state, node, {0: [(1, 1, None)], 1: [(1, 0, None)]})


def emit(state: HybridState, node: int, channels: Sequence[tuple[complex, int, Mode]]) -> HybridState:
    """Excited level decays to ``channels`` (coefficient, ground level, photon mode)."""
    return matter_map(state, node, {E: list(channels)})


# -- detection ----------------------------------------------------------------


@dataclass(frozen=True)
class DetectorModel:
    """Per-photon transmission T with non-number-resolving detectors."""

    T: float = 1.0
    number_resolving: bool = False
    dark_count_prob: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.T <= 1:
            raise OpticsError("transmission T must lie in [0, 1]")
        if self.number_resolving or self.dark_count_prob:
            raise OpticsError("only ideal non-resolving detectors without dark counts are modelled")


@dataclass
class Branch:
    """One photon configuration after detection.

    ``matter`` is the unnormalized conditional matter vector scaled so that
    its squared norm is the branch probability.
    """

    clicks: frozenset[str]
    surviving: tuple[Mode, ...]
    lost: tuple[Mode, ...]
    matter: dict[tuple[int, ...], complex]

    @property
    def probability(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.matter.values()))

    def normalized_matter(self) -> dict[tuple[int, ...], complex]:
        n = math.sqrt(self.probability)
        return {k: v / n for k, v in self.matter.items()}


def detect_branches(
    state: HybridState,
    model: DetectorModel,
    detectors: Mapping[str, Iterable[Mode]],
) -> list[Branch]:
    """Enumerate every surviving/lost photon configuration.

    Each photon survives with probability T; a detector clicks when at
    least one surviving photon sits in one of its modes.  Lost photons (and
    photons in unmonitored modes) are traced out, so configurations stay
    distinct branches of an ensemble.
    """
    det = {name: frozenset(ms) for name, ms in detectors.items()}
    t_amp, l_amp = math.sqrt(model.T), math.sqrt(1 - model.T)
    groups: dict[tuple, dict[tuple[int, ...], complex]] = defaultdict(lambda: defaultdict(complex))
    for (matter, photons), c in state.terms.items():
        for fate in itertools.product((True, False), repeat=len(photons)):
            coef = c
            surv, lost = [], []
            for keep, m in zip(fate, photons):
                if keep:
                    coef *= t_amp
                    surv.append(m)
                else:
                    coef *= l_amp
                    lost.append(m)
            if coef == 0:
                continue
            key = (tuple(sorted(surv)), tuple(sorted(lost)))
            groups[key][matter] += coef
    branches = []
    for (surv, lost), vec in groups.items():
        scale = math.sqrt(_mono_weight(surv) * _mono_weight(lost))
        mvec = {m: a * scale for m, a in vec.items() if abs(a) > 1e-15}
        if not mvec:
            continue
        clicks = frozenset(name for name, ms in det.items() if any(m in ms for m in surv))
        branches.append(Branch(clicks, surv, lost, mvec))
    branches.sort(key=lambda b: (sorted(b.clicks), b.surviving, b.lost))
    return branches


def detect(
    state: HybridState,
    model: DetectorModel,
    detectors: Mapping[str, Iterable[Mode]],
    rng: np.random.Generator,
) -> tuple[frozenset[str], list[tuple[float, dict]], float]:
    """Sample a click pattern.

    Returns the clicks, the conditional matter ensemble as
    ``[(weight, normalized matter vector), ...]`` and the pattern's
    probability.
    """
    nrm = state.norm2()
    branches = detect_branches(state, model, detectors)
    by_clicks: dict[frozenset[str], list[Branch]] = defaultdict(list)
    for b in branches:
        by_clicks[b.clicks].append(b)
    keys = sorted(by_clicks, key=sorted)
    probs = np.array([sum(b.probability for b in by_clicks[k]) for k in keys]) / nrm
    k = keys[int(rng.choice(len(keys), p=probs / probs.sum()))]
    total = sum(b.probability for b in by_clicks[k])
    ens = [(b.probability / total, b.normalized_matter()) for b in by_clicks[k]]
    return k, ens, float(total / nrm)


def coincidence_probability(state: HybridState, port_a: str, port_b: str) -> float:
    """Probability of at least one photon in each of two ports."""

    def both(photons):
        ports = {p for p, _ in photons}
        return port_a in ports and port_b in ports

    return state.probability(both)
