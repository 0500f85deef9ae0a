"""Dense state-vector ground truth for small systems.

Site 0 is the most significant index of the amplitude array, so a state on
sites (0, 1, 2) stores amplitude ``<a b c|psi>`` at ``a*4 + b*2 + c`` for
qubits.  Nothing here depends on the tableau or graph machinery beyond
reading a graph's vertices, edges and Clifford words.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_QUBITS = 12
TOL_ALGEBRA = 1e-10
TOL_EQUIV = 1e-8

_S2 = 1 / np.sqrt(2)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], complex)
Y = np.array([[0, -1j], [1j, 0]], complex)
Z = np.array([[1, 0], [0, -1]], complex)
H = np.array([[1, 1], [1, -1]], complex) * _S2
P = np.diag([1, 1j]).astype(complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
LETTER = {"H": H, "P": P, "X": X, "Y": Y, "Z": Z}

KET0 = np.array([1, 0], complex)
KET1 = np.array([0, 1], complex)
PLUS = np.array([1, 1], complex) * _S2
MINUS = np.array([1, -1], complex) * _S2


class OracleError(ValueError):
    """Invalid oracle input (dimensions, size limits, impossible branch)."""


@dataclass
class StateVector:
    """Pure state on sites with dimensions ``dims``."""

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.dims = tuple(int(d) for d in self.dims)
        self.amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if self.amps.size != int(np.prod(self.dims, dtype=np.int64)):
            raise OracleError("amplitude length does not match dims")

    @property
    def n(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> StateVector:
        nrm = self.norm()
        if nrm < 1e-300:
            raise OracleError("cannot normalize the zero vector")
        return StateVector(self.dims, self.amps / nrm)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def copy(self) -> StateVector:
        return StateVector(self.dims, self.amps.copy())

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "real": self.amps.real.tolist(),
            "imag": self.amps.imag.tolist(),
        }


# -- construction ---------------------------------------------------


def product_state(vectors: Sequence[np.ndarray]) -> StateVector:
    amps = np.array([1], complex)
    dims = []
    for v in vectors:
        v = np.asarray(v, complex)
        amps = np.kron(amps, v)
        dims.append(v.size)
    return StateVector(tuple(dims), amps)


def basis_state(bits: str | Sequence[int], dims: Sequence[int] | None = None) -> StateVector:
    vals = [int(b) for b in bits]
    dims = tuple(dims) if dims is not None else (2,) * len(vals)
    amps = np.zeros(int(np.prod(dims)), complex)
    amps[np.ravel_multi_index(vals, dims)] = 1
    return StateVector(dims, amps)


def plus_state(n: int) -> StateVector:
    return product_state([PLUS] * n)


def from_amplitudes(amps: Sequence[complex], dims: Sequence[int] | None = None) -> StateVector:
    a = np.asarray(amps, complex)
    if dims is None:
        n = int(round(np.log2(a.size)))
        dims = (2,) * n
    return StateVector(tuple(dims), a)


def word_matrix(word: str) -> np.ndarray:
    """Matrix of a Clifford word; letters multiply in written order."""
    m = I2.copy()
    for ch in word:
        if ch not in LETTER:
            raise OracleError(f"unknown gate letter {ch!r}")
        m = m @ LETTER[ch]
    return m


# -- evolution ------------------------------------------------------


def apply_unitary(
    s: StateVector, u: np.ndarray, sites: Sequence[int], check: bool = True
) -> StateVector:
    """Apply ``u`` to ``sites`` (first listed site is most significant in u)."""
    sites = list(sites)
    if len(set(sites)) != len(sites):
        raise OracleError("sites must be distinct")
    if any(not 0 <= q < s.n for q in sites):
        raise OracleError("site out of range")
    sub = [s.dims[q] for q in sites]
    dim = int(np.prod(sub))
    u = np.asarray(u, complex)
    if u.shape != (dim, dim):
        raise OracleError(f"matrix shape {u.shape} does not match sites of dim {dim}")
    if check and not np.allclose(u.conj().T @ u, np.eye(dim), atol=TOL_ALGEBRA):
        raise OracleError("matrix is not unitary")
    return StateVector(s.dims, _apply(s, u, sites))


def _apply(s: StateVector, m: np.ndarray, sites: list[int]) -> np.ndarray:
    sub = [s.dims[q] for q in sites]
    t = s.tensor()
    mt = m.reshape(sub + sub)
    k = len(sites)
    out = np.tensordot(mt, t, axes=(list(range(k, 2 * k)), sites))
    # tensordot puts the new axes first; move them back into place.
    out = np.moveaxis(out, list(range(k)), sites)
    return out.reshape(-1)


def apply_operator(s: StateVector, m: np.ndarray, sites: Sequence[int]) -> StateVector:
    """Apply a (not necessarily unitary) operator without renormalizing."""
    return StateVector(s.dims, _apply(s, np.asarray(m, complex), list(sites)))


def apply_word(s: StateVector, word: str, site: int) -> StateVector:
    return apply_unitary(s, word_matrix(word), [site], check=False)


def pauli_matrix(label: str) -> np.ndarray:
    m = np.array([[1]], complex)
    for ch in label:
        m = np.kron(m, PAULI[ch])
    return m


def apply_pauli_string(s: StateVector, pauli) -> StateVector:
    """Apply a PauliString (or signed label) to a qubit register."""
    label, phase = _pauli_label(pauli)
    out = s
    for q, ch in enumerate(label):
        if ch != "I":
            out = StateVector(out.dims, _apply(out, PAULI[ch], [q]))
    return StateVector(out.dims, out.amps * phase)


def _pauli_label(pauli) -> tuple[str, complex]:
    if isinstance(pauli, str):
        s = pauli.strip()
        phase: complex = 1
        if s[0] in "+-":
            phase = -1 if s[0] == "-" else 1
            s = s[1:]
        if s.startswith("i"):
            phase *= 1j
            s = s[1:]
        return s, phase
    return pauli.letters(), pauli.phase


# -- measurement ----------------------------------------------------


def expectation(s: StateVector, pauli) -> float:
    """Real expectation value of a Hermitian Pauli observable."""
    ps = apply_pauli_string(s, pauli)
    return float(np.vdot(s.amps, ps.amps).real)


def stabilized_by(s: StateVector, pauli) -> bool:
    if any(d != 2 for d in s.dims):
        raise OracleError("stabilized_by needs qubit sites")
    nrm = s.normalized()
    return expectation(nrm, pauli) >= 1 - TOL_ALGEBRA


def _choose(probs: np.ndarray, rng, forced: int | None) -> int:
    if forced is not None:
        if probs[forced] < 1e-14:
            raise OracleError(f"forced branch {forced} has probability zero")
        return forced
    if rng is None:
        raise OracleError("random measurement needs an rng")
    p = np.clip(probs, 0, None)
    return int(rng.choice(len(p), p=p / p.sum()))


def measure_projective(
    s: StateVector,
    observable,
    sites: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
    forced=None,
) -> tuple[float, StateVector, float]:
    """Born-rule measurement of a Hermitian observable.

    ``observable`` is either a Pauli (PauliString or label, acting on all
    sites when ``sites`` is None) or a Hermitian matrix on ``sites``.  The
    outcome is the eigenvalue; ``forced`` selects a branch by eigenvalue.
    Returns ``(outcome, post_state, probability)``.
    """
    if isinstance(observable, str) or hasattr(observable, "letters"):
        label, phase = _pauli_label(observable)
        if abs(phase.imag) > 0:
            raise OracleError("observable is not Hermitian")
        if sites is None:
            sites = [q for q, ch in enumerate(label) if ch != "I"]
            label = "".join(label[q] for q in sites)
            if not sites:
                return float(phase.real), s.copy(), 1.0
        m = pauli_matrix(label) * phase
    else:
        m = np.asarray(observable, complex)
        if sites is None:
            raise OracleError("sites required for matrix observables")
    if not np.allclose(m, m.conj().T, atol=TOL_ALGEBRA):
        raise OracleError("observable is not Hermitian")
    evals, evecs = np.linalg.eigh(m)
    groups: list[tuple[float, np.ndarray]] = []
    for val in np.unique(np.round(evals, 9)):
        cols = evecs[:, np.abs(evals - val) < 1e-8]
        groups.append((float(val), cols @ cols.conj().T))
    branches = [apply_operator(s, proj, sites) for _, proj in groups]
    probs = np.array([b.norm() ** 2 for b in branches]) / max(s.norm() ** 2, 1e-300)
    forced_idx = None
    if forced is not None:
        matches = [i for i, (v, _) in enumerate(groups) if abs(v - forced) < 1e-8]
        if not matches:
            raise OracleError(f"{forced} is not an eigenvalue of the observable")
        forced_idx = matches[0]
    k = _choose(probs, rng, forced_idx)
    return groups[k][0], branches[k].normalized(), float(probs[k])


def measure_site(
    s: StateVector,
    site: int,
    basis: Sequence[np.ndarray],
    rng: np.random.Generator | None = None,
    forced: int | None = None,
) -> tuple[int, StateVector, float]:
    """Measure one site in an orthonormal basis and remove it.

    Returns ``(index, state on the remaining sites, probability)``.
    """
    t = s.tensor()
    vecs = [np.asarray(b, complex) for b in basis]
    rest = tuple(d for q, d in enumerate(s.dims) if q != site)
    outs = [np.tensordot(v.conj(), t, axes=([0], [site])).reshape(-1) for v in vecs]
    total = s.norm() ** 2
    probs = np.array([np.vdot(o, o).real for o in outs]) / total
    k = _choose(probs, rng, forced)
    return k, StateVector(rest, outs[k]).normalized(), float(probs[k])


def pauli_basis(letter: str) -> list[np.ndarray]:
    """Eigenvectors for the +1 then -1 eigenvalue of X, Y or Z."""
    if letter == "Z":
        return [KET0, KET1]
    if letter == "X":
        return [PLUS, MINUS]
    if letter == "Y":
        return [np.array([1, 1j]) * _S2, np.array([1, -1j]) * _S2]
    raise OracleError(f"unknown Pauli basis {letter!r}")


def xy_basis(alpha: float) -> list[np.ndarray]:
    """Eigenbasis of cos(a) X + sin(a) Y: (|0> +- e^{ia}|1>)/sqrt2."""
    e = np.exp(1j * alpha)
    return [np.array([1, e]) * _S2, np.array([1, -e]) * _S2]


def partial_trace_keep(s: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in the given order)."""
    keep = list(keep)
    t = s.tensor()
    rest = [q for q in range(s.n) if q not in keep]
    t = np.transpose(t, keep + rest)
    dk = int(np.prod([s.dims[q] for q in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T


# -- comparisons ----------------------------------------------------


def overlap(a: StateVector, b: StateVector) -> float:
    """|<a|b>| for normalized copies of both states."""
    if a.dims != b.dims:
        raise OracleError("dimension mismatch")
    return float(abs(np.vdot(a.normalized().amps, b.normalized().amps)))


def fidelity(a: StateVector, b: StateVector) -> float:
    return overlap(a, b) ** 2


@lru_cache(maxsize=1)
def clifford_matrices() -> tuple[np.ndarray, ...]:
    """All 24 single-qubit Cliffords (up to phase) by closure of {H, P}."""

    def key(m):
        flat = m.ravel()
        lead = flat[np.argmax(np.abs(flat) > 1e-9)]
        u = flat * abs(lead) / lead
        return tuple(np.round(np.concatenate([u.real, u.imag]), 8) + 0.0)

    seen = {key(I2): I2}
    queue = deque([I2])
    while queue:
        m = queue.popleft()
        for g in (H, P):
            nm = g @ m
            k = key(nm)
            if k not in seen:
                seen[k] = nm
                queue.append(nm)
    mats = tuple(seen.values())
    assert len(mats) == 24
    return mats


def lc_equivalent_states(a: StateVector, b: StateVector, tol: float = TOL_EQUIV) -> bool:
    """Search all 24^n local Cliffords C for ``|<a|C|b>| >= 1 - tol``."""
    if a.dims != b.dims or any(d != 2 for d in a.dims):
        raise OracleError("need equal qubit registers")
    n = a.n
    if n > 5:
        raise OracleError("local Clifford search limited to 5 qubits")
    return best_local_clifford(a, b)[0] >= 1 - tol


def best_local_clifford(a: StateVector, b: StateVector) -> tuple[float, tuple[int, ...]]:
    """Maximum of ``|<a|C_0 x ... x C_{n-1}|b>|`` over local Cliffords.

    Returns the value and the maximizing index tuple into
    :func:`clifford_matrices`.
    """
    n = a.n
    cl = np.array(clifford_matrices())  # (24, 2, 2)
    g = cl.reshape(24, 4)
    av = a.normalized().tensor()
    bv = b.normalized().tensor()
    # k[a0,b0,a1,b1,...] = conj(a)[a...] * b[b...]
    k = np.multiply.outer(av.conj(), bv)
    order = [i for q in range(n) for i in (q, n + q)]
    k = np.transpose(k, order).reshape((4,) * n)

    def contract(t: np.ndarray) -> np.ndarray:
        # Replace each remaining length-4 axis by a length-24 Clifford axis.
        for _ in range(t.ndim):
            t = np.tensordot(t, g, axes=([0], [1]))
        return t

    best, arg = -1.0, ()
    if n <= 4:
        vals = np.abs(contract(k))
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        return float(vals[idx]), tuple(int(i) for i in idx)
    for c0 in range(24):
        sub = np.tensordot(g[c0], k, axes=([0], [0]))
        vals = np.abs(contract(sub))
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[idx] > best:
            best, arg = float(vals[idx]), (c0,) + tuple(int(i) for i in idx)
        if best >= 1 - 1e-12:
            break
    return best, arg


# -- graph states ---------------------------------------------------


def build_constructive_graph_state(g) -> StateVector:
    """CZ on every edge of |+>^n, then each vertex's Clifford word.

    Sites follow ``g.vertices`` in sorted order.
    """
    verts = sorted(g.vertices)
    n = len(verts)
    if n > MAX_QUBITS:
        raise OracleError(f"graph has {n} vertices; oracle limit is {MAX_QUBITS}")
    pos = {v: i for i, v in enumerate(verts)}
    idx = np.arange(2**n)
    bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
    parity = np.zeros(2**n, dtype=np.int64)
    for u, v in g.edge_list():
        parity ^= bits[pos[u]] & bits[pos[v]]
    amps = (1 - 2 * parity).astype(complex) / np.sqrt(2**n)
    s = StateVector((2,) * n, amps)
    for v in verts:
        w = g.vertex_word(v)
        if w:
            s = apply_unitary(s, word_matrix(w), [pos[v]], check=False)
    return s


def pauli_expectations(s: StateVector) -> np.ndarray:
    """All 4^n Pauli expectations, indexed ``[xmask, zmask]``.

    Bit ``n-1-q`` of a mask refers to qubit q (site 0 most significant).
    Uses a Walsh-Hadamard transform over the Z part.
    """
    n = s.n
    if n > 8:
        raise OracleError("Pauli spectrum limited to 8 qubits")
    psi = s.normalized().amps
    dim = 2**n
    idx = np.arange(dim)
    f = np.array([np.conj(psi[idx ^ xm]) * psi for xm in range(dim)])  # (x, i)
    had = np.array([[(-1) ** bin(i & z).count("1") for z in range(dim)] for i in range(dim)])
    vals = f @ had  # (x, z): sum_i f[x,i] (-1)^{i.z} = <X^x Z^z>
    ny = np.array([[bin(x & z).count("1") for z in range(dim)] for x in range(dim)])
    return (vals * (1j**ny)).real


def stabilizer_generators(s: StateVector) -> list[tuple[int, str]]:
    """Independent stabilizer generators ``(sign, letters)`` of a qubit state.

    Raises if the state is not a stabilizer state.
    """
    n = s.n
    ev = pauli_expectations(s)
    gens: list[tuple[int, str]] = []
    basis: dict[int, int] = {}
    for xm, zm in itertools.product(range(2**n), range(2**n)):
        if xm == 0 and zm == 0:
            continue
        val = ev[xm, zm]
        if abs(abs(val) - 1) > 1e-9:
            continue
        v = (xm << n) | zm
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
        if not v:
            continue
        letters = ""
        for q in range(n):
            bx = (xm >> (n - 1 - q)) & 1
            bz = (zm >> (n - 1 - q)) & 1
            letters += {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[(bx, bz)]
        gens.append((1 if val > 0 else -1, letters))
        if len(gens) == n:
            break
    if len(gens) != n:
        raise OracleError("state is not a stabilizer state")
    return gens
