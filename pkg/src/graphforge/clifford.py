"""The 24-element single-qubit Clifford group modulo global phase.

Elements are indexed 0..23 with 0 the identity.  Each element has a
canonical shortest word over the letters H, P, X, Y, Z; a word denotes the
matrix product in written order, so ``"HP"`` is ``H @ P`` (P acts first).
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np

LETTERS = ("H", "P", "X", "Y", "Z")
_S2 = 1 / np.sqrt(2)
_LETTER_MATRIX = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], complex),
    "P": np.array([[1, 0], [0, 1j]], complex),
    "X": np.array([[0, 1], [1, 0]], complex),
    "Y": np.array([[0, -1j], [1j, 0]], complex),
    "Z": np.array([[1, 0], [0, -1]], complex),
}
_PAULI = {k: _LETTER_MATRIX[k] for k in "XYZ"}


class CliffordError(ValueError):
    """Unknown Clifford word."""


def _phase_key(m: np.ndarray) -> tuple:
    flat = m.ravel()
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    u = flat * (abs(lead) / lead)
    return tuple(np.round(u.real, 8) + 0.0) + tuple(np.round(u.imag, 8) + 0.0)


@lru_cache(maxsize=1)
def _tables():
    eye = np.eye(2, dtype=complex)
    keys = {_phase_key(eye): 0}
    mats = [eye]
    words = [""]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for a in LETTERS:
            m = mats[i] @ _LETTER_MATRIX[a]
            k = _phase_key(m)
            if k not in keys:
                keys[k] = len(mats)
                mats.append(m)
                words.append(words[i] + a)
                queue.append(keys[k])
    assert len(mats) == 24
    mul = np.zeros((24, 24), dtype=np.int64)
    for i in range(24):
        for j in range(24):
            mul[i, j] = keys[_phase_key(mats[i] @ mats[j])]
    inv = np.array([int(np.nonzero(mul[i] == 0)[0][0]) for i in range(24)])
    # conj[i][P] = (sign, P') with C P C^dag = sign P'
    conj = []
    for m in mats:
        row = {}
        for name, p in _PAULI.items():
            img = m @ p @ m.conj().T
            for name2, q in _PAULI.items():
                for sgn in (1, -1):
                    if np.allclose(img, sgn * q):
                        row[name] = (sgn, name2)
        conj.append(row)
    return keys, mats, words, mul, inv, conj


def n_elements() -> int:
    return 24


def matrix(c: int) -> np.ndarray:
    return _tables()[1][c].copy()


def word(c: int) -> str:
    return _tables()[2][c]


def compose(a: int, b: int) -> int:
    """Index of the product ``a @ b``."""
    return int(_tables()[3][a, b])


def inverse(c: int) -> int:
    return int(_tables()[4][c])


def from_word(w: str) -> int:
    """Reduce a word such as ``"HPZ"`` to its group index."""
    idx = 0
    for ch in w:
        if ch not in _LETTER_MATRIX:
            raise CliffordError(f"unknown letter {ch!r} in Clifford word {w!r}")
        idx = compose(idx, _tables()[0][_phase_key(_LETTER_MATRIX[ch])])
    return idx


def from_matrix(m: np.ndarray) -> int:
    """Group index of a 2x2 Clifford matrix (global phase ignored)."""
    try:
        return _tables()[0][_phase_key(np.asarray(m, complex))]
    except KeyError as exc:
        raise CliffordError("matrix is not a single-qubit Clifford") from exc


def conjugate(c: int, p: str) -> tuple[int, str]:
    """``C p C^dag`` as ``(sign, letter)`` for p in X, Y, Z."""
    if p == "I":
        return 1, "I"
    return _tables()[5][c][p]


def conjugate_dagger(c: int, p: str) -> tuple[int, str]:
    """``C^dag p C`` as ``(sign, letter)``."""
    return conjugate(inverse(c), p)


IDENTITY = 0
H = from_word("H")
P = from_word("P")
X = from_word("X")
Y = from_word("Y")
Z = from_word("Z")
P_DAG = from_word("PZ")
