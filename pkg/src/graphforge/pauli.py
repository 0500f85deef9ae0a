"""Pauli strings in the (x, z) symplectic encoding.

A Pauli string stores per-qubit bits ``x`` and ``z`` plus a phase exponent
``k`` so that the operator is ``i**k * P_0 (x) P_1 (x) ...`` where each
``P_j`` is I, X, Y or Z chosen by ``(x_j, z_j)``: (0,0) I, (1,0) X,
(1,1) Y, (0,1) Z.  Y is the Hermitian Y, not ``XZ``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PHASES = {0: 1, 1: 1j, 2: -1, 3: -1j}
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class PauliError(ValueError):
    """Raised for malformed Pauli strings."""


@dataclass(eq=False)
class PauliString:
    """An n-qubit Pauli operator with phase in {+1, -1, +i, -i}.

    Parameters
    ----------
    x, z:
        Boolean arrays of length n.
    k:
        Phase exponent; the operator carries the factor ``1j**k``.
    """

    x: np.ndarray
    z: np.ndarray
    k: int = 0

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=bool).copy()
        self.z = np.asarray(self.z, dtype=bool).copy()
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise PauliError("x and z must be 1-d arrays of equal length")
        self.k = int(self.k) % 4

    # -- construction -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        """Parse strings such as ``"+XZII"``, ``"-iY"`` or ``"ZZ"``."""
        s = text.strip()
        k = 0
        if s.startswith("+"):
            s = s[1:]
        elif s.startswith("-"):
            k, s = 2, s[1:]
        if s.startswith("i"):
            k, s = k + 1, s[1:]
        if not s or any(c not in _BITS for c in s):
            raise PauliError(f"cannot parse Pauli string {text!r}")
        x = np.array([_BITS[c][0] for c in s], bool)
        z = np.array([_BITS[c][1] for c in s], bool)
        return cls(x, z, k)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> PauliString:
        """``sign * letter`` acting on ``qubit`` of an n-qubit register."""
        p = cls.identity(n)
        p.x[qubit], p.z[qubit] = _BITS[letter]
        p.k = 0 if sign > 0 else 2
        return p

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str], sign: int = 1) -> PauliString:
        p = cls.identity(n)
        for q, letter in ops.items():
            p.x[q], p.z[q] = _BITS[letter]
        p.k = 0 if sign > 0 else 2
        return p

    # -- basic properties ---------------------------------------------
    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def phase(self) -> complex:
        return _PHASES[self.k]

    @property
    def is_hermitian(self) -> bool:
        return self.k in (0, 2)

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise PauliError("non-Hermitian Pauli string has no real sign")
        return 1 if self.k == 0 else -1

    def letters(self) -> str:
        return "".join(_LETTER[(int(a), int(b))] for a, b in zip(self.x, self.z))

    def __str__(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.k]
        return prefix + self.letters()

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def copy(self) -> PauliString:
        return PauliString(self.x, self.z, self.k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.k, self.x.tobytes(), self.z.tobytes()))

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    # -- algebra ------------------------------------------------------
    def commutes(self, other: PauliString) -> bool:
        s = np.count_nonzero(self.x & other.z) + np.count_nonzero(self.z & other.x)
        return s % 2 == 0

    def __mul__(self, other: PauliString) -> PauliString:
        if self.n != other.n:
            raise PauliError("qubit count mismatch")
        # Write each factor in the ordered form i^e X^x Z^z, where e picks
        # up one unit per Y, multiply, then convert back.
        e1 = self.k + np.count_nonzero(self.x & self.z)
        e2 = other.k + np.count_nonzero(other.x & other.z)
        e = e1 + e2 + 2 * np.count_nonzero(self.z & other.x)
        x = self.x ^ other.x
        z = self.z ^ other.z
        return PauliString(x, z, (e - np.count_nonzero(x & z)) % 4)

    def __neg__(self) -> PauliString:
        return PauliString(self.x, self.z, self.k + 2)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; qubit 0 is the most significant factor."""
        single = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], complex),
            "Y": np.array([[0, -1j], [1j, 0]], complex),
            "Z": np.array([[1, 0], [0, -1]], complex),
        }
        m = np.array([[self.phase]], complex)
        for c in self.letters():
            m = np.kron(m, single[c])
        return m


def pauli(text: str) -> PauliString:
    """Shorthand for :meth:`PauliString.from_str`."""
    return PauliString.from_str(text)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """Symplectic inner product of the bit vectors (0 means commuting)."""
    return int(np.count_nonzero(a.x & b.z) + np.count_nonzero(a.z & b.x)) % 2
