"""Bit-packed stabilizer tableau simulator.

The tableau keeps ``2n`` rows: rows ``0..n-1`` are destabilizers and rows
``n..2n-1`` are the stabilizer generators.  Destabilizers are an internal
speed-up for deterministic measurements; the public contract is stated in
terms of the stabilizer generators only.

Bits are packed 64 per word with the qubit axis leading, so the column of a
single qubit across all rows is one contiguous ``uint64`` vector.  That makes
a gate a handful of vectorized word operations.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence

import numpy as np

from .pauli import PauliError, PauliString

_ONE = np.uint64(1)


class TableauError(ValueError):
    """Invalid tableau operation or malformed input."""


class MeasurementError(TableauError):
    """A forced outcome is impossible for the current state."""


def _popcount_cols(a: np.ndarray) -> np.ndarray:
    """Per-column popcount of a (W, m) uint64 array."""
    return np.bitwise_count(a).sum(axis=0, dtype=np.int64)


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean vector into little-endian uint64 words."""
    n = bits.shape[0]
    w = (n + 63) // 64
    padded = np.zeros(w * 64, dtype=np.uint8)
    padded[:n] = bits
    return np.packbits(padded, bitorder="little").view(np.uint64).copy()


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`_pack` for a (W,) or (W, m) array; qubit axis first."""
    if words.ndim == 1:
        b = np.unpackbits(words.view(np.uint8), bitorder="little")
        return b[:n].astype(bool)
    cols = np.ascontiguousarray(words.T)
    b = np.unpackbits(cols.view(np.uint8), axis=1, bitorder="little")
    return b[:, :n].astype(bool).T


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of integers viewed as bit rows."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _gf2_right_inverse(a: list[int], ncols: int) -> list[int]:
    """Solve ``A B = I`` for A given as n row-ints of width ``ncols``.

    Returns B as ``ncols`` row-ints of width n (B has zero rows outside the
    pivot columns).  Raises if A does not have full row rank.
    """
    n = len(a)
    rows = [(a[i], 1 << i) for i in range(n)]  # (row, record of combination)
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        sel = next((i for i in range(r, n) if rows[i][0] & bit), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        for i in range(n):
            if i != r and rows[i][0] & bit:
                rows[i] = (rows[i][0] ^ rows[r][0], rows[i][1] ^ rows[r][1])
        pivots.append(col)
        r += 1
        if r == n:
            break
    if r < n:
        raise TableauError("generators are not independent")
    # Row j of the reduced system says: sum over i in rec_j of A_i, restricted
    # to pivot columns, equals e_{pivot_j}.  So B[pivot_j] has bit i set for
    # every i in rec_j, transposed: B row pivot_j, column i.
    b = [0] * ncols
    for j, col in enumerate(pivots):
        b[col] = rows[j][1]
    return b


class StabilizerTableau:
    """Stabilizer state on ``n`` qubits with destabilizer bookkeeping.

    Gate methods (``h``, ``s``, ``cz`` and the Paulis) mutate in place; the
    module-level ``apply_*`` functions return modified copies.
    """

    __slots__ = ("n", "_x", "_z", "_r")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, r: np.ndarray):
        self.n = n
        self._x = x
        self._z = z
        self._r = r

    # -- construction -------------------------------------------------
    @classmethod
    def zero_state(cls, n: int) -> StabilizerTableau:
        return cls.from_basis_state("0" * n)

    @classmethod
    def from_basis_state(cls, bits: str | Sequence[int]) -> StabilizerTableau:
        vals = [int(b) for b in bits]
        if any(v not in (0, 1) for v in vals):
            raise TableauError("basis state must be a bit-string")
        n = len(vals)
        if n == 0:
            raise TableauError("need at least one qubit")
        w = (n + 63) // 64
        x = np.zeros((w, 2 * n), dtype=np.uint64)
        z = np.zeros((w, 2 * n), dtype=np.uint64)
        for q in range(n):
            x[q >> 6, q] |= _ONE << np.uint64(q & 63)
            z[q >> 6, n + q] |= _ONE << np.uint64(q & 63)
        r = np.zeros(2 * n, dtype=np.uint64)
        r[n:] = np.array(vals, dtype=np.uint64)
        return cls(n, x, z, r)

    @classmethod
    def from_generators(cls, gens: Sequence[PauliString | str]) -> StabilizerTableau:
        """Build a tableau from independent commuting Hermitian generators.

        A matching set of destabilizers is derived by solving the symplectic
        pairing equations over GF(2).
        """
        ps = [PauliString.from_str(g) if isinstance(g, str) else g for g in gens]
        if not ps:
            raise TableauError("empty generator list")
        n = ps[0].n
        if len(ps) != n or any(p.n != n for p in ps):
            raise TableauError("need exactly n generators on n qubits")
        for p in ps:
            if not p.is_hermitian:
                raise TableauError(f"generator {p} is not Hermitian")
        for i in range(n):
            for j in range(i + 1, n):
                if not ps[i].commutes(ps[j]):
                    raise TableauError(f"generators {ps[i]} and {ps[j]} anticommute")

        def to_int(bits: np.ndarray) -> int:
            return sum(1 << int(i) for i in np.flatnonzero(bits))

        # Each stabilizer as a 2n-bit integer: bits 0..n-1 = x, n..2n-1 = z.
        s_int = [to_int(p.x) | (to_int(p.z) << n) for p in ps]
        # A = S Omega swaps the halves.
        mask = (1 << n) - 1
        a_int = [((v >> n) & mask) | ((v & mask) << n) for v in s_int]
        b = _gf2_right_inverse(a_int, 2 * n)  # 2n rows of width n
        # D0 row i = column i of B.
        d0 = [0] * n
        for col, row in enumerate(b):
            rr = row
            while rr:
                low = rr & -rr
                i = low.bit_length() - 1
                d0[i] |= 1 << col
                rr ^= low

        def sym(u: int, v: int) -> int:
            ux, uz = u & mask, u >> n
            vx, vz = v & mask, v >> n
            return (bin(ux & vz).count("1") + bin(uz & vx).count("1")) & 1

        d = list(d0)
        for i in range(n):
            for j in range(i):
                if sym(d0[i], d0[j]):
                    d[i] ^= s_int[j]

        rows_x = np.zeros((2 * n, n), dtype=bool)
        rows_z = np.zeros((2 * n, n), dtype=bool)
        r = np.zeros(2 * n, dtype=np.uint64)
        for i in range(n):
            for q in range(n):
                rows_x[i, q] = (d[i] >> q) & 1
                rows_z[i, q] = (d[i] >> (n + q)) & 1
            rows_x[n + i] = ps[i].x
            rows_z[n + i] = ps[i].z
            r[n + i] = 0 if ps[i].k == 0 else 1
        x = np.stack([_pack(row) for row in rows_x], axis=1)
        z = np.stack([_pack(row) for row in rows_z], axis=1)
        return cls(n, x, z, r)

    @classmethod
    def from_strings(cls, gens: Sequence[str]) -> StabilizerTableau:
        return cls.from_generators(list(gens))

    def copy(self) -> StabilizerTableau:
        return StabilizerTableau(self.n, self._x.copy(), self._z.copy(), self._r.copy())

    # -- inspection ---------------------------------------------------
    def _row(self, i: int) -> PauliString:
        x = _unpack(self._x[:, i].copy(), self.n)
        z = _unpack(self._z[:, i].copy(), self.n)
        return PauliString(x, z, 2 * int(self._r[i]))

    @property
    def generators(self) -> list[PauliString]:
        return [self._row(self.n + i) for i in range(self.n)]

    @property
    def destabilizers(self) -> list[PauliString]:
        return [self._row(i) for i in range(self.n)]

    def to_strings(self) -> list[str]:
        return [str(g) for g in self.generators]

    def __repr__(self) -> str:
        return f"StabilizerTableau({self.to_strings()!r})"

    def x_block(self) -> np.ndarray:
        """Unpacked (n, n) X bits of the stabilizer rows."""
        return _unpack(self._x[:, self.n :], self.n)

    def z_block(self) -> np.ndarray:
        return _unpack(self._z[:, self.n :], self.n)

    def signs(self) -> np.ndarray:
        """Generator signs as +1/-1 integers."""
        return 1 - 2 * self._r[self.n :].astype(np.int64)

    # -- gates (in place) ---------------------------------------------
    def _check(self, q: int) -> tuple[int, np.uint64]:
        if not 0 <= q < self.n:
            raise TableauError(f"qubit index {q} out of range for n={self.n}")
        return q >> 6, np.uint64(q & 63)

    def h(self, q: int) -> None:
        w, b = self._check(q)
        xr, zr = self._x[w], self._z[w]
        self._r ^= ((xr & zr) >> b) & _ONE
        t = (xr ^ zr) & (_ONE << b)
        xr ^= t
        zr ^= t

    def s(self, q: int) -> None:
        """Phase gate P = diag(1, i)."""
        w, b = self._check(q)
        xr, zr = self._x[w], self._z[w]
        self._r ^= ((xr & zr) >> b) & _ONE
        zr ^= xr & (_ONE << b)

    def s_dag(self, q: int) -> None:
        self.s(q)
        self.s(q)
        self.s(q)

    def x(self, q: int) -> None:
        w, b = self._check(q)
        self._r ^= (self._z[w] >> b) & _ONE

    def z(self, q: int) -> None:
        w, b = self._check(q)
        self._r ^= (self._x[w] >> b) & _ONE

    def y(self, q: int) -> None:
        w, b = self._check(q)
        self._r ^= ((self._x[w] ^ self._z[w]) >> b) & _ONE

    def cz(self, q1: int, q2: int) -> None:
        if q1 == q2:
            raise TableauError("CZ needs two distinct qubits")
        w1, b1 = self._check(q1)
        w2, b2 = self._check(q2)
        x1 = (self._x[w1] >> b1) & _ONE
        x2 = (self._x[w2] >> b2) & _ONE
        z1 = (self._z[w1] >> b1) & _ONE
        z2 = (self._z[w2] >> b2) & _ONE
        self._r ^= x1 & x2 & (z1 ^ z2)
        self._z[w1] ^= x2 << b1
        self._z[w2] ^= x1 << b2

    def cnot(self, c: int, t: int) -> None:
        self.h(t)
        self.cz(c, t)
        self.h(t)

    # -- row algebra --------------------------------------------------
    def _rowmul(self, targets: np.ndarray, src: int) -> None:
        """Replace each target row P_t by P_src * P_t (rows must commute)."""
        if targets.size == 0:
            return
        xs, zs = self._x[:, src : src + 1], self._z[:, src : src + 1]
        xt, zt = self._x[:, targets], self._z[:, targets]
        es = 2 * int(self._r[src]) + int(_popcount_cols(xs & zs)[0])
        et = 2 * self._r[targets].astype(np.int64) + _popcount_cols(xt & zt)
        cross = _popcount_cols(zs & xt)
        nx, nz = xs ^ xt, zs ^ zt
        k = (es + et + 2 * cross - _popcount_cols(nx & nz)) % 4
        self._r[targets] = (k >> 1).astype(np.uint64)
        self._x[:, targets] = nx
        self._z[:, targets] = nz

    def _anticommuting_rows(self, ox: np.ndarray, oz: np.ndarray) -> np.ndarray:
        c = _popcount_cols(self._x & oz[:, None]) + _popcount_cols(self._z & ox[:, None])
        return (c & 1).astype(bool)

    def _product_sign(self, rows: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
        """Sign exponent (0 or 2 mod 4), x and z of the product of rows.

        The product is taken in index order; all rows must commute.
        """
        xs, zs = self._x[:, rows], self._z[:, rows]
        e = int(2 * self._r[rows].astype(np.int64).sum() + _popcount_cols(xs & zs).sum())
        zpref = np.bitwise_xor.accumulate(zs, axis=1) ^ zs  # XOR of z over earlier rows
        e += 2 * int(_popcount_cols(zpref & xs).sum())
        px = np.bitwise_xor.reduce(xs, axis=1)
        pz = np.bitwise_xor.reduce(zs, axis=1)
        k = (e - int(np.bitwise_count(px & pz).sum())) % 4
        return k, px, pz

    def _packed_obs(self, obs: PauliString) -> tuple[np.ndarray, np.ndarray, int]:
        if obs.n != self.n:
            raise TableauError(f"observable acts on {obs.n} qubits, tableau has {self.n}")
        if not obs.is_hermitian:
            raise TableauError(f"observable {obs} is not Hermitian")
        return _pack(obs.x), _pack(obs.z), 0 if obs.k == 0 else 1

    def expectation(self, obs: PauliString) -> int:
        """Return +1 or -1 for a deterministic outcome, 0 if random."""
        ox, oz, sign = self._packed_obs(obs)
        ac = self._anticommuting_rows(ox, oz)
        if ac[self.n :].any():
            return 0
        rows = np.nonzero(ac[: self.n])[0] + self.n
        if rows.size == 0:
            # obs is +-identity
            return 1 if sign == 0 else -1
        k, _, _ = self._product_sign(rows)
        return 1 if (k // 2 + sign) % 2 == 0 else -1

    def measure(
        self,
        obs: PauliString,
        rng: np.random.Generator | None = None,
        forced: int | None = None,
    ) -> tuple[int, bool]:
        """Measure a Hermitian Pauli observable in place.

        Returns ``(outcome, deterministic)`` with outcome in {+1, -1}.  A
        random outcome is drawn from ``rng`` unless ``forced`` is given.
        """
        ox, oz, sign = self._packed_obs(obs)
        n = self.n
        ac = self._anticommuting_rows(ox, oz)
        stab_ac = np.nonzero(ac[n:])[0]
        if stab_ac.size == 0:
            rows = np.nonzero(ac[:n])[0] + n
            if rows.size == 0:
                out = 1 if sign == 0 else -1
            else:
                k, _, _ = self._product_sign(rows)
                out = 1 if (k // 2 + sign) % 2 == 0 else -1
            if forced is not None and forced != out:
                raise MeasurementError(f"outcome {forced} has probability zero")
            return out, True
        p = n + int(stab_ac[0])
        if forced is not None:
            if forced not in (1, -1):
                raise TableauError("forced outcome must be +1 or -1")
            out = forced
        else:
            if rng is None:
                raise TableauError("random measurement needs an rng")
            out = 1 if rng.integers(2) == 0 else -1
        targets = np.nonzero(ac)[0]
        targets = targets[targets != p]
        self._rowmul(targets, p)
        self._x[:, p - n] = self._x[:, p]
        self._z[:, p - n] = self._z[:, p]
        self._r[p - n] = self._r[p]
        self._x[:, p] = ox
        self._z[:, p] = oz
        self._r[p] = np.uint64(sign ^ (0 if out == 1 else 1))
        return out, False

    def measure_z(self, q: int, rng=None, forced=None) -> int:
        return self.measure(PauliString.single(self.n, q, "Z"), rng, forced)[0]

    # -- row operations that keep the symplectic pairing --------------
    def stabilizer_rowmul(self, i: int, j: int) -> None:
        """S_i <- S_j S_i and D_j <- D_j D_i (pairing preserved)."""
        n = self.n
        self._rowmul(np.array([n + i]), n + j)
        self._rowmul(np.array([j]), i)

    def swap_generators(self, i: int, j: int) -> None:
        if i == j:
            return
        n = self.n
        for a, b in ((i, j), (n + i, n + j)):
            for arr in (self._x, self._z):
                arr[:, [a, b]] = arr[:, [b, a]]
            self._r[[a, b]] = self._r[[b, a]]

    # -- invariants -----------------------------------------------------
    def check_invariants(self, destabilizers: bool = True) -> None:
        """Raise :class:`TableauError` if the tableau is inconsistent."""
        n = self.n
        x = _unpack(self._x, n).astype(np.float32)  # (n, 2n) qubit-major
        z = _unpack(self._z, n).astype(np.float32)
        xs, zs = x[:, n:], z[:, n:]
        comm = (xs.T @ zs + zs.T @ xs) % 2
        if comm.any():
            raise TableauError("stabilizer generators do not commute")
        rows = []
        xb, zb = _unpack(self._x[:, n:], n), _unpack(self._z[:, n:], n)
        for i in range(n):
            bits = np.concatenate([xb[:, i], zb[:, i]])
            rows.append(int.from_bytes(np.packbits(bits.astype(np.uint8)).tobytes(), "big"))
        if gf2_rank(rows) != n:
            raise TableauError("stabilizer generators are not independent")
        if not np.isin(self._r, (0, 1)).all():
            raise TableauError("sign bits corrupted")
        if destabilizers:
            full = (x.T @ z + z.T @ x) % 2
            expect = np.zeros((2 * n, 2 * n), np.float32)
            idx = np.arange(n)
            expect[idx, n + idx] = 1
            expect[n + idx, idx] = 1
            if not np.array_equal(full, expect):
                raise TableauError("destabilizer pairing broken")

    # -- serialization --------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({"n": self.n, "generators": self.to_strings()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> StabilizerTableau:
        data = json.loads(text)
        try:
            return cls.from_strings(data["generators"])
        except (KeyError, TypeError, PauliError) as exc:
            raise TableauError(f"malformed tableau JSON: {exc}") from exc

    def __eq__(self, other: object) -> bool:
        """Generator-list equality (use :func:`same_group` for group equality)."""
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return self.n == other.n and self.to_strings() == other.to_strings()


# -- functional API ---------------------------------------------------


def tableau_from_basis_state(bits: str | Sequence[int]) -> StabilizerTableau:
    return StabilizerTableau.from_basis_state(bits)


def apply_h(t: StabilizerTableau, q: int) -> StabilizerTableau:
    out = t.copy()
    out.h(q)
    return out


def apply_p(t: StabilizerTableau, q: int) -> StabilizerTableau:
    out = t.copy()
    out.s(q)
    return out


def apply_cz(t: StabilizerTableau, q1: int, q2: int) -> StabilizerTableau:
    out = t.copy()
    out.cz(q1, q2)
    return out


def measure_pauli(
    t: StabilizerTableau,
    obs: PauliString | str,
    rng: np.random.Generator | None = None,
    forced: int | None = None,
) -> tuple[int, StabilizerTableau]:
    if isinstance(obs, str):
        obs = PauliString.from_str(obs)
    out = t.copy()
    m, _ = out.measure(obs, rng, forced)
    return m, out


def same_group(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    """True when both tableaux stabilize the same state."""
    if a.n != b.n:
        return False
    return all(a.expectation(g) == 1 for g in b.generators)


_MEAS = {"MX": "X", "MY": "Y", "MZ": "Z"}


def validate_circuit(circuit: Sequence[dict], n: int) -> None:
    for pos, op in enumerate(circuit):
        if not isinstance(op, dict) or "gate" not in op or "targets" not in op:
            raise TableauError(f"circuit entry {pos}: expected {{'gate', 'targets'}}")
        gate, tg = op["gate"], op["targets"]
        arity = 2 if gate == "CZ" else 1
        if gate not in ("H", "P", "CZ") and gate not in _MEAS:
            raise TableauError(f"circuit entry {pos}: unknown gate {gate!r}")
        if len(tg) != arity or any(not isinstance(q, int) or not 0 <= q < n for q in tg):
            raise TableauError(f"circuit entry {pos}: bad targets {tg!r}")


def run_clifford_circuit(
    t: StabilizerTableau,
    circuit: Sequence[dict],
    rng: np.random.Generator | None = None,
) -> tuple[list[int], StabilizerTableau]:
    """Apply a gate list and return measurement outcomes plus the final state.

    Circuit entries look like ``{"gate": "CZ", "targets": [0, 1]}``; gates
    are H, P, CZ and the single-qubit measurements MX, MY, MZ.
    """
    validate_circuit(circuit, t.n)
    out = t.copy()
    outcomes: list[int] = []
    for op in circuit:
        gate, tg = op["gate"], op["targets"]
        if gate == "H":
            out.h(tg[0])
        elif gate == "P":
            out.s(tg[0])
        elif gate == "CZ":
            out.cz(tg[0], tg[1])
        else:
            obs = PauliString.single(out.n, tg[0], _MEAS[gate])
            outcomes.append(out.measure(obs, rng)[0])
    return outcomes, out


def random_clifford_circuit(
    n: int, n_gates: int, n_measurements: int, rng: np.random.Generator
) -> list[dict]:
    """Uniformly mixed H/P/CZ gates with measurements spread evenly."""
    kinds = rng.integers(0, 3, size=n_gates)
    q1 = rng.integers(0, n, size=n_gates)
    q2 = (q1 + rng.integers(1, n, size=n_gates)) % n if n > 1 else q1
    meas_at = set(np.linspace(0, n_gates, n_measurements, endpoint=False).astype(int).tolist())
    mq = rng.integers(0, n, size=n_measurements)
    mb = rng.integers(0, 3, size=n_measurements)
    circ: list[dict] = []
    m = 0
    for i in range(n_gates):
        if i in meas_at and m < n_measurements:
            circ.append({"gate": ("MX", "MY", "MZ")[mb[m]], "targets": [int(mq[m])]})
            m += 1
        k = kinds[i]
        if k == 2 and n > 1:
            circ.append({"gate": "CZ", "targets": [int(q1[i]), int(q2[i])]})
        else:
            circ.append({"gate": "H" if k == 0 else "P", "targets": [int(q1[i])]})
    return circ
