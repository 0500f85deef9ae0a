import itertools
import json

import numpy as np
import pytest

from graphforge import oracle
from graphforge.pauli import PauliString, pauli
from graphforge.stabilizer import (
    MeasurementError,
    StabilizerTableau,
    TableauError,
    apply_cz,
    apply_h,
    apply_p,
    measure_pauli,
    random_clifford_circuit,
    run_clifford_circuit,
    same_group,
    tableau_from_basis_state,
)


def gens(t):
    return t.to_strings()


def test_basis_states():
    assert gens(tableau_from_basis_state("0")) == ["+Z"]
    assert gens(tableau_from_basis_state("1")) == ["-Z"]
    assert gens(tableau_from_basis_state("01")) == ["+ZI", "-IZ"]


def test_hadamard_examples():
    assert gens(apply_h(tableau_from_basis_state("0"), 0)) == ["+X"]
    t = StabilizerTableau.from_strings(["XZ", "ZX"])
    assert same_group(apply_h(t, 0), StabilizerTableau.from_strings(["ZZ", "XX"]))
    assert apply_h(apply_h(t, 1), 1) == t


def test_phase_examples():
    plus = apply_h(tableau_from_basis_state("0"), 0)
    assert gens(apply_p(plus, 0)) == ["+Y"]
    assert gens(apply_p(tableau_from_basis_state("0"), 0)) == ["+Z"]
    t = plus
    for _ in range(4):
        t = apply_p(t, 0)
    assert t == plus


def test_cz_examples():
    pp = StabilizerTableau.from_strings(["XI", "IX"])
    assert gens(apply_cz(pp, 0, 1)) == ["+XZ", "+ZX"]
    assert apply_cz(apply_cz(pp, 0, 1), 0, 1) == pp
    p4 = StabilizerTableau.from_strings(["XIII", "IXII", "IIXI", "IIIX"])
    assert apply_cz(apply_cz(p4, 0, 1), 2, 3) == apply_cz(apply_cz(p4, 2, 3), 0, 1)


def test_index_errors():
    t = tableau_from_basis_state("00")
    with pytest.raises(TableauError):
        apply_cz(t, 1, 1)
    with pytest.raises((TableauError, IndexError)):
        apply_h(t, 5)


def test_deterministic_and_random_measurement(rng):
    m, t = measure_pauli(tableau_from_basis_state("0"), "Z", rng)
    assert m == 1 and gens(t) == ["+Z"]
    plus = apply_h(tableau_from_basis_state("0"), 0)
    outs = np.array([measure_pauli(plus, "Z", rng)[0] for _ in range(10_000)])
    frac = (outs == 1).mean()
    assert abs(frac - 0.5) < 3 * 0.5 / 100


def test_xx_then_zz_on_zero_zero(rng):
    for forced in (1, -1):
        _, t = measure_pauli(tableau_from_basis_state("00"), "XX", rng, forced=forced)
        m, t2 = measure_pauli(t, "ZZ", rng)
        assert m == 1 and t2 == t


def test_forced_impossible_branch():
    with pytest.raises(MeasurementError):
        measure_pauli(tableau_from_basis_state("0"), "Z", forced=-1)


def test_non_hermitian_observable_rejected():
    with pytest.raises((TableauError, ValueError)):
        measure_pauli(tableau_from_basis_state("0"), "+iZ")


def test_constructive_four_chain():
    circ = [{"gate": "H", "targets": [q]} for q in range(4)]
    circ += [{"gate": "CZ", "targets": [q, q + 1]} for q in range(3)]
    _, t = run_clifford_circuit(StabilizerTableau.zero_state(4), circ)
    assert gens(t) == ["+XZII", "+ZXZI", "+IZXZ", "+IIZX"]
    _, same = run_clifford_circuit(t, [])
    assert same == t


def test_circuit_validation():
    t = StabilizerTableau.zero_state(2)
    for bad in ([{"gate": "T", "targets": [0]}], [{"gate": "CZ", "targets": [0]}], [{"gate": "H", "targets": [2]}]):
        with pytest.raises(TableauError):
            run_clifford_circuit(t, bad)


def test_json_round_trip():
    t = StabilizerTableau.from_strings(["XZ", "-ZX"])
    assert StabilizerTableau.from_json(t.to_json()) == t
    assert json.loads(t.to_json())["generators"] == ["+XZ", "-ZX"]
    with pytest.raises(TableauError):
        StabilizerTableau.from_json('{"n": 1}')


def test_from_generators_rejects_bad_sets():
    with pytest.raises(TableauError):
        StabilizerTableau.from_strings(["XI", "ZI"])  # anticommute
    with pytest.raises(TableauError):
        StabilizerTableau.from_strings(["XX", "XX"])  # dependent


def _complete(p: PauliString) -> list[PauliString]:
    """A commuting independent generator set on p.n qubits containing p."""
    n = p.n
    for rest in itertools.combinations(
        [PauliString.from_str("+" + "".join(w)) for w in itertools.product("IXYZ", repeat=n)][1:], n - 1
    ):
        cand = [p, *rest]
        try:
            StabilizerTableau.from_generators(cand)
        except TableauError:
            continue
        return cand
    raise AssertionError


def _as_pauli(m: np.ndarray, n: int) -> str:
    for w in itertools.product("IXYZ", repeat=n):
        for sign in "+-":
            if np.allclose(m, PauliString.from_str(sign + "".join(w)).to_matrix()):
                return sign + "".join(w)
    raise AssertionError("not a Pauli")


@pytest.mark.parametrize("gate", ["H", "P", "CZ"])
def test_conjugation_matches_matrices(gate):
    u1 = {"H": oracle.H, "P": np.diag([1, 1j])}
    for n in (1, 2):
        if gate == "CZ" and n == 1:
            continue
        for w in itertools.product("IXYZ", repeat=n):
            if set(w) == {"I"}:
                continue
            for sign in "+-":
                p = PauliString.from_str(sign + "".join(w))
                t = StabilizerTableau.from_generators(_complete(p))
                if gate == "CZ":
                    t.cz(0, 1)
                    u = oracle.CZ
                else:
                    getattr(t, "h" if gate == "H" else "s")(0)
                    u = np.kron(u1[gate], np.eye(2 ** (n - 1)))
                want = _as_pauli(u @ p.to_matrix() @ u.conj().T, n)
                assert gens(t)[0] == want


def test_measuring_generators_is_deterministic(rng):
    circ = random_clifford_circuit(5, 40, 0, rng)
    _, t = run_clifford_circuit(StabilizerTableau.zero_state(5), circ)
    for g in t.generators:
        m, t2 = measure_pauli(t, g, rng)
        assert m == 1 and t2 == t


def test_repeated_measurement_repeats(rng):
    for _ in range(50):
        _, t = run_clifford_circuit(StabilizerTableau.zero_state(4), random_clifford_circuit(4, 20, 0, rng))
        obs = PauliString.from_str("+" + "".join(rng.choice(list("IXYZ"), 4)))
        if obs.weight() == 0:
            continue
        m1, t1 = measure_pauli(t, obs, rng)
        m2, t2 = measure_pauli(t1, obs, rng)
        assert m1 == m2 and t1 == t2


def _oracle_replay(circ, n, outcomes):
    s = oracle.basis_state("0" * n)
    mats = {"H": oracle.H, "P": np.diag([1, 1j]).astype(complex)}
    k = 0
    for op in circ:
        g, tg = op["gate"], op["targets"]
        if g in mats:
            s = oracle.apply_unitary(s, mats[g], tg)
        elif g == "CZ":
            s = oracle.apply_unitary(s, oracle.CZ, tg)
        else:
            obs = PauliString.single(n, tg[0], g[1])
            _, s, prob = oracle.measure_projective(s, obs, forced=outcomes[k])
            assert prob > 1e-12
            k += 1
    return s


def test_oracle_agrees_with_tableau_along_trajectories(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        circ = random_clifford_circuit(n, int(rng.integers(1, 12)), int(rng.integers(0, 3)), rng)
        outcomes, t = run_clifford_circuit(StabilizerTableau.zero_state(n), circ, rng)
        t.check_invariants()
        s = _oracle_replay(circ, n, outcomes)
        for g in t.generators:
            assert oracle.stabilized_by(s, g)


def test_born_rule_statistics(rng):
    trials = 10_000
    for _ in range(10):
        n = int(rng.integers(1, 6))
        circ = random_clifford_circuit(n, 8, 0, rng)
        _, t = run_clifford_circuit(StabilizerTableau.zero_state(n), circ)
        q = int(rng.integers(n))
        obs = PauliString.single(n, q, "Z")
        p_plus = (1 + oracle.expectation(_oracle_replay(circ, n, []), obs)) / 2
        hits = sum(measure_pauli(t, obs, rng)[0] == 1 for _ in range(trials))
        sigma = max(np.sqrt(p_plus * (1 - p_plus) / trials), 1e-12)
        assert abs(hits / trials - p_plus) <= 3 * sigma


def test_invariant_checker_catches_corruption():
    t = StabilizerTableau.from_strings(["XZ", "ZX"])
    t._r[2] = 7
    with pytest.raises(TableauError):
        t.check_invariants()
