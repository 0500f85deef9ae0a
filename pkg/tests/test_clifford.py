import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphforge import clifford as lc

idx = st.integers(0, 23)


def same_up_to_phase(a, b):
    k = np.vdot(a.ravel(), b.ravel())
    return abs(abs(k) - 2) < 1e-9


def test_group_has_24_elements_and_identity():
    assert lc.n_elements() == 24
    assert lc.word(0) == ""
    assert np.allclose(lc.matrix(0), np.eye(2))


def test_words_reproduce_matrices():
    for c in range(24):
        assert lc.from_word(lc.word(c)) == c
        assert lc.from_matrix(lc.matrix(c)) == c


def test_word_order_is_matrix_order():
    m = lc.matrix(lc.from_word("HP"))
    assert same_up_to_phase(m, lc.matrix(lc.H) @ lc.matrix(lc.P))


@given(idx, idx)
def test_compose_matches_matrix_product(a, b):
    assert same_up_to_phase(lc.matrix(lc.compose(a, b)), lc.matrix(a) @ lc.matrix(b))


@given(idx)
def test_inverse(a):
    assert lc.compose(a, lc.inverse(a)) == 0


@given(idx, st.sampled_from("XYZ"))
def test_conjugation_table(c, p):
    sign, q = lc.conjugate(c, p)
    m = lc.matrix(c)
    paulis = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    assert np.allclose(m @ paulis[p] @ m.conj().T, sign * paulis[q])
    s2, back = lc.conjugate_dagger(c, q)
    assert back == p and s2 == sign


def test_unknown_letter_and_matrix():
    with pytest.raises(lc.CliffordError):
        lc.from_word("HQ")
    with pytest.raises(lc.CliffordError):
        lc.from_matrix(np.diag([1, np.exp(1j * np.pi / 4)]))
