import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphforge.pauli import PauliError, PauliString, pauli, symplectic_product

letters = st.text(alphabet="IXYZ", min_size=1, max_size=4)


def paulis(n):
    return st.builds(
        lambda w, k: PauliString.from_str({0: "+", 1: "+i", 2: "-", 3: "-i"}[k] + w),
        st.text(alphabet="IXYZ", min_size=n, max_size=n),
        st.integers(0, 3),
    )


def test_parse_and_print_round_trip():
    for text in ("+XZ", "-IYI", "+iZ", "-iXX"):
        assert str(pauli(text)) == text
    assert str(pauli("XZ")) == "+XZ"
    assert pauli("-YY").sign == -1


def test_bad_strings_rejected():
    for bad in ("", "XQ", "+-X"):
        with pytest.raises(PauliError):
            pauli(bad)


def test_non_hermitian_has_no_sign():
    with pytest.raises(PauliError):
        pauli("+iX").sign


def test_sparse_and_single_constructors():
    assert str(PauliString.single(3, 1, "Y")) == "+IYI"
    assert str(PauliString.from_sparse(4, {0: "X", 3: "Z"}, -1)) == "-XIIZ"
    assert PauliString.identity(2).weight() == 0


def test_xz_product_gives_minus_i_y():
    assert pauli("X") * pauli("Z") == pauli("-iY")
    assert pauli("Z") * pauli("X") == pauli("+iY")


@settings(max_examples=200, deadline=None)
@given(paulis(3), paulis(3))
def test_product_matches_matrices(a, b):
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())


@settings(max_examples=200, deadline=None)
@given(paulis(3), paulis(3))
def test_commutation_matches_matrices(a, b):
    ma, mb = a.to_matrix(), b.to_matrix()
    assert a.commutes(b) == np.allclose(ma @ mb, mb @ ma)
    assert symplectic_product(a, b) == (0 if a.commutes(b) else 1)


@settings(max_examples=100, deadline=None)
@given(paulis(2), paulis(2), paulis(2))
def test_product_is_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


def test_length_mismatch():
    with pytest.raises(PauliError):
        pauli("X") * pauli("XX")
