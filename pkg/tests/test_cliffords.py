"""The 24 single-qubit Cliffords: group structure vs explicit matrices."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterforge.cliffords import (
    ALL_OPS,
    BY_LABEL,
    IDENTITY,
    MAT,
    CliffordOp,
    compose,
    compose_labels,
    inverse,
    invert_label,
    matrix,
)

ops = st.sampled_from(ALL_OPS)


def proportional(a: np.ndarray, b: np.ndarray) -> bool:
    # equal up to global phase: |tr(a+ b)| = 2 for 2x2 unitaries
    return abs(abs(np.trace(a.conj().T @ b)) - 2.0) < 1e-9


def test_group_has_24_distinct_elements():
    assert len(ALL_OPS) == 24
    assert len({op.label for op in ALL_OPS}) == 24
    assert len(BY_LABEL) == 24
    for label, op in BY_LABEL.items():
        assert op.label == label


def test_known_labels():
    # canonical shortest H/S words, breadth-first from the identity
    assert IDENTITY.label == "I"
    assert BY_LABEL["SS"].conjugate("X") == ("X", -1)  # SS = Z
    assert BY_LABEL["SS"].conjugate("Z") == ("Z", 1)
    assert BY_LABEL["HSSH"].conjugate("Z") == ("Z", -1)  # HSSH = X
    assert proportional(matrix("HSSH"), MAT["X"])
    assert proportional(matrix("HSSHSS"), MAT["Y"])
    assert proportional(matrix("SS"), MAT["Z"])
    assert max(len(label) for label in BY_LABEL) == 6


def test_matrices_are_unitary():
    eye = np.eye(2)
    for op in ALL_OPS:
        u = matrix(op)
        assert np.allclose(u.conj().T @ u, eye)


def test_conjugation_matches_matrices():
    """U P U+ must equal the recorded sign * letter, exactly."""
    for op in ALL_OPS:
        u = matrix(op)
        for pauli in "XYZ":
            letter, sign = op.conjugate(pauli)
            got = u @ MAT[pauli] @ u.conj().T
            assert np.allclose(got, sign * MAT[letter], atol=1e-12), (
                op.label,
                pauli,
            )


def test_compose_matches_matrix_product():
    for a in ALL_OPS:
        for b in ALL_OPS:
            assert proportional(matrix(compose(a, b)), matrix(a) @ matrix(b))


def test_compose_order_is_outer_inner():
    # "HS" reads as a matrix product: S hits the state first
    assert compose_labels("H", "S") == "HS"
    assert compose_labels("S", "H") == "SH"
    assert compose_labels("H", "H") == "I"
    assert compose_labels("S", "SS") == invert_label("S")


def test_inverses():
    for op in ALL_OPS:
        inv = inverse(op)
        assert compose(op, inv) == IDENTITY
        assert compose(inv, op) == IDENTITY
    assert invert_label("H") == "H"
    assert invert_label("SS") == "SS"
    assert invert_label("HS") == "HSHS"


def test_identity_is_neutral():
    for op in ALL_OPS:
        assert compose_labels("I", op.label) == op.label
        assert compose_labels(op.label, "I") == op.label


def test_conjugate_rejects_non_pauli():
    with pytest.raises(ValueError, match="not a Pauli letter"):
        IDENTITY.conjugate("Q")
    assert IDENTITY.conjugate("I") == ("I", 1)
    assert IDENTITY.conjugate("X", -1) == ("X", -1)


def test_y_image_follows_from_x_and_z():
    h = BY_LABEL["H"]
    assert h.conjugate("Y") == ("Y", -1)  # H Y H = -Y
    s = BY_LABEL["S"]
    assert s.conjugate("Y") == ("X", -1)  # S Y S+ = -X


@given(ops, ops, ops)
def test_compose_is_associative(a, b, c):
    assert compose(a, compose(b, c)) == compose(compose(a, b), c)


@given(ops, ops)
def test_label_of_product_round_trips(a, b):
    assert compose_labels(a.label, b.label) == compose(a, b).label


def test_ops_hashable_and_frozen():
    assert len(set(ALL_OPS)) == 24
    with pytest.raises(AttributeError):
        ALL_OPS[0].x_to = "Y"
    assert CliffordOp("Z", 1, "X", 1) == BY_LABEL["H"]
