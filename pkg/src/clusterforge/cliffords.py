"""Single-qubit Clifford bookkeeping used by local frames.

A local frame attaches one of the 24 single-qubit Cliffords to a vertex,
recording how the simulated state differs from the canonical graph state
of the current graph.  Each operator is represented by its conjugation
action on the Pauli axes, which is all the tableau machinery needs; a
2x2 matrix is available for statevector checks.

Labels are canonical shortest words in the generators H and S, found by
breadth-first search from the identity.  A word is read as a matrix
product, so "HS" means S is applied to the state first, then H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CliffordOp",
    "ALL_OPS",
    "BY_LABEL",
    "IDENTITY",
    "compose",
    "inverse",
    "compose_labels",
    "invert_label",
    "matrix",
    "MAT",
]

# Pauli products P*Q = phase * R for distinct P, Q (phase is +/-i).
_PAULI_PRODUCT = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class CliffordOp:
    """A single-qubit Clifford, stored as its conjugation action.

    ``U X U+ = x_sign * x_to`` and ``U Z U+ = z_sign * z_to``; the image
    of Y follows from Y = iXZ.  ``x_to`` and ``z_to`` are distinct Pauli
    letters, signs are +/-1, giving 3*2*2*2 = 24 operators.
    """

    x_to: str
    x_sign: int
    z_to: str
    z_sign: int

    def conjugate(self, pauli: str, sign: int = 1) -> tuple[str, int]:
        """Image of ``sign * pauli`` under conjugation by this operator."""
        if pauli == "I":
            return "I", sign
        if pauli == "X":
            return self.x_to, sign * self.x_sign
        if pauli == "Z":
            return self.z_to, sign * self.z_sign
        if pauli == "Y":
            # U Y U+ = i (U X U+)(U Z U+)
            phase, letter = _PAULI_PRODUCT[(self.x_to, self.z_to)]
            total = 1j * self.x_sign * self.z_sign * phase
            assert total in (1, -1)
            return letter, sign * int(total.real)
        raise ValueError(f"not a Pauli letter: {pauli!r}")

    @property
    def label(self) -> str:
        return _LABELS[self]

    def __repr__(self) -> str:  # pragma: no cover - debug nicety
        return f"CliffordOp({self.label!r})"


def compose(outer: CliffordOp, inner: CliffordOp) -> CliffordOp:
    """Operator product outer*inner (inner acts on the state first)."""
    xt, xs = outer.conjugate(inner.x_to, inner.x_sign)
    zt, zs = outer.conjugate(inner.z_to, inner.z_sign)
    return CliffordOp(xt, xs, zt, zs)


_H = CliffordOp("Z", 1, "X", 1)          # H X H = Z, H Z H = X
_S = CliffordOp("Y", 1, "Z", 1)          # S X S+ = Y, S Z S+ = Z
_I = CliffordOp("X", 1, "Z", 1)


def _enumerate() -> tuple[list[CliffordOp], dict[CliffordOp, str]]:
    labels: dict[CliffordOp, str] = {_I: "I"}
    order: list[CliffordOp] = [_I]
    frontier: list[tuple[CliffordOp, str]] = [(_I, "")]
    while frontier:
        nxt: list[tuple[CliffordOp, str]] = []
        for op, word in frontier:
            for gen, gen_word in ((_H, "H"), (_S, "S")):
                cand = compose(op, gen)  # append generator on the right
                if cand not in labels:
                    labels[cand] = word + gen_word
                    order.append(cand)
                    nxt.append((cand, word + gen_word))
        frontier = nxt
    assert len(order) == 24
    return order, labels


ALL_OPS, _LABELS = _enumerate()
BY_LABEL: dict[str, CliffordOp] = {_LABELS[op]: op for op in ALL_OPS}
IDENTITY = _I


def inverse(op: CliffordOp) -> CliffordOp:
    for cand in ALL_OPS:
        if compose(op, cand) == _I:
            return cand
    raise AssertionError("group without inverses")


def compose_labels(outer: str, inner: str) -> str:
    return compose(BY_LABEL[outer], BY_LABEL[inner]).label


def invert_label(label: str) -> str:
    return inverse(BY_LABEL[label]).label


MAT = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def matrix(op: CliffordOp | str) -> np.ndarray:
    """2x2 unitary for a Clifford (up to global phase), from its label word."""
    label = op if isinstance(op, str) else op.label
    if label == "I":
        return MAT["I"].copy()
    out = np.eye(2, dtype=complex)
    for ch in label:
        out = out @ MAT[ch]
    return out
