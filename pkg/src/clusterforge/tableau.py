"""Stabilizer tableau simulator (generators only, exact signs).

Rows are stabilizer generators stored as X/Z bit matrices plus a sign
bit per row; a row with bits (x, z) and sign s represents
``s * prod_j P_j`` where P_j is the literal Pauli I, X, Y or Z at qubit
j (Y where both bits are set).  Row products track phases exactly, so
two tableaus describe the same state iff their canonical forms match
byte for byte, signs included.

The graph extraction in :func:`to_graph` reduces any stabilizer state
to a graph state plus per-qubit Clifford corrections and re-derives the
input from its own answer as a self-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cliffords
from .graphstate import GraphState

__all__ = [
    "PauliString",
    "StabilizerTableau",
    "from_graph",
    "apply_clifford_op",
    "measure_pauli",
    "canonical_form",
    "canonical_equal",
    "to_graph",
    "StabilizerContradictionError",
]

_SINGLE_GATES = ("H", "S", "SDG", "X", "Y", "Z")
_TWO_GATES = ("CZ", "CNOT", "SWAP")


class StabilizerContradictionError(ValueError):
    """Forced outcome disagrees with a deterministic measurement."""


# ---------------------------------------------------------------------------
# Pauli strings


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit Pauli operator."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]
    sign: int = 1

    def __post_init__(self) -> None:
        if len(self.x_bits) != len(self.z_bits):
            raise ValueError("x and z bit vectors differ in length")
        if any(b not in (0, 1) for b in self.x_bits + self.z_bits):
            raise ValueError("bits must be 0 or 1")
        if self.sign not in (1, -1):
            raise ValueError(f"phase restricted to +-1, got {self.sign}")

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse e.g. '+XZI' or '-YY'. Sign prefix optional."""
        sign = 1
        if text and text[0] in "+-":
            sign = 1 if text[0] == "+" else -1
            text = text[1:]
        lookup = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
        try:
            pairs = [lookup[ch] for ch in text]
        except KeyError as exc:
            raise ValueError(f"not a Pauli letter: {exc.args[0]!r}") from None
        return cls(
            tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), sign
        )

    @property
    def text(self) -> str:
        letters = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
        body = "".join(
            letters[(x, z)] for x, z in zip(self.x_bits, self.z_bits)
        )
        return ("+" if self.sign == 1 else "-") + body

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        if not 0 <= qubit < n:
            raise ValueError(f"no such qubit: {qubit}")
        x = [0] * n
        z = [0] * n
        if letter in ("X", "Y"):
            x[qubit] = 1
        if letter in ("Z", "Y"):
            z[qubit] = 1
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"not a measurable Pauli letter: {letter!r}")
        return cls(tuple(x), tuple(z), sign)

    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)


def _phase_exponents(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> int:
    """Power of i picked up when multiplying literal Paulis (x1,z1)*(x2,z2)."""
    # Casework per qubit; vectorized over the row.
    y1 = x1 & z1
    only_x1 = x1 & ~z1
    only_z1 = ~x1 & z1
    acc = np.zeros(x1.shape, dtype=np.int64)
    acc += y1 * (z2.astype(np.int64) - x2.astype(np.int64))
    acc += only_x1 * (z2 * (2 * x2.astype(np.int64) - 1))
    acc += only_z1 * (x2 * (1 - 2 * z2.astype(np.int64)))
    return int(acc.sum()) % 4


# ---------------------------------------------------------------------------
# Tableau


class StabilizerTableau:
    """Immutable n-generator tableau for an n-qubit stabilizer state."""

    __slots__ = ("n", "_x", "_z", "_neg")

    def __init__(self, x: np.ndarray, z: np.ndarray, neg: np.ndarray):
        x = np.array(x, dtype=np.uint8)
        z = np.array(z, dtype=np.uint8)
        neg = np.array(neg, dtype=np.uint8)
        n = x.shape[0]
        if x.shape != (n, n) or z.shape != (n, n) or neg.shape != (n,):
            raise ValueError("tableau arrays have inconsistent shapes")
        if n == 0:
            raise ValueError("tableau needs at least one qubit")
        self.n = n
        self._x = x
        self._z = z
        self._neg = neg
        self._validate_group()
        for arr in (self._x, self._z, self._neg):
            arr.setflags(write=False)

    def _validate_group(self) -> None:
        x, z = self._x.astype(np.int64), self._z.astype(np.int64)
        sym = (x @ z.T + z @ x.T) % 2
        if np.any(sym):
            raise ValueError("generators do not commute pairwise")
        stacked = np.concatenate([self._x, self._z], axis=1)
        if _gf2_rank(stacked) != self.n:
            raise ValueError("generators are not independent")

    # -- construction helpers --------------------------------------------

    @classmethod
    def from_rows(cls, rows: list[PauliString]) -> "StabilizerTableau":
        n = rows[0].n
        x = np.array([r.x_bits for r in rows], dtype=np.uint8)
        z = np.array([r.z_bits for r in rows], dtype=np.uint8)
        neg = np.array([0 if r.sign == 1 else 1 for r in rows], dtype=np.uint8)
        if x.shape != (n, n):
            raise ValueError("need exactly n generators of length n")
        return cls(x, z, neg)

    @property
    def rows(self) -> list[PauliString]:
        return [
            PauliString(
                tuple(int(b) for b in self._x[i]),
                tuple(int(b) for b in self._z[i]),
                -1 if self._neg[i] else 1,
            )
            for i in range(self.n)
        ]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._x, other._x)
            and np.array_equal(self._z, other._z)
            and np.array_equal(self._neg, other._neg)
        )

    def __hash__(self):  # pragma: no cover - mutability guard only
        return hash(
            (self._x.tobytes(), self._z.tobytes(), self._neg.tobytes())
        )

    # -- gates -------------------------------------------------------------

    def apply(self, gate: str, *qubits: int) -> "StabilizerTableau":
        """Conjugate every generator by a named Clifford gate."""
        x = self._x.copy()
        z = self._z.copy()
        neg = self._neg.copy()
        gate = gate.upper()
        if gate in _SINGLE_GATES:
            if len(qubits) != 1:
                raise ValueError(f"{gate} takes one qubit")
            (q,) = qubits
            self._check_qubit(q)
            xq, zq = x[:, q].copy(), z[:, q].copy()
            if gate == "H":
                neg ^= xq & zq
                x[:, q], z[:, q] = zq, xq
            elif gate == "S":
                neg ^= xq & zq
                z[:, q] = zq ^ xq
            elif gate == "SDG":
                neg ^= xq & (1 - zq)
                z[:, q] = zq ^ xq
            elif gate == "X":
                neg ^= zq
            elif gate == "Y":
                neg ^= xq ^ zq
            elif gate == "Z":
                neg ^= xq
        elif gate in _TWO_GATES:
            if len(qubits) != 2 or qubits[0] == qubits[1]:
                raise ValueError(f"{gate} takes two distinct qubits")
            a, b = qubits
            self._check_qubit(a)
            self._check_qubit(b)
            if gate == "CZ":
                neg ^= x[:, a] & x[:, b] & (z[:, a] ^ z[:, b])
                z[:, b] = z[:, b] ^ x[:, a]
                z[:, a] = z[:, a] ^ x[:, b]
            elif gate == "CNOT":
                c, t = a, b
                neg ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
                x[:, t] = x[:, t] ^ x[:, c]
                z[:, c] = z[:, c] ^ z[:, t]
            elif gate == "SWAP":
                x[:, [a, b]] = x[:, [b, a]]
                z[:, [a, b]] = z[:, [b, a]]
        else:
            raise ValueError(f"unknown gate: {gate!r}")
        return StabilizerTableau(x, z, neg)

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise ValueError(f"no such qubit: {q}")

    def dump(self) -> str:
        """Canonical generator list, one '+XZI'-style line per row."""
        return "\n".join(r.text for r in canonical_form(self).rows) + "\n"


def _gf2_rank(mat: np.ndarray) -> int:
    m = mat.copy() % 2
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _row_mult(
    x: np.ndarray, z: np.ndarray, neg: np.ndarray, dst: int, src: int
) -> None:
    """In place: row dst *= row src, with exact sign tracking."""
    exp = _phase_exponents(x[dst], z[dst], x[src], z[src])
    assert exp in (0, 2), "product of commuting rows must have a real sign"
    if exp == 2:
        neg[dst] ^= 1
    neg[dst] ^= neg[src]
    x[dst] ^= x[src]
    z[dst] ^= z[src]


# ---------------------------------------------------------------------------
# Module operations


def from_graph(g: GraphState) -> StabilizerTableau:
    """Generators K_v = X_v prod_{u in N(v)} Z_u; qubit i is the i-th
    vertex in ascending order."""
    verts = g.sorted_vertices()
    if not verts:
        raise ValueError("tableau needs at least one qubit")
    pos = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    x = np.zeros((n, n), dtype=np.uint8)
    z = np.zeros((n, n), dtype=np.uint8)
    for v in verts:
        i = pos[v]
        x[i, i] = 1
        for u in g.neighbors(v):
            z[i, pos[u]] = 1
    return StabilizerTableau(x, z, np.zeros(n, dtype=np.uint8))


def apply_clifford_op(
    t: StabilizerTableau, op: "cliffords.CliffordOp | str", q: int
) -> StabilizerTableau:
    """Apply one of the 24 single-qubit Cliffords by its H/S word."""
    label = op if isinstance(op, str) else op.label
    if label not in cliffords.BY_LABEL:
        raise ValueError(f"unknown Clifford label: {label!r}")
    if label == "I":
        return t
    for ch in reversed(label):  # rightmost factor acts first
        t = t.apply(ch, q)
    return t


def measure_pauli(
    t: StabilizerTableau,
    p: PauliString,
    forced: int | None = None,
    rng=None,
) -> tuple[StabilizerTableau, int, bool]:
    """Measure a Pauli observable; returns (tableau, outcome, was_deterministic).

    Random outcomes need ``rng`` (anything with a ``next_bool()``);
    passing ``forced`` picks the branch instead, still consuming no
    entropy here.  Forcing an outcome the stabilizer already excludes
    raises :class:`StabilizerContradictionError`.
    """
    if p.n != t.n:
        raise ValueError(f"operator length {p.n} does not match {t.n} qubits")
    if p.is_identity():
        raise ValueError("cannot measure the identity operator")
    if forced is not None and forced not in (1, -1):
        raise ValueError(f"forced outcome must be +1 or -1, got {forced}")

    px = np.array(p.x_bits, dtype=np.uint8)
    pz = np.array(p.z_bits, dtype=np.uint8)
    # Work against the positive operator; fold p's sign into the outcome.
    forced_pos = None if forced is None else forced * p.sign

    x = t._x.copy()
    z = t._z.copy()
    neg = t._neg.copy()
    anti = ((x @ pz.astype(np.int64) + z @ px.astype(np.int64)) % 2).astype(bool)

    if anti.any():
        pivot = int(np.argmax(anti))
        for j in np.nonzero(anti)[0]:
            if j != pivot:
                _row_mult(x, z, neg, int(j), pivot)
        if forced_pos is None:
            if rng is None:
                raise ValueError("random outcome requires an rng")
            outcome_pos = 1 if rng.next_bool() else -1
        else:
            outcome_pos = forced_pos
        x[pivot] = px
        z[pivot] = pz
        neg[pivot] = 0 if outcome_pos == 1 else 1
        return StabilizerTableau(x, z, neg), outcome_pos * p.sign, False

    # Deterministic: express p as a product of generators, tracking sign.
    canon = canonical_form(t)
    cx = canon._x.copy()
    cz = canon._z.copy()
    cneg = canon._neg.copy()
    acc_x = np.zeros(t.n, dtype=np.uint8)
    acc_z = np.zeros(t.n, dtype=np.uint8)
    acc_neg = 0
    acc_exp = 0
    rem_x, rem_z = px.copy(), pz.copy()
    for i in range(t.n):
        stacked = np.concatenate([cx[i], cz[i]])
        pivot_col = int(np.argmax(stacked))
        rem = np.concatenate([rem_x, rem_z])
        if rem[pivot_col]:
            acc_exp = (acc_exp + _phase_exponents(acc_x, acc_z, cx[i], cz[i])) % 4
            acc_x ^= cx[i]
            acc_z ^= cz[i]
            acc_neg ^= int(cneg[i])
            rem_x ^= cx[i]
            rem_z ^= cz[i]
    assert not rem_x.any() and not rem_z.any(), (
        "operator commutes with the stabilizer but is not in it"
    )
    assert acc_exp in (0, 2)
    outcome_pos = -1 if (acc_neg ^ (acc_exp == 2)) else 1
    if forced_pos is not None and forced_pos != outcome_pos:
        raise StabilizerContradictionError(
            f"contradicts stabilizer: forced {forced:+d} but outcome is fixed "
            f"at {outcome_pos * p.sign:+d}"
        )
    return t, outcome_pos * p.sign, True


def canonical_form(t: StabilizerTableau) -> StabilizerTableau:
    """Unique sign-tracked reduced row echelon form.

    Columns are ordered X-block first, then Z-block.  Two tableaus
    describe the same stabilizer group with the same signs iff their
    canonical forms are identical.
    """
    x = t._x.copy()
    z = t._z.copy()
    neg = t._neg.copy()
    n = t.n
    rank = 0
    for col in range(2 * n):
        block, c = (x, col) if col < n else (z, col - n)
        pivot = None
        for r in range(rank, n):
            if block[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != rank:
            x[[rank, pivot]] = x[[pivot, rank]]
            z[[rank, pivot]] = z[[pivot, rank]]
            neg[[rank, pivot]] = neg[[pivot, rank]]
        for r in range(n):
            if r != rank and block[r, c]:
                _row_mult(x, z, neg, r, rank)
        rank += 1
        if rank == n:
            break
    return StabilizerTableau(x, z, neg)


def canonical_equal(t1: StabilizerTableau, t2: StabilizerTableau) -> bool:
    """Same state, signs included."""
    if t1.n != t2.n:
        return False
    return canonical_form(t1) == canonical_form(t2)


def to_graph(t: StabilizerTableau) -> tuple[GraphState, dict[int, str]]:
    """Reduce to a graph state plus per-qubit Clifford frame.

    Returns (g, frame) with the state of ``t`` equal to the frame
    applied to the graph state of ``g`` (vertices are qubit indices).
    The derivation is re-checked internally via canonical_equal before
    returning.
    """
    n = t.n
    x = t._x.copy()
    z = t._z.copy()
    neg = t._neg.copy()
    applied: dict[int, list[str]] = {q: [] for q in range(n)}

    def x_rref() -> int:
        rank = 0
        for col in range(n):
            pivot = None
            for r in range(rank, n):
                if x[r, col]:
                    pivot = r
                    break
            if pivot is None:
                continue
            if pivot != rank:
                x[[rank, pivot]] = x[[pivot, rank]]
                z[[rank, pivot]] = z[[pivot, rank]]
                neg[[rank, pivot]] = neg[[pivot, rank]]
            for r in range(n):
                if r != rank and x[r, col]:
                    _row_mult(x, z, neg, r, rank)
            rank += 1
        return rank

    # Hadamards until the X block has full rank.  A rank-deficient RREF
    # leaves pure-Z rows whose support avoids all X pivot columns, so
    # converting any support column makes the rank grow.
    while True:
        rank = x_rref()
        if rank == n:
            break
        row = rank  # first pure-Z row
        support = np.nonzero(z[row])[0]
        assert support.size, "identity row in an independent tableau"
        q = int(support[0])
        neg ^= x[:, q] & z[:, q]
        x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
        applied[q].append("H")

    # X block is now the identity; the Z block must be symmetric.
    assert np.array_equal(x, np.eye(n, dtype=np.uint8))
    assert np.array_equal(z, z.T), "commuting rows force a symmetric Z block"

    for q in range(n):
        if z[q, q]:
            # Y at the diagonal: S-dagger turns it into X without touching
            # other rows, whose X part vanishes at column q.  No sign flips:
            # SDG only flips rows with X (not Y) at q.
            z[q, q] = 0
            applied[q].append("SDG")

    for q in range(n):
        if neg[q]:
            neg[q] = 0
            applied[q].append("Z")

    edges = {
        (i, j) for i in range(n) for j in range(i + 1, n) if z[i, j]
    }
    g = GraphState(frozenset(range(n)), frozenset(edges))

    steps = {
        "H": cliffords.BY_LABEL["H"],
        "SDG": cliffords.inverse(cliffords.BY_LABEL["S"]),
        "Z": cliffords.CliffordOp("X", -1, "Z", 1),
    }
    frame: dict[int, str] = {}
    for q in range(n):
        op = cliffords.IDENTITY
        for gate in applied[q]:  # application order; later gates compose left
            op = cliffords.compose(steps[gate], op)
        inv = cliffords.inverse(op)
        if inv.label != "I":
            frame[q] = inv.label

    check = from_graph(g)
    for q, label in frame.items():
        check = apply_clifford_op(check, label, q)
    assert canonical_equal(check, t), "graph extraction failed self-check"
    return g, frame
