"""Type-I fusion, bond cost accounting, and reproducible randomness.

Fusion is the only stochastic primitive: it succeeds with probability
1/2, merging two qubits from different clusters into one that inherits
both neighborhoods, and on failure effectively Z-measures both targets.
Bond costs follow the destroyed-edge convention: only edges removed by
measurements and fusion failures count, while bonds created by local
unitaries or by successful fusion rewiring are free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphstate import GraphState

__all__ = [
    "RngStream",
    "CostLedger",
    "FusionOutcome",
    "type1_fuse",
    "merge_disjoint",
]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(v: int) -> int:
    """SplitMix64 finalizer; full-period bijection on 64-bit ints."""
    v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    v = (v ^ (v >> 27)) * 0x94D049BB133111EB & _MASK64
    return v ^ (v >> 31)


class RngStream:
    """Counter-based 64-bit generator (SplitMix64) with substreams.

    The state is ``seed + draws * gamma``; outputs come from a fixed
    integer mixing function, so identical seeds give identical
    sequences on any platform, and numbered substreams are independent
    of how many draws their parent has made.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & _MASK64
        self.counter = counter

    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self.seed + self.counter * _GAMMA) & _MASK64)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_bool(self, p: float = 0.5) -> bool:
        return self.next_float() < p

    def substream(self, index: int) -> "RngStream":
        """Independent child stream; deterministic in (seed, index) only."""
        if index < 0:
            raise ValueError("substream index must be non-negative")
        child = _mix64(self.seed ^ _mix64((index + 1) * _GAMMA & _MASK64))
        return RngStream(child)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed:#x}, counter={self.counter})"


@dataclass(frozen=True)
class CostLedger:
    """Additive resource counters for a build sequence."""

    bonds_consumed: int = 0
    qubits_consumed: int = 0
    fusion_attempts: int = 0
    fusion_successes: int = 0

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.bonds_consumed + other.bonds_consumed,
            self.qubits_consumed + other.qubits_consumed,
            self.fusion_attempts + other.fusion_attempts,
            self.fusion_successes + other.fusion_successes,
        )

    def to_dict(self) -> dict[str, int]:
        return {
            "bonds_consumed": self.bonds_consumed,
            "qubits_consumed": self.qubits_consumed,
            "fusion_attempts": self.fusion_attempts,
            "fusion_successes": self.fusion_successes,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CostLedger":
        return cls(
            int(doc["bonds_consumed"]),
            int(doc["qubits_consumed"]),
            int(doc["fusion_attempts"]),
            int(doc["fusion_successes"]),
        )


@dataclass(frozen=True)
class FusionOutcome:
    """Result tag for one fusion attempt.

    ``merged`` is the fresh vertex id on success, None on failure.
    """

    success: bool
    merged: int | None = None
    removed: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.success and self.merged is None:
            raise ValueError("successful fusion must name the merged vertex")
        if not self.success and self.merged is not None:
            raise ValueError("failed fusion cannot name a merged vertex")


def type1_fuse(
    g: GraphState,
    a: int,
    b: int,
    rng: RngStream | None = None,
    forced: str | bool | None = None,
    *,
    allow_nonleaf: bool = False,
) -> tuple[GraphState, FusionOutcome, CostLedger]:
    """Attempt a type-I fusion of qubits a and b.

    Success (probability 1/2) replaces both with a fresh vertex
    ``max(vertices) + 1`` adjacent to the symmetric difference of their
    neighborhoods; on the canonical branch the result is again a plain
    graph state.  Failure Z-measures both targets, costing their
    combined degree in bonds.

    One draw is taken from ``rng`` per attempt even when ``forced``
    ('S'/'F' or a bool) decides the branch, so forced and stochastic
    traces stay aligned.  Targets must be distinct, non-adjacent, and
    leaves (degree <= 1) unless ``allow_nonleaf`` opts into the
    generalized rule, which is oracle-validated in the test suite.
    """
    g._require(a, b)
    if a == b:
        raise ValueError("unsupported fusion target: cannot fuse a vertex with itself")
    if g.has_edge(a, b):
        raise ValueError("unsupported fusion target: vertices are adjacent")
    if not allow_nonleaf and (g.degree(a) > 1 or g.degree(b) > 1):
        raise ValueError(
            "unsupported fusion target: degree > 1 (pass allow_nonleaf for the "
            "generalized rule)"
        )

    drawn = rng.next_bool() if rng is not None else None
    if forced is None:
        if drawn is None:
            raise ValueError("fusion needs an rng or a forced outcome")
        success = drawn
    elif isinstance(forced, bool):
        success = forced
    elif forced in ("S", "F"):
        success = forced == "S"
    else:
        raise ValueError(f"forced outcome must be 'S' or 'F', got {forced!r}")

    if success:
        merged = max(g.vertices) + 1
        new_nbrs = g.neighbors(a) ^ g.neighbors(b)
        out = GraphState._trusted(
            (g.vertices - {a, b}) | {merged},
            frozenset(
                e for e in g.edges if a not in e and b not in e
            )
            | frozenset(
                (min(merged, u), max(merged, u)) for u in new_nbrs
            ),
        )
        return (
            out,
            FusionOutcome(True, merged=merged, removed=(a, b)),
            CostLedger(qubits_consumed=1, fusion_attempts=1, fusion_successes=1),
        )

    bonds = g.degree(a) + g.degree(b)
    out = g.without_vertex(a).without_vertex(b)
    return (
        out,
        FusionOutcome(False, removed=(a, b)),
        CostLedger(bonds_consumed=bonds, qubits_consumed=2, fusion_attempts=1),
    )


def merge_disjoint(ga: GraphState, gb: GraphState) -> GraphState:
    """Union of two graphs over disjoint vertex sets."""
    overlap = ga.vertices & gb.vertices
    if overlap:
        raise ValueError(
            f"vertex sets overlap: {sorted(overlap)}; relabel one side first"
        )
    return GraphState._trusted(ga.vertices | gb.vertices, ga.edges | gb.edges)
