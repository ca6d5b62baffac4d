"""Graph states and the rewrite moves used to sculpt cluster shapes.

A graph state on vertices V with edge set E is stabilized by
K_v = X_v prod_{u in N(v)} Z_u.  Everything here treats the state purely
combinatorially: local complementation, Pauli-measurement vertex
deletions, and the chain-to-box rewrite (Hadamards on the two middle
qubits of a 4-segment, which in effect exchanges their labels and adds
a bond between the segment ends).  Measurement outputs are normalized
to the +1 branch
so results are canonical graphs; residual single-qubit corrections are
reported separately where they arise (see :func:`y_byproduct_frame`).

Vertices are small non-negative integers.  Edges are stored as (u, v)
tuples with u < v.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

__all__ = [
    "GraphState",
    "RewriteReport",
    "chain",
    "ring",
    "star",
    "local_complement",
    "measure_z",
    "measure_y",
    "y_byproduct_frame",
    "chain_to_box",
    "lc_equivalent",
    "isomorphic",
    "path_vertices",
    "to_json_doc",
    "from_json_doc",
    "to_dot",
    "OrbitLimitError",
]

LC_ORBIT_VERTEX_LIMIT = 8
ISOMORPHISM_VERTEX_LIMIT = 12


class OrbitLimitError(ValueError):
    """Raised when an equivalence search exceeds its size cap."""


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError(f"self loop on vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class GraphState:
    """Immutable graph underlying a stabilizer graph state."""

    vertices: frozenset[int] = field(default_factory=frozenset)
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        verts = frozenset(self.vertices)
        edges = frozenset(_norm_edge(u, v) for u, v in self.edges)
        for u, v in edges:
            if u not in verts or v not in verts:
                raise ValueError(f"no such vertex: edge ({u}, {v}) dangles")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def _trusted(
        cls, vertices: frozenset[int], edges: frozenset[tuple[int, int]]
    ) -> "GraphState":
        """Skip re-validation for sets that are canonical by construction.

        Internal fast path for rewrite loops; both arguments must
        already be normalized frozensets with every edge endpoint
        present in ``vertices``.
        """
        self = object.__new__(cls)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        return self

    # -- queries ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    def has_vertex(self, v: int) -> bool:
        return v in self.vertices

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edges

    @cached_property
    def _adj(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {v: frozenset(ns) for v, ns in nbrs.items()}

    def neighbors(self, v: int) -> frozenset[int]:
        self._require(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def sorted_vertices(self) -> list[int]:
        return sorted(self.vertices)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def _require(self, *vs: int) -> None:
        for v in vs:
            if v not in self.vertices:
                raise ValueError(f"no such vertex: {v}")

    # -- pure structural edits (no cost semantics) -----------------------

    def with_edges_toggled(self, pairs: Iterable[tuple[int, int]]) -> "GraphState":
        edges = set(self.edges)
        for u, v in pairs:
            self._require(u, v)
            e = _norm_edge(u, v)
            if e in edges:
                edges.remove(e)
            else:
                edges.add(e)
        return GraphState._trusted(self.vertices, frozenset(edges))

    def without_vertex(self, v: int) -> "GraphState":
        self._require(v)
        return GraphState._trusted(
            self.vertices - {v},
            frozenset(e for e in self.edges if v not in e),
        )

    def with_vertex(self, v: int) -> "GraphState":
        return GraphState._trusted(self.vertices | {v}, self.edges)

    def with_edge(self, u: int, v: int) -> "GraphState":
        self._require(u, v)
        return GraphState._trusted(self.vertices, self.edges | {_norm_edge(u, v)})

    def relabel(self, mapping: Mapping[int, int]) -> "GraphState":
        """Rename vertices; ``mapping`` may be partial but must stay injective."""
        full = {v: mapping.get(v, v) for v in self.vertices}
        if len(set(full.values())) != len(full):
            raise ValueError("relabeling is not injective")
        return GraphState._trusted(
            frozenset(full.values()),
            frozenset(_norm_edge(full[u], full[v]) for u, v in self.edges),
        )

    def isolated_vertices(self) -> frozenset[int]:
        touched = {v for e in self.edges for v in e}
        return self.vertices - touched

    def connected_components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        comps: list[frozenset[int]] = []
        for start in self.sorted_vertices():
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                cur = queue.popleft()
                for nb in self.neighbors(cur):
                    if nb not in comp:
                        comp.add(nb)
                        queue.append(nb)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def subgraph(self, vs: Iterable[int]) -> "GraphState":
        keep = frozenset(vs)
        self._require(*keep)
        return GraphState._trusted(
            keep,
            frozenset(e for e in self.edges if e[0] in keep and e[1] in keep),
        )


@dataclass(frozen=True)
class RewriteReport:
    """Bond bookkeeping for one rewrite.

    ``bonds_deleted`` counts edges destroyed at the rewritten vertex;
    edge toggles among neighbors caused by a local complementation are
    free local-unitary rewiring and are not counted.
    """

    bonds_deleted: int = 0
    bonds_added: int = 0
    vertices_removed: tuple[int, ...] = ()


# -- constructors ---------------------------------------------------------


def chain(n: int, start: int = 1) -> GraphState:
    """Linear cluster on vertices start..start+n-1."""
    if n < 1:
        raise ValueError("chain needs at least one vertex")
    vs = range(start, start + n)
    return GraphState._trusted(
        frozenset(vs),
        frozenset((i, i + 1) for i in range(start, start + n - 1)),
    )


def ring(n: int, start: int = 1) -> GraphState:
    if n < 3:
        raise ValueError("ring needs at least three vertices")
    g = chain(n, start)
    return g.with_edge(start, start + n - 1)


def star(n: int, center: int = 1) -> GraphState:
    """Star on n vertices: center plus n-1 leaves with consecutive ids."""
    if n < 2:
        raise ValueError("star needs at least two vertices")
    vs = range(center, center + n)
    return GraphState(
        frozenset(vs),
        frozenset((center, v) for v in range(center + 1, center + n)),
    )


# -- rewrite moves --------------------------------------------------------


def local_complement(g: GraphState, v: int) -> GraphState:
    """Toggle every edge between neighbors of v (a local Clifford move)."""
    nbrs = sorted(g.neighbors(v))
    pairs = [
        (nbrs[i], nbrs[j])
        for i in range(len(nbrs))
        for j in range(i + 1, len(nbrs))
    ]
    return g.with_edges_toggled(pairs)


def measure_z(g: GraphState, v: int) -> tuple[GraphState, RewriteReport]:
    """Computational-basis measurement: delete v and its bonds.

    The +1 outcome branch is taken, so no byproduct corrections remain
    on the neighbors.
    """
    deg = g.degree(v)
    return g.without_vertex(v), RewriteReport(
        bonds_deleted=deg, vertices_removed=(v,)
    )


def measure_y(g: GraphState, v: int) -> tuple[GraphState, RewriteReport]:
    """Y-basis measurement: locally complement at v, then delete v.

    The +1 branch is taken.  The resulting state carries an S correction
    on every former neighbor of v; callers who need the exact state can
    fetch it from :func:`y_byproduct_frame` before measuring.
    """
    deg = g.degree(v)
    out = local_complement(g, v).without_vertex(v)
    return out, RewriteReport(bonds_deleted=deg, vertices_removed=(v,))


def y_byproduct_frame(g: GraphState, v: int) -> dict[int, str]:
    """Corrections left by measure_y(g, v) on the +1 branch.

    The post-measurement state is ``prod_b S_b`` applied to the graph
    state of the rewritten graph, with b ranging over the neighbors of v
    at measurement time.  Checked against the dense oracle in the tests.
    """
    return {b: "S" for b in sorted(g.neighbors(v))}


def chain_to_box(
    g: GraphState, segment: tuple[int, int, int, int]
) -> tuple[GraphState, RewriteReport]:
    """Rewrite an embedded 4-vertex chain segment into a box.

    Hadamards on the two middle qubits map the path q1-q2-q3-q4 exactly
    onto the 4-cycle {q1-q3, q2-q3, q2-q4, q1-q4}, which reads as the
    old chain with q2 and q3 exchanged plus one new bond q1-q4, gained
    for free.  No residual correction remains; the identity is checked
    sign-exactly against both engines in the tests.  The middle qubits
    must have no neighbors outside the segment and no chord may be
    present; q1 and q4 may connect to anything else, which is what lets
    the rewrite run in the middle of a longer chain.
    """
    q1, q2, q3, q4 = segment
    if len({q1, q2, q3, q4}) != 4:
        raise ValueError("invalid box segment: vertices must be distinct")
    g._require(q1, q2, q3, q4)
    if not (g.has_edge(q1, q2) and g.has_edge(q2, q3) and g.has_edge(q3, q4)):
        raise ValueError("invalid box segment: not a path")
    if g.neighbors(q2) != {q1, q3} or g.neighbors(q3) != {q2, q4}:
        raise ValueError(
            "invalid box segment: middle qubits must have no outside neighbors"
        )
    if g.has_edge(q1, q4) or g.has_edge(q1, q3) or g.has_edge(q2, q4):
        raise ValueError("invalid box segment: chord present")
    edges = set(g.edges)
    edges -= {_norm_edge(q1, q2), _norm_edge(q2, q3), _norm_edge(q3, q4)}
    edges |= {
        _norm_edge(q1, q3),
        _norm_edge(q2, q3),
        _norm_edge(q2, q4),
        _norm_edge(q1, q4),
    }
    out = GraphState._trusted(g.vertices, frozenset(edges))
    return out, RewriteReport(bonds_added=1)


# -- equivalence checks ---------------------------------------------------


def lc_equivalent(
    g1: GraphState, g2: GraphState, *, up_to_isomorphism: bool = False
) -> bool:
    """Breadth-first search of the local-complementation orbit of g1.

    With the default labeling-sensitive mode, g2 must appear in the
    orbit with identical vertex names.  With ``up_to_isomorphism`` the
    orbit members are compared to g2 by graph isomorphism instead.
    Capped at 8 vertices to keep the enumeration bounded.
    """
    if g1.n > LC_ORBIT_VERTEX_LIMIT or g2.n > LC_ORBIT_VERTEX_LIMIT:
        raise OrbitLimitError(
            f"orbit search limit exceeded: {LC_ORBIT_VERTEX_LIMIT} vertices"
        )
    if g1.n != g2.n:
        return False
    if not up_to_isomorphism and g1.vertices != g2.vertices:
        return False

    def matches(g: GraphState) -> bool:
        if up_to_isomorphism:
            return isomorphic(g, g2) is not None
        return g.edges == g2.edges

    seen = {g1.edges}
    queue = deque([g1])
    while queue:
        cur = queue.popleft()
        if matches(cur):
            return True
        for v in cur.sorted_vertices():
            nxt = local_complement(cur, v)
            if nxt.edges not in seen:
                seen.add(nxt.edges)
                queue.append(nxt)
    return False


def isomorphic(g1: GraphState, g2: GraphState) -> dict[int, int] | None:
    """Backtracking graph-isomorphism search; returns a bijection or None."""
    if g1.n > ISOMORPHISM_VERTEX_LIMIT or g2.n > ISOMORPHISM_VERTEX_LIMIT:
        raise OrbitLimitError(
            f"orbit search limit exceeded: {ISOMORPHISM_VERTEX_LIMIT} vertices"
        )
    if g1.n != g2.n or len(g1.edges) != len(g2.edges):
        return None
    deg1 = {v: g1.degree(v) for v in g1.vertices}
    deg2 = {v: g2.degree(v) for v in g2.vertices}
    if sorted(deg1.values()) != sorted(deg2.values()):
        return None

    # Assign high-degree vertices first; they constrain the search most.
    order = sorted(g1.vertices, key=lambda v: (-deg1[v], v))
    candidates = {
        v: [w for w in g2.sorted_vertices() if deg2[w] == deg1[v]] for v in order
    }
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(idx: int) -> bool:
        if idx == len(order):
            return True
        v = order[idx]
        for w in candidates[v]:
            if w in used:
                continue
            ok = True
            for u in mapping:
                if g1.has_edge(v, u) != g2.has_edge(w, mapping[u]):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if extend(idx + 1):
                return True
            del mapping[v]
            used.remove(w)
        return False

    return dict(mapping) if extend(0) else None


def path_vertices(g: GraphState, start: int | None = None) -> list[int]:
    """Vertex order of a path graph, walking from one endpoint.

    ``start`` selects the endpoint; default is the smaller-id endpoint.
    Raises if g is not a single path.
    """
    if g.n == 0:
        raise ValueError("empty graph is not a path")
    if g.n == 1:
        return list(g.vertices)
    ends = sorted(v for v in g.vertices if g.degree(v) == 1)
    if len(ends) != 2 or any(g.degree(v) > 2 for v in g.vertices):
        raise ValueError("graph is not a path")
    if start is None:
        start = ends[0]
    elif start not in ends:
        raise ValueError(f"vertex {start} is not a path endpoint")
    order = [start]
    prev = None
    cur = start
    while len(order) < g.n:
        nxt = [u for u in g.neighbors(cur) if u != prev]
        if len(nxt) != 1:
            raise ValueError("graph is not a path")
        prev, cur = cur, nxt[0]
        order.append(cur)
    if len(set(order)) != g.n:
        raise ValueError("graph is not a path")
    return order


# -- serialization --------------------------------------------------------


def to_json_doc(g: GraphState, frame: Mapping[int, str] | None = None) -> str:
    """Canonical single-line JSON for a graph plus its local frame.

    Vertices ascend, edges sort lexicographically with u < v, frame keys
    ascend numerically.  Byte-stable for a given input.
    """
    import json

    frame = frame or {}
    for v in frame:
        if v not in g.vertices:
            raise ValueError(f"no such vertex: frame entry {v}")
    doc = {
        "vertices": g.sorted_vertices(),
        "edges": [list(e) for e in g.sorted_edges()],
        "frame": {str(v): frame[v] for v in sorted(frame)},
    }
    return json.dumps(doc, separators=(",", ":"))


def from_json_doc(text: str) -> tuple[GraphState, dict[int, str]]:
    import json

    from . import cliffords

    doc = json.loads(text)
    g = GraphState(
        frozenset(doc["vertices"]),
        frozenset((u, v) for u, v in doc["edges"]),
    )
    frame: dict[int, str] = {}
    for key, label in doc.get("frame", {}).items():
        v = int(key)
        if v not in g.vertices:
            raise ValueError(f"no such vertex: frame entry {v}")
        if label not in cliffords.BY_LABEL:
            raise ValueError(f"unknown Clifford label: {label!r}")
        frame[v] = label
    return g, frame


def to_dot(g: GraphState) -> str:
    """Deterministic DOT rendering with vertex ids as node labels."""
    lines = ["graph clusterstate {"]
    for v in g.sorted_vertices():
        lines.append(f"  {v};")
    for u, v in g.sorted_edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
