"""Executable construction recipes with cost accounting and replayable traces.

Each recipe turns one or more resource chains into a target cluster
shape and returns a :class:`RecipeResult`: the final graph, the local
frame of residual single-qubit corrections, an additive cost ledger,
and a step-by-step trace.  Traces serialize to JSON and :func:`replay`
re-executes one against the recorded starting material, reproducing the
result bit-exactly, forced fusion outcomes included.

Cost conventions: every destroyed edge costs one bond (measurements pay
the measured vertex's degree, failed fusions pay both targets'
degrees), bonds created by the box rewrite or by successful fusion are
free, and every measured, fused, or discarded qubit counts once in
``qubits_consumed``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import cliffords
from . import tableau as tb
from .fusion import CostLedger, FusionOutcome, RngStream, merge_disjoint, type1_fuse
from .graphstate import (
    GraphState,
    chain_to_box,
    measure_y,
    measure_z,
    path_vertices,
    y_byproduct_frame,
)

__all__ = [
    "RecipeResult",
    "ResourcesExhaustedError",
    "parse_schedule",
    "build_l_shape",
    "build_cross",
    "build_h_shape",
    "grow_ladder",
    "grow_depth",
    "build_double_box",
    "build_triple_box",
    "join_double_boxes",
    "close_second_rung",
    "salvage_failed_join",
    "build_ring8",
    "nodeless_rung",
    "trace_ledger",
    "result_to_doc",
    "result_from_doc",
    "result_to_json",
    "replay",
]


class ResourcesExhaustedError(RuntimeError):
    """A retry loop ran out of chain material before succeeding.

    ``partial`` holds the RecipeResult at the point of exhaustion so the
    ledger spent so far stays inspectable.
    """

    def __init__(self, message: str, partial: "RecipeResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=True)
class RecipeResult:
    """Outcome of one recipe run.

    ``frame`` maps surviving vertices to single-qubit Clifford labels
    relating the physical state to the canonical graph state of
    ``graph``.  ``trace`` replays against ``initial`` to the same
    result; ``annotations`` carries derived structural metadata (rail
    paths, rung ids, forced-outcome summaries) that replay reproduces
    deterministically.
    """

    name: str
    graph: GraphState
    frame: dict[int, str]
    ledger: CostLedger
    trace: tuple[dict, ...]
    initial: GraphState
    annotations: dict = field(default_factory=dict)


def parse_schedule(forced) -> list[str]:
    """Normalize a forced-outcome schedule to a list of 'S'/'F' tokens.

    Accepts None, an iterable of 'S'/'F'/bools, or a compact string like
    "S", "F,S", or "F*3,S".
    """
    if forced is None:
        return []
    if isinstance(forced, str):
        out: list[str] = []
        for token in forced.split(","):
            token = token.strip().upper()
            if not token:
                continue
            if "*" in token:
                sym, _, count = token.partition("*")
                if sym not in ("S", "F") or not count.isdigit():
                    raise ValueError(f"bad forced-outcome token: {token!r}")
                out.extend([sym] * int(count))
            elif token in ("S", "F"):
                out.append(token)
            else:
                raise ValueError(f"bad forced-outcome token: {token!r}")
        return out
    out = []
    for item in forced:
        if isinstance(item, bool):
            out.append("S" if item else "F")
        elif item in ("S", "F"):
            out.append(item)
        else:
            raise ValueError(f"bad forced-outcome entry: {item!r}")
    return out


class _Builder:
    """Mutable recipe executor; accumulates graph, frame, ledger, trace."""

    def __init__(
        self,
        graph: GraphState,
        rng: RngStream | None = None,
        forced=None,
        *,
        initial: GraphState | None = None,
        frame: Mapping[int, str] | None = None,
        ledger: CostLedger = CostLedger(),
        trace: Sequence[dict] = (),
    ):
        self.graph = graph
        self.initial = graph if initial is None else initial
        self.rng = rng
        self.schedule = parse_schedule(forced)
        self.frame: dict[int, str] = dict(frame or {})
        self.ledger = ledger
        self.trace: list[dict] = [dict(step) for step in trace]

    @classmethod
    def resume(cls, result: RecipeResult, rng=None, forced=None) -> "_Builder":
        return cls(
            result.graph,
            rng,
            forced,
            initial=result.initial,
            frame=result.frame,
            ledger=result.ledger,
            trace=result.trace,
        )

    def _next_forced(self) -> str | None:
        return self.schedule.pop(0) if self.schedule else None

    def _push_frame(self, v: int, label: str) -> None:
        # Existing corrections sit outside new ones: the physical state is
        # frame * |graph>, and a rewrite's byproduct lands next to the graph.
        combined = cliffords.compose_labels(self.frame.get(v, "I"), label)
        if combined == "I":
            self.frame.pop(v, None)
        else:
            self.frame[v] = combined

    # -- steps -----------------------------------------------------------

    def box(self, segment: tuple[int, int, int, int]) -> None:
        self.graph, _ = chain_to_box(self.graph, segment)
        self.trace.append({"op": "box", "segment": list(segment)})

    def zmeas(self, v: int) -> None:
        if v in self.frame:
            raise ValueError(f"vertex {v} carries a frame correction; absorb it first")
        bonds = self.graph.degree(v)
        self.graph, _ = measure_z(self.graph, v)
        self.ledger += CostLedger(bonds_consumed=bonds, qubits_consumed=1)
        self.trace.append({"op": "measure_z", "vertex": v, "bonds": bonds})

    def ymeas(self, v: int) -> None:
        if v in self.frame:
            raise ValueError(f"vertex {v} carries a frame correction; absorb it first")
        corrections = y_byproduct_frame(self.graph, v)
        bonds = self.graph.degree(v)
        self.graph, _ = measure_y(self.graph, v)
        for b, label in corrections.items():
            self._push_frame(b, label)
        self.ledger += CostLedger(bonds_consumed=bonds, qubits_consumed=1)
        self.trace.append({"op": "measure_y", "vertex": v, "bonds": bonds})

    def fuse(
        self, a: int, b: int, *, allow_nonleaf: bool = False, _replay: str | None = None
    ) -> FusionOutcome:
        if a in self.frame or b in self.frame:
            raise ValueError("fusion targets must be frame-free")
        forced = _replay if _replay is not None else self._next_forced()
        rng = None if _replay is not None else self.rng
        self.graph, outcome, delta = type1_fuse(
            self.graph, a, b, rng=rng, forced=forced, allow_nonleaf=allow_nonleaf
        )
        self.ledger += delta
        self.trace.append(
            {
                "op": "fuse",
                "a": a,
                "b": b,
                "outcome": "S" if outcome.success else "F",
                "merged": outcome.merged,
                "bonds": delta.bonds_consumed,
                "allow_nonleaf": allow_nonleaf,
            }
        )
        return outcome

    def merge_step(self, extra: GraphState) -> None:
        """Bring fresh disjoint material into the working graph mid-recipe."""
        self.graph = merge_disjoint(self.graph, extra)
        self.trace.append(
            {
                "op": "merge",
                "vertices": sorted(extra.vertices),
                "edges": [list(e) for e in extra.sorted_edges()],
            }
        )

    def absorb(self, other: RecipeResult) -> None:
        """Adopt a finished disjoint result: graphs, traces, and ledgers join."""
        self.graph = merge_disjoint(self.graph, other.graph)
        self.initial = merge_disjoint(self.initial, other.initial)
        overlap = set(self.frame) & set(other.frame)
        if overlap:
            raise ValueError(f"frame entries collide on vertices {sorted(overlap)}")
        self.frame.update(other.frame)
        self.ledger += other.ledger
        self.trace.extend(dict(step) for step in other.trace)

    def relabel(self, mapping: Mapping[int, int]) -> None:
        self.graph = self.graph.relabel(mapping)
        self.frame = {mapping.get(v, v): lab for v, lab in self.frame.items()}
        self.trace.append(
            {"op": "relabel", "mapping": {str(k): v for k, v in sorted(mapping.items())}}
        )

    def drop_isolated(self) -> list[int]:
        isolated = sorted(self.graph.isolated_vertices())
        for v in isolated:
            if v in self.frame:
                raise ValueError(f"vertex {v} carries a frame correction; absorb it first")
            self.graph = self.graph.without_vertex(v)
        self.ledger += CostLedger(qubits_consumed=len(isolated))
        self.trace.append({"op": "drop_isolated", "vertices": isolated})
        return isolated

    def tableau_rewrite(
        self, hadamards: Sequence[int], swaps: Sequence[tuple[int, int]]
    ) -> None:
        """Apply Hadamards and label swaps exactly, re-extracting the graph.

        Runs through the stabilizer tableau so any residual corrections
        land in the frame instead of being silently dropped.
        """
        if self.frame:
            raise ValueError("tableau rewrite requires an empty frame")
        order = self.graph.sorted_vertices()
        index = {v: i for i, v in enumerate(order)}
        t = tb.from_graph(self.graph)
        for v in hadamards:
            t = t.apply("H", index[v])
        for a, b in swaps:
            t = t.apply("SWAP", index[a], index[b])
        g_pos, frame_pos = tb.to_graph(t)
        self.graph = g_pos.relabel({i: v for i, v in enumerate(order)})
        self.frame = {order[q]: lab for q, lab in sorted(frame_pos.items())}
        self.trace.append(
            {
                "op": "tableau_rewrite",
                "hadamards": list(hadamards),
                "swaps": [list(p) for p in swaps],
            }
        )

    def finish(self, name: str, annotations: dict | None = None) -> RecipeResult:
        return RecipeResult(
            name=name,
            graph=self.graph,
            frame=dict(self.frame),
            ledger=self.ledger,
            trace=tuple(self.trace),
            initial=self.initial,
            annotations=annotations or {},
        )


# -- deterministic single-chain recipes -------------------------------------


def _consecutive_path(g: GraphState, length: int, what: str) -> list[int]:
    """Validate that g is a path of ``length`` consecutively labeled vertices."""
    p = path_vertices(g)
    if len(p) != length:
        raise ValueError(f"{what} needs a {length}-vertex chain, got {len(p)}")
    if p[-1] < p[0]:
        p.reverse()
    if p != list(range(p[0], p[0] + length)):
        raise ValueError(f"{what} needs consecutive labels along the chain")
    return p


def build_l_shape(
    g: GraphState, segment: tuple[int, int, int, int] | None = None
) -> RecipeResult:
    """Chain into an L: box rewrite, then delete the inner corner.

    Deterministic, exactly 2 bonds.  The result keeps the chain running
    through q1 and q4 with the arm qubit q3 dangling from q1.  Default
    segment is the first four vertices walking from the low-id endpoint.
    """
    if segment is None:
        p = path_vertices(g)
        if len(p) < 4:
            raise ValueError("invalid box segment: chain has fewer than four vertices")
        segment = tuple(p[:4])
    b = _Builder(g)
    b.box(segment)
    b.zmeas(segment[1])
    return b.finish("L", {"hub": segment[0], "arm": segment[2]})


def _consecutive_run(g: GraphState, start: int | None, length: int, what: str) -> int:
    """Validate a run of ``length`` consecutively labeled chain vertices.

    With ``start=None`` the whole graph must be such a chain.  With an
    explicit start, the run is checked in place: interior vertices
    (including the shared box corners) must have no outside neighbors,
    while the two run ends may carry extensions.
    """
    if start is None:
        return _consecutive_path(g, length, what)[0]
    run = range(start, start + length)
    for v in run:
        if not g.has_vertex(v):
            raise ValueError(f"{what} needs vertices {start}..{start + length - 1}")
    for v in run[:-1]:
        if not g.has_edge(v, v + 1):
            raise ValueError(f"{what} needs the chain edge {v}-{v + 1}")
    for v in run[1:-1]:
        if g.neighbors(v) != {v - 1, v + 1}:
            raise ValueError(
                f"invalid box segment: vertex {v} must have no outside neighbors"
            )
    return start


def build_double_box(g: GraphState, start: int | None = None) -> RecipeResult:
    """Two box rewrites sharing a corner, from a consecutive 7-chain.

    Deterministic and free: the cross precursor with edge set
    {1-3,2-3,2-4,1-4, 4-6,5-6,5-7,4-7} (shifted by the chain's start).
    """
    s = _consecutive_run(g, start, 7, "double box")
    b = _Builder(g)
    b.box((s, s + 1, s + 2, s + 3))
    b.box((s + 3, s + 4, s + 5, s + 6))
    return b.finish(
        "double-box", {"start": s, "hubs": [s + 3], "wings": [s + 1, s + 6]}
    )


def build_triple_box(g: GraphState, start: int | None = None) -> RecipeResult:
    """Three chained box rewrites from a consecutive 10-chain; free."""
    s = _consecutive_run(g, start, 10, "triple box")
    b = _Builder(g)
    b.box((s, s + 1, s + 2, s + 3))
    b.box((s + 3, s + 4, s + 5, s + 6))
    b.box((s + 6, s + 7, s + 8, s + 9))
    return b.finish("triple-box", {"start": s, "hubs": [s + 3, s + 6]})


def build_cross(g: GraphState, start: int | None = None) -> RecipeResult:
    """Cross (4-star) from a consecutive 7-chain at exactly 4 bonds.

    Double box, then delete the two outer box corners; the shared corner
    becomes the center, adjacent to the four remaining ends.  With an
    explicit ``start`` the chain may extend past the run's two ends.
    """
    s = _consecutive_run(g, start, 7, "cross")
    b = _Builder(g)
    b.box((s, s + 1, s + 2, s + 3))
    b.box((s + 3, s + 4, s + 5, s + 6))
    b.zmeas(s + 2)
    b.zmeas(s + 4)
    return b.finish("cross", {"center": s + 3})


# -- probabilistic joining recipes -------------------------------------------


def _l_segment(path: list[int]) -> tuple[int, int, int, int] | None:
    """Segment for the next L attempt on a chain walked from its anchor end.

    The hub sits one step inside the chain when there is room, so the
    joined shape gets a proper interior corner; a bare 4-chain falls
    back to the end segment (the minimal L of the basic rewrite).
    """
    if len(path) >= 5:
        return tuple(path[1:5])
    if len(path) == 4:
        return tuple(path[0:4])
    return None


def _exhaust(b: _Builder, name: str, annotations: dict) -> ResourcesExhaustedError:
    annotations = dict(annotations)
    annotations["exhausted"] = True
    return ResourcesExhaustedError(
        "resource chains exhausted: no room left for another attempt",
        b.finish(name, annotations),
    )


def build_h_shape(
    chain_a: GraphState,
    chain_b: GraphState,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Join two chains into a sideways H through one rung qubit.

    Loop: build an L on each chain (2 bonds each), fuse the two arm
    qubits.  Success yields the H at 6k-2 bonds after k attempts; each
    failure costs 2 extra bonds and shortens both chains by two
    vertices, re-anchoring at the end that held the previous arm.
    Raises :class:`ResourcesExhaustedError` when a chain can no longer
    host an L segment.
    """
    path_a = path_vertices(chain_a)
    path_b = path_vertices(chain_b)
    g = merge_disjoint(chain_a, chain_b)
    b = _Builder(g, rng, forced)
    while True:
        seg_a = _l_segment(path_a)
        seg_b = _l_segment(path_b)
        if seg_a is None or seg_b is None:
            raise _exhaust(b, "H", {"rails": [path_a, path_b], "rungs": []})
        b.box(seg_a)
        b.zmeas(seg_a[1])
        b.box(seg_b)
        b.zmeas(seg_b[1])
        path_a = [v for v in path_a if v != seg_a[1]]
        path_b = [v for v in path_b if v != seg_b[1]]
        outcome = b.fuse(seg_a[2], seg_b[2])
        path_a = [v for v in path_a if v != seg_a[2]]
        path_b = [v for v in path_b if v != seg_b[2]]
        if outcome.success:
            annotations = {
                "rails": [path_a, path_b],
                "cursors": [path_a.index(seg_a[0]), path_b.index(seg_b[0])],
                "rungs": [outcome.merged],
            }
            return b.finish("H", annotations)


def _rail_state(result: RecipeResult) -> tuple[list[list[int]], list[int], list[int]]:
    ann = result.annotations
    if "rails" not in ann or "cursors" not in ann:
        raise ValueError("result does not carry rail annotations; build the H first")
    rails = [list(r) for r in ann["rails"]]
    cursors = list(ann["cursors"])
    rungs = list(ann.get("rungs", []))
    return rails, cursors, rungs


def grow_ladder(
    h: RecipeResult,
    chains: Iterable[GraphState],
    rung_count: int,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Add rungs along an H, turning it into a sideways ladder.

    Each rung repeats the L+L+fuse pattern on the next free segment of
    both rails.  When a rail runs too short, the next chain from
    ``chains`` is fused leaf-to-leaf onto its far end (one more
    probabilistic attempt; failure shortens both ends by one).  With no
    material left, raises :class:`ResourcesExhaustedError`.
    """
    if rung_count == 0:
        return h
    rails, cursors, rungs = _rail_state(h)
    b = _Builder.resume(h, rng, forced)
    pool = [{"path": path_vertices(c), "graph": c, "merged": False} for c in chains]
    name = "ladder"

    def ensure_rail(i: int) -> None:
        while len(rails[i]) < cursors[i] + 5:
            if not pool:
                raise _exhaust(
                    b, name, {"rails": rails, "cursors": cursors, "rungs": rungs}
                )
            spare = pool[0]
            if not spare["merged"]:
                b.merge_step(spare["graph"])
                spare["merged"] = True
            tail, head = rails[i][-1], spare["path"][0]
            outcome = b.fuse(tail, head)
            if outcome.success:
                rails[i] = rails[i][:-1] + [outcome.merged] + spare["path"][1:]
                pool.pop(0)
            else:
                rails[i] = rails[i][:-1]
                spare["path"] = spare["path"][1:]
                if len(spare["path"]) < 2:
                    pool.pop(0)

    added = 0
    while added < rung_count:
        ensure_rail(0)
        ensure_rail(1)
        segs = []
        for i in (0, 1):
            c = cursors[i]
            seg = tuple(rails[i][c + 1 : c + 5])
            b.box(seg)
            b.zmeas(seg[1])
            rails[i] = [v for v in rails[i] if v != seg[1]]
            segs.append(seg)
        outcome = b.fuse(segs[0][2], segs[1][2])
        for i in (0, 1):
            rails[i] = [v for v in rails[i] if v != segs[i][2]]
        if outcome.success:
            rungs.append(outcome.merged)
            cursors = [rails[i].index(segs[i][0]) for i in (0, 1)]
            added += 1
    return b.finish(name, {"rails": rails, "cursors": cursors, "rungs": rungs})


def grow_depth(
    h: RecipeResult,
    new_chain: GraphState,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Adjoin a parallel chain to the outer side of an H or ladder.

    The outer rail hosts an L on its next free segment, the new chain
    hosts one of its own, and the arms fuse into a rung; the result is
    one chain deeper.  Failures shorten both hosts and retry.
    """
    rails, cursors, rungs = _rail_state(h)
    b = _Builder.resume(h, rng, forced)
    b.merge_step(new_chain)
    outer = len(rails) - 1
    new_path = path_vertices(new_chain)
    while True:
        c = cursors[outer]
        if len(rails[outer]) < c + 5:
            raise _exhaust(b, "depth", {"rails": rails, "cursors": cursors, "rungs": rungs})
        seg_r = tuple(rails[outer][c + 1 : c + 5])
        seg_n = _l_segment(new_path)
        if seg_n is None:
            raise _exhaust(b, "depth", {"rails": rails, "cursors": cursors, "rungs": rungs})
        b.box(seg_r)
        b.zmeas(seg_r[1])
        rails[outer] = [v for v in rails[outer] if v != seg_r[1]]
        b.box(seg_n)
        b.zmeas(seg_n[1])
        new_path = [v for v in new_path if v != seg_n[1]]
        outcome = b.fuse(seg_r[2], seg_n[2])
        rails[outer] = [v for v in rails[outer] if v != seg_r[2]]
        new_path = [v for v in new_path if v != seg_n[2]]
        if outcome.success:
            rungs.append(outcome.merged)
            cursors[outer] = rails[outer].index(seg_r[0])
            rails.append(new_path)
            cursors.append(new_path.index(seg_n[0]))
            return b.finish(
                "depth", {"rails": rails, "cursors": cursors, "rungs": rungs}
            )


# -- double-box joining pipeline ---------------------------------------------


def join_double_boxes(
    x: RecipeResult,
    y: RecipeResult,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Attempt to weld two double boxes into a two-rung block.

    Fuses x's hub-side wing corners with y's, in id order: first
    (x_start+1, y_start), then (x_start+6, y_start+5).  Both corners
    have degree 2, so this uses the generalized fusion rule (validated
    against the dense oracle in the tests).  A first-fusion failure
    stops immediately; salvage the remnant with
    :func:`salvage_failed_join`.  A second-fusion failure leaves the
    one-rung remnant that :func:`close_second_rung` repairs.
    """
    for r, what in ((x, "x"), (y, "y")):
        if "start" not in r.annotations:
            raise ValueError(f"{what} does not look like a double-box result")
    sx = x.annotations["start"]
    sy = y.annotations["start"]
    b = _Builder(x.graph, rng, forced, initial=x.initial, frame=x.frame,
                 ledger=x.ledger, trace=x.trace)
    b.absorb(y)
    outcomes = []
    rungs = []
    first = b.fuse(sx + 1, sy, allow_nonleaf=True)
    outcomes.append("S" if first.success else "F")
    if first.success:
        rungs.append(first.merged)
        second = b.fuse(sx + 6, sy + 5, allow_nonleaf=True)
        outcomes.append("S" if second.success else "F")
        if second.success:
            rungs.append(second.merged)
    return b.finish("join", {"join_outcomes": outcomes, "rungs": rungs})


def close_second_rung(
    d: RecipeResult,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Finish a one-rung join remnant into the two-rung block.

    Fuse the remnant's two leaves; on success the two in-between
    connector qubits come out by Y measurements (leaving S corrections
    on their neighbors), which bends the merged path into the second
    rung.  If that fusion fails, the connectors themselves are now
    leaves and one more fusion attempt closes the same rung directly.
    If both fail, the survivor is again double-box-shaped.
    """
    leaves = sorted(v for v in d.graph.vertices if d.graph.degree(v) == 1)
    if len(leaves) != 2:
        raise ValueError("result does not look like a one-rung join remnant")
    la, lb = leaves
    connectors = sorted({next(iter(d.graph.neighbors(v))) for v in leaves})
    b = _Builder.resume(d, rng, forced)
    outcomes = []
    first = b.fuse(la, lb)
    outcomes.append("S" if first.success else "F")
    if first.success:
        for v in connectors:
            b.ymeas(v)
    else:
        second = b.fuse(connectors[0], connectors[1])
        outcomes.append("S" if second.success else "F")
    return b.finish("close-rung", {"close_outcomes": outcomes})


def _salvage_targets(g: GraphState, component: frozenset[int]) -> tuple[int, int]:
    """Locate (opposite corner, tail vertex) in a broken double box.

    The component keeps one intact 4-cycle whose far corner is the
    common second neighbor of the hub's two cycle neighbors; the third
    hub neighbor starts the leftover two-vertex tail.
    """
    hubs = [v for v in component if g.degree(v) == 3]
    if len(hubs) != 1:
        raise ValueError("remnant component lacks a unique degree-3 hub")
    hub = hubs[0]
    nbrs = sorted(g.neighbors(hub))
    for i in range(len(nbrs)):
        for j in range(i + 1, len(nbrs)):
            a, b = nbrs[i], nbrs[j]
            others_a = g.neighbors(a) - {hub}
            others_b = g.neighbors(b) - {hub}
            common = others_a & others_b
            if len(common) == 1:
                (corner,) = common
                (tail,) = set(nbrs) - {a, b}
                return corner, tail
    raise ValueError("remnant component has no intact box cycle")


def salvage_failed_join(
    remnant: RecipeResult,
    second: RecipeResult | None = None,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Recover a double box from the debris of a failed first join fusion.

    The debris holds two components, each a box cycle with a dangling
    two-vertex tail; pass them as one two-component result or as two
    separate ones.  Fusing the two far corners and Z-measuring the tail
    roots (their leaves float off for free) rebuilds one
    double-box-shaped cluster at 4 bonds on success.  Failure costs 4
    bonds and leaves the shortened remnants.
    """
    b = _Builder.resume(remnant, rng, forced)
    if second is not None:
        b.absorb(second)
    comps = b.graph.connected_components()
    if len(comps) != 2:
        raise ValueError("expected exactly two remnant components")
    comps = sorted(comps, key=min)
    (corner_a, tail_a) = _salvage_targets(b.graph, comps[0])
    (corner_b, tail_b) = _salvage_targets(b.graph, comps[1])
    outcome = b.fuse(corner_a, corner_b, allow_nonleaf=True)
    if outcome.success:
        b.zmeas(tail_a)
        b.zmeas(tail_b)
        b.drop_isolated()
    return b.finish(
        "salvage", {"salvage_outcome": "S" if outcome.success else "F"}
    )


# -- ring and rung utilities --------------------------------------------------

RING8_HADAMARDS = (1, 4, 5, 8)
RING8_SWAPS = ((1, 5), (4, 8))


def build_ring8(
    g: GraphState,
    *,
    rng: RngStream | None = None,
    forced=None,
) -> RecipeResult:
    """Close a 9-chain into an 8-ring, then flatten it by local rewrites.

    The end leaves fuse (one attempt); failure Z-deletes both ends and
    returns the leftover 7-chain at 2 bonds.  On success the ring is
    relabeled to 1..8 and Hadamards on {1,4,5,8} plus the label swaps
    (1 5)(4 8) are applied through the tableau, with the resulting
    graph and frame extracted exactly.
    """
    p = _consecutive_path(g, 9, "ring build")
    s = p[0]
    b = _Builder(g, rng, forced)
    outcome = b.fuse(s, s + 8)
    if not outcome.success:
        return b.finish("ring8", {"closed": False})
    ring_order = list(range(s + 1, s + 8)) + [outcome.merged]
    b.relabel({v: i + 1 for i, v in enumerate(ring_order)})
    b.tableau_rewrite(RING8_HADAMARDS, RING8_SWAPS)
    return b.finish("ring8", {"closed": True})


def nodeless_rung(g: GraphState, v: int) -> RecipeResult:
    """Remove a 2-degree rung qubit, bonding its neighbors directly.

    A Y measurement on v toggles the edge between its two neighbors and
    deletes v: the two-edge rung becomes a single bond at a cost of 2,
    leaving S corrections on both neighbors.
    """
    if g.degree(v) != 2:
        raise ValueError(f"nodeless rung needs a degree-2 vertex, got degree {g.degree(v)}")
    b = _Builder(g)
    b.ymeas(v)
    return b.finish("nodeless-rung", {"bonded": sorted(b.frame)})


# -- serialization and replay --------------------------------------------------


def _graph_doc(g: GraphState) -> dict:
    return {
        "vertices": g.sorted_vertices(),
        "edges": [list(e) for e in g.sorted_edges()],
    }


def _graph_from_doc(doc: dict) -> GraphState:
    return GraphState(
        frozenset(doc["vertices"]),
        frozenset((u, v) for u, v in doc["edges"]),
    )


def trace_ledger(trace: Iterable[Mapping]) -> CostLedger:
    """Reconstruct the total ledger from a trace's per-step deltas."""
    total = CostLedger()
    for step in trace:
        op = step["op"]
        if op in ("measure_z", "measure_y"):
            total += CostLedger(bonds_consumed=step["bonds"], qubits_consumed=1)
        elif op == "fuse":
            success = step["outcome"] == "S"
            total += CostLedger(
                bonds_consumed=step["bonds"],
                qubits_consumed=1 if success else 2,
                fusion_attempts=1,
                fusion_successes=1 if success else 0,
            )
        elif op == "drop_isolated":
            total += CostLedger(qubits_consumed=len(step["vertices"]))
    return total


def result_to_doc(result: RecipeResult) -> dict:
    return {
        "name": result.name,
        "graph": _graph_doc(result.graph),
        "frame": {str(v): lab for v, lab in sorted(result.frame.items())},
        "ledger": result.ledger.to_dict(),
        "trace": [dict(step) for step in result.trace],
        "initial": _graph_doc(result.initial),
        "annotations": result.annotations,
    }


def result_to_json(result: RecipeResult) -> str:
    """Canonical byte-stable JSON for a RecipeResult."""
    return json.dumps(result_to_doc(result), sort_keys=True, separators=(",", ":"))


def result_from_doc(doc: dict) -> RecipeResult:
    return RecipeResult(
        name=doc["name"],
        graph=_graph_from_doc(doc["graph"]),
        frame={int(v): lab for v, lab in doc.get("frame", {}).items()},
        ledger=CostLedger.from_dict(doc["ledger"]),
        trace=tuple(dict(step) for step in doc["trace"]),
        initial=_graph_from_doc(doc["initial"]),
        annotations=doc.get("annotations", {}),
    )


def replay(doc: dict | str) -> RecipeResult:
    """Re-execute a serialized trace against its recorded starting graph.

    Fusion steps replay their recorded outcomes without consuming
    randomness, so the reconstruction is bit-exact; recorded merge ids
    and bond counts are re-checked along the way.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    b = _Builder(_graph_from_doc(doc["initial"]))
    for step in doc["trace"]:
        op = step["op"]
        if op == "box":
            b.box(tuple(step["segment"]))
        elif op == "measure_z":
            b.zmeas(step["vertex"])
        elif op == "measure_y":
            b.ymeas(step["vertex"])
        elif op == "fuse":
            outcome = b.fuse(
                step["a"],
                step["b"],
                allow_nonleaf=step.get("allow_nonleaf", False),
                _replay=step["outcome"],
            )
            if outcome.merged != step.get("merged") or (
                b.trace[-1]["bonds"] != step["bonds"]
            ):
                raise ValueError("trace does not replay: fusion step mismatch")
        elif op == "merge":
            b.merge_step(
                GraphState(
                    frozenset(step["vertices"]),
                    frozenset((u, v) for u, v in step["edges"]),
                )
            )
        elif op == "relabel":
            b.relabel({int(k): v for k, v in step["mapping"].items()})
        elif op == "drop_isolated":
            dropped = b.drop_isolated()
            if dropped != list(step["vertices"]):
                raise ValueError("trace does not replay: dropped vertices mismatch")
        elif op == "tableau_rewrite":
            b.tableau_rewrite(
                step["hadamards"], [tuple(p) for p in step["swaps"]]
            )
        else:
            raise ValueError(f"unknown trace op: {op!r}")
    return b.finish(doc["name"], doc.get("annotations", {}))
