"""Labeled graphs and the node-matching edit model.

A binary matching between the node sets of two graphs induces an edit
script (relabels, node insertions, edge deletions, edge insertions) that
rewrites the first graph into the second.  Every operation costs one unit,
so the script length of the best matching is the graph edit distance.  The
model requires the first graph to be the one with fewer nodes: every node
of the first graph is matched somewhere, and leftover nodes of the second
graph are inserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OrientationError(ValueError):
    """A pair or matching arrived larger-graph-first."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph with interned integer node labels.

    Nodes are ``0 .. node_count - 1``.  Labels are non-negative ids; the
    mapping back to label strings lives with the corpus, not here.  Edges
    are a frozenset of ``(lo, hi)`` pairs with ``lo < hi``, so self loops
    and duplicates cannot be represented.
    """

    labels: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        n = len(self.labels)
        if n == 0:
            raise ValueError("graph needs at least one node")
        if any(lab < 0 for lab in self.labels):
            raise ValueError("negative label id")
        for a, b in self.edges:
            if not (0 <= a < b < n):
                raise ValueError(f"bad edge ({a}, {b}) in a {n}-node graph")

    @staticmethod
    def make(labels, edges) -> "Graph":
        """Build a graph, normalizing edge endpoint order.

        Rejects duplicate edges instead of silently collapsing them.
        """
        pairs = [(min(int(a), int(b)), max(int(a), int(b))) for a, b in edges]
        norm = frozenset(pairs)
        if len(pairs) != len(norm):
            raise ValueError("duplicate edge")
        return Graph(tuple(int(x) for x in labels), norm)

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.node_count, self.node_count))
        for a, b in self.edges:
            adj[a, b] = 1.0
            adj[b, a] = 1.0
        return adj

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True, eq=False)
class NodeMatching:
    """Binary assignment of every row node to a distinct column node.

    ``entries[v, u] == 1`` matches node ``v`` of the smaller graph to node
    ``u`` of the larger one.  A valid matching has exactly one 1 per row
    and at most one per column, which is only satisfiable when
    ``rows <= cols``.
    """

    entries: np.ndarray

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def mapping(self) -> np.ndarray:
        """Column matched to each row.  Meaningful only for valid matchings."""
        return np.argmax(self.entries, axis=1)

    @staticmethod
    def from_mapping(mapping, cols: int) -> "NodeMatching":
        entries = np.zeros((len(mapping), int(cols)), dtype=np.int8)
        for v, u in enumerate(mapping):
            entries[v, int(u)] = 1
        return NodeMatching(entries)


@dataclass(frozen=True)
class MatchingReport:
    """Outcome of validate_matching: offending rows and columns, if any."""

    ok: bool
    bad_rows: tuple[int, ...]
    bad_cols: tuple[int, ...]


def validate_matching(m: NodeMatching) -> MatchingReport:
    """Check the assignment constraints.

    Shape problems (non-2-d entries, more rows than columns, non-binary
    values) raise; constraint violations come back in the report so callers
    can point at the offending rows and columns.
    """
    e = np.asarray(m.entries)
    if e.ndim != 2:
        raise ValueError("matching entries must be a 2-d array")
    rows, cols = e.shape
    if rows > cols:
        raise OrientationError(f"matching has more rows than columns ({rows} > {cols})")
    if not np.isin(e, (0, 1)).all():
        raise ValueError("matching entries must be 0 or 1")
    bad_rows = tuple(int(i) for i in np.flatnonzero(e.sum(axis=1) != 1))
    bad_cols = tuple(int(j) for j in np.flatnonzero(e.sum(axis=0) > 1))
    return MatchingReport(not bad_rows and not bad_cols, bad_rows, bad_cols)


def orient_pair(g1: Graph, g2: Graph) -> tuple[Graph, Graph, bool]:
    """Order a pair smaller-graph-first; ties keep the given order.

    Returns ``(small, large, swapped)``.
    """
    if g1.node_count > g2.node_count:
        return g2, g1, True
    return g1, g2, False


@dataclass(frozen=True)
class EditPath:
    """Ordered unit-cost edit script rewriting one graph into another.

    ``ops`` entries are tuples:

    * ``("relabel", node, new_label)``
    * ``("insert_node", new_label)`` -- the node gets the next free index
    * ``("delete_edge", a, b)``
    * ``("insert_edge", a, b)``

    ``mapping[i]`` is the target-graph node that node ``i`` of the rewritten
    source graph corresponds to, covering original and inserted nodes; it is
    a bijection once the script has run.
    """

    ops: tuple[tuple, ...]
    mapping: tuple[int, ...]

    @property
    def total_cost(self) -> int:
        return len(self.ops)


def _checked_mapping(g1: Graph, g2: Graph, m: NodeMatching) -> np.ndarray:
    report = validate_matching(m)
    if not report.ok:
        raise ValueError(
            f"invalid matching: rows {report.bad_rows} do not sum to 1, "
            f"columns {report.bad_cols} exceed 1"
        )
    if (g1.node_count, g2.node_count) != (m.rows, m.cols):
        raise ValueError(
            f"matching shape {(m.rows, m.cols)} does not fit pair "
            f"{(g1.node_count, g2.node_count)}"
        )
    return m.mapping()


def derive_edit_path(g1: Graph, g2: Graph, m: NodeMatching) -> EditPath:
    """Translate a node matching into an explicit edit script.

    Pass 1 walks the nodes of ``g2`` in index order: a matched node with a
    differing label emits a relabel, an unmatched one emits an insertion and
    extends the mapping.  Pass 2 compares edges through the now-complete
    mapping: edges of ``g1`` with no counterpart in ``g2`` are deleted, then
    edges of ``g2`` with no counterpart are inserted.
    """
    mapping = list(int(u) for u in _checked_mapping(g1, g2, m))
    n1, n2 = g1.node_count, g2.node_count
    matched_cols = {u: v for v, u in enumerate(mapping)}

    ops: list[tuple] = []
    for u in range(n2):
        v = matched_cols.get(u)
        if v is None:
            ops.append(("insert_node", g2.labels[u]))
            mapping.append(u)
        elif g1.labels[v] != g2.labels[u]:
            ops.append(("relabel", v, g2.labels[u]))

    # mapping is now a bijection onto the nodes of g2
    inverse = [0] * n2
    for i, u in enumerate(mapping):
        inverse[u] = i

    for a, b in g1.sorted_edges():
        if not g2.has_edge(mapping[a], mapping[b]):
            ops.append(("delete_edge", a, b))
    for ua, ub in g2.sorted_edges():
        a, b = inverse[ua], inverse[ub]
        if a < n1 and b < n1 and g1.has_edge(a, b):
            continue
        ops.append(("insert_edge", min(a, b), max(a, b)))

    return EditPath(tuple(ops), tuple(mapping))


def edit_cost(g1: Graph, g2: Graph, m: NodeMatching) -> int:
    """Edit script length of a matching, without materializing the script.

    Counts label mismatches among matched nodes, one insertion per
    unmatched node of ``g2``, and the symmetric difference of the edge sets
    under the mapping.
    """
    mapping = _checked_mapping(g1, g2, m)
    relabels = int(sum(g1.labels[v] != g2.labels[int(mapping[v])] for v in range(g1.node_count)))
    common = sum(1 for a, b in g1.edges if g2.has_edge(int(mapping[a]), int(mapping[b])))
    inserts = g2.node_count - g1.node_count
    return relabels + inserts + (g1.edge_count - common) + (g2.edge_count - common)


def apply_edit_path(g1: Graph, path: EditPath) -> Graph:
    """Run an edit script against a graph and return the rewritten graph."""
    labels = list(g1.labels)
    edges = set(g1.edges)
    for op in path.ops:
        kind = op[0]
        if kind == "relabel":
            _, v, lab = op
            if not 0 <= v < len(labels):
                raise ValueError(f"relabel of missing node {v}")
            labels[v] = lab
        elif kind == "insert_node":
            labels.append(op[1])
        elif kind == "delete_edge":
            _, a, b = op
            key = (min(a, b), max(a, b))
            if key not in edges:
                raise ValueError(f"delete of missing edge {key}")
            edges.remove(key)
        elif kind == "insert_edge":
            _, a, b = op
            if not (0 <= a < len(labels) and 0 <= b < len(labels)) or a == b:
                raise ValueError(f"bad edge insertion ({a}, {b})")
            key = (min(a, b), max(a, b))
            if key in edges:
                raise ValueError(f"insert of existing edge {key}")
            edges.add(key)
        else:
            raise ValueError(f"unknown edit op {kind!r}")
    return Graph(tuple(labels), frozenset(edges))


def is_isomorphic_under(ga: Graph, gb: Graph, mapping) -> bool:
    """Does ``mapping`` (node index bijection) carry ``ga`` exactly onto ``gb``?"""
    mapping = [int(u) for u in mapping]
    if ga.node_count != gb.node_count or len(mapping) != ga.node_count:
        return False
    if sorted(mapping) != list(range(gb.node_count)):
        return False
    if any(ga.labels[v] != gb.labels[mapping[v]] for v in range(ga.node_count)):
        return False
    carried = {(min(mapping[a], mapping[b]), max(mapping[a], mapping[b])) for a, b in ga.edges}
    return carried == set(gb.edges)


def greedy_decode(probabilities: np.ndarray) -> NodeMatching:
    """Decode scores to a matching: repeatedly take the largest cell.

    Ties go to the first cell in row-major order.  Each pick fixes one row
    and retires its column, so the result is a valid matching after exactly
    ``rows`` picks.  Adding a constant to all scores cannot change the
    outcome.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError("expected a 2-d score array")
    rows, cols = p.shape
    if rows > cols:
        raise OrientationError(f"score array has more rows than columns ({rows} > {cols})")
    if not np.isfinite(p).all():
        raise ValueError("scores must be finite")
    work = p.copy()
    entries = np.zeros((rows, cols), dtype=np.int8)
    for _ in range(rows):
        v, u = divmod(int(np.argmax(work)), cols)
        entries[v, u] = 1
        work[v, :] = -np.inf
        work[:, u] = -np.inf
    return NodeMatching(entries)
