"""Synthetic corpora: random connected graphs, edit-budget pairs, splits.

A corpus is two JSON-lines files.  graphs.jsonl holds one graph per line
with an id and a split tag; pairs.jsonl holds one pair record per line.
Small pairs carry exact oracle labels with an optimal matching; pairs
built by editing a source graph carry the edit budget as an approximate
label, which upper-bounds the true distance because every charged
operation is a real edit.  Output is byte-reproducible for a fixed
config: every random draw comes from a stream derived from the seed, and
all candidate sets are enumerated in sorted order before sampling.
"""

import heapq
import json
import os
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, orient_pair
from .oracle import exact_ged
from .seeding import TAG_DATA, derive

SPLITS = ("train", "val", "test", "aux")
KINDS = ("exact", "delta-approx", "none")


@dataclass(frozen=True)
class CorpusConfig:
    n_graphs: int
    max_nodes: int
    num_labels: int
    density: float = 0.3
    partners: int = 100
    oracle_limit: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_graphs < 5:
            raise ValueError("need at least 5 graphs for a 60/20/20 split")
        if self.max_nodes < 2:
            raise ValueError("max_nodes must be at least 2")
        if self.num_labels < 1:
            raise ValueError("num_labels must be positive")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density outside [0, 1]")
        if self.partners < 1 or self.oracle_limit < 1:
            raise ValueError("partners and oracle_limit must be positive")


@dataclass(frozen=True)
class GraphEntry:
    id: int
    graph: Graph
    split: str


@dataclass(frozen=True)
class PairRecord:
    """One labeled (or unlabeled) oriented pair.

    ``g1`` always names the smaller graph.  ``mapping`` is the oracle's
    optimal row-to-column assignment for exact labels, else None.
    ``query`` groups validation and test pairs by their query graph for
    ranking metrics.
    """

    g1: int
    g2: int
    kind: str
    ged: int | None = None
    mapping: tuple[int, ...] | None = None
    split: str = "train"
    query: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.kind == "none" and self.ged is not None:
            raise ValueError("unlabeled pair carries a label")
        if self.kind != "none" and self.ged is None:
            raise ValueError("labeled pair missing its label")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random labeled tree decoded from a Pruefer sequence."""
    if n <= 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for s in seq:
        degree[s] += 1
    leaves = [int(v) for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(s)))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, int(s))
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def random_graph(n: int, density: float, num_labels: int,
                 rng: np.random.Generator) -> Graph:
    """Connected labeled graph: random spanning tree plus density edges."""
    if n < 1:
        raise ValueError("graph needs at least one node")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density outside [0, 1]")
    if num_labels < 1:
        raise ValueError("num_labels must be positive")
    labels = rng.integers(0, num_labels, size=n).tolist()
    tree = set(_random_tree_edges(n, rng))
    tree = {(min(a, b), max(a, b)) for a, b in tree}
    rest = [(a, b) for a in range(n) for b in range(a + 1, n)
            if (a, b) not in tree]
    keep = rng.random(len(rest)) < density
    edges = sorted(tree) + [e for e, k in zip(rest, keep) if k]
    return Graph.make(labels, edges)


def draw_delta(n_nodes: int, rng: np.random.Generator) -> int:
    """Edit budget for a synthetic pair; wider range for bigger graphs."""
    top = 10 if n_nodes > 20 else 5
    return int(rng.integers(1, top + 1))


def synthesize_pair(g: Graph, delta: int, rng: np.random.Generator,
                    num_labels: int | None = None) -> Graph:
    """Apply exactly ``delta`` unit edits to a copy of ``g``.

    Operations are node insert, node delete, edge insert, edge delete,
    and relabel, drawn uniformly among the currently feasible kinds.
    Deleting a node first deletes its incident edges and charges one
    unit per edge, so the budget is an honest operation count and the
    true distance to the result never exceeds ``delta``.
    """
    if delta < 0:
        raise ValueError("edit budget must be non-negative")
    if num_labels is None:
        num_labels = max(g.labels) + 1
    elif max(g.labels) >= num_labels:
        raise ValueError("graph labels fall outside the alphabet")
    labels = {v: lab for v, lab in enumerate(g.labels)}
    edges = {(min(a, b), max(a, b)) for a, b in g.sorted_edges()}
    next_id = g.node_count
    budget = delta
    while budget > 0:
        degree = {v: 0 for v in labels}
        for a, b in edges:
            degree[a] += 1
            degree[b] += 1
        deletable = [v for v in sorted(labels)
                     if 1 + degree[v] <= budget and len(labels) > 1]
        live = sorted(labels)
        non_edges = [(a, b) for i, a in enumerate(live) for b in live[i + 1:]
                     if (a, b) not in edges]
        ops = ["node-insert"]
        if deletable:
            ops.append("node-delete")
        if non_edges:
            ops.append("edge-insert")
        if edges:
            ops.append("edge-delete")
        if num_labels >= 2:
            ops.append("relabel")
        op = ops[int(rng.integers(len(ops)))]
        if op == "node-insert":
            labels[next_id] = int(rng.integers(num_labels))
            next_id += 1
            budget -= 1
        elif op == "node-delete":
            v = deletable[int(rng.integers(len(deletable)))]
            incident = [e for e in edges if v in e]
            for e in incident:
                edges.discard(e)
                budget -= 1
            del labels[v]
            budget -= 1
        elif op == "edge-insert":
            edges.add(non_edges[int(rng.integers(len(non_edges)))])
            budget -= 1
        elif op == "edge-delete":
            pick = sorted(edges)[int(rng.integers(len(edges)))]
            edges.discard(pick)
            budget -= 1
        else:
            v = live[int(rng.integers(len(live)))]
            # uniform over the other labels
            shift = int(rng.integers(num_labels - 1))
            labels[v] = shift if shift < labels[v] else shift + 1
            budget -= 1
    order = sorted(labels)
    index = {v: i for i, v in enumerate(order)}
    return Graph.make([labels[v] for v in order],
                      [(index[a], index[b]) for a, b in sorted(edges)])


# ---------------------------------------------------------------------------
# corpus assembly
# ---------------------------------------------------------------------------

def _oriented_record(entries, i, j, **fields) -> PairRecord:
    _, _, swapped = orient_pair(entries[i].graph, entries[j].graph)
    if swapped:
        i, j = j, i
    return PairRecord(g1=i, g2=j, **fields)


def _exact_record(entries, i, j, limit, **fields) -> PairRecord:
    # orient before solving so the stored mapping is row-to-column of the
    # oriented pair
    _, _, swapped = orient_pair(entries[i].graph, entries[j].graph)
    if swapped:
        i, j = j, i
    ged, matching = exact_ged(entries[i].graph, entries[j].graph, limit)
    return PairRecord(g1=i, g2=j, kind="exact", ged=ged,
                      mapping=tuple(int(c) for c in matching.mapping()),
                      **fields)


def build_corpus(config: CorpusConfig, out_dir) -> tuple[list[GraphEntry], list[PairRecord]]:
    """Generate graphs, split them, label pairs, write both files.

    Training: small graphs (within the oracle limit) are all paired with
    each other and labeled exactly; each larger graph gets one edited
    partner labeled with its edit budget.  Validation and test: every
    graph becomes a query with ``config.partners`` partners, drawn from
    the small training graphs when the query itself is small (exact
    labels), topped up with edited copies of the query otherwise.
    """
    entries: list[GraphEntry] = []
    sizes = []
    for i in range(config.n_graphs):
        rng = derive(config.seed, TAG_DATA, 0, i)
        n = int(rng.integers(2, config.max_nodes + 1))
        sizes.append(n)
        entries.append(GraphEntry(i, random_graph(n, config.density,
                                                  config.num_labels, rng),
                                  "train"))

    order = derive(config.seed, TAG_DATA, 1).permutation(config.n_graphs)
    n_train = int(config.n_graphs * 0.6)
    n_val = int(config.n_graphs * 0.2)
    split_of = {}
    for rank, i in enumerate(order):
        if rank < n_train:
            split_of[int(i)] = "train"
        elif rank < n_train + n_val:
            split_of[int(i)] = "val"
        else:
            split_of[int(i)] = "test"
    entries = [GraphEntry(e.id, e.graph, split_of[e.id]) for e in entries]

    def add_synth(source: GraphEntry, rng) -> int:
        delta = draw_delta(source.graph.node_count, rng)
        partner = synthesize_pair(source.graph, delta, rng, config.num_labels)
        entries.append(GraphEntry(len(entries), partner, "aux"))
        return delta

    records: list[PairRecord] = []
    train_ids = sorted(i for i in split_of if split_of[i] == "train")
    small_train = [i for i in train_ids
                   if entries[i].graph.node_count <= config.oracle_limit]
    for pos, i in enumerate(small_train):
        for j in small_train[pos + 1:]:
            records.append(_exact_record(entries, i, j, config.oracle_limit,
                                         split="train"))
    for q in train_ids:
        if entries[q].graph.node_count <= config.oracle_limit:
            continue
        rng = derive(config.seed, TAG_DATA, 2, q)
        delta = add_synth(entries[q], rng)
        records.append(_oriented_record(entries, q, len(entries) - 1,
                                        kind="delta-approx", ged=delta,
                                        split="train"))

    for split in ("val", "test"):
        for q in sorted(i for i in split_of if split_of[i] == split):
            rng = derive(config.seed, TAG_DATA, 3, q)
            n_exact = 0
            if entries[q].graph.node_count <= config.oracle_limit:
                chosen = rng.permutation(small_train)[:config.partners]
                n_exact = len(chosen)
                for p in chosen:
                    records.append(_exact_record(entries, q, int(p),
                                                 config.oracle_limit,
                                                 split=split, query=q))
            for _ in range(config.partners - n_exact):
                delta = add_synth(entries[q], rng)
                records.append(_oriented_record(entries, q, len(entries) - 1,
                                                kind="delta-approx", ged=delta,
                                                split=split, query=q))

    write_corpus(out_dir, entries, records)
    return entries, records


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_corpus(out_dir, entries, records) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "graphs.jsonl"), "w") as sink:
        for e in entries:
            sink.write(_dump({
                "id": e.id,
                "labels": list(e.graph.labels),
                "edges": [list(edge) for edge in e.graph.sorted_edges()],
                "split": e.split,
            }) + "\n")
    with open(os.path.join(out_dir, "pairs.jsonl"), "w") as sink:
        for r in records:
            sink.write(_dump({
                "g1": r.g1,
                "g2": r.g2,
                "kind": r.kind,
                "ged": r.ged,
                "mapping": list(r.mapping) if r.mapping is not None else None,
                "split": r.split,
                "query": r.query,
            }) + "\n")


def read_graphs(path) -> list[GraphEntry]:
    entries = []
    with open(path) as source:
        for line in source:
            raw = json.loads(line)
            entries.append(GraphEntry(raw["id"],
                                      Graph.make(raw["labels"],
                                                 [tuple(e) for e in raw["edges"]]),
                                      raw["split"]))
    entries.sort(key=lambda e: e.id)
    return entries


def read_pairs(path) -> list[PairRecord]:
    records = []
    with open(path) as source:
        for line in source:
            raw = json.loads(line)
            mapping = raw.get("mapping")
            records.append(PairRecord(
                g1=raw["g1"], g2=raw["g2"], kind=raw["kind"],
                ged=raw.get("ged"),
                mapping=tuple(mapping) if mapping is not None else None,
                split=raw.get("split", "train"), query=raw.get("query")))
    return records


def read_corpus(dir_path) -> tuple[list[GraphEntry], list[PairRecord]]:
    return (read_graphs(os.path.join(dir_path, "graphs.jsonl")),
            read_pairs(os.path.join(dir_path, "pairs.jsonl")))


def corpus_num_labels(entries) -> int:
    return 1 + max(max(e.graph.labels) for e in entries)


def training_pairs(entries, records) -> list[tuple[Graph, Graph]]:
    """Oriented graph tuples for every training pair record."""
    by_id = {e.id: e.graph for e in entries}
    return [(by_id[r.g1], by_id[r.g2]) for r in records if r.split == "train"]
