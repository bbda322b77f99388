"""Command-line surface: corpus synthesis, training, decoding, scoring.

Pair files are JSON lines and always travel with a ``graphs.jsonl``
sibling in the same directory; prediction and oracle outputs are JSON
lines keyed by graph ids so they can be joined back against any pair
file.  Exit codes: 0 on success, 2 on bad input, 1 on runtime failure.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import replace

from .data import (CorpusConfig, build_corpus, corpus_num_labels,
                   read_graphs, read_pairs, training_pairs)
from .graphs import NodeMatching, OrientationError, edit_cost
from .metrics import compute_metrics, decode_pairs
from .nets import CheckpointError
from .oracle import SizeLimitError, assignment_baseline, exact_ged
from .trainer import TrainConfig, checkpoint, init_state, restore, train

SPLITS = ("all", "train", "val", "test", "aux")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _open_out(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w")


def _load_pair_file(path):
    """Read a pairs.jsonl plus the graphs.jsonl sitting next to it."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"no pair file at {path}")
    graphs_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                               "graphs.jsonl")
    if not os.path.exists(graphs_path):
        raise FileNotFoundError(f"expected graph file next to pairs: "
                                f"{graphs_path}")
    return read_graphs(graphs_path), read_pairs(path)


def _select(records, split):
    if split == "all":
        return list(records)
    return [r for r in records if r.split == split]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_data(args) -> int:
    config = CorpusConfig(n_graphs=args.graphs, max_nodes=args.max_nodes,
                          num_labels=args.labels, density=args.density,
                          partners=args.partners,
                          oracle_limit=args.oracle_limit, seed=args.seed)
    entries, records = build_corpus(config, args.out)
    counts = {}
    for r in records:
        counts[r.split] = counts.get(r.split, 0) + 1
    per_split = " ".join(f"{s}={counts.get(s, 0)}"
                         for s in ("train", "val", "test", "aux"))
    print(f"wrote {len(entries)} graphs, {len(records)} pairs "
          f"({per_split}) to {args.out}")
    return 0


def cmd_oracle(args) -> int:
    entries, records = _load_pair_file(args.pairs)
    by_id = {e.id: e.graph for e in entries}
    chosen = _select(records, args.split)
    if not chosen:
        raise ValueError(f"no pairs in split {args.split!r}")
    labeled = 0
    skipped = 0
    with _open_out(args.out) as sink:
        for r in chosen:
            g1, g2 = by_id[r.g1], by_id[r.g2]
            # pairs are stored oriented, so g2 is the larger side
            if g2.node_count > args.limit:
                skipped += 1
                continue
            started = time.perf_counter()
            ged, matching = exact_ged(g1, g2, node_limit=args.limit)
            sink.write(_dump({
                "g1": r.g1,
                "g2": r.g2,
                "ged": ged,
                "mapping": [int(c) for c in matching.mapping()],
                "seconds": time.perf_counter() - started,
            }) + "\n")
            labeled += 1
    print(f"solved {labeled} pairs exactly ({skipped} beyond "
          f"{args.limit} nodes) -> {args.out}")
    return 0


def cmd_baseline(args) -> int:
    entries, records = _load_pair_file(args.pairs)
    by_id = {e.id: e.graph for e in entries}
    chosen = _select(records, args.split)
    if not chosen:
        raise ValueError(f"no pairs in split {args.split!r}")
    with _open_out(args.out) as sink:
        for r in chosen:
            g1, g2 = by_id[r.g1], by_id[r.g2]
            started = time.perf_counter()
            estimate, matching = assignment_baseline(g1, g2)
            sink.write(_dump({
                "g1": r.g1,
                "g2": r.g2,
                "pred": estimate,
                "mapping": [int(c) for c in matching.mapping()],
                "seconds": time.perf_counter() - started,
            }) + "\n")
    print(f"estimated {len(chosen)} pairs -> {args.out}")
    return 0


def cmd_train(args) -> int:
    entries, records = _load_pair_file(args.pairs)
    pairs = training_pairs(entries, records)
    if args.resume is not None:
        state = restore(args.resume)
        if args.epochs < state.epoch:
            raise ValueError(f"checkpoint is already past epoch "
                             f"{args.epochs} (at {state.epoch})")
        # hyperparameters come from the checkpoint; only the horizon moves
        config = replace(state.config, epochs=args.epochs)
        state.config = config
    else:
        config = TrainConfig(variant=args.variant,
                             steps_total=args.steps_total,
                             reverse_hops=args.hops,
                             sinkhorn_iters=args.sinkhorn_iters,
                             sinkhorn_tau=args.tau,
                             candidates=args.candidates,
                             batch_size=args.batch,
                             epochs=args.epochs,
                             anneal_epochs=args.anneal,
                             lr=args.lr,
                             weight_decay=args.weight_decay,
                             seed=args.seed)
        state = init_state(pairs, config,
                           num_labels=corpus_num_labels(entries))
    history_path = args.history
    if history_path is None:
        history_path = os.path.splitext(args.out)[0] + ".history.jsonl"
    state, history = train(pairs, config, state=state,
                           history_path=history_path)
    checkpoint(state, args.out)
    tail = history[-1] if history else None
    if tail is not None:
        print(f"trained {config.variant} on {len(pairs)} pairs to epoch "
              f"{state.epoch}; mean best cost {tail['mean_best_cost']:.3f}")
    else:
        print(f"nothing to do: checkpoint already at epoch {state.epoch}")
    print(f"checkpoint -> {args.out}")
    print(f"history -> {history_path}")
    return 0


def cmd_decode(args) -> int:
    state = restore(args.ckpt)
    entries, records = _load_pair_file(args.pairs)
    by_id = {e.id: e.graph for e in entries}
    chosen = _select(records, args.split)
    if not chosen:
        raise ValueError(f"no pairs in split {args.split!r}")
    graph_pairs = [(by_id[r.g1], by_id[r.g2]) for r in chosen]
    results = decode_pairs(state.params, state.net_config, graph_pairs,
                           state.config.steps_total, args.steps, args.k,
                           args.seed)
    with _open_out(args.out) as sink:
        for r, res in zip(chosen, results):
            sink.write(_dump({
                "g1": r.g1,
                "g2": r.g2,
                "pred": res.cost,
                "mapping": [int(c) for c in res.matching.mapping()],
                "seconds": res.seconds,
            }) + "\n")
    mean_s = sum(res.seconds for res in results) / len(results)
    print(f"decoded {len(results)} pairs (k={args.k}, steps={args.steps}, "
          f"{mean_s:.3f}s/pair) -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    if not (0 < args.top[0] <= args.top[1]):
        raise ValueError("--top cutoffs must be positive and ascending")
    with open(args.pred) as source:
        rows = [json.loads(line) for line in source if line.strip()]
    if not rows:
        raise ValueError(f"no predictions in {args.pred}")
    labels = read_pairs(args.labels)
    by_key = {(r.g1, r.g2): r for r in labels if r.kind != "none"}

    graphs_path = os.path.join(os.path.dirname(os.path.abspath(args.labels)),
                               "graphs.jsonl")
    by_id = {e.id: e.graph for e in read_graphs(graphs_path)} \
        if os.path.exists(graphs_path) else None

    preds, truth, groups, times = [], [], [], []
    for row in rows:
        record = by_key.get((row["g1"], row["g2"]))
        if record is None:
            continue
        if by_id is not None and "mapping" in row:
            # every reported distance must be witnessed by its matching
            g1, g2 = by_id[row["g1"]], by_id[row["g2"]]
            m = NodeMatching.from_mapping(row["mapping"], g2.node_count)
            if edit_cost(g1, g2, m) != row["pred"]:
                raise ValueError(f"prediction for pair ({row['g1']}, "
                                 f"{row['g2']}) is not witnessed by its "
                                 f"mapping")
        preds.append(float(row["pred"]))
        truth.append(float(record.ged))
        groups.append(-1 if record.query is None else record.query)
        times.append(float(row.get("seconds", 0.0)))
    if not preds:
        raise ValueError("no prediction matches a labeled pair")
    report = compute_metrics(preds, truth, groups, times=times,
                             ranking_sizes=tuple(args.top))
    with _open_out(args.out) as sink:
        json.dump(report.as_dict(), sink, indent=2, sort_keys=True)
        sink.write("\n")
    print(f"scored {len(preds)} pairs: mae={report.mae:.4f} "
          f"acc={report.accuracy:.4f} rho={report.spearman_rho:.4f} "
          f"tau={report.kendall_tau:.4f} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gedmatch",
        description="Graph edit distance toolkit: synthetic corpora, "
                    "exact and assignment baselines, denoiser training, "
                    "and ranked-retrieval evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a labeled pair corpus")
    p.add_argument("--graphs", type=int, required=True)
    p.add_argument("--max-nodes", type=int, required=True)
    p.add_argument("--labels", type=int, required=True,
                   help="node label alphabet size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--partners", type=int, default=100,
                   help="partners per validation/test query")
    p.add_argument("--oracle-limit", type=int, default=10)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("oracle", help="solve pairs exactly where feasible")
    p.add_argument("--pairs", required=True)
    p.add_argument("--limit", type=int, default=10,
                   help="skip pairs whose larger graph exceeds this")
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=SPLITS, default="all")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("baseline",
                       help="linear-assignment upper bound for every pair")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=SPLITS, default="all")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train a denoiser on a corpus")
    p.add_argument("--pairs", required=True)
    p.add_argument("--variant", default="bpr",
                   choices=("plain", "rl", "ged", "hinge", "bpr"))
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--anneal", type=int, default=100,
                   help="epochs over which the exploration weight decays")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint file")
    p.add_argument("--steps-total", type=int, default=1000)
    p.add_argument("--hops", type=int, default=10)
    p.add_argument("--candidates", type=int, default=100)
    p.add_argument("--sinkhorn-iters", type=int, default=5)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--history", default=None,
                   help="history file (default: next to the checkpoint)")
    p.add_argument("--resume", default=None,
                   help="checkpoint to continue; keeps its hyperparameters "
                        "and only extends --epochs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="predict distances with a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--k", type=int, default=100,
                   help="denoising chains per pair")
    p.add_argument("--steps", type=int, default=10,
                   help="reverse steps per chain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=SPLITS, default="test")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score predictions against labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--labels", required=True, help="pairs.jsonl with labels")
    p.add_argument("--out", required=True, help="report JSON file")
    p.add_argument("--top", type=int, nargs=2, default=[10, 20],
                   metavar=("A", "B"), help="precision cutoffs")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError, CheckpointError,
            OrientationError, SizeLimitError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # CLI boundary: anything else is a failure
        print(f"failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
