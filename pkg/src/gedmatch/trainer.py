"""Unsupervised training loop with per-pair best-solution bookkeeping.

No ground-truth matchings are used anywhere.  Each training pair carries
the cheapest matching seen so far (``best``) and the one decoded on the
previous visit (``last``).  A step denoises a corrupted copy of ``best``,
relaxes the scores to a soft matching, lets a ranking critic compare the
proposal against both records, then updates the two networks in turn.
The decoded proposal replaces ``best`` only when it is strictly cheaper,
so the per-pair cost sequence never increases.

Variants:
  plain  reconstruction only, the critic is never consulted or updated
  rl     reconstruction plus a score-function (REINFORCE) explore term
  ged    critic regresses normalized edit costs instead of ranking
  hinge  ranking critic trained with a margin loss
  bpr    ranking critic trained with the pairwise logistic loss

All randomness is derived from ``config.seed`` keyed by epoch and pair
index, so a run restored from a checkpoint at an epoch boundary replays
exactly the steps the uninterrupted run would have taken.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .diffusion import forward_sample, linear_schedule
from .graphs import Graph, NodeMatching, edit_cost, greedy_decode
from .losses import (
    lambda_schedule,
    loss_discriminator,
    loss_explore,
    loss_ged_regression,
    loss_generator,
    loss_hinge,
    loss_rec,
    reinforce_surrogate,
    update_baseline,
)
from .nets import (
    CheckpointError,
    CostNetConfig,
    NetConfig,
    collect_grads,
    cost_discriminator_forward,
    denoiser_config,
    denoiser_forward,
    discriminator_config,
    discriminator_forward,
    init_cost_params,
    init_net_params,
    load_records,
    params_arrays,
    rmsprop_init,
    rmsprop_step,
    save_records,
    set_params,
    zero_grads,
)
from .seeding import TAG_INIT, TAG_PARAMS, TAG_SHUFFLE, TAG_STEP, derive
from .sinkhorn import gumbel_sinkhorn

VARIANTS = ("plain", "rl", "ged", "hinge", "bpr")

STATE_FORMAT = "trainer-state"


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters; defaults are the published training settings."""

    variant: str = "bpr"
    steps_total: int = 1000      # forward-chain length T
    reverse_hops: int = 10       # decode-time hops S
    sinkhorn_iters: int = 5      # K
    sinkhorn_tau: float = 1.0
    candidates: int = 100        # decode-time chains k
    batch_size: int = 128
    epochs: int = 200
    anneal_epochs: int = 100
    lr: float = 1e-3
    weight_decay: float = 5e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.steps_total < 1:
            raise ValueError("steps_total must be positive")
        if not 1 <= self.reverse_hops <= self.steps_total:
            raise ValueError("reverse_hops outside 1..steps_total")
        if self.sinkhorn_iters < 1 or self.sinkhorn_tau <= 0.0:
            raise ValueError("bad relaxation settings")
        if self.candidates < 1 or self.batch_size < 1:
            raise ValueError("candidates and batch_size must be positive")
        if self.epochs < 0 or self.anneal_epochs < 1:
            raise ValueError("bad epoch settings")
        if self.lr <= 0.0 or self.weight_decay < 0.0:
            raise ValueError("bad optimizer settings")


@dataclass
class StepReport:
    """What one visit to one pair did."""

    index: int
    t: int
    cost: int
    best_cost: int
    replaced: bool
    loss_gen: float
    loss_disc: float


class TrainState:
    """Mutable training state: networks, optimizer, per-pair records."""

    def __init__(self, config: TrainConfig, num_labels: int,
                 params: dict, disc_params: dict,
                 best: list, best_costs: list, last: list, last_costs: list,
                 baseline: float, epoch: int = 0):
        self.config = config
        self.num_labels = num_labels
        self.params = params
        self.disc_params = disc_params
        self.opt_g = rmsprop_init(params)
        self.opt_d = rmsprop_init(disc_params)
        self.best = best
        self.best_costs = best_costs
        self.last = last
        self.last_costs = last_costs
        self.baseline = baseline
        self.epoch = epoch
        self.net_config = denoiser_config(num_labels)
        if config.variant == "ged":
            self.disc_config = CostNetConfig(num_labels)
        else:
            self.disc_config = discriminator_config(num_labels)
        self.schedule = linear_schedule(config.steps_total)

    @property
    def pair_count(self) -> int:
        return len(self.best)


def _check_oriented(pairs) -> None:
    for i, (g1, g2) in enumerate(pairs):
        if g1.node_count > g2.node_count:
            raise ValueError(f"pair {i} not oriented: {g1.node_count} rows, "
                             f"{g2.node_count} cols")


def infer_num_labels(pairs) -> int:
    top = 0
    for g1, g2 in pairs:
        top = max(top, max(g1.labels), max(g2.labels))
    return top + 1


def init_state(pairs, config: TrainConfig, num_labels: int | None = None) -> TrainState:
    """Fresh state: random records per pair, freshly seeded networks."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty corpus")
    _check_oriented(pairs)
    if num_labels is None:
        num_labels = infer_num_labels(pairs)
    params = init_net_params(denoiser_config(num_labels),
                             derive(config.seed, TAG_PARAMS, 0))
    if config.variant == "ged":
        disc_params = init_cost_params(CostNetConfig(num_labels),
                                       derive(config.seed, TAG_PARAMS, 1))
    else:
        disc_params = init_net_params(discriminator_config(num_labels),
                                      derive(config.seed, TAG_PARAMS, 1))
    best, best_costs, last, last_costs = [], [], [], []
    for i, (g1, g2) in enumerate(pairs):
        rng = derive(config.seed, TAG_INIT, i)
        shape = (g1.node_count, g2.node_count)
        m_best = greedy_decode(rng.uniform(size=shape))
        m_last = greedy_decode(rng.uniform(size=shape))
        best.append(m_best)
        best_costs.append(edit_cost(g1, g2, m_best))
        last.append(m_last)
        last_costs.append(edit_cost(g1, g2, m_last))
    baseline = float(np.mean(best_costs))
    return TrainState(config, num_labels, params, disc_params,
                      best, best_costs, last, last_costs, baseline)


@dataclass
class _Work:
    """Per-pair tensors kept alive between the two update phases."""

    index: int
    g1: Graph
    g2: Graph
    t: int
    target: np.ndarray
    scores: object
    pi_hat: object
    decoded: NodeMatching
    cost: int


def _critic_score(g1: Graph, g2: Graph, m, state: TrainState):
    if state.config.variant == "ged":
        return cost_discriminator_forward(g1, g2, m, state.disc_params,
                                          state.disc_config)
    return discriminator_forward(g1, g2, m, state.disc_params,
                                 state.disc_config)


def _critic_loss(work: _Work, state: TrainState):
    # proposal is detached: phase one trains the critic only
    d_gen = _critic_score(work.g1, work.g2, work.pi_hat.detach(), state)
    d_best = _critic_score(work.g1, work.g2, state.best[work.index], state)
    d_last = _critic_score(work.g1, work.g2, state.last[work.index], state)
    c_gen = work.cost
    c_best = state.best_costs[work.index]
    c_last = state.last_costs[work.index]
    variant = state.config.variant
    if variant == "bpr":
        return loss_discriminator(d_gen, d_best, d_last, c_gen, c_best, c_last)
    if variant == "hinge":
        return (loss_hinge(d_gen, d_best, c_gen, c_best)
                + loss_hinge(d_gen, d_last, c_gen, c_last))
    n1, n2 = work.g1.node_count, work.g2.node_count
    return (loss_ged_regression(d_gen, c_gen, n1, n2)
            + loss_ged_regression(d_best, c_best, n1, n2)
            + loss_ged_regression(d_last, c_last, n1, n2))


def _process_batch(items, state: TrainState, epoch: int) -> list[StepReport]:
    """Two-phase update on one batch; bookkeeping happens at the end.

    Phase one averages critic gradients over the batch and steps the
    critic once.  Phase two rescores every proposal with the refreshed
    critic, averages generator gradients, and steps the generator once.
    Record updates are applied last so every pair in the batch is judged
    against the records it was sampled from.
    """
    cfg = state.config
    lam = lambda_schedule(epoch, cfg.anneal_epochs)
    adversarial = cfg.variant in ("ged", "hinge", "bpr")

    work: list[_Work] = []
    for index, g1, g2 in items:
        rng = derive(cfg.seed, TAG_STEP, epoch, index)
        t = int(rng.integers(1, cfg.steps_total + 1))
        target = state.best[index].entries
        noisy = forward_sample(target, t, state.schedule, rng)
        scores = denoiser_forward(g1, g2, noisy, t, state.params,
                                  state.net_config)
        pi_hat = gumbel_sinkhorn(scores, cfg.sinkhorn_iters, cfg.sinkhorn_tau,
                                 rng)
        decoded = greedy_decode(pi_hat.data)
        cost = edit_cost(g1, g2, decoded)
        work.append(_Work(index, g1, g2, t, np.array(target), scores, pi_hat,
                          decoded, cost))

    disc_values = {w.index: 0.0 for w in work}
    if adversarial:
        zero_grads(state.disc_params)
        for w in work:
            d_loss = _critic_loss(w, state)
            d_loss.backward()
            disc_values[w.index] = float(d_loss.data)
        grads = {name: g / len(work)
                 for name, g in collect_grads(state.disc_params).items()}
        rmsprop_step(state.disc_params, grads, state.opt_d, lr=cfg.lr,
                     weight_decay=cfg.weight_decay)

    zero_grads(state.params)
    gen_values = {}
    for w in work:
        rec = loss_rec(w.target, w.scores)
        if cfg.variant == "plain" or lam == 0.0:
            gen = rec
        elif cfg.variant == "rl":
            explore = reinforce_surrogate(w.cost, state.baseline, w.scores)
            gen = loss_generator(rec, explore, lam)
        else:
            # rescored with the critic as updated in phase one
            explore = loss_explore(_critic_score(w.g1, w.g2, w.pi_hat, state))
            gen = loss_generator(rec, explore, lam)
        gen.backward()
        gen_values[w.index] = float(gen.data)
    grads = {name: g / len(work)
             for name, g in collect_grads(state.params).items()}
    rmsprop_step(state.params, grads, state.opt_g, lr=cfg.lr,
                 weight_decay=cfg.weight_decay)

    reports = []
    for w in work:
        before = state.best_costs[w.index]
        replaced = w.cost < before
        if replaced:
            state.best[w.index] = w.decoded
            state.best_costs[w.index] = w.cost
        # the cost record must never move up
        assert state.best_costs[w.index] <= before
        state.last[w.index] = w.decoded
        state.last_costs[w.index] = w.cost
        state.baseline = update_baseline(state.baseline, float(w.cost))
        reports.append(StepReport(w.index, w.t, w.cost,
                                  state.best_costs[w.index], replaced,
                                  gen_values[w.index], disc_values[w.index]))
    return reports


def train_step(g1: Graph, g2: Graph, index: int, state: TrainState,
               epoch: int | None = None) -> StepReport:
    """One full visit to one pair (a batch of one)."""
    if epoch is None:
        epoch = state.epoch
    return _process_batch([(index, g1, g2)], state, epoch)[0]


def train(pairs, config: TrainConfig, state: TrainState | None = None,
          history_path=None):
    """Run epochs of batched steps; returns (state, history).

    ``pairs`` is a sequence of oriented (g1, g2) tuples.  Passing a
    restored ``state`` resumes at its epoch counter and must use the
    same config and corpus size.  History is one record per epoch; with
    ``history_path`` each record is also appended there as a JSON line.
    """
    pairs = list(pairs)
    if state is None:
        state = init_state(pairs, config)
    else:
        if state.config != config:
            raise ValueError("config does not match the restored state")
        if state.pair_count != len(pairs):
            raise ValueError("corpus size does not match the restored state")
        _check_oriented(pairs)

    history = []
    sink = open(history_path, "a") if history_path is not None else None
    try:
        for epoch in range(state.epoch, config.epochs):
            order = derive(config.seed, TAG_SHUFFLE, epoch).permutation(len(pairs))
            gen_sum = 0.0
            disc_sum = 0.0
            for start in range(0, len(order), config.batch_size):
                chunk = order[start:start + config.batch_size]
                items = [(int(i),) + pairs[int(i)] for i in chunk]
                for report in _process_batch(items, state, epoch):
                    gen_sum += report.loss_gen
                    disc_sum += report.loss_disc
            state.epoch = epoch + 1
            record = {
                "epoch": epoch,
                "lambda": lambda_schedule(epoch, config.anneal_epochs),
                "loss_disc": disc_sum / len(pairs),
                "loss_gen": gen_sum / len(pairs),
                "mean_best_cost": float(np.mean(state.best_costs)),
            }
            history.append(record)
            if sink is not None:
                sink.write(json.dumps(record, sort_keys=True,
                                      separators=(",", ":")) + "\n")
    finally:
        if sink is not None:
            sink.close()
    return state, history


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def checkpoint(state: TrainState, path) -> None:
    """Write the complete state to one self-checking file."""
    meta = {
        "format": STATE_FORMAT,
        "config": asdict(state.config),
        "num_labels": state.num_labels,
        "epoch": state.epoch,
        "baseline": state.baseline,
        "pairs": state.pair_count,
        "best_costs": [int(c) for c in state.best_costs],
        "last_costs": [int(c) for c in state.last_costs],
    }
    arrays = {}
    for name, value in params_arrays(state.params).items():
        arrays["g." + name] = value
    for name, value in params_arrays(state.disc_params).items():
        arrays["d." + name] = value
    for name, value in state.opt_g.items():
        arrays["og." + name] = value
    for name, value in state.opt_d.items():
        arrays["od." + name] = value
    for i in range(state.pair_count):
        arrays[f"pair{i:06d}.best"] = state.best[i].entries
        arrays[f"pair{i:06d}.last"] = state.last[i].entries
    save_records(path, meta, arrays)


def restore(path) -> TrainState:
    """Rebuild a TrainState bit-for-bit from a checkpoint file."""
    meta, arrays = load_records(path)
    if meta.get("format") != STATE_FORMAT:
        raise CheckpointError("not a trainer checkpoint")
    config = TrainConfig(**meta["config"])
    num_labels = int(meta["num_labels"])

    params = init_net_params(denoiser_config(num_labels),
                             derive(config.seed, TAG_PARAMS, 0))
    if config.variant == "ged":
        disc_params = init_cost_params(CostNetConfig(num_labels),
                                       derive(config.seed, TAG_PARAMS, 1))
    else:
        disc_params = init_net_params(discriminator_config(num_labels),
                                      derive(config.seed, TAG_PARAMS, 1))
    set_params(params, _strip(arrays, "g."))
    set_params(disc_params, _strip(arrays, "d."))

    best, last = [], []
    for i in range(int(meta["pairs"])):
        best.append(_as_matching(arrays[f"pair{i:06d}.best"]))
        last.append(_as_matching(arrays[f"pair{i:06d}.last"]))
    state = TrainState(config, num_labels, params, disc_params,
                       best, [int(c) for c in meta["best_costs"]],
                       last, [int(c) for c in meta["last_costs"]],
                       float(meta["baseline"]), epoch=int(meta["epoch"]))
    _load_opt(state.opt_g, _strip(arrays, "og."))
    _load_opt(state.opt_d, _strip(arrays, "od."))
    return state


def _strip(arrays: dict, prefix: str) -> dict:
    return {name[len(prefix):]: value for name, value in arrays.items()
            if name.startswith(prefix) and not name.startswith("pair")}


def _as_matching(entries: np.ndarray) -> NodeMatching:
    return NodeMatching(entries.astype(np.int8))


def _load_opt(slot: dict, stored: dict) -> None:
    if set(stored) != set(slot):
        raise CheckpointError("optimizer state names do not match")
    for name, value in stored.items():
        if value.shape != slot[name].shape:
            raise CheckpointError(f"optimizer shape mismatch for {name}")
        slot[name][...] = value
