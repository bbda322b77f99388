"""Training objectives for the matching generator and its critics.

Conventions: every loss is a scalar Tensor to be minimized.  Scores may
arrive as plain floats or as Tensors; gradients flow only through Tensor
arguments, so stop-gradient boundaries are drawn by the caller (detach
generator outputs when training the critic and vice versa).  The stable
identity -ln sigmoid(x) = softplus(-x) is used throughout.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, astensor


def _entries(m) -> np.ndarray:
    if hasattr(m, "entries"):
        m = m.entries
    if isinstance(m, Tensor):
        m = m.data
    return np.asarray(m, dtype=np.float64)


def loss_rec(target, logits) -> Tensor:
    """Mean binary cross-entropy of sigmoid(logits) against a 0/1 target.

    Non-negative, zero only in the saturated-correct limit, and
    differentiable in the logits.
    """
    y = _entries(target)
    z = astensor(logits)
    if y.shape != z.data.shape:
        raise ValueError("target and logits shapes differ")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("target entries must be 0 or 1")
    y = astensor(y)
    per_entry = y * (-z).softplus() + (1.0 - y) * z.softplus()
    return per_entry.mean()


def loss_explore(d_score) -> Tensor:
    """Negated critic score: push the generator toward well-rated output."""
    return -astensor(d_score)


def loss_generator(rec, explore, lam: float) -> Tensor:
    """rec + lam * explore with the explore weight in [0, 1]."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("explore weight must lie in [0, 1]")
    return astensor(rec) + astensor(explore) * lam


def lambda_schedule(epoch: int, anneal_epochs: int) -> float:
    """Linear anneal from 1 at epoch 0 to 0 at anneal_epochs, then flat 0."""
    if anneal_epochs <= 0:
        raise ValueError("anneal horizon must be positive")
    if epoch < 0:
        raise ValueError("epoch must be non-negative")
    return max(0.0, 1.0 - epoch / anneal_epochs)


def loss_bpr(d_gen, d_ref, c_gen, c_ref) -> Tensor:
    """Pairwise ranking loss: the cheaper matching should score higher.

    -ln sigmoid(d_preferred - d_other); when the costs tie, both
    directions are summed, which is minimized at equal scores.
    """
    if c_gen < 0 or c_ref < 0:
        raise ValueError("costs must be non-negative")
    d_gen = astensor(d_gen)
    d_ref = astensor(d_ref)
    gap = d_gen - d_ref
    if c_gen < c_ref:
        return (-gap).softplus()
    if c_gen > c_ref:
        return gap.softplus()
    return (-gap).softplus() + gap.softplus()


def loss_discriminator(d_gen, d_best, d_last, c_gen, c_best, c_last) -> Tensor:
    """Critic objective: rank the fresh sample against both references."""
    return (loss_bpr(d_gen, d_best, c_gen, c_best)
            + loss_bpr(d_gen, d_last, c_gen, c_last))


def loss_hinge(d_gen, d_ref, c_gen, c_ref) -> Tensor:
    """Margin ranking alternative: max(0, d_other - d_preferred + margin).

    The margin is 1 when the costs differ and 0 when they tie; the tied
    case is charged in both directions.
    """
    if c_gen < 0 or c_ref < 0:
        raise ValueError("costs must be non-negative")
    d_gen = astensor(d_gen)
    d_ref = astensor(d_ref)
    if c_gen < c_ref:
        return (d_ref - d_gen + 1.0).relu()
    if c_gen > c_ref:
        return (d_gen - d_ref + 1.0).relu()
    return (d_ref - d_gen).relu() + (d_gen - d_ref).relu()


def normalized_ged_score(c, n1: int, n2: int) -> float:
    """exp(-2c/(n1+n2)): cost 0 maps to 1, decreasing in c, in (0, 1]."""
    if c < 0:
        raise ValueError("cost must be non-negative")
    if n1 + n2 <= 0:
        raise ValueError("need a positive node-count total")
    return float(np.exp(-2.0 * float(c) / (n1 + n2)))


def loss_ged_regression(d_score, c, n1: int, n2: int) -> Tensor:
    """Squared error of the critic score against the normalized edit cost."""
    gap = astensor(d_score) - normalized_ged_score(c, n1, n2)
    return gap * gap


def reinforce_surrogate(cost, baseline, logits) -> Tensor:
    """Advantage-weighted log-likelihood surrogate.

    Backward through the result yields (cost - baseline) times the
    gradient of sum log sigmoid(logits), the score-function estimator for
    a single sampled matching.
    """
    advantage = float(cost) - float(baseline)
    logprob = -((-astensor(logits)).softplus().sum())  # sum log sigmoid
    return logprob * advantage


def reinforce_gradient(costs, baseline, logprob_grads) -> dict[str, np.ndarray]:
    """Average of advantage-scaled per-sample log-probability gradients.

    costs and logprob_grads run in parallel, one entry per sampled
    matching; each gradient is a name -> array mapping.
    """
    costs = list(costs)
    logprob_grads = list(logprob_grads)
    if not costs or len(costs) != len(logprob_grads):
        raise ValueError("need one gradient per sampled cost")
    names = set(logprob_grads[0])
    out: dict[str, np.ndarray] = {}
    for c, grads in zip(costs, logprob_grads):
        if set(grads) != names:
            raise ValueError("samples disagree on parameter names")
        scale = float(c) - float(baseline)
        for name, g in grads.items():
            piece = scale * np.asarray(g, dtype=np.float64)
            out[name] = piece if name not in out else out[name] + piece
    return {name: g / len(costs) for name, g in out.items()}


def update_baseline(baseline: float, observed: float, decay: float = 0.9) -> float:
    """Exponential moving average used as the advantage baseline."""
    if not 0.0 <= decay < 1.0:
        raise ValueError("decay must lie in [0, 1)")
    return decay * float(baseline) + (1.0 - decay) * float(observed)
