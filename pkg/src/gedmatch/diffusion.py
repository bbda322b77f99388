"""Binary discrete diffusion over matching matrices.

The forward chain flips each entry of a binary matrix independently with a
small per-step probability; running it long enough washes any matrix into
coin flips.  Because the per-step transition is a symmetric 2x2 matrix,
the product of any block of steps is again symmetric and is characterized
by a single agreement probability, computed here from a running signed
product instead of repeated matrix multiplication.

The reverse chain walks a short ladder of checkpoints back from pure
noise.  At each hop a denoiser guesses the clean matrix and the next state
is sampled from the guess-weighted mixture of two-state posteriors; the
last hop decodes the guess greedily into a hard matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gedmatch.graphs import Graph, NodeMatching, edit_cost, greedy_decode
from gedmatch.seeding import ChainStreams


class NoiseSchedule:
    """Per-step flip probabilities, 1-based: step t flips with betas[t-1].

    Flip probabilities live in [0, 0.5): beyond one half a step would
    anti-correlate with its input.  Zero is allowed so degenerate
    (identity) chains can be built directly; the linear builder below
    keeps its endpoints strictly positive.
    """

    def __init__(self, betas) -> None:
        b = np.asarray(betas, dtype=np.float64).copy()
        if b.ndim != 1 or b.size == 0:
            raise ValueError("betas must be a non-empty 1-d sequence")
        if np.any(b < 0.0) or np.any(b >= 0.5):
            raise ValueError("flip probabilities must lie in [0, 0.5)")
        b.flags.writeable = False
        self.betas = b
        # prod[t] = prod_{i<=t} (1 - 2 beta_i); agreement over a block of
        # steps is (1 + ratio of products) / 2
        prod = np.concatenate([[1.0], np.cumprod(1.0 - 2.0 * b)])
        prod.flags.writeable = False
        self._prod = prod

    @property
    def steps(self) -> int:
        return int(self.betas.size)

    def agreement(self, t_lo: int, t_hi: int) -> float:
        """Probability an entry keeps its value across steps t_lo+1 .. t_hi."""
        if not 0 <= t_lo <= t_hi <= self.steps:
            raise ValueError(f"bad step window ({t_lo}, {t_hi}) for T={self.steps}")
        return 0.5 * (1.0 + self._prod[t_hi] / self._prod[t_lo])

    def single(self, t: int) -> np.ndarray:
        """Transition matrix of step t alone, indexed [from][to]."""
        if not 1 <= t <= self.steps:
            raise ValueError(f"step {t} outside 1..{self.steps}")
        beta = self.betas[t - 1]
        return np.array([[1.0 - beta, beta], [beta, 1.0 - beta]])

    def cumulative(self, t: int) -> np.ndarray:
        """Transition matrix of steps 1..t combined, indexed [from][to]."""
        if not 0 <= t <= self.steps:
            raise ValueError(f"step {t} outside 0..{self.steps}")
        a = self.agreement(0, t)
        return np.array([[a, 1.0 - a], [1.0 - a, a]])


def linear_schedule(steps: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Evenly spaced flip probabilities from beta_start up to beta_end."""
    if steps < 1:
        raise ValueError("need at least one step")
    if not 0.0 < beta_start <= beta_end < 0.5:
        raise ValueError("need 0 < beta_start <= beta_end < 0.5")
    return NoiseSchedule(np.linspace(beta_start, beta_end, steps))


def _check_binary(x: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(x)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{what} must be binary")
    return arr.astype(np.int8)


def forward_sample(pi0, t: int, schedule: NoiseSchedule, rng: np.random.Generator) -> np.ndarray:
    """Draw pi^t from the forward chain given the clean matrix pi^0.

    Each entry independently keeps its value with the block agreement
    probability of steps 1..t and flips otherwise.
    """
    x0 = _check_binary(pi0, "pi0")
    if not 1 <= t <= schedule.steps:
        raise ValueError(f"step {t} outside 1..{schedule.steps}")
    a = schedule.agreement(0, t)
    keep = rng.random(x0.shape) < a
    return np.where(keep, x0, 1 - x0).astype(np.int8)


def posterior_entry(x_t: int, x_0: int, t_hi: int, t_lo: int, schedule: NoiseSchedule) -> float:
    """q(x_{t_lo} = 1 | x_{t_hi}, x_0) for one binary entry, by Bayes.

    If the whole window is deterministic (all-zero flip probabilities) the
    conditioning can contradict x_0; the mass then goes to the observed
    x_t, matching the noisy-window limit.
    """
    if not 0 <= t_lo < t_hi <= schedule.steps:
        raise ValueError(f"need 0 <= t_lo < t_hi <= {schedule.steps}, got ({t_lo}, {t_hi})")
    if x_t not in (0, 1) or x_0 not in (0, 1):
        raise ValueError("states must be 0 or 1")
    a_hi = schedule.agreement(t_lo, t_hi)
    a_lo = schedule.agreement(0, t_lo)
    like1 = a_hi if x_t == 1 else 1.0 - a_hi
    like0 = (1.0 - a_hi) if x_t == 1 else a_hi
    prior1 = a_lo if x_0 == 1 else 1.0 - a_lo
    prior0 = (1.0 - a_lo) if x_0 == 1 else a_lo
    num1 = like1 * prior1
    denom = num1 + like0 * prior0
    if denom == 0.0:
        return 1.0 if x_t == 1 else 0.0
    return num1 / denom


def reverse_step(pred0, x_t, t_hi: int, t_lo: int, schedule: NoiseSchedule,
                 rng: np.random.Generator) -> np.ndarray:
    """Sample x_{t_lo} given x_{t_hi} and the denoiser's guess of pi^0.

    Per entry, the two posteriors (clean entry 1 or 0) are mixed with
    weights pred0 and 1 - pred0, then Bernoulli-sampled.
    """
    pred = np.asarray(pred0, dtype=np.float64)
    if np.any(pred < 0.0) or np.any(pred > 1.0) or not np.isfinite(pred).all():
        raise ValueError("pred0 entries must lie in [0, 1]")
    x = _check_binary(x_t, "x_t")
    if pred.shape != x.shape:
        raise ValueError("pred0 and x_t shapes differ")
    # the posterior depends on the entry only through its observed value,
    # so four scalars cover the whole matrix
    p1_given = {
        xt: (posterior_entry(xt, 1, t_hi, t_lo, schedule),
             posterior_entry(xt, 0, t_hi, t_lo, schedule))
        for xt in (0, 1)
    }
    on1, on0 = p1_given[1], p1_given[0]
    p1 = np.where(
        x == 1,
        pred * on1[0] + (1.0 - pred) * on1[1],
        pred * on0[0] + (1.0 - pred) * on0[1],
    )
    return (rng.random(x.shape) < p1).astype(np.int8)


@dataclass(frozen=True)
class ReverseSchedule:
    """Strictly increasing decode checkpoints 0 = t_0 < ... < t_S = T."""

    points: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.points
        if len(p) < 2 or p[0] != 0:
            raise ValueError("checkpoints must start at 0 and contain at least one hop")
        if any(b <= a for a, b in zip(p, p[1:])):
            raise ValueError("checkpoints must be strictly increasing")

    @property
    def horizon(self) -> int:
        return self.points[-1]

    @property
    def hops(self) -> int:
        return len(self.points) - 1

    @staticmethod
    def evenly_spaced(horizon: int, hops: int) -> "ReverseSchedule":
        """hops+1 points rounded onto 0..horizon; duplicates collapse, so
        more hops than steps degrades gracefully to one hop per step."""
        if horizon < 1 or hops < 1:
            raise ValueError("need horizon >= 1 and hops >= 1")
        pts = sorted({int(np.floor(i * horizon / hops + 0.5)) for i in range(hops + 1)})
        return ReverseSchedule(tuple(pts))


def reverse_process(g1: Graph, g2: Graph, denoiser, schedule: NoiseSchedule,
                    rsched: ReverseSchedule, k: int, streams: ChainStreams,
                    ) -> tuple[NodeMatching, int]:
    """Decode a matching for an oriented pair with k independent chains.

    Each chain starts from coin-flip noise at the horizon and walks the
    checkpoint ladder down; intermediate hops sample the mixed posterior
    from the denoiser's guess, the final hop decodes the guess greedily.
    Returns the cheapest decoded matching and its edit cost, first chain
    winning ties.  ``denoiser(g1, g2, x_t, t)`` must return entry
    probabilities in [0, 1].
    """
    if k < 1:
        raise ValueError("need at least one chain")
    if rsched.horizon != schedule.steps:
        raise ValueError(
            f"checkpoint horizon {rsched.horizon} != schedule steps {schedule.steps}"
        )
    n1, n2 = g1.node_count, g2.node_count
    if n1 > n2:
        raise ValueError("pair must be oriented smaller-first")

    best: tuple[NodeMatching, int] | None = None
    pts = rsched.points
    for j in range(k):
        rng = streams.chain(j)
        x = (rng.random((n1, n2)) < 0.5).astype(np.int8)
        matching = None
        for i in range(len(pts) - 1, 0, -1):
            t_hi, t_lo = pts[i], pts[i - 1]
            pred = np.asarray(denoiser(g1, g2, x, t_hi), dtype=np.float64)
            if pred.shape != (n1, n2):
                raise ValueError("denoiser returned a wrong-shaped matrix")
            if i > 1:
                x = reverse_step(pred, x, t_hi, t_lo, schedule, rng)
            else:
                matching = greedy_decode(pred)
        assert matching is not None
        cost = edit_cost(g1, g2, matching)
        if best is None or cost < best[1]:
            best = (matching, cost)
    assert best is not None
    return best
