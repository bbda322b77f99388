"""Differentiable decoding of score matrices into soft matchings.

Alternating row and column normalization in log space pushes a positive
matrix toward the assignment polytope; dividing the scores by a small
temperature first makes the fixed point approach the best hard assignment.
Adding Gumbel noise before normalizing turns the decoder into a sampler
over near-optimal assignments.  Everything runs on autodiff tensors, so
gradients flow back into the scores.

Rectangular inputs (fewer rows than columns) are allowed; normalization
then ends on the columns, whose sums are exactly one, while row sums are
only approximate.  Doubly-stochastic behaviour holds for square inputs.
"""

from __future__ import annotations

import numpy as np

from gedmatch.autodiff import Tensor, astensor
from gedmatch.graphs import OrientationError


def _log_normalize(x: Tensor, axis: int) -> Tensor:
    # the max shift is a constant, so it stabilizes exp without touching
    # the gradient
    shift = np.max(x.data, axis=axis, keepdims=True)
    lse = (x - shift).exp().sum(axis=axis, keepdims=True).log() + shift
    return x - lse


def _checked(scores) -> Tensor:
    x = astensor(scores)
    if x.data.ndim != 2:
        raise ValueError("scores must be a 2-d matrix")
    rows, cols = x.data.shape
    if rows > cols:
        raise OrientationError(f"score matrix has more rows than columns ({rows} > {cols})")
    if not np.isfinite(x.data).all():
        raise ValueError("scores must be finite")
    return x


def _normalize(x: Tensor, k_iters: int, tau: float) -> Tensor:
    if k_iters < 1:
        raise ValueError("need at least one normalization round")
    if not tau > 0:
        raise ValueError("temperature must be positive")
    x = x / tau
    for _ in range(k_iters):
        x = _log_normalize(x, axis=1)
        x = _log_normalize(x, axis=0)  # columns last: their sums are exact
    return x.exp()


def gumbel_sinkhorn(scores, k_iters: int = 5, tau: float = 1.0,
                    rng: np.random.Generator | None = None) -> Tensor:
    """Sample a soft matching: perturb scores with Gumbel noise, normalize.

    Entries land in (0, 1]; columns sum to one.  The noise makes repeated
    calls explore different near-optimal matchings while keeping the map
    from scores to output differentiable.
    """
    if rng is None:
        raise ValueError("gumbel_sinkhorn needs a random generator")
    x = _checked(scores)
    u = np.clip(rng.random(x.data.shape), 1e-12, 1.0 - 1e-12)
    noise = -np.log(-np.log(u))
    return _normalize(x + noise, k_iters, tau)


def sinkhorn_noise_free(scores, k_iters: int = 5, tau: float = 1.0) -> Tensor:
    """Deterministic variant of gumbel_sinkhorn for tests and decoding."""
    return _normalize(_checked(scores), k_iters, tau)
