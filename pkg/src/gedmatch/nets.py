"""Matching networks: a noise-conditioned pair scorer and two critics.

Every network here runs on graph pairs.  A block has two stages: a
siamese graph-convolution stage refreshes node embeddings within each
graph, then a pair stage mixes the two directional pair embeddings with
node context and exchanges gated messages across the graphs.
Normalization is always "graph" style, per feature over a group, the
group being one graph's nodes, every node pair, or both node sets
stacked together.

Three read-outs share the machinery:

- ``denoiser_forward``: scores conditioned on a binary noisy matching
  and a step index; raw logits, squash or transport downstream.
- ``discriminator_forward``: a scalar critique of a (possibly soft)
  matching, no time conditioning, differentiable in the matching.
- ``cost_discriminator_forward``: node embeddings only, bilinear
  interaction maps mixed into a cost matrix, scored as <m, C>.

The directional output head is a single shared MLP applied to both pair
tensors.  Sharing is what makes the score grid exactly equivariant to
swapping the two graphs (scores transpose), which downstream decoding
relies on.

Parameters live in flat name->Tensor dicts.  Values are kept on the
float32 grid (stored as float64) after initialization and after every
optimizer step, so 32-bit checkpoints restore runs exactly.
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, _stable_sigmoid, astensor, concat, narrow
from .graphs import Graph

CHECKPOINT_MAGIC = b"GMCK"
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for unreadable, mismatched, or corrupted checkpoint files."""


# ---------------------------------------------------------------------------
# embeddings and normalization
# ---------------------------------------------------------------------------


def sinusoidal_embed(x, dim: int) -> Tensor:
    """Interleaved sine/cosine features, one (dim,) vector per entry of x.

    Slot 2i holds sin(x / 10000^(2i/dim)) and slot 2i+1 the matching
    cosine, so x = 0 embeds to [0, 1, 0, 1, ...].  Differentiable in x.
    """
    if dim < 2 or dim % 2 != 0:
        raise ValueError("embedding dim must be even and at least 2")
    x = astensor(x)
    base = x.data.shape
    half = dim // 2
    inv_freq = np.power(10000.0, -2.0 * np.arange(half) / dim)
    angles = x.reshape(base + (1,)) * inv_freq
    sin = angles.sin().reshape(base + (half, 1))
    cos = angles.cos().reshape(base + (half, 1))
    return concat([sin, cos], axis=-1).reshape(base + (dim,))


def graph_norm(h, alpha, gamma, beta, axes) -> Tensor:
    """gamma * (h - alpha*mu) / (sigma + 1e-5) + beta, per feature.

    mu is the mean over the group axes and sigma the standard deviation
    of the alpha-shifted values over the same group; features ride along
    the last axis.  A tiny floor under the root keeps the backward pass
    finite for constant or single-element groups.
    """
    if isinstance(axes, int):
        axes = (axes,)
    h = astensor(h)
    if any(h.data.shape[a] == 0 for a in axes):
        raise ValueError("normalization group is empty")
    alpha, gamma, beta = astensor(alpha), astensor(gamma), astensor(beta)
    mu = h.mean(axis=axes, keepdims=True)
    centered = h - alpha * mu
    var = (centered * centered).mean(axis=axes, keepdims=True)
    sigma = (var + 1e-12).sqrt()
    return gamma * (centered / (sigma + 1e-5)) + beta


# ---------------------------------------------------------------------------
# configuration and initialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetConfig:
    """Layer plan shared by the denoiser and the pairwise critic."""

    num_labels: int
    widths: tuple[int, ...]
    embed_dim: int = 128
    time_conditioned: bool = True
    head_hidden: int = 32

    def __post_init__(self):
        if self.num_labels < 1:
            raise ValueError("need at least one node label")
        if not self.widths:
            raise ValueError("need at least one layer")
        if self.embed_dim < 2 or self.embed_dim % 2 != 0:
            raise ValueError("embedding dim must be even and at least 2")


@dataclass(frozen=True)
class CostNetConfig:
    """Layer plan for the bilinear cost critic."""

    num_labels: int
    widths: tuple[int, ...] = (128, 64, 32)
    n_maps: int = 16
    mix_hidden: int = 16

    def __post_init__(self):
        if self.num_labels < 1:
            raise ValueError("need at least one node label")
        if not self.widths:
            raise ValueError("need at least one layer")
        if self.n_maps < 1:
            raise ValueError("need at least one interaction map")


def denoiser_config(num_labels: int,
                    widths=(128, 64, 32, 32, 32, 32),
                    embed_dim: int = 128) -> NetConfig:
    return NetConfig(num_labels, tuple(widths), embed_dim, time_conditioned=True)


def discriminator_config(num_labels: int,
                         widths=(128, 64, 32),
                         embed_dim: int = 128) -> NetConfig:
    return NetConfig(num_labels, tuple(widths), embed_dim, time_conditioned=False)


def _param(store: dict, name: str, value) -> None:
    store[name] = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True)


def _xavier(rng, fan_in: int, fan_out: int) -> np.ndarray:
    bound = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def _norm_group(store: dict, pfx: str, d: int) -> None:
    _param(store, pfx + "alpha", np.ones(d))
    _param(store, pfx + "gamma", np.ones(d))
    _param(store, pfx + "beta", np.zeros(d))


def _gin_group(store: dict, pfx: str, rng, d_in: int, d: int) -> None:
    _param(store, pfx + "eps", 0.0)
    _param(store, pfx + "w1", _xavier(rng, d_in, d))
    _param(store, pfx + "b1", np.zeros(d))
    _param(store, pfx + "w2", _xavier(rng, d, d))
    _param(store, pfx + "b2", np.zeros(d))
    _norm_group(store, pfx + "norm.", d)


def init_net_params(config: NetConfig, rng) -> dict[str, Tensor]:
    """Fresh parameter set: Xavier-uniform weights drawn from rng in a fixed
    order, zero biases and epsilons, unit norm scales, zero norm shifts."""
    p: dict[str, Tensor] = {}
    d_node = config.num_labels
    d_pair = config.embed_dim
    for layer, d in enumerate(config.widths):
        pfx = f"layer{layer}."
        _gin_group(p, pfx + "gin.", rng, d_node, d)
        _param(p, pfx + "pair.w1", _xavier(rng, d_pair, d))
        for i in (2, 3, 4):
            _param(p, pfx + f"pair.w{i}", _xavier(rng, d, d))
        if config.time_conditioned:
            _param(p, pfx + "pair.w5", _xavier(rng, config.embed_dim, d))
        for i in (6, 7):
            _param(p, pfx + f"pair.w{i}", _xavier(rng, d, d))
        _norm_group(p, pfx + "pair.norm_pair.", d)
        _norm_group(p, pfx + "pair.norm_node.", d)
        _param(p, pfx + "pair.mlp.w1", _xavier(rng, d, d))
        _param(p, pfx + "pair.mlp.b1", np.zeros(d))
        _param(p, pfx + "pair.mlp.w2", _xavier(rng, d, d))
        _param(p, pfx + "pair.mlp.b2", np.zeros(d))
        d_node = d
        d_pair = d
    _param(p, "head.w1", _xavier(rng, d_pair, config.head_hidden))
    _param(p, "head.b1", np.zeros(config.head_hidden))
    _param(p, "head.w2", _xavier(rng, config.head_hidden, 1))
    _param(p, "head.b2", np.zeros(1))
    quantize_params(p)
    return p


def init_cost_params(config: CostNetConfig, rng) -> dict[str, Tensor]:
    """Parameters for the bilinear cost critic, same conventions."""
    p: dict[str, Tensor] = {}
    d_node = config.num_labels
    for layer, d in enumerate(config.widths):
        _gin_group(p, f"layer{layer}.gin.", rng, d_node, d)
        d_node = d
    d = config.widths[-1]
    for i in range(config.n_maps):
        _param(p, f"bilinear.w{i:02d}", _xavier(rng, d, d))
    _param(p, "mix.w1", _xavier(rng, config.n_maps, config.mix_hidden))
    _param(p, "mix.b1", np.zeros(config.mix_hidden))
    _param(p, "mix.w2", _xavier(rng, config.mix_hidden, 1))
    _param(p, "mix.b2", np.zeros(1))
    quantize_params(p)
    return p


# ---------------------------------------------------------------------------
# layer stages
# ---------------------------------------------------------------------------


def _mlp2(h: Tensor, params: dict, pfx: str) -> Tensor:
    hidden = (h @ params[pfx + "w1"] + params[pfx + "b1"]).relu()
    return hidden @ params[pfx + "w2"] + params[pfx + "b2"]


def _norm(h: Tensor, params: dict, pfx: str, axes) -> Tensor:
    return graph_norm(h, params[pfx + "alpha"], params[pfx + "gamma"],
                      params[pfx + "beta"], axes)


def gin_layer(h, adjacency, params: dict, prefix: str = "",
              normalize: bool = True) -> Tensor:
    """One graph-convolution stage: MLP((1+eps)*h_v + sum of neighbor h),
    then per-graph normalization over the node axis.

    The parameter group is shared, so calling this once per graph of a
    pair keeps the stage siamese.  ``normalize=False`` skips the norm.
    """
    h = astensor(h)
    adj = np.asarray(adjacency, dtype=np.float64)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if adj.shape[0] != h.data.shape[0]:
        raise ValueError("adjacency size does not match the node count")
    if h.data.shape[-1] != params[prefix + "w1"].data.shape[0]:
        raise ValueError("embedding width does not match layer input width")
    mixed = (params[prefix + "eps"] + 1.0) * h + Tensor(adj) @ h
    out = _mlp2(mixed, params, prefix)
    if normalize:
        out = _norm(out, params, prefix + "norm.", (0,))
    return out


def agnn_layer(h1, h2, hp_f, hp_r, params: dict, prefix: str = "",
               time_emb=None):
    """Pair-and-node mixing stage.  Returns (nodes1, nodes2, pairs_fwd,
    pairs_rev).

    Pair tensors are stored aligned: entry [v, u] of pairs_fwd is the
    v->u embedding and entry [v, u] of pairs_rev the u->v one.  Both
    directions run through the same weights:

      ahat      = W1 pair_in
      mix[v,u]  = W2 ahat[v,u] + W3 node_src + W4 node_dst
      pair_out  = ahat + MLP(ReLU(GN_pairs(mix)) + W5 t)     (t optional)
      node_out  = node + ReLU(GN_both(W6 node + sum W7 other * sigmoid(mix)))

    where GN_both normalizes both node sets stacked into one group.
    """
    h1, h2 = astensor(h1), astensor(h2)
    hp_f, hp_r = astensor(hp_f), astensor(hp_r)
    if hp_f.data.shape != hp_r.data.shape:
        raise ValueError("directional pair tensors must agree in shape")
    if hp_f.data.shape[-1] != params[prefix + "w1"].data.shape[0]:
        raise ValueError("pair width does not match layer input width")
    if h1.data.shape[-1] != params[prefix + "w3"].data.shape[0]:
        raise ValueError("node width does not match layer width")
    n1 = h1.data.shape[0]
    n2 = h2.data.shape[0]
    d = params[prefix + "w2"].data.shape[1]

    hat_f = hp_f @ params[prefix + "w1"]
    hat_r = hp_r @ params[prefix + "w1"]
    by_row_f = (h1 @ params[prefix + "w3"]).reshape(n1, 1, d)
    by_col_f = (h2 @ params[prefix + "w4"]).reshape(1, n2, d)
    by_col_r = (h2 @ params[prefix + "w3"]).reshape(1, n2, d)
    by_row_r = (h1 @ params[prefix + "w4"]).reshape(n1, 1, d)
    mix_f = hat_f @ params[prefix + "w2"] + by_row_f + by_col_f
    mix_r = hat_r @ params[prefix + "w2"] + by_col_r + by_row_r

    inner_f = _norm(mix_f, params, prefix + "norm_pair.", (0, 1)).relu()
    inner_r = _norm(mix_r, params, prefix + "norm_pair.", (0, 1)).relu()
    if time_emb is not None:
        shift = (astensor(time_emb).reshape(1, -1) @ params[prefix + "w5"])
        shift = shift.reshape(1, 1, d)
        inner_f = inner_f + shift
        inner_r = inner_r + shift
    new_f = hat_f + _mlp2(inner_f, params, prefix + "mlp.")
    new_r = hat_r + _mlp2(inner_r, params, prefix + "mlp.")

    from_2 = ((h2 @ params[prefix + "w7"]).reshape(1, n2, d) * mix_f.sigmoid()).sum(axis=1)
    from_1 = ((h1 @ params[prefix + "w7"]).reshape(n1, 1, d) * mix_r.sigmoid()).sum(axis=0)
    pre = concat([h1 @ params[prefix + "w6"] + from_2,
                  h2 @ params[prefix + "w6"] + from_1], axis=0)
    act = _norm(pre, params, prefix + "norm_node.", (0,)).relu()
    new1 = h1 + narrow(act, 0, 0, n1)
    new2 = h2 + narrow(act, 0, n1, n2)
    return new1, new2, new_f, new_r


# ---------------------------------------------------------------------------
# full networks
# ---------------------------------------------------------------------------


def _one_hot_labels(g: Graph, num_labels: int) -> np.ndarray:
    labs = np.asarray(g.labels, dtype=np.int64)
    if labs.size and labs.max() >= num_labels:
        raise ValueError("label id outside embedding table")
    return np.eye(num_labels, dtype=np.float64)[labs]


def _head(h: Tensor, params: dict) -> Tensor:
    hidden = (h @ params["head.w1"] + params["head.b1"]).relu()
    return hidden @ params["head.w2"] + params["head.b2"]


def pair_scores(g1: Graph, g2: Graph, entries, params: dict,
                config: NetConfig, t=None) -> Tensor:
    """Backbone plus shared directional head; (|V1|, |V2|) raw scores.

    Swapping the graphs and transposing the entries transposes the
    output exactly, because the head is shared between directions and
    every stage treats the directions symmetrically.
    """
    ent = astensor(entries)
    n1, n2 = g1.node_count, g2.node_count
    if ent.data.shape != (n1, n2):
        raise ValueError("matching matrix shape does not fit the graph pair")
    h1 = Tensor(_one_hot_labels(g1, config.num_labels))
    h2 = Tensor(_one_hot_labels(g2, config.num_labels))
    seed_pairs = sinusoidal_embed(ent, config.embed_dim)
    hp_f = seed_pairs
    hp_r = seed_pairs
    t_emb = None
    if config.time_conditioned:
        if t is None:
            raise ValueError("time-conditioned net needs a step index")
        t_emb = sinusoidal_embed(float(t), config.embed_dim)
    adj1 = g1.adjacency()
    adj2 = g2.adjacency()
    for layer in range(len(config.widths)):
        pfx = f"layer{layer}."
        a = gin_layer(h1, adj1, params, pfx + "gin.")
        b = gin_layer(h2, adj2, params, pfx + "gin.")
        h1, h2, hp_f, hp_r = agnn_layer(a, b, hp_f, hp_r, params,
                                        pfx + "pair.", t_emb)
    return (_head(hp_f, params) + _head(hp_r, params)).reshape(n1, n2)


def denoiser_forward(g1: Graph, g2: Graph, x_t, t: int, params: dict,
                     config: NetConfig) -> Tensor:
    """Raw matching scores given a binary noisy matching and a step index.

    Callers squash with sigmoid for per-entry probabilities or feed the
    scores to Gumbel-Sinkhorn for a transport-polytope relaxation.
    """
    x = np.asarray(x_t, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("noisy matching must be a matrix")
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("noisy matching entries must be 0 or 1")
    t = int(t)
    if t < 0:
        raise ValueError("step index must be non-negative")
    if not config.time_conditioned:
        raise ValueError("config is not time conditioned")
    return pair_scores(g1, g2, x, params, config, t=t)


def _matching_entries(m):
    if hasattr(m, "entries"):
        m = m.entries
    m = astensor(m)
    data = m.data
    if data.ndim != 2:
        raise ValueError("matching must be a matrix")
    if not np.isfinite(data).all() or data.min() < 0.0 or data.max() > 1.0:
        raise ValueError("matching entries must lie in [0, 1]")
    return m


def discriminator_forward(g1: Graph, g2: Graph, m, params: dict,
                          config: NetConfig) -> Tensor:
    """Scalar critique of a (possibly soft) matching.

    Sum of both directional head outputs over every node pair; no time
    conditioning.  Differentiable with respect to m, whose entries feed
    the sinusoidal pair seeding, and to the parameters.
    """
    if config.time_conditioned:
        raise ValueError("critic config must not be time conditioned")
    ent = _matching_entries(m)
    return pair_scores(g1, g2, ent, params, config, t=None).sum()


def cost_discriminator_forward(g1: Graph, g2: Graph, m, params: dict,
                               config: CostNetConfig) -> Tensor:
    """Bilinear cost critique: <m, C> for a learned pair-cost matrix C.

    Node embeddings come from the graph-convolution stack alone; the
    n_maps bilinear interaction maps H1 W H2^T are stacked per pair and
    mixed by a small MLP into C.  The score is linear in m.
    """
    ent = _matching_entries(m)
    n1, n2 = g1.node_count, g2.node_count
    if ent.data.shape != (n1, n2):
        raise ValueError("matching matrix shape does not fit the graph pair")
    h1 = Tensor(_one_hot_labels(g1, config.num_labels))
    h2 = Tensor(_one_hot_labels(g2, config.num_labels))
    adj1 = g1.adjacency()
    adj2 = g2.adjacency()
    for layer in range(len(config.widths)):
        pfx = f"layer{layer}.gin."
        h1 = gin_layer(h1, adj1, params, pfx)
        h2 = gin_layer(h2, adj2, params, pfx)
    maps = []
    for i in range(config.n_maps):
        w = params[f"bilinear.w{i:02d}"]
        maps.append(((h1 @ w) @ h2.transpose_last()).reshape(n1, n2, 1))
    cost = _mlp2(concat(maps, axis=-1), params, "mix.").reshape(n1, n2)
    return (ent * cost).sum()


def denoiser_sampler(params: dict, config: NetConfig):
    """Adapter for the reverse chain: (g1, g2, x_t, t) -> P(entry = 1)."""

    def guess(g1, g2, x_t, t):
        scores = denoiser_forward(g1, g2, x_t, t, params, config)
        return _stable_sigmoid(scores.data)

    return guess


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


def quantize_params(params: dict[str, Tensor]) -> None:
    """Round every parameter to the float32 grid, kept as float64.

    Training math runs in float64, the persisted state is 32-bit; keeping
    live values on the 32-bit grid makes checkpoints lossless.
    """
    for t in params.values():
        t.data = t.data.astype(np.float32).astype(np.float64)


def zero_grads(params: dict[str, Tensor]) -> None:
    for t in params.values():
        t.zero_grad()


def collect_grads(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    """Copy gradients out of a parameter set; unused parameters get zeros."""
    out = {}
    for name, t in params.items():
        out[name] = np.zeros_like(t.data) if t.grad is None else np.array(t.grad)
    return out


def rmsprop_init(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(t.data) for name, t in params.items()}


def rmsprop_step(params: dict[str, Tensor], grads: dict[str, np.ndarray],
                 state: dict[str, np.ndarray], lr: float = 1e-3,
                 decay: float = 0.99, eps: float = 1e-8,
                 weight_decay: float = 5e-4) -> None:
    """One root-mean-square-propagation update, in place.

    g     <- g + weight_decay*theta
    s     <- decay*s + (1-decay)*g^2
    theta <- theta - lr*g / (sqrt(s) + eps)

    The decay penalty joins the gradient before the square average; a
    coordinate whose raw gradient is dead would otherwise divide its
    decay push by eps alone and blow up.  Parameters and state are
    quantized to the float32 grid after the update so checkpoint
    round-trips are exact.
    """
    for name, t in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != t.data.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        g = g + weight_decay * t.data
        s = state[name]
        s[...] = decay * s + (1.0 - decay) * g * g
        s[...] = s.astype(np.float32)
        step = lr * g / (np.sqrt(s) + eps)
        # np.asarray keeps 0-d parameters ndarray (0-d arithmetic yields scalars)
        t.data = np.asarray((t.data - step).astype(np.float32), dtype=np.float64)


# ---------------------------------------------------------------------------
# checkpoint container
# ---------------------------------------------------------------------------


def save_records(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write a self-checking container: magic, version, JSON metadata,
    named float32 arrays in sorted order, crc32 trailer."""
    buf = io.BytesIO()
    meta_blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<I", CHECKPOINT_VERSION))
    buf.write(struct.pack("<I", len(meta_blob)))
    buf.write(meta_blob)
    buf.write(struct.pack("<I", len(arrays)))
    for name in sorted(arrays):
        # astype (not ascontiguousarray) keeps 0-d arrays 0-d
        arr = np.asarray(arrays[name]).astype("<f4")
        name_blob = name.encode("utf-8")
        buf.write(struct.pack("<H", len(name_blob)))
        buf.write(name_blob)
        buf.write(struct.pack("<B", arr.ndim))
        if arr.ndim:
            buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.tobytes())
    payload = buf.getvalue()
    with open(path, "wb") as handle:
        handle.write(payload)
        handle.write(struct.pack("<I", zlib.crc32(payload)))


def load_records(path):
    """Read a container written by save_records; returns (meta, arrays).

    Arrays come back as float64 copies of the stored float32 values.
    Raises CheckpointError on version mismatch, truncation, or checksum
    failure, without returning partial state.
    """
    with open(path, "rb") as handle:
        raw = handle.read()
    if len(raw) < len(CHECKPOINT_MAGIC) + 16:
        raise CheckpointError("truncated checkpoint")
    payload = raw[:-4]
    (stored_crc,) = struct.unpack("<I", raw[-4:])
    if zlib.crc32(payload) != stored_crc:
        raise CheckpointError("checksum mismatch")
    offset = 0

    def take(n):
        nonlocal offset
        if offset + n > len(payload):
            raise CheckpointError("truncated checkpoint")
        piece = payload[offset:offset + n]
        offset += n
        return piece

    if take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file")
    (version,) = struct.unpack("<I", take(4))
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (meta_len,) = struct.unpack("<I", take(4))
    meta = json.loads(take(meta_len).decode("utf-8"))
    (count,) = struct.unpack("<I", take(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim)) if ndim else ()
        size = 1
        for extent in shape:
            size *= extent
        data = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape)
        arrays[name] = data.astype(np.float64)
    if offset != len(payload):
        raise CheckpointError("trailing bytes in checkpoint")
    return meta, arrays


def params_arrays(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: t.data for name, t in params.items()}


def set_params(params: dict[str, Tensor], arrays: dict[str, np.ndarray]) -> None:
    """Load values into an existing parameter set, name and shape checked."""
    if set(arrays) != set(params):
        raise CheckpointError("parameter names do not match")
    for name, t in params.items():
        value = np.asarray(arrays[name], dtype=np.float64)
        if value.shape != t.data.shape:
            raise CheckpointError(f"shape mismatch for {name}")
        t.data = value
