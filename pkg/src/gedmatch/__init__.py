"""Graph edit distance via node matching.

Solver stack: an exact branch-and-bound oracle and a linear-assignment
baseline for reference costs, plus a trainable denoising pipeline that
searches the matching space with a discrete diffusion process, differentiable
Gumbel-Sinkhorn relaxation, and an adversarially trained ranking signal, all
without ground-truth labels.
"""

from gedmatch.data import (
    CorpusConfig,
    GraphEntry,
    PairRecord,
    build_corpus,
    corpus_num_labels,
    random_graph,
    read_corpus,
    read_graphs,
    read_pairs,
    synthesize_pair,
    training_pairs,
    write_corpus,
)
from gedmatch.diffusion import (
    NoiseSchedule,
    ReverseSchedule,
    forward_sample,
    linear_schedule,
    posterior_entry,
    reverse_process,
    reverse_step,
)
from gedmatch.graphs import (
    EditPath,
    Graph,
    MatchingReport,
    NodeMatching,
    OrientationError,
    apply_edit_path,
    derive_edit_path,
    edit_cost,
    greedy_decode,
    is_isomorphic_under,
    orient_pair,
    validate_matching,
)
from gedmatch.losses import (
    lambda_schedule,
    loss_bpr,
    loss_discriminator,
    loss_explore,
    loss_ged_regression,
    loss_generator,
    loss_hinge,
    loss_rec,
    normalized_ged_score,
)
from gedmatch.metrics import (
    MetricsReport,
    compute_metrics,
    decode_pairs,
    evaluate,
    precision_at_k,
)
from gedmatch.nets import (
    CheckpointError,
    denoiser_config,
    denoiser_forward,
    discriminator_config,
    discriminator_forward,
    init_net_params,
)
from gedmatch.oracle import SizeLimitError, assignment_baseline, exact_ged
from gedmatch.sinkhorn import gumbel_sinkhorn, sinkhorn_noise_free
from gedmatch.trainer import (
    TrainConfig,
    TrainState,
    checkpoint,
    init_state,
    restore,
    train,
    train_step,
)

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "CorpusConfig",
    "EditPath",
    "Graph",
    "GraphEntry",
    "MatchingReport",
    "MetricsReport",
    "NodeMatching",
    "NoiseSchedule",
    "OrientationError",
    "PairRecord",
    "ReverseSchedule",
    "SizeLimitError",
    "TrainConfig",
    "TrainState",
    "apply_edit_path",
    "assignment_baseline",
    "build_corpus",
    "checkpoint",
    "compute_metrics",
    "corpus_num_labels",
    "decode_pairs",
    "denoiser_config",
    "denoiser_forward",
    "derive_edit_path",
    "discriminator_config",
    "discriminator_forward",
    "edit_cost",
    "evaluate",
    "exact_ged",
    "forward_sample",
    "greedy_decode",
    "gumbel_sinkhorn",
    "init_net_params",
    "init_state",
    "is_isomorphic_under",
    "lambda_schedule",
    "linear_schedule",
    "loss_bpr",
    "loss_discriminator",
    "loss_explore",
    "loss_ged_regression",
    "loss_generator",
    "loss_hinge",
    "loss_rec",
    "normalized_ged_score",
    "orient_pair",
    "posterior_entry",
    "precision_at_k",
    "random_graph",
    "read_corpus",
    "read_graphs",
    "read_pairs",
    "restore",
    "reverse_process",
    "reverse_step",
    "sinkhorn_noise_free",
    "synthesize_pair",
    "train",
    "train_step",
    "training_pairs",
    "validate_matching",
    "write_corpus",
    "__version__",
]
