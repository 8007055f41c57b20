"""Transfer clustering with confidence-weighted pairwise constraints and
perturbation self-supervision."""

from supreme._core import (
    Domain,
    EmbeddingDataset,
    HeadModel,
    ModelConfig,
    RunConfig,
    SynthesisConfig,
    TransferPair,
    ValidationError,
    __version__,
    balance_loss,
    binary_loss,
    clustering_accuracy,
    clustering_loss,
    confidence_weights,
    hungarian,
    initial_assignments,
    kmeans,
    nmi,
    pair_constraints,
    perturb,
    pretrain,
    read_dataset,
    run_eval,
    run_init,
    run_pretrain,
    run_synth,
    run_train,
    source_xent,
    synthesize_transfer_pair,
    write_dataset,
    write_dataset_csv,
)

__all__ = [
    "Domain",
    "EmbeddingDataset",
    "HeadModel",
    "ModelConfig",
    "RunConfig",
    "SynthesisConfig",
    "TransferPair",
    "ValidationError",
    "__version__",
    "balance_loss",
    "binary_loss",
    "clustering_accuracy",
    "clustering_loss",
    "confidence_weights",
    "hungarian",
    "initial_assignments",
    "kmeans",
    "nmi",
    "pair_constraints",
    "perturb",
    "pretrain",
    "read_dataset",
    "run_eval",
    "run_init",
    "run_pretrain",
    "run_synth",
    "run_train",
    "source_xent",
    "synthesize_transfer_pair",
    "write_dataset",
    "write_dataset_csv",
]
