"""Latent dimension ranking, swap-based attribute editing and evaluation."""

from ._core import (
    DciReport,
    EditResult,
    FeatureRanking,
    InversionResult,
    IoError,
    LatentDataset,
    ToyGenerator,
    ValidationError,
    choose_k,
    compute_dci,
    dci_scores,
    default_k_grid,
    default_tau,
    frechet_distance,
    identity_preservation,
    invert,
    kernel_distance,
    linear_edit_baseline,
    load_ranking,
    rank_forest,
    rank_linear_coef,
    rank_score_topk,
    read_dataset,
    read_matrix,
    run_cli,
    save_ranking,
    semantic_correctness,
    split_train_test,
    swap_top_k,
    write_dataset,
    write_matrix,
)

__version__ = "0.1.0"
