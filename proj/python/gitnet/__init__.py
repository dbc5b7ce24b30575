"""GIT-Net operator learning: PCA encode, lift, GIT layers, project, decode."""

from ._core import (
    Checkpoint,
    ConfigError,
    GitNet,
    IoError,
    NumericError,
    PcaBasis,
    ShapeError,
    advection_dataset,
    empirical_loss,
    fit_pca,
    flops,
    flops_fno_scaling,
    flops_gitnet_exact,
    generate,
    init_gitnet,
    instrumented_flops,
    linear_operator_dataset,
    load_checkpoint,
    poisson_dataset,
    read_dataset,
    relative_test_error,
    sample_grf_periodic_1d,
    train,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
