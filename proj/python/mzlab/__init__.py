"""MuZero latent-model experiments on CartPole and MountainCar."""

from ._mzlab import (  # noqa: F401
    CheckpointError,
    ConfigError,
    EnvError,
    IterationMetrics,
    StepResult,
    Trainer,
    config_text,
    env_spec,
    fit_pca,
    gradcheck,
    linear_anchors,
    parse_config,
    reset,
    scalar_to_support,
    support_to_scalar,
    transition,
)

__all__ = [name for name in dir() if not name.startswith("_")]
