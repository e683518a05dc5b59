# Utils package for hutxosim

from .config import (
    BenchConfig,
    ExperimentConfig,
    HutxoConfig,
    LogfireConfig,
    ValidatorConfig,
    load_config,
)

__all__ = [
    "BenchConfig",
    "ExperimentConfig",
    "HutxoConfig",
    "LogfireConfig",
    "ValidatorConfig",
    "load_config",
]
