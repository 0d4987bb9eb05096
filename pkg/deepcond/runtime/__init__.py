from .logging import configure_logging, timed
from .state import (
    config_hash,
    compute_environment_fingerprint,
    provenance,
    atomic_write,
    write_json,
    dumps_json,
    write_csv,
    dumps_csv,
    read_matrix,
)
from .config import RunConfig, resolve_config, DEFAULTS, COMMON_DEFAULTS, ENV_SEED, ENV_THREADS

__all__ = [
    "configure_logging",
    "timed",
    "config_hash",
    "compute_environment_fingerprint",
    "provenance",
    "atomic_write",
    "write_json",
    "dumps_json",
    "write_csv",
    "dumps_csv",
    "read_matrix",
    "RunConfig",
    "resolve_config",
    "DEFAULTS",
    "COMMON_DEFAULTS",
    "ENV_SEED",
    "ENV_THREADS",
]
