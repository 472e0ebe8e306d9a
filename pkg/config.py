# config.py
import os
from typing import NamedTuple

from dotenv import load_dotenv

load_dotenv()

COST_MODELS = ("unit", "statespace")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class WorkbenchConfig(NamedTuple):
    """
    Tunables shared by the propagation library and the CLI.

    Every field can be overridden from the environment (or a .env file)
    and again by CLI flags.
    """
    # Max abs deviation accepted by `verify`
    tolerance: float = 1e-9

    # Joint-table oracle size limit (cells)
    oracle_limit: int = 2 ** 20

    # Factorial enumeration limit for the tour oracle (nodes)
    brute_force_limit: int = 9

    # Per-pass weight: "unit" or "statespace"
    cost_model: str = "unit"

    log_level: str = "WARNING"


_ENV_FIELDS = {
    "tolerance": ("MSBN_TOLERANCE", float),
    "oracle_limit": ("MSBN_ORACLE_LIMIT", int),
    "brute_force_limit": ("MSBN_BRUTE_FORCE_LIMIT", int),
    "cost_model": ("MSBN_COST_MODEL", str),
    "log_level": ("MSBN_LOG_LEVEL", str),
}


def load_config(**overrides) -> WorkbenchConfig:
    """
    Build the effective configuration: defaults, then environment, then
    explicit overrides (None values are ignored).
    """
    values = {}
    for field, (env_name, cast) in _ENV_FIELDS.items():
        raw = os.getenv(env_name)
        if raw is None or raw.strip() == "":
            continue
        try:
            values[field] = cast(raw)
        except ValueError:
            raise ValueError(f"{env_name}: cannot parse {raw!r} as {cast.__name__}")

    values.update({k: v for k, v in overrides.items() if v is not None})
    config = WorkbenchConfig(**values)

    if config.cost_model not in COST_MODELS:
        raise ValueError(
            f"cost_model must be one of {COST_MODELS}, got {config.cost_model!r}"
        )
    if config.log_level.upper() not in LOG_LEVELS:
        raise ValueError(
            f"log_level must be one of {LOG_LEVELS}, got {config.log_level!r}"
        )
    if config.tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {config.tolerance}")
    if config.oracle_limit < 1:
        raise ValueError(f"oracle_limit must be >= 1, got {config.oracle_limit}")

    return config
