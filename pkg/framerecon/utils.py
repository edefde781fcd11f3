import os
import warnings
from typing import Optional

OUTPUT_DIR_ENV = "FRAMERECON_OUTPUT_DIR"
WORKERS_ENV = "FRAMERECON_WORKERS"
DEFAULT_OUTPUT_DIR = "results"


def get_env_int(name: str, default: int, minimum: Optional[int] = None) -> int:
    """Return an integer environment variable value with fallback."""
    value = os.getenv(name)
    if value is None:
        return default

    try:
        parsed = int(value)
    except (TypeError, ValueError):
        warnings.warn(
            f"Invalid value for {name}: {value!r}. Using default {default}.",
            RuntimeWarning,
            stacklevel=2,
        )
        return default

    if minimum is not None and parsed < minimum:
        warnings.warn(
            f"Value for {name} must be >= {minimum}, got {parsed}. Using default {default}.",
            RuntimeWarning,
            stacklevel=2,
        )
        return default
    return parsed


def get_env_str(name: str, default: str) -> str:
    """Return a non-empty string environment variable value with fallback."""
    value = os.getenv(name)
    if value is None:
        return default
    value = value.strip()
    if not value:
        warnings.warn(
            f"Empty value for {name}. Using default {default!r}.",
            RuntimeWarning,
            stacklevel=2,
        )
        return default
    return value


def default_output_dir() -> str:
    return get_env_str(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


def default_workers() -> int:
    return get_env_int(WORKERS_ENV, 1, minimum=1)
