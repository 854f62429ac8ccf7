import os
from dotenv import load_dotenv

load_dotenv()

DEFAULT_THREADS = 1
DEFAULT_SEED = 0
DEFAULT_RESTARTS = 32
DEFAULT_MAX_TIGHT_VERTICES = 4096
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _positive_int(name: str, default: int, allow_zero: bool = False) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise RuntimeError(f"{name} out of range: {value}")
    return value


def thread_count() -> int:
    return _positive_int("UPBBELL_THREADS", DEFAULT_THREADS)


def default_seed() -> int:
    return _positive_int("UPBBELL_SEED", DEFAULT_SEED, allow_zero=True)


def default_restarts() -> int:
    return _positive_int("UPBBELL_RESTARTS", DEFAULT_RESTARTS)


def max_tight_vertices() -> int:
    return _positive_int("UPBBELL_MAX_TIGHT_VERTICES", DEFAULT_MAX_TIGHT_VERTICES)


def log_level() -> str:
    level = os.getenv("UPBBELL_LOG_LEVEL", "WARNING").strip().upper()
    if level not in LOG_LEVELS:
        raise RuntimeError(f"UPBBELL_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    return level
