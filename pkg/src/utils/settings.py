"""Environment-driven defaults."""
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent


class SettingsError(ValueError):
    """Raised when an environment variable holds an unusable value."""


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise SettingsError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise SettingsError(f"{name} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults, overridable from the command line."""

    log_level: str = "WARNING"
    workers: int = 1
    trial_cap: int = 10**8
    presets_path: Path = PROJECT_ROOT / "data" / "presets" / "figures.json"


def load_settings(env_file: Optional[str] = None) -> Settings:
    """Build settings from the environment.

    Args:
        env_file: Optional extra .env file to load before reading variables

    Returns:
        Settings record
    """
    if env_file:
        load_dotenv(env_file, override=True)

    presets = os.getenv("RLNC_PRESETS_PATH")
    return Settings(
        log_level=os.getenv("RLNC_LOG_LEVEL", "WARNING").upper(),
        workers=_int_env("RLNC_WORKERS", 1),
        trial_cap=_int_env("RLNC_TRIAL_CAP", 10**8),
        presets_path=Path(presets) if presets else Settings.presets_path,
    )
