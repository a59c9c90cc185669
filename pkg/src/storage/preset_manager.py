"""Figure preset records shipped with the repository."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from ..utils.settings import load_settings

logger = logging.getLogger("PresetManager")


class PresetError(KeyError):
    """Raised for unknown or malformed preset records."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


@dataclass(frozen=True)
class FigurePreset:
    """One named sweep configuration, as stored on disk."""

    name: str
    description: str
    base: Dict
    variable: str
    grid: Dict
    precode: str = "none"
    rate: Optional[float] = None


class PresetManager:
    """Loads figure presets from a JSON file."""

    REQUIRED_KEYS = ("base", "variable", "grid")

    def __init__(self, path: Optional[Path] = None):
        """Initialize preset manager.

        Args:
            path: Preset JSON file (defaults to data/presets/figures.json)
        """
        self.path = Path(path) if path else load_settings().presets_path
        self._records: Optional[Dict[str, Dict]] = None

    def _load(self) -> Dict[str, Dict]:
        if self._records is None:
            if not self.path.exists():
                raise PresetError(f"preset file not found: {self.path}")
            with open(self.path, 'r') as f:
                self._records = json.load(f)
            logger.debug(f"Loaded {len(self._records)} presets from {self.path}")
        return self._records

    @staticmethod
    def normalize_name(name: str) -> str:
        """Accept both 'fig4a' and the short form '4a'."""
        name = str(name).strip().lower()
        return name if name.startswith("fig") else f"fig{name}"

    def names(self) -> List[str]:
        return list(self._load().keys())

    def get(self, name: str) -> FigurePreset:
        """Look up a preset.

        Args:
            name: Preset name ('fig1' or '1')

        Returns:
            FigurePreset record
        """
        key = self.normalize_name(name)
        records = self._load()
        if key not in records:
            raise PresetError(f"unknown figure preset {name!r}; available: {', '.join(records)}")

        record = records[key]
        missing = [k for k in self.REQUIRED_KEYS if k not in record]
        if missing:
            raise PresetError(f"preset {key!r} is missing {', '.join(missing)}")

        return FigurePreset(
            name=key,
            description=record.get('description', ''),
            base=dict(record['base']),
            variable=record['variable'],
            grid=dict(record['grid']),
            precode=record.get('precode', 'none'),
            rate=record.get('rate'),
        )
