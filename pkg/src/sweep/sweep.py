"""Parameter sweeps over n, u and k, exhaustive optimum search, and figure presets."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..analysis.model import CodingConfig, ConfigError, MetricsRow, throughput
from ..storage.preset_manager import FigurePreset

logger = logging.getLogger("Sweep")

VARIABLES = ("n", "u", "k")
PRECODE_NONE = "none"
PRECODE_FIXED_RATE = "fixed-rate"
PRECODE_FIXED_K = "fixed-k"
PRECODE_MODES = (PRECODE_NONE, PRECODE_FIXED_RATE, PRECODE_FIXED_K)
OBJECTIVES = ("S", "R")


class SweepError(ValueError):
    """Raised for malformed sweep grids, ranges or modes."""


def build_grid(start: int, stop: int, step: int = 1, num: Optional[int] = None,
               spacing: str = "linear") -> Tuple[int, ...]:
    """Integer grid from start to stop inclusive.

    Args:
        start: First value
        stop: Last value (included when reachable)
        step: Step for linear spacing
        num: Number of points for geometric spacing
        spacing: 'linear' or 'geometric' (rounded, duplicates removed)

    Returns:
        Strictly increasing tuple of ints
    """
    if stop < start:
        raise SweepError(f"empty range: start={start} > stop={stop}")
    if spacing == "geometric":
        if start < 1 or not num or num < 1:
            raise SweepError("geometric grids need start >= 1 and num >= 1")
        values = np.unique(np.rint(np.geomspace(start, stop, num)).astype(np.int64))
        return tuple(int(v) for v in values)
    if spacing != "linear":
        raise SweepError(f"unknown grid spacing {spacing!r}")
    if step < 1:
        raise SweepError(f"step must be >= 1, got {step}")
    return tuple(range(start, stop + 1, step))


@dataclass(frozen=True)
class SweepSpec:
    """Base config, swept variable, grid and pre-code regime."""

    base: CodingConfig
    variable: str
    grid: Tuple[int, ...]
    precode_mode: str = PRECODE_NONE
    rate: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(v) for v in self.grid))
        if self.variable not in VARIABLES:
            raise SweepError(f"variable must be one of {', '.join(VARIABLES)}, got {self.variable!r}")
        if not self.grid:
            raise SweepError("grid must not be empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise SweepError("grid must be strictly increasing")
        if self.precode_mode not in PRECODE_MODES:
            raise SweepError(f"precode mode must be one of {', '.join(PRECODE_MODES)}")
        if self.precode_mode == PRECODE_FIXED_RATE:
            if self.rate is None or not 0.0 < self.rate <= 1.0:
                raise SweepError(f"fixed-rate pre-coding needs a rate in (0, 1], got {self.rate}")
            if self.variable == "k":
                raise SweepError("k is derived from the rate in fixed-rate sweeps")
        if self.variable == "k" and self.precode_mode != PRECODE_FIXED_K:
            raise SweepError("sweeping k requires the fixed-k pre-code mode")

    def config_at(self, value: int) -> CodingConfig:
        """Operating point for one grid value."""
        base = self.base
        n = value if self.variable == "n" else base.n
        q = (1 << value) if self.variable == "u" else base.q

        if self.precode_mode == PRECODE_NONE:
            return replace(base, n=n, q=q, k=None, precode_enabled=False)
        if self.precode_mode == PRECODE_FIXED_RATE:
            k = max(1, math.ceil(self.rate * n - 1e-9))
            return replace(base, n=n, q=q, k=k, precode_enabled=True)
        k = value if self.variable == "k" else base.k
        return replace(base, n=n, q=q, k=k, precode_enabled=True)


@dataclass(frozen=True)
class SweepResult:
    variable: str
    grid: Tuple[int, ...]
    rows: List[MetricsRow]
    argmax_S: int
    argmax_R: int

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=np.float64)


def _argmax(grid: Sequence[int], values: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the smaller grid value on ties
    return grid[int(np.argmax(values))]


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate the model at every grid point.

    Args:
        spec: Sweep specification
        workers: Thread workers; output order always follows the grid

    Returns:
        Rows in grid order plus argmax of S and of R
    """
    configs = [spec.config_at(value) for value in spec.grid]
    logger.info(f"Sweeping {spec.variable} over {len(spec.grid)} points "
                f"[{spec.grid[0]}, {spec.grid[-1]}], pre-code {spec.precode_mode}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(throughput, configs))
    else:
        rows = [throughput(config) for config in configs]

    s = np.array([row.S for row in rows])
    r = np.array([row.R for row in rows])
    result = SweepResult(spec.variable, spec.grid, rows, _argmax(spec.grid, s), _argmax(spec.grid, r))
    logger.info(f"argmax_S={result.argmax_S} argmax_R={result.argmax_R}")
    return result


def optimize(base: CodingConfig, variable: str, lo: int, hi: int, objective: str = "S",
             precode_mode: str = PRECODE_NONE, rate: Optional[float] = None,
             workers: int = 1) -> Tuple[int, MetricsRow]:
    """Exhaustive scan of variable over [lo, hi]; exact on the scanned range.

    Args:
        base: Base operating point
        variable: 'n', 'u' or 'k'
        lo: Lower end (inclusive)
        hi: Upper end (inclusive)
        objective: 'S' or 'R'
        precode_mode: Pre-code regime applied at each point
        rate: Pre-code rate for fixed-rate mode
        workers: Thread workers

    Returns:
        (best value, its MetricsRow), ties toward the smaller value
    """
    if objective not in OBJECTIVES:
        raise SweepError(f"objective must be S or R, got {objective!r}")
    if lo > hi:
        raise SweepError(f"empty range: lo={lo} > hi={hi}")

    spec = SweepSpec(base, variable, tuple(range(lo, hi + 1)), precode_mode, rate)
    result = run_sweep(spec, workers=workers)
    best = result.argmax_S if objective == "S" else result.argmax_R
    return best, result.rows[spec.grid.index(best)]


def preset_base(preset: FigurePreset, **toggles) -> CodingConfig:
    """Base CodingConfig of a preset, with optional model toggles."""
    base = preset.base
    k = base.get("k")
    try:
        return CodingConfig.from_u(K=base["K"], u=base["u"], n=base["n"], gamma_b_db=base["snr_db"],
                                   precode_k=k, **toggles)
    except KeyError as e:
        raise ConfigError(f"preset {preset.name!r} base lacks {e.args[0]!r}")


def preset_spec(preset: FigurePreset, **toggles) -> SweepSpec:
    """SweepSpec described by a figure preset."""
    grid = build_grid(**preset.grid)
    return SweepSpec(preset_base(preset, **toggles), preset.variable, grid, preset.precode, preset.rate)
