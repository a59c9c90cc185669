"""Seeded Monte Carlo estimation of transmissions, throughput and data rate."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from ..analysis.model import (
    CodingConfig,
    ConfigError,
    decode_success_precode,
    erasure_no_precode,
    precode_distance,
    symbol_error_qam,
    throughput,
)
from ..coding.rlnc import full_rank_prefix
from ..field.gf import MAX_BITS, get_field

logger = logging.getLogger("MonteCarlo")

PACKET_ERASURE = "packet-erasure"
SYMBOL_LEVEL = "symbol-level"
MODES = (PACKET_ERASURE, SYMBOL_LEVEL)

DEFAULT_TRIAL_CAP = 10**8
AGREEMENT_Z = 4.0
ERASURE_BATCH = 256
SPARE_DRAW_BITS = 64
CI95_Z = float(norm.ppf(0.975))


class PlanError(ConfigError):
    """Raised for an unusable TrialPlan."""


class TrialCapExceeded(RuntimeError):
    """Raised when one trial needs more transmissions than the cap allows."""

    def __init__(self, cap: int, trial: int):
        super().__init__(
            f"trial {trial} exceeded the cap of {cap} transmissions; "
            f"erasure probability is too close to 1 for simulation")
        self.cap = cap
        self.trial = trial

    def __reduce__(self):
        return type(self), (self.cap, self.trial)


@dataclass(frozen=True)
class TrialPlan:
    """Config, trial count, master seed and channel mode of one simulation."""

    config: CodingConfig
    trials: int
    base_seed: int
    mode: str = PACKET_ERASURE
    trial_cap: int = DEFAULT_TRIAL_CAP
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise PlanError(f"trials >= 1 required, got {self.trials}")
        if self.base_seed < 0:
            raise PlanError(f"seed must be non-negative, got {self.base_seed}")
        if self.mode not in MODES:
            raise PlanError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.config.u > MAX_BITS:
            raise PlanError(f"simulation needs u <= {MAX_BITS}, got u={self.config.u}")
        if self.mode == SYMBOL_LEVEL and self.config.const_epsilon is not None:
            raise PlanError("symbol-level mode derives erasures from P_q; drop const_epsilon")
        if self.trial_cap < 1 or self.workers < 1:
            raise PlanError("trial_cap and workers must be >= 1")

    def trial_seed(self, index: int) -> np.random.SeedSequence:
        """Per-trial stream, a deterministic mix of the master seed and trial index."""
        return np.random.SeedSequence([self.base_seed, index])


@dataclass(frozen=True)
class EstimateRow:
    """Empirical estimates with standard errors and 95% half-widths."""

    mode: str
    trials: int
    mean_T: float
    S_hat: float
    R_hat: float
    erasure_rate_hat: float
    stderr_T: float
    stderr_S: float
    stderr_R: float
    ci95_T: float
    ci95_S: float
    ci95_R: float

    FIELDS = ("mode", "trials", "mean_T", "S_hat", "R_hat", "erasure_rate_hat",
              "stderr_T", "stderr_S", "stderr_R", "ci95_T", "ci95_S", "ci95_R")


@dataclass
class _Tally:
    """Integer sums so that merging partial results is exact and order-free."""

    trials: int = 0
    sum_T: int = 0
    sum_T2: int = 0
    erased: int = 0

    def add(self, transmissions: int, erased: int):
        self.trials += 1
        self.sum_T += transmissions
        self.sum_T2 += transmissions * transmissions
        self.erased += erased

    def merge(self, other: "_Tally"):
        self.trials += other.trials
        self.sum_T += other.sum_T
        self.sum_T2 += other.sum_T2
        self.erased += other.erased


class TrialRunner:
    """Runs independent decode-until-rank-K trials for one plan."""

    def __init__(self, plan: TrialPlan):
        """Initialize runner and derive channel parameters from the model.

        Args:
            plan: Trial plan
        """
        self.plan = plan
        config = plan.config
        self.field = get_field(config.u)
        # Rank deficiency after K + spare draws has probability below 2^-SPARE_DRAW_BITS
        self.spare_draws = max(8, math.ceil(SPARE_DRAW_BITS / config.u))
        self.p_q = symbol_error_qam(config.q, config.gamma_b_db, literal=config.eq4_literal)

        if config.precode_enabled:
            self.d, self.t = precode_distance(config)
            self.info_symbols = config.k
        else:
            self.d, self.t = 1, 0
            self.info_symbols = config.n

        if config.const_epsilon is not None:
            self.epsilon = config.const_epsilon
        elif config.precode_enabled:
            self.epsilon = 1.0 - decode_success_precode(config.n, self.t, self.p_q)
        else:
            self.epsilon = erasure_no_precode(config.n, self.p_q)

    def _erasures(self, rng: np.random.Generator) -> np.ndarray:
        if self.plan.mode == PACKET_ERASURE:
            return rng.random(ERASURE_BATCH) < self.epsilon
        # Corrupt-symbol count of each packet; symbol values are never materialized
        corrupt = rng.binomial(self.plan.config.n, self.p_q, size=ERASURE_BATCH)
        return corrupt > self.t

    def _received_until_decodable(self, rng: np.random.Generator) -> int:
        """Delivered combinations needed for rank K, from the coefficient stream."""
        K = self.plan.config.K
        draws = K + self.spare_draws
        vectors = self.field.random_symbols(rng, (draws, K))
        while True:
            needed = full_rank_prefix(vectors, self.field)
            if needed is not None:
                return needed
            vectors = np.vstack([vectors, self.field.random_symbols(rng, (draws, K))])

    def _transmissions_for(self, rng: np.random.Generator, received: int, index: int) -> int:
        """Transmissions until the given number of packets got through."""
        cap = self.plan.trial_cap
        transmissions = 0
        while True:
            delivered = np.flatnonzero(~self._erasures(rng))
            if delivered.size >= received:
                transmissions += int(delivered[received - 1]) + 1
                break
            received -= delivered.size
            transmissions += ERASURE_BATCH
            if transmissions > cap:
                break

        if transmissions > cap:
            logger.error(f"Trial {index} passed {cap} transmissions, aborting")
            raise TrialCapExceeded(cap, index)
        return transmissions

    def run_trial(self, index: int) -> Tuple[int, int]:
        """Transmit until the receiver reaches rank K.

        The coefficient and channel draws use two child streams of the
        trial seed.

        Args:
            index: Trial index (selects the random stream)

        Returns:
            (total transmissions T, erased transmissions)
        """
        coefficient_seed, channel_seed = self.plan.trial_seed(index).spawn(2)
        received = self._received_until_decodable(np.random.default_rng(coefficient_seed))
        transmissions = self._transmissions_for(np.random.default_rng(channel_seed),
                                                received, index)
        return transmissions, transmissions - received

    def run_chunk(self, indices: range) -> _Tally:
        tally = _Tally()
        for index in indices:
            tally.add(*self.run_trial(index))
        return tally

    def _chunks(self) -> List[range]:
        trials = self.plan.trials
        count = min(trials, max(10, 4 * self.plan.workers))
        bounds = np.linspace(0, trials, count + 1).astype(int)
        return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def run(self) -> EstimateRow:
        """Run every trial of the plan and aggregate."""
        plan = self.plan
        chunks = self._chunks()
        logger.info(f"Running {plan.trials} trials ({plan.mode}, K={plan.config.K}, "
                    f"n={plan.config.n}, q={plan.config.q}, workers={plan.workers})")

        total = _Tally()
        if plan.workers > 1:
            with ProcessPoolExecutor(max_workers=plan.workers) as pool:
                futures = [pool.submit(_run_chunk, plan, chunk) for chunk in chunks]
                for future in as_completed(futures):
                    total.merge(future.result())
                    logger.info(f"{total.trials}/{plan.trials} trials done")
        else:
            for chunk in chunks:
                total.merge(self.run_chunk(chunk))
                logger.info(f"{total.trials}/{plan.trials} trials done")

        return self._estimate(total)

    def _estimate(self, tally: _Tally) -> EstimateRow:
        config = self.plan.config
        trials = tally.trials
        mean_T = tally.sum_T / trials
        if trials > 1:
            variance = (trials * tally.sum_T2 - tally.sum_T ** 2) / (trials * (trials - 1))
            stderr_T = math.sqrt(max(variance, 0.0) / trials)
        else:
            stderr_T = 0.0

        scale = config.K * self.info_symbols / (config.n + config.K)
        s_hat = scale / mean_T
        # Delta method on S = scale / E[T]
        stderr_S = s_hat * stderr_T / mean_T
        bits = self.info_symbols * config.u

        return EstimateRow(
            mode=self.plan.mode,
            trials=trials,
            mean_T=mean_T,
            S_hat=s_hat,
            R_hat=s_hat * bits,
            erasure_rate_hat=tally.erased / tally.sum_T,
            stderr_T=stderr_T,
            stderr_S=stderr_S,
            stderr_R=stderr_S * bits,
            ci95_T=CI95_Z * stderr_T,
            ci95_S=CI95_Z * stderr_S,
            ci95_R=CI95_Z * stderr_S * bits,
        )


def _run_chunk(plan: TrialPlan, indices: range) -> _Tally:
    """Run one chunk of trials inside a worker process."""
    return TrialRunner(plan).run_chunk(indices)


def run(plan: TrialPlan) -> EstimateRow:
    """Estimate T, S and R for a plan by direct simulation."""
    return TrialRunner(plan).run()


def z_score(estimate: float, target: float, stderr: float) -> float:
    """Standardized distance of an estimate from its analytic target."""
    if stderr > 0.0:
        return (estimate - target) / stderr
    return 0.0 if math.isclose(estimate, target, rel_tol=1e-12, abs_tol=1e-15) else math.inf


@dataclass(frozen=True)
class ValidationRow:
    """Simulated versus analytic values for one channel mode."""

    mode: str
    mean_T: float
    S_hat: float
    S_model: float
    stderr_S: float
    ci95_S: float
    z_S: float
    R_hat: float
    R_model: float
    z_R: float
    erasure_hat: float
    erasure_model: float

    FIELDS = ("mode", "mean_T", "S_hat", "S_model", "stderr_S", "ci95_S", "z_S",
              "R_hat", "R_model", "z_R", "erasure_hat", "erasure_model")

    @property
    def agrees(self) -> bool:
        return abs(self.z_S) < AGREEMENT_Z and abs(self.z_R) < AGREEMENT_Z


@dataclass(frozen=True)
class ValidationReport:
    config: CodingConfig
    trials: int
    base_seed: int
    rows: List[ValidationRow] = dataclass_field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return all(row.agrees for row in self.rows)


def validate(config: CodingConfig, trials: int, base_seed: int,
             trial_cap: int = DEFAULT_TRIAL_CAP, workers: int = 1,
             modes: Optional[Tuple[str, ...]] = None) -> ValidationReport:
    """Simulate in both channel modes and compare against the analytic model.

    With pre-coding the symbol-level target is S_LB for the same t; the
    binomial tail is exact for the simulated bounded-distance decoder.
    A fixed erasure probability only supports packet-erasure mode.

    Args:
        config: Operating point
        trials: Trials per mode
        base_seed: Master seed (shared by both modes)
        trial_cap: Transmission cap per trial
        workers: Worker processes
        modes: Modes to run (default: all applicable)

    Returns:
        Report with one row per mode; disagreement is |z| >= 4
    """
    analytic = throughput(config)
    if modes is None:
        modes = (PACKET_ERASURE,) if config.const_epsilon is not None else MODES

    rows = []
    for mode in modes:
        plan = TrialPlan(config=config, trials=trials, base_seed=base_seed, mode=mode,
                         trial_cap=trial_cap, workers=workers)
        estimate = run(plan)
        row = ValidationRow(
            mode=mode,
            mean_T=estimate.mean_T,
            S_hat=estimate.S_hat,
            S_model=analytic.S,
            stderr_S=estimate.stderr_S,
            ci95_S=estimate.ci95_S,
            z_S=z_score(estimate.S_hat, analytic.S, estimate.stderr_S),
            R_hat=estimate.R_hat,
            R_model=analytic.R,
            z_R=z_score(estimate.R_hat, analytic.R, estimate.stderr_R),
            erasure_hat=estimate.erasure_rate_hat,
            erasure_model=analytic.epsilon,
        )
        if not row.agrees:
            logger.warning(f"{mode}: S_hat={row.S_hat:.6g} vs S={row.S_model:.6g} (z={row.z_S:.2f})")
        rows.append(row)

    return ValidationReport(config=config, trials=trials, base_seed=base_seed, rows=rows)
