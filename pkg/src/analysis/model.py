"""Closed-form throughput and data-rate model for random linear coding.

Covers the rank distribution of random K x j matrices, E[N], the QAM symbol
error probability over AWGN, the length-dependent erasure probability, the
Gilbert-Varshamov distance of a pre-code and the resulting lower bounds on
throughput and data rate.
"""
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import erfc, gammaln, logsumexp

# Below this length binomial sums are evaluated with exact integers
EXACT_MAX_N = 64
SERIES_TOLERANCE = 1e-12
SERIES_MAX_TERMS = 100000
# Relative width of the band around the GV bound settled with exact integers
GV_LOG_SLACK = 1e-10
LOG_FLOAT_MAX = float(np.log(np.finfo(np.float64).max))


class ConfigError(ValueError):
    """Raised when a CodingConfig violates one of its invariants."""


def _is_power_of_two(q: int) -> bool:
    return q >= 2 and q & (q - 1) == 0


@dataclass(frozen=True)
class CodingConfig:
    """One operating point: generation size, packet length, alphabet and SNR.

    Without pre-coding k is always n. The toggles select the as-printed
    variants of the QAM and GV formulas, and const_epsilon replaces the
    length-dependent erasure model with a fixed erasure probability.
    """

    K: int
    n: int
    q: int
    gamma_b_db: float
    k: Optional[int] = None
    precode_enabled: bool = False
    eq4_literal: bool = False
    gv_literal: bool = False
    const_epsilon: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise ConfigError(f"K >= 1 required, got K={self.K}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError(f"n >= 1 required, got n={self.n}")
        if not isinstance(self.q, (int, np.integer)) or not _is_power_of_two(int(self.q)):
            raise ConfigError(f"q must be 2^u with u >= 1, got q={self.q}")

        if not self.precode_enabled or self.k is None:
            object.__setattr__(self, "k", int(self.n))
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"1 <= k <= n required, got k={self.k}, n={self.n}")

        if self.const_epsilon is not None and not 0.0 <= self.const_epsilon <= 1.0:
            raise ConfigError(f"const_epsilon must lie in [0, 1], got {self.const_epsilon}")
        if math.isnan(self.gamma_b_db):
            raise ConfigError("gamma_b_db must be a number")

    @classmethod
    def from_u(cls, K: int, u: int, n: int, gamma_b_db: float,
               precode_k: Optional[int] = None, **toggles) -> "CodingConfig":
        """Build a config from the field exponent u (q = 2^u)."""
        if not isinstance(u, (int, np.integer)) or u < 1:
            raise ConfigError(f"u >= 1 required, got u={u}")
        return cls(K=K, n=n, q=1 << int(u), gamma_b_db=gamma_b_db, k=precode_k,
                   precode_enabled=precode_k is not None, **toggles)

    @property
    def u(self) -> int:
        return int(self.q).bit_length() - 1

    @property
    def rate(self) -> float:
        """Pre-code rate R_pc = k/n (1 without pre-coding)."""
        return self.k / self.n


@dataclass(frozen=True)
class MetricsRow:
    """Model outputs for one operating point.

    Without pre-coding d = 1, t = 0 and the lower bounds equal S and R. With
    pre-coding S and R carry the lower bounds and epsilon the bound's erasure
    probability.
    """

    P_q: float
    epsilon: float
    EN: float
    S: float
    R: float
    d: int
    t: int
    S_LB: float
    R_LB: float

    FIELDS = ("P_q", "epsilon", "EN", "S", "R", "d", "t", "S_LB", "R_LB")

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def snr_db_to_linear(gamma_b_db: float) -> float:
    try:
        return 10.0 ** (gamma_b_db / 10.0)
    except OverflowError:
        return math.inf


def qfunc(x: float) -> float:
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt 2)."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def _log_rank_cdf(K: int, q: float, j: int) -> float:
    exponents = np.arange(K, dtype=np.float64) - j
    # j == K gives log1p(-1) = -inf
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log1p(-np.exp(exponents * math.log(q)))))


def rank_cdf(K: int, q: float, j: int) -> float:
    """Pr(N <= j): probability that a random K x j matrix over GF(q) has rank K.

    Args:
        K: Generation size
        q: Field size
        j: Number of received combinations

    Returns:
        prod_{i=0}^{K-1} (1 - q^(i-j)) for j >= K, else 0
    """
    if j < K:
        return 0.0
    return math.exp(_log_rank_cdf(K, q, j))


def expected_N(K: int, q: float) -> float:
    """E[N] = sum_{i=1}^{K} 1 / (1 - q^-i)."""
    if K <= 0:
        return 0.0
    i = np.arange(1, K + 1, dtype=np.float64)
    return float(np.sum(1.0 / -np.expm1(-i * math.log(q))))


def expected_N_series(K: int, q: float, tolerance: float = SERIES_TOLERANCE) -> float:
    """E[N] = K + sum_{j>=K} (1 - Pr(N <= j)), truncated once a term drops below tolerance."""
    total = float(K)
    for j in range(K, K + SERIES_MAX_TERMS):
        term = -math.expm1(_log_rank_cdf(K, q, j))
        total += term
        if term < tolerance:
            break
    return total


def expected_transmissions(K: int, q: float, epsilon: float) -> float:
    """Expected channel uses to decode: E[N] / (1 - epsilon)."""
    if epsilon >= 1.0:
        return math.inf
    return expected_N(K, q) / (1.0 - epsilon)


def packets_per_transmission(K: int, q: float, epsilon: float) -> float:
    """Average source packets delivered per transmission, K (1 - epsilon) / E[N]."""
    return K * (1.0 - epsilon) / expected_N(K, q)


def _qam_energy_ratio(q: int, gamma_b: float) -> float:
    """3 gamma_b log2(q) / (q - 1), evaluated in log space."""
    if gamma_b == 0.0:
        return 0.0
    log_ratio = math.log(3.0 * gamma_b) + math.log(math.log2(q)) - math.log(q - 1)
    if log_ratio > LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_ratio)


def symbol_error_qam(q: int, gamma_b_db: float, literal: bool = False) -> float:
    """Symbol error probability of q-ary QAM over AWGN with optimum detection.

    Args:
        q: Constellation size (exact for log2 q even)
        gamma_b_db: SNR per bit in dB
        literal: Apply Q to 3 gamma_b log2 q / (q - 1) itself instead of its square root

    Returns:
        P_q clamped to [0, 1]
    """
    if q < 2:
        raise ConfigError(f"q >= 2 required, got q={q}")
    argument = _qam_energy_ratio(q, snr_db_to_linear(gamma_b_db))
    if not literal:
        argument = math.sqrt(argument)
    # 1/sqrt(q) through logs; q may be far beyond float range
    per_rail = 2.0 * (1.0 - math.exp(-0.5 * math.log(q))) * qfunc(argument)
    p_q = 1.0 - (1.0 - per_rail) ** 2
    return min(1.0, max(0.0, p_q))


def success_no_precode(n: int, P_q: float) -> float:
    """(1 - P_q)^n, the probability that all n symbols arrive intact."""
    if P_q >= 1.0:
        return 0.0
    return math.exp(n * math.log1p(-P_q))


def erasure_no_precode(n: int, P_q: float) -> float:
    """epsilon = 1 - (1 - P_q)^n for an uncoded packet of n symbols."""
    if P_q >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-P_q))


def _log_gv_terms(n: int, q: int) -> np.ndarray:
    """log of C(n-1, i) (q-1)^i for i = 0..n-1."""
    i = np.arange(n, dtype=np.float64)
    log_binom = gammaln(n) - gammaln(i + 1) - gammaln(n - i)
    return log_binom + i * math.log(q - 1)


def _gv_count_below(n: int, k: int, q: int) -> int:
    """Number of prefix lengths m in 1..n with sum_{i<m} C(n-1,i)(q-1)^i < q^(n-k)."""
    if n <= EXACT_MAX_N:
        bound = q ** (n - k)
        partial, count = 0, 0
        for i in range(n):
            partial += math.comb(n - 1, i) * (q - 1) ** i
            if partial >= bound:
                break
            count += 1
        return count

    cumulative = np.logaddexp.accumulate(_log_gv_terms(n, q))
    log_bound = (n - k) * math.log(q)
    slack = GV_LOG_SLACK * max(1.0, log_bound)
    count = int(np.count_nonzero(cumulative < log_bound - slack))
    undecided = int(np.count_nonzero(cumulative <= log_bound + slack)) - count

    # prefixes within floating-point reach of the bound are compared exactly
    if undecided:
        bound = q ** (n - k)
        for m in range(count + 1, count + undecided + 1):
            if _gv_prefix_exact(n, q, m) >= bound:
                break
            count += 1
    return count


def _gv_partial_exact(n: int, q: int, start: int, stop: int) -> int:
    """sum_{start <= i < stop} C(n-1,i)(q-1)^i in exact integers."""
    if start >= stop:
        return 0
    term = math.comb(n - 1, start) * (q - 1) ** start
    total = 0
    for i in range(start, stop):
        total += term
        term = term * (n - 1 - i) * (q - 1) // (i + 1)
    return total


def _gv_prefix_exact(n: int, q: int, m: int) -> int:
    """Exact prefix sum of the first m terms, summing whichever side is shorter.

    The full sum is q^(n-1) by the binomial theorem.
    """
    if m <= n - m:
        return _gv_partial_exact(n, q, 0, m)
    return q ** (n - 1) - _gv_partial_exact(n, q, m, n)


def gv_distance(n: int, k: int, q: int, literal: bool = False) -> int:
    """Minimum distance guaranteed by the Gilbert-Varshamov bound.

    Args:
        n: Code length
        k: Code dimension
        q: Alphabet size
        literal: Return the as-printed infimum (smallest d whose sum reaches q^(n-k))

    Returns:
        Largest d with sum_{i=0}^{d-2} C(n-1,i)(q-1)^i < q^(n-k), in [1, n]
        (the infimum is likewise capped at n)
    """
    if not 1 <= k <= n:
        raise ConfigError(f"1 <= k <= n required, got k={k}, n={n}")
    below = _gv_count_below(n, k, q)
    if literal:
        return min(n, below + 2)
    return max(1, min(n, below + 1))


def decode_success_precode(n: int, t: int, P_q: float) -> float:
    """Probability of at most t symbol errors among n, errors i.i.d. with probability P_q.

    Args:
        n: Symbols per packet
        t: Correctable symbol errors
        P_q: Symbol error probability

    Returns:
        sum_{i=0}^{t} C(n,i) P_q^i (1 - P_q)^(n-i)
    """
    if t < 0 or t > n:
        raise ConfigError(f"0 <= t <= n required, got t={t}, n={n}")
    if t == 0:
        return success_no_precode(n, P_q)
    if t == n or P_q <= 0.0:
        return 1.0
    if P_q >= 1.0:
        return 0.0

    if n <= EXACT_MAX_N:
        total = sum(math.comb(n, i) * P_q ** i * (1.0 - P_q) ** (n - i) for i in range(t + 1))
        return min(1.0, total)

    i = np.arange(t + 1, dtype=np.float64)
    log_terms = (gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
                 + i * math.log(P_q) + (n - i) * math.log1p(-P_q))
    return min(1.0, float(np.exp(logsumexp(log_terms))))


def precode_distance(config: CodingConfig) -> Tuple[int, int]:
    """GV distance d and correctable errors t = floor((d - 1) / 2) of the pre-code."""
    d = gv_distance(config.n, config.k, config.q, literal=config.gv_literal)
    return d, (d - 1) // 2


def throughput(config: CodingConfig) -> MetricsRow:
    """Evaluate throughput S and data rate R (or their pre-coded lower bounds).

    Args:
        config: Operating point

    Returns:
        MetricsRow with every field populated
    """
    K, n, k, q, u = config.K, config.n, config.k, config.q, config.u
    p_q = symbol_error_qam(q, config.gamma_b_db, literal=config.eq4_literal)
    en = expected_N(K, q)
    efficiency = K / en

    if config.precode_enabled:
        d, t = precode_distance(config)
        if config.const_epsilon is not None:
            success = 1.0 - config.const_epsilon
        else:
            success = decode_success_precode(n, t, p_q)
        s_lb = efficiency * (k / (n + K)) * success
        r_lb = s_lb * k * u
        return MetricsRow(P_q=p_q, epsilon=1.0 - success, EN=en, S=s_lb, R=r_lb,
                          d=d, t=t, S_LB=s_lb, R_LB=r_lb)

    if config.const_epsilon is not None:
        epsilon = config.const_epsilon
    else:
        epsilon = erasure_no_precode(n, p_q)
    s = efficiency * (n / (n + K)) * (1.0 - epsilon)
    r = s * n * u
    return MetricsRow(P_q=p_q, epsilon=epsilon, EN=en, S=s, R=r, d=1, t=0, S_LB=s, R_LB=r)
