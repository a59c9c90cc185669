"""Random linear encoding of a generation and on-line Gaussian-elimination decoding."""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Union

import numpy as np

from ..field.gf import FieldError, GaloisField

Seed = Union[int, np.random.Generator, np.random.SeedSequence]


class DimensionError(ValueError):
    """Raised when vector lengths do not match the generation or decoder."""


class NotDecodableError(RuntimeError):
    """Raised when recovery is attempted before the decoder reaches full rank."""


def _as_symbols(values, field: GaloisField, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.int64)
    if array.size and (array.min() < 0 or array.max() >= field.q):
        raise FieldError(f"{name} contains symbols outside GF({field.q})")
    return array


@dataclass(frozen=True)
class Generation:
    """K source packets of n symbols each, encoded jointly."""

    field: GaloisField
    packets: np.ndarray

    def __post_init__(self):
        packets = _as_symbols(self.packets, self.field, "packets")
        if packets.ndim != 2:
            raise DimensionError("a generation is a K x n array of symbols")
        if packets.shape[0] < 1 or packets.shape[1] < 1:
            raise DimensionError(f"need K >= 1 and n >= 1, got shape {packets.shape}")
        object.__setattr__(self, "packets", packets)

    @property
    def K(self) -> int:
        return self.packets.shape[0]

    @property
    def n(self) -> int:
        return self.packets.shape[1]

    @classmethod
    def random(cls, K: int, n: int, field: GaloisField, seed: Seed) -> "Generation":
        """Uniformly random source packets, for round-trip checks."""
        rng = np.random.default_rng(seed)
        return cls(field, field.random_symbols(rng, (K, n)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Generation):
            return NotImplemented
        return self.field.q == other.field.q and np.array_equal(self.packets, other.packets)


@dataclass(frozen=True)
class CodedPacket:
    """Coefficient header (alpha_1..alpha_K) plus the combined payload."""

    coefficients: np.ndarray
    payload: np.ndarray

    @property
    def K(self) -> int:
        return len(self.coefficients)

    @property
    def n(self) -> int:
        return len(self.payload)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CodedPacket):
            return NotImplemented
        return (np.array_equal(self.coefficients, other.coefficients)
                and np.array_equal(self.payload, other.payload))


def combine(field: GaloisField, coefficients: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Sum of coefficient-scaled rows over GF(q)."""
    if len(coefficients) == 0:
        return np.zeros(rows.shape[1:], dtype=np.int64)
    return np.bitwise_xor.reduce(field.mul_array(coefficients[:, None], rows), axis=0)


def encode(gen: Generation, coefficients) -> CodedPacket:
    """Form the linear combination sum_i alpha_i s_i.

    Args:
        gen: Source generation
        coefficients: K symbols alpha_1..alpha_K

    Returns:
        Coded packet carrying its coefficients
    """
    coefficients = _as_symbols(coefficients, gen.field, "coefficients")
    if coefficients.shape != (gen.K,):
        raise DimensionError(f"expected {gen.K} coefficients, got {coefficients.shape}")
    return CodedPacket(coefficients, combine(gen.field, coefficients, gen.packets))


def encode_random(gen: Generation, rng_seed: Seed) -> CodedPacket:
    """Encode with coefficients drawn uniformly from [0, q-1].

    The all-zero coefficient vector is a legal draw and is not filtered.
    """
    rng = np.random.default_rng(rng_seed)
    return encode(gen, gen.field.random_symbols(rng, gen.K))


class DecoderState:
    """Row-reduced system of received combinations.

    Rows are kept in reduced row echelon form: every stored row has a 1 in its
    pivot column and 0 in every other row's pivot column. A payload width of 0
    tracks coefficients only.
    """

    def __init__(self, K: int, n: int, field: GaloisField):
        """Initialize an empty decoder.

        Args:
            K: Generation size
            n: Payload symbols per packet (0 for coefficient-only tracking)
            field: Symbol field
        """
        if K < 1 or n < 0:
            raise DimensionError(f"need K >= 1 and n >= 0, got K={K}, n={n}")
        self.K = K
        self.n = n
        self.field = field
        self.rows = np.zeros((K, K), dtype=np.int64)
        self.payloads = np.zeros((K, n), dtype=np.int64)
        self.pivots: List[int] = []
        self.absorbed = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def is_complete(self) -> bool:
        return self.rank == self.K

    @classmethod
    def from_packets(cls, packets: Iterable[CodedPacket], K: int, n: int,
                     field: GaloisField) -> "DecoderState":
        state = cls(K, n, field)
        for pkt in packets:
            absorb(state, pkt)
        return state


def absorb(state: DecoderState, pkt: CodedPacket) -> bool:
    """Reduce a received packet against the decoder and keep it if innovative.

    Args:
        state: Decoder to update in place
        pkt: Received coded packet

    Returns:
        True iff the packet raised the rank
    """
    if pkt.K != state.K or pkt.n != state.n:
        raise DimensionError(
            f"packet is {pkt.K}x{pkt.n}, decoder expects {state.K}x{state.n}")

    field = state.field
    rank = state.rank
    coefficients = _as_symbols(pkt.coefficients, field, "coefficients").copy()
    payload = np.array(pkt.payload, dtype=np.int64)
    state.absorbed += 1

    if rank:
        factors = coefficients[state.pivots]
        coefficients ^= combine(field, factors, state.rows[:rank])
        if state.n:
            payload ^= combine(field, factors, state.payloads[:rank])

    nonzero = np.flatnonzero(coefficients)
    if nonzero.size == 0:
        return False

    pivot = int(nonzero[0])
    scale = field.inv(int(coefficients[pivot]))
    coefficients = field.scale(scale, coefficients)
    if state.n:
        payload = field.scale(scale, payload)

    if rank:
        column = state.rows[:rank, pivot].copy()
        state.rows[:rank] ^= field.mul_array(column[:, None], coefficients[None, :])
        if state.n:
            state.payloads[:rank] ^= field.mul_array(column[:, None], payload[None, :])

    state.rows[rank] = coefficients
    if state.n:
        state.payloads[rank] = payload
    state.pivots.append(pivot)
    return True


def recover(state: DecoderState) -> Generation:
    """Read the source packets out of a full-rank decoder.

    Raises:
        NotDecodableError: If rank < K
    """
    if not state.is_complete:
        raise NotDecodableError(f"rank {state.rank} < K={state.K}; cannot decode")
    if state.n == 0:
        raise NotDecodableError("decoder tracks coefficients only; no payloads to recover")

    # Full rank in reduced form: row r is the unit vector at its pivot column
    packets = np.zeros((state.K, state.n), dtype=np.int64)
    packets[state.pivots] = state.payloads
    return Generation(state.field, packets)


def rank_of(vectors, field: GaloisField) -> int:
    """Rank over GF(q) of a set of equal-length vectors."""
    vectors = _as_symbols(vectors, field, "vectors")
    if vectors.ndim != 2 or vectors.shape[1] < 1:
        raise DimensionError("rank_of expects a 2-D array with at least one column")
    state = DecoderState(vectors.shape[1], 0, field)
    empty = np.zeros(0, dtype=np.int64)
    for vector in vectors:
        absorb(state, CodedPacket(vector, empty))
    return state.rank


def full_rank_prefix(vectors, field: GaloisField) -> Optional[int]:
    """Fewest leading vectors that span GF(q)^K, or None if they never do.

    Forward elimination on the K x M matrix whose columns are the vectors.
    Row operations keep column dependencies, so a vector is innovative
    exactly when its column receives a pivot.

    Args:
        vectors: M x K array, one received coefficient vector per row
        field: Symbol field

    Returns:
        Index (1-based) of the vector that completes rank K
    """
    vectors = _as_symbols(vectors, field, "vectors")
    if vectors.ndim != 2 or vectors.shape[1] < 1:
        raise DimensionError("full_rank_prefix expects a 2-D array with at least one column")

    matrix = vectors.T.copy()
    K = matrix.shape[0]
    rank = 0
    for column in range(matrix.shape[1]):
        nonzero = np.flatnonzero(matrix[rank:, column])
        if nonzero.size == 0:
            continue
        pivot = rank + int(nonzero[0])
        if pivot != rank:
            matrix[[rank, pivot], column:] = matrix[[pivot, rank], column:]
        if rank + 1 < K:
            row = field.scale(field.inv(int(matrix[rank, column])), matrix[rank, column:])
            factors = matrix[rank + 1:, column]
            matrix[rank + 1:, column:] ^= field.mul_array(factors[:, None], row[None, :])
        rank += 1
        if rank == K:
            return column + 1
    return None


def simulate_N(K: int, field: GaloisField, rng_seed: Seed,
               max_draws: Optional[int] = None) -> int:
    """Count uniform random combinations until the decoder reaches rank K.

    Args:
        K: Generation size
        field: Symbol field
        rng_seed: Seed or generator for the coefficient draws
        max_draws: Optional safety cap on draws

    Returns:
        Number of combinations drawn (always >= K)
    """
    if K < 1:
        raise DimensionError(f"need K >= 1, got {K}")
    rng = np.random.default_rng(rng_seed)
    state = DecoderState(K, 0, field)
    empty = np.zeros(0, dtype=np.int64)
    while not state.is_complete:
        if max_draws is not None and state.absorbed >= max_draws:
            raise RuntimeError(f"rank {state.rank} < K after {max_draws} draws")
        absorb(state, CodedPacket(field.random_symbols(rng, K), empty))
    return state.absorbed
