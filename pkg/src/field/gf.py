"""Arithmetic in GF(2^u) for 1 <= u <= 16.

Fields with u <= 8 multiply through log/antilog tables (plus a full q x q
product table for vectorized lookups); larger fields use carry-less
multiplication followed by reduction. Both paths are always available so
they can be checked against each other.
"""
from functools import lru_cache
from typing import Optional

import numpy as np

Symbol = int

MAX_BITS = 16
TABLE_MAX_BITS = 8

# One canonical primitive polynomial per u, bit i = coefficient of x^i.
PRIMITIVE_POLYNOMIALS = {
    1: 0x3,       # x + 1
    2: 0x7,       # x^2 + x + 1
    3: 0xB,       # x^3 + x + 1
    4: 0x13,      # x^4 + x + 1
    5: 0x25,      # x^5 + x^2 + 1
    6: 0x43,      # x^6 + x + 1
    7: 0x83,      # x^7 + x + 1
    8: 0x11D,     # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,     # x^9 + x^4 + 1
    10: 0x409,    # x^10 + x^3 + 1
    11: 0x805,    # x^11 + x^2 + 1
    12: 0x1053,   # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,   # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,   # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,   # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


class FieldError(ValueError):
    """Raised for symbols or parameters that do not belong to the field."""


class ZeroDivisionFieldError(FieldError, ZeroDivisionError):
    """Raised when inverting or dividing by the zero element."""


class GaloisField:
    """The symbol alphabet GF(q), q = 2^u, under a fixed reduction polynomial."""

    def __init__(self, u: int):
        """Initialize the field and its lookup tables.

        Args:
            u: Bits per symbol (1..16)
        """
        if not isinstance(u, (int, np.integer)) or not 1 <= u <= MAX_BITS:
            raise FieldError(f"u must be an integer in [1, {MAX_BITS}], got {u!r}")

        self.u = int(u)
        self.q = 1 << self.u
        self.polynomial = PRIMITIVE_POLYNOMIALS[self.u]

        self._exp: Optional[np.ndarray] = None
        self._log: Optional[np.ndarray] = None
        self._product: Optional[np.ndarray] = None
        self._inverse: Optional[np.ndarray] = None
        if self.u <= TABLE_MAX_BITS:
            self._build_tables()

    def __repr__(self) -> str:
        return f"GaloisField(u={self.u}, q={self.q}, polynomial={self.polynomial:#x})"

    @property
    def uses_tables(self) -> bool:
        return self._product is not None

    def _build_tables(self):
        """Build antilog/log tables from the generator x, then product and inverse tables."""
        order = self.q - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)

        value = 1
        for power in range(order):
            exp[power] = value
            log[value] = power
            value = self._xtime(value)
        exp[order:] = exp[:order]

        if len(set(exp[:order].tolist())) != order:
            raise FieldError(f"polynomial {self.polynomial:#x} is not primitive for u={self.u}")

        product = np.zeros((self.q, self.q), dtype=np.int64)
        logs = log[1:]
        product[1:, 1:] = exp[(logs[:, None] + logs[None, :]) % order]

        inverse = np.zeros(self.q, dtype=np.int64)
        inverse[1:] = exp[(order - logs) % order]

        self._exp = exp
        self._log = log
        self._product = product
        self._inverse = inverse

    def _xtime(self, a: int) -> int:
        a <<= 1
        if a & self.q:
            a ^= self.polynomial
        return a

    def check(self, a: Symbol) -> Symbol:
        """Validate a symbol.

        Args:
            a: Candidate symbol

        Returns:
            The symbol as a plain int
        """
        if not 0 <= a < self.q:
            raise FieldError(f"symbol {a} outside GF({self.q})")
        return int(a)

    def add(self, a: Symbol, b: Symbol) -> Symbol:
        """Field sum (exclusive-or); also the difference."""
        return self.check(a) ^ self.check(b)

    sub = add

    def mul(self, a: Symbol, b: Symbol) -> Symbol:
        """Field product under the fixed reduction polynomial."""
        a, b = self.check(a), self.check(b)
        if self._product is not None:
            return int(self._product[a, b])
        return self.mul_clmul(a, b)

    def mul_tables(self, a: Symbol, b: Symbol) -> Symbol:
        """Product through the log/antilog tables (u <= 8 only)."""
        if self._log is None:
            raise FieldError(f"no log tables for u={self.u} > {TABLE_MAX_BITS}")
        a, b = self.check(a), self.check(b)
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def mul_clmul(self, a: Symbol, b: Symbol) -> Symbol:
        """Product through carry-less multiplication with interleaved reduction."""
        a, b = self.check(a), self.check(b)
        result = 0
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a = self._xtime(a)
        return result

    def inv(self, a: Symbol) -> Symbol:
        """Multiplicative inverse.

        Raises:
            ZeroDivisionFieldError: If a is zero
        """
        a = self.check(a)
        if a == 0:
            raise ZeroDivisionFieldError("zero has no multiplicative inverse")
        if self._inverse is not None:
            return int(self._inverse[a])
        # a^(q-2) = a^-1 since the multiplicative group has order q-1
        return self.pow(a, self.q - 2)

    def div(self, a: Symbol, b: Symbol) -> Symbol:
        return self.mul(a, self.inv(b))

    def pow(self, a: Symbol, exponent: int) -> Symbol:
        """Square-and-multiply exponentiation; negative exponents go through the inverse."""
        if exponent < 0:
            return self.pow(self.inv(a), -exponent)
        result, base = 1, self.check(a)
        while exponent:
            if exponent & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exponent >>= 1
        return result

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable symbol arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._product is not None:
            return self._product[a, b]

        a, b = np.broadcast_arrays(a, b)
        a = a.copy()
        b = b.copy()
        result = np.zeros(a.shape, dtype=np.int64)
        for _ in range(self.u):
            result ^= np.where(b & 1, a, 0)
            b >>= 1
            a <<= 1
            a = np.where(a & self.q, a ^ self.polynomial, a)
        return result

    def inv_array(self, a) -> np.ndarray:
        """Elementwise inverse; every entry must be nonzero."""
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionFieldError("zero has no multiplicative inverse")
        if self._inverse is not None:
            return self._inverse[a]
        return np.vectorize(self.inv, otypes=[np.int64])(a)

    def scale(self, c: Symbol, vector) -> np.ndarray:
        """Multiply every entry of a vector by the scalar c."""
        return self.mul_array(np.int64(self.check(c)), vector)

    def random_symbols(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw symbols uniformly from [0, q-1]."""
        return rng.integers(0, self.q, size=size, dtype=np.int64)


@lru_cache(maxsize=None)
def get_field(u: int) -> GaloisField:
    """Shared, immutable field instance for a given u."""
    return GaloisField(u)
