"""
fq.py — Arbitrary-precision prime-field arithmetic and matrices over 𝔽_Q.

Handles:
  • Certified prime moduli (trial division, then sympy's deterministic test)
  • Immutable field elements with operator overloads
  • Row-major matrices with entry-wise add / sub / Hadamard product
  • Exactly uniform sampling by rejection from fixed-width random words
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

from sympy import isprime

from .config import TRIAL_DIVISION_LIMIT
from .errors import DivisionByZero, ModulusMismatch, NotPrime, ShapeMismatch

logger = logging.getLogger(__name__)


# ─── Primality ───────────────────────────────────────────────

def _small_primes(limit: int) -> Tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(limit ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return tuple(i for i, flag in enumerate(sieve) if flag)


_SMALL_PRIMES = _small_primes(TRIAL_DIVISION_LIMIT)


def is_prime(x: int) -> bool:
    """Deterministic primality: trial division by small primes, then sympy.isprime."""
    if x < 2:
        return False
    for p in _SMALL_PRIMES:
        if x == p:
            return True
        if x % p == 0:
            return False
    if x <= TRIAL_DIVISION_LIMIT ** 2:
        return True
    return bool(isprime(x))


# ─── Modulus and Elements ────────────────────────────────────

@dataclass(frozen=True)
class FieldModulus:
    """The characteristic q of 𝔽_q; `certified` records a passed primality check."""
    q: int
    certified: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise ValueError(f"modulus must be an integer ≥ 2, got {self.q!r}")

    @classmethod
    def prime(cls, q: int) -> "FieldModulus":
        """Certify q as prime or raise NotPrime."""
        if not is_prime(q):
            raise NotPrime(f"{q} is not prime")
        return cls(q, certified=True)

    def require_prime(self) -> None:
        if not self.certified:
            raise NotPrime(f"modulus {self.q} has not been certified prime")

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value % self.q, self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def __repr__(self) -> str:
        return f"F_{self.q}"


@dataclass(frozen=True)
class FieldElement:
    """A residue in [0, q)."""
    value: int
    modulus: FieldModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise ValueError(f"{self.value} is not a residue mod {self.modulus.q}")

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.modulus.element(other)
        return other

    def __add__(self, other):
        return field_arith("add", self, self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return field_arith("sub", self, self._coerce(other))

    def __rsub__(self, other):
        return field_arith("sub", self._coerce(other), self)

    def __mul__(self, other):
        return field_arith("mul", self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return field_arith("mul", self, field_arith("inv", self._coerce(other)))

    def __neg__(self):
        return field_arith("sub", self.modulus.zero, self)

    def inverse(self) -> "FieldElement":
        return field_arith("inv", self)

    def __int__(self) -> int:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.value == other % self.modulus.q
        if isinstance(other, FieldElement):
            return self.modulus == other.modulus and self.value == other.value
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.modulus.q))

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.modulus.q})"


def _check_same(a: FieldElement, b: FieldElement) -> None:
    if a.modulus != b.modulus:
        raise ModulusMismatch(f"moduli differ: {a.modulus.q} vs {b.modulus.q}")


def field_arith(op: str, a: FieldElement, b: Optional[FieldElement] = None) -> FieldElement:
    """
    Exact modular add / sub / mul / inv.
    Binary ops require identical moduli; inv(0) raises DivisionByZero.
    """
    q = a.modulus.q
    if op == "inv":
        if a.value == 0:
            raise DivisionByZero(f"0 has no inverse mod {q}")
        return FieldElement(pow(a.value, -1, q), a.modulus)

    if b is None:
        raise ValueError(f"operation {op!r} needs two operands")
    _check_same(a, b)
    if op == "add":
        return FieldElement((a.value + b.value) % q, a.modulus)
    if op == "sub":
        return FieldElement((a.value - b.value) % q, a.modulus)
    if op == "mul":
        return FieldElement((a.value * b.value) % q, a.modulus)
    raise ValueError(f"unknown field operation: {op!r}")


# ─── Matrices ────────────────────────────────────────────────

@dataclass(frozen=True)
class FqMatrix:
    """
    Immutable rows×cols matrix over 𝔽_q, stored row-major as plain residues.
    Indexing with [i, j] (0-based) returns a FieldElement.
    """
    rows: int
    cols: int
    values: Tuple[int, ...]
    modulus: FieldModulus

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeMismatch(f"shape must be positive, got {self.rows}×{self.cols}")
        if len(self.values) != self.rows * self.cols:
            raise ShapeMismatch(
                f"{len(self.values)} entries do not fill a {self.rows}×{self.cols} matrix"
            )
        q = self.modulus.q
        for v in self.values:
            if not 0 <= v < q:
                raise ValueError(f"{v} is not a residue mod {q}")

    # ── Constructors ─────────────────────────────────────────

    @classmethod
    def from_values(
        cls, rows: int, cols: int, values: Iterable[int], modulus: FieldModulus
    ) -> "FqMatrix":
        """Build from arbitrary integers, reducing each mod q."""
        q = modulus.q
        return cls(rows, cols, tuple(int(v) % q for v in values), modulus)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], modulus: FieldModulus) -> "FqMatrix":
        flat = [v for row in rows for v in row]
        return cls.from_values(len(rows), len(rows[0]), flat, modulus)

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: FieldModulus) -> "FqMatrix":
        return cls(rows, cols, (0,) * (rows * cols), modulus)

    @classmethod
    def ones(cls, rows: int, cols: int, modulus: FieldModulus) -> "FqMatrix":
        return cls(rows, cols, (1,) * (rows * cols), modulus)

    # ── Access ───────────────────────────────────────────────

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> Tuple[FieldElement, ...]:
        return tuple(FieldElement(v, self.modulus) for v in self.values)

    def value(self, i: int, j: int) -> int:
        return self.values[i * self.cols + j]

    def __getitem__(self, index: Tuple[int, int]) -> FieldElement:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) outside {self.rows}×{self.cols}")
        return FieldElement(self.value(i, j), self.modulus)

    def to_rows(self) -> list:
        return [list(self.values[r * self.cols:(r + 1) * self.cols]) for r in range(self.rows)]

    def restrict(self, cells: Iterable[Tuple[int, int]]) -> dict:
        """Values at the given (i, j) cells as a dict."""
        return {(i, j): self.value(i, j) for i, j in cells}

    def __repr__(self) -> str:
        return f"FqMatrix({self.rows}×{self.cols} over F_{self.modulus.q}, {self.to_rows()})"


_ENTRYWISE = {
    "add":      lambda x, y, q: (x + y) % q,
    "sub":      lambda x, y, q: (x - y) % q,
    "hadamard": lambda x, y, q: (x * y) % q,
}


def matrix_entrywise(op: str, A: FqMatrix, B: FqMatrix) -> FqMatrix:
    """Entry-wise add / sub / Hadamard product of equally shaped matrices."""
    if op not in _ENTRYWISE:
        raise ValueError(f"unknown entry-wise operation: {op!r}")
    if A.modulus != B.modulus:
        raise ModulusMismatch(f"moduli differ: {A.modulus.q} vs {B.modulus.q}")
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    fn, q = _ENTRYWISE[op], A.modulus.q
    return FqMatrix(A.rows, A.cols, tuple(fn(x, y, q) for x, y in zip(A.values, B.values)), A.modulus)


# ─── Sampling ────────────────────────────────────────────────

def sample_residue(modulus: FieldModulus, rng: random.Random) -> int:
    """One exactly uniform residue, by rejection from (q−1).bit_length()-bit words."""
    q = modulus.q
    width = (q - 1).bit_length()
    while True:
        word = rng.getrandbits(width) if width else 0
        if word < q:
            return word


def sample_uniform(shape: Tuple[int, int], modulus: FieldModulus, rng: random.Random) -> FqMatrix:
    """Matrix with i.i.d. uniform entries; deterministic for a fixed rng state."""
    modulus.require_prime()
    rows, cols = shape
    values = tuple(sample_residue(modulus, rng) for _ in range(rows * cols))
    return FqMatrix(rows, cols, values, modulus)


def next_prime_at_least(x: int) -> FieldModulus:
    """Smallest certified prime ≥ x."""
    if x < 2:
        raise ValueError(f"next_prime_at_least needs x ≥ 2, got {x}")
    candidate = x
    if candidate > 2 and candidate % 2 == 0:
        candidate += 1
    while not is_prime(candidate):
        candidate += 2
    if candidate != x:
        logger.debug("Rounded %d up to prime %d", x, candidate)
    return FieldModulus(candidate, certified=True)
