"""Construction of the prime set used for finite-field independence checks.

Linear independence of 0/1 vectors over the rationals is equivalent to
independence over F_p for at least one prime in a set whose product exceeds
n!: a dependent reduction modulo every such prime would force every maximal
minor to be divisible by the whole product, which is impossible for a nonzero
integer of absolute value at most n!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["PrimeSet", "is_prime", "prime_set"]


def is_prime(m: int) -> bool:
    """Deterministic primality by trial division; magnitudes here are tiny."""
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def _ceil_log2(m: int) -> int:
    # ceil(log2(m)) for m >= 1, exactly.
    return (m - 1).bit_length()


@dataclass(frozen=True)
class PrimeSet:
    """The smallest primes whose product strictly exceeds n!.

    Also guaranteed: at least ceil(log2(n!)) primes (minimum one), so the
    dependence argument above applies verbatim.
    """

    primes: tuple[int, ...]
    n_for: int

    def __iter__(self):
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __contains__(self, p: int) -> bool:
        return p in self.primes


def prime_set(n: int) -> PrimeSet:
    """Smallest increasing primes with ``prod > n!`` and ``count >= ceil(log2 n!)``."""
    if n < 1:
        raise ValueError("player count must be positive")
    factorial = math.factorial(n)
    needed = max(1, _ceil_log2(factorial))
    primes: list[int] = []
    product = 1
    candidate = 2
    while len(primes) < needed or product <= factorial:
        if is_prime(candidate):
            primes.append(candidate)
            product *= candidate
        candidate += 1
    return PrimeSet(tuple(primes), n)
