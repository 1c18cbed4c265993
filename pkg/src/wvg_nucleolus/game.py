"""Core domain types for weighted voting games.

A game is given by integer player weights and an integer quota.  A coalition
wins (value 1) exactly when its total weight reaches the quota.  All payoff
arithmetic is exact rational: nucleolus computations hinge on exact tie
detection, which floating point cannot provide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "ENUMERATION_LIMIT",
    "Allocation",
    "Coalition",
    "GameInputError",
    "Instance",
    "SizeLimitError",
    "excess",
    "excess_vector",
    "lex_compare",
    "value",
]

# Full 2**n enumeration (excess vectors, brute-force oracles) is refused above
# this player count.
ENUMERATION_LIMIT = 16


class GameInputError(ValueError):
    """Raised for structurally invalid instances, coalitions or allocations."""


class SizeLimitError(GameInputError):
    """Raised when an operation would enumerate all 2**n coalitions for large n."""


@dataclass(frozen=True)
class Instance:
    """A weighted voting game: n players, integer weights, integer quota.

    Players are indexed 1..n.  Coalition S wins iff sum(weights in S) >= quota.
    """

    weights: tuple[int, ...]
    quota: int
    name: str | None = None
    total_weight: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.quota, int) or isinstance(self.quota, bool):
            raise GameInputError("quota must be an integer")
        if self.quota < 0:
            raise GameInputError("quota must be non-negative")
        ws = tuple(self.weights)
        if len(ws) < 1:
            raise GameInputError("need at least one player")
        for w in ws:
            if not isinstance(w, int) or isinstance(w, bool):
                raise GameInputError("weights must be integers")
            if w < 0:
                raise GameInputError("weights must be non-negative")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "total_weight", sum(ws))

    @property
    def n(self) -> int:
        return len(self.weights)

    def weight(self, player: int) -> int:
        """Weight of a 1-based player index."""
        return self.weights[player - 1]

    def grand_coalition(self) -> "Coalition":
        return Coalition((1 << self.n) - 1, self.n)

    def grand_value(self) -> int:
        """v(N): 1 iff the grand coalition wins."""
        return 1 if self.total_weight >= self.quota else 0


@dataclass(frozen=True)
class Coalition:
    """A subset of players {1..n}, stored as a bit mask.

    Bit i-1 set means player i belongs to the coalition.  Python integers are
    arbitrary width, so the mask representation covers every n directly.
    """

    mask: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GameInputError("coalition needs a positive player count")
        if self.mask < 0 or self.mask >> self.n:
            raise GameInputError("coalition mask out of range for n players")

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for i in members:
            if not 1 <= i <= n:
                raise GameInputError(f"player index {i} outside 1..{n}")
            mask |= 1 << (i - 1)
        return cls(mask, n)

    @classmethod
    def from_chi(cls, chi: Sequence[int]) -> "Coalition":
        if any(c not in (0, 1) for c in chi):
            raise GameInputError("characteristic vector entries must be 0 or 1")
        mask = 0
        for i, c in enumerate(chi):
            if c:
                mask |= 1 << i
        return cls(mask, len(chi))

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.mask >> i & 1)

    def chi(self) -> tuple[int, ...]:
        """Characteristic 0/1 vector; round-trips with from_chi."""
        return tuple(self.mask >> i & 1 for i in range(self.n))

    def __contains__(self, player: int) -> bool:
        return 1 <= player <= self.n and bool(self.mask >> (player - 1) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def complement(self) -> "Coalition":
        return Coalition(self.mask ^ ((1 << self.n) - 1), self.n)


def mask_weight(instance: Instance, mask: int) -> int:
    """Total weight of the coalition encoded by ``mask``."""
    total = 0
    m = mask
    while m:
        low = m & -m
        total += instance.weights[low.bit_length() - 1]
        m ^= low
    return total


def mask_value(instance: Instance, mask: int) -> int:
    return 1 if mask_weight(instance, mask) >= instance.quota else 0


def mask_payoff(values: Sequence[Fraction], mask: int) -> Fraction:
    """x(S) for the coalition encoded by ``mask``."""
    total = Fraction(0)
    m = mask
    while m:
        low = m & -m
        total += values[low.bit_length() - 1]
        m ^= low
    return total


@dataclass(frozen=True)
class Allocation:
    """A payoff vector x >= 0 with x(N) = v(N), entries exact rationals."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @classmethod
    def for_instance(cls, instance: Instance, values: Sequence[Fraction | int]) -> "Allocation":
        """Validating constructor: checks length, sign, and exact efficiency."""
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != instance.n:
            raise GameInputError("allocation length must equal player count")
        if any(v < 0 for v in vals):
            raise GameInputError("allocation entries must be non-negative")
        if sum(vals) != instance.grand_value():
            raise GameInputError("allocation must sum exactly to v(N)")
        return cls(vals)

    def __getitem__(self, idx: int) -> Fraction:
        return self.values[idx]

    def __len__(self) -> int:
        return len(self.values)

    def payoff(self, s: Coalition) -> Fraction:
        return mask_payoff(self.values, s.mask)


def value(instance: Instance, s: Coalition) -> int:
    """v(S): 1 iff the coalition weight reaches the quota, else 0."""
    return mask_value(instance, s.mask)


def excess(instance: Instance, x: Allocation, s: Coalition) -> Fraction:
    """x(S) - v(S), exact."""
    return x.payoff(s) - value(instance, s)


def excess_vector(instance: Instance, x: Allocation) -> tuple[Fraction, ...]:
    """All 2**n excesses, sorted non-decreasingly.

    Only available for small games (n <= ENUMERATION_LIMIT): the output is
    exponentially long by definition.
    """
    n = instance.n
    if n > ENUMERATION_LIMIT:
        raise SizeLimitError(
            f"excess vector enumerates 2^{n} coalitions; limit is n <= {ENUMERATION_LIMIT}"
        )
    quota = instance.quota
    weights = instance.weights
    values = x.values
    out = []
    # Incremental subset sums: weight and payoff of mask derived from mask
    # with its lowest bit cleared.
    wsum = [0] * (1 << n)
    psum: list[Fraction] = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        rest = mask ^ low
        i = low.bit_length() - 1
        wsum[mask] = wsum[rest] + weights[i]
        psum[mask] = psum[rest] + values[i]
    for mask in range(1 << n):
        out.append(psum[mask] - (1 if wsum[mask] >= quota else 0))
    out.sort()
    return tuple(out)


def lex_compare(a: Sequence[Fraction], b: Sequence[Fraction]) -> int:
    """Lexicographic comparison of equal-length excess vectors.

    Returns -1, 0, or 1.  The vector that is larger on the first differing
    entry is the lexicographically larger one.
    """
    if len(a) != len(b):
        raise GameInputError("excess vectors must have equal length")
    for u, v in zip(a, b):
        if u != v:
            return 1 if u > v else -1
    return 0
