"""Linear algebra over prime fields F_p, plus exact rational rank.

Used to encode span membership of coalition characteristic vectors without
rational arithmetic: a family of 0/1 vectors is independent over Q exactly
when it is independent over F_p for some prime in the configured set, and the
orthogonal complement over F_p turns "chi(S) outside the span" into "some
scalar product is nonzero mod p", which a dynamic program can track.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .primes import PrimeSet

__all__ = [
    "BasisFamily",
    "ModVector",
    "independent_over_some_prime",
    "mod_reduce",
    "orth_basis",
    "rank_mod_p",
    "rational_rank",
]


@dataclass(frozen=True)
class ModVector:
    """A vector over F_p: prime modulus plus residue entries."""

    modulus: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ValueError("modulus must be a prime >= 2")
        if any(not 0 <= e < self.modulus for e in self.entries):
            raise ValueError("entries must be residues in [0, modulus)")

    def __len__(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def dot(self, other: Sequence[int]) -> int:
        """Scalar product mod p against an integer vector."""
        return sum(a * b for a, b in zip(self.entries, other)) % self.modulus


@dataclass(frozen=True)
class BasisFamily:
    """Per-prime orthogonal complement bases for one level's span.

    For each prime p the family holds n-j vectors orthogonal (mod p) to every
    encoding vector of the level's span; when the encoding vectors are
    dependent over F_p the convention is n-j zero vectors, which contribute
    no constraints.
    """

    level: int
    per_prime: Mapping[int, tuple[ModVector, ...]]

    def vectors(self, p: int) -> tuple[ModVector, ...]:
        return self.per_prime[p]

    def primes(self) -> tuple[int, ...]:
        return tuple(self.per_prime.keys())


def mod_reduce(v: Sequence[int], p: int) -> ModVector:
    """Entrywise reduction mod p (identity on 0/1 input for p >= 2)."""
    return ModVector(p, tuple(e % p for e in v))


def _rref_mod(rows: Iterable[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over F_p.

    Returns (nonzero rows, pivot column indices).  First-nonzero pivot
    selection makes the output canonical for a fixed row order.
    """
    mat = [[e % p for e in row] for row in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(mat)):
            if mat[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = pow(mat[r][c], -1, p)
        mat[r] = [(e * inv) % p for e in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                row_r = mat[r]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], row_r)]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def reduce_against_rref_mod(
    rref: Sequence[Sequence[int]], pivots: Sequence[int], u: Sequence[int], p: int
) -> list[int]:
    """Residual of u after elimination by an F_p RREF; zero iff u in row space."""
    res = [e % p for e in u]
    for row, c in zip(rref, pivots):
        f = res[c]
        if f:
            res = [(a - f * b) % p for a, b in zip(res, row)]
    return res


def rank_mod_p(vectors: Sequence[ModVector]) -> int:
    """Rank over F_p of the given vectors (common modulus required)."""
    if not vectors:
        return 0
    p = vectors[0].modulus
    n = len(vectors[0])
    for v in vectors:
        if v.modulus != p:
            raise ValueError("modulus mismatch")
        if len(v) != n:
            raise ValueError("length mismatch")
    rref, _ = _rref_mod([v.entries for v in vectors], p)
    return len(rref)


def orth_basis(z_vectors: Sequence[Sequence[int]], p: int) -> tuple[ModVector, ...]:
    """Canonical basis of the space orthogonal (mod p) to the given 0/1 vectors.

    For j independent inputs of length n this is the null space of the j x n
    system, built by seeding each free column with a unit and back-filling the
    pivot columns from the RREF; n-j vectors, pairwise independent.  If the
    inputs are dependent over F_p, returns n-j zero vectors instead: that
    prime contributes nothing at this level.
    """
    z_list = [list(z) for z in z_vectors]
    j = len(z_list)
    if j == 0:
        raise ValueError("need at least one vector")
    n = len(z_list[0])
    if j > n:
        raise ValueError("more vectors than dimensions")
    rref, pivots = _rref_mod(z_list, p)
    if len(rref) < j:
        zero = ModVector(p, (0,) * n)
        return tuple(zero for _ in range(n - j))
    free_cols = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free_cols:
        v = [0] * n
        v[f] = 1
        for row, c in zip(rref, pivots):
            v[c] = (-row[f]) % p
        basis.append(ModVector(p, tuple(v)))
    return tuple(basis)


def independent_over_some_prime(
    z_vectors: Sequence[Sequence[int]], primes: PrimeSet
) -> bool:
    """True iff the 0/1 vectors are independent over F_p for some p in the set.

    By the product-of-primes argument this coincides with independence over
    the rationals whenever the set was built for the vectors' dimension.
    """
    vecs = [list(z) for z in z_vectors]
    if not vecs:
        return True
    k = len(vecs)
    if k > len(vecs[0]):
        return False
    for p in primes:
        rref, _ = _rref_mod(vecs, p)
        if len(rref) == k:
            return True
    return False


def rational_rank(vectors: Sequence[Sequence[int]]) -> int:
    """Exact rank over Q, by Gaussian elimination on Fractions."""
    mat = [[Fraction(e) for e in row] for row in vectors]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(rank, len(mat)):
            if mat[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[rank], mat[pivot_row] = mat[pivot_row], mat[rank]
        piv = mat[rank][c]
        mat[rank] = [e / piv for e in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][c]:
                f = mat[i][c]
                row_r = mat[rank]
                mat[i] = [a - f * b for a, b in zip(mat[i], row_r)]
        rank += 1
        if rank == len(mat):
            break
    return rank
