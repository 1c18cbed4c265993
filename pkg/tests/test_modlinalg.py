import itertools
import random

import pytest

from wvg_nucleolus.modlinalg import (
    BasisFamily,
    ModVector,
    independent_over_some_prime,
    mod_reduce,
    orth_basis,
    rank_mod_p,
    rational_rank,
)
from wvg_nucleolus.primes import prime_set


def enum_rank_mod_p(vectors, p, n):
    """Oracle: rank over F_p by enumerating all coefficient combinations."""
    span = {(0,) * n}
    for v in vectors:
        new = set(span)
        for c in range(1, p):
            for s in span:
                new.add(tuple((a + c * b) % p for a, b in zip(s, v)))
        # close under addition by iterating to fixpoint (span is a subgroup)
        changed = True
        while changed:
            changed = False
            for a in list(new):
                for b in list(new):
                    s = tuple((x + y) % p for x, y in zip(a, b))
                    if s not in new:
                        new.add(s)
                        changed = True
        span = new
    r = 0
    size = len(span)
    while p ** r < size:
        r += 1
    return r


class TestModReduce:
    def test_identity_on_01(self):
        assert mod_reduce((1, 0, 1), 2).entries == (1, 0, 1)
        assert mod_reduce((1, 1, 1), 3).entries == (1, 1, 1)
        assert mod_reduce((0, 0), 5).entries == (0, 0)

    def test_general_reduction(self):
        assert mod_reduce((5, -1, 7), 3).entries == (2, 2, 1)


class TestRankModP:
    def test_two_independent_mod2(self):
        vs = [ModVector(2, (1, 1, 0)), ModVector(2, (0, 1, 1))]
        assert rank_mod_p(vs) == 2
        assert rank_mod_p(vs) == enum_rank_mod_p([v.entries for v in vs], 2, 3)

    def test_duplicates(self):
        vs = [ModVector(5, (1, 1)), ModVector(5, (1, 1))]
        assert rank_mod_p(vs) == 1

    def test_empty(self):
        assert rank_mod_p([]) == 0

    def test_modulus_mismatch(self):
        with pytest.raises(ValueError):
            rank_mod_p([ModVector(2, (1,)), ModVector(3, (1,))])

    def test_sum_dependent_mod2(self):
        vs = [ModVector(2, (1, 1, 0)), ModVector(2, (0, 1, 1)), ModVector(2, (1, 0, 1))]
        assert rank_mod_p(vs) == 2

    def test_random_against_enumeration(self, rng):
        for _ in range(60):
            p = rng.choice((2, 3, 5))
            n = rng.randint(1, 4)
            k = rng.randint(0, 3)
            vs = [tuple(rng.randrange(p) for _ in range(n)) for _ in range(k)]
            assert rank_mod_p([ModVector(p, v) for v in vs]) == enum_rank_mod_p(vs, p, n)


class TestOrthBasis:
    def test_all_ones_mod2(self):
        basis = orth_basis([(1, 1, 1)], 2)
        assert len(basis) == 2
        # oracle: enumerate all 8 vectors of F_2^3 orthogonal to (1,1,1)
        orth = {
            v
            for v in itertools.product(range(2), repeat=3)
            if sum(v) % 2 == 0
        }
        for b in basis:
            assert b.entries in orth
        assert rank_mod_p(list(basis)) == 2

    def test_dependent_convention_zero_vectors(self):
        basis = orth_basis([(1, 1), (1, 1)], 2)
        assert len(basis) == 0  # n - j = 0
        basis = orth_basis([(1, 1, 0), (1, 1, 0)], 3)
        assert len(basis) == 1 and basis[0].is_zero()

    def test_full_basis_empty_complement(self):
        basis = orth_basis([(1, 0), (0, 1)], 7)
        assert basis == ()

    def test_orthogonality_rank_and_span_characterization(self, rng):
        for _ in range(40):
            p = rng.choice((2, 3))
            n = rng.randint(2, 4)
            j = rng.randint(1, n)
            zs = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(j)]
            basis = orth_basis(zs, p)
            assert len(basis) == n - j
            reduced = [ModVector(p, tuple(e % p for e in z)) for z in zs]
            if rank_mod_p(reduced) < j:
                assert all(b.is_zero() for b in basis)
                continue
            for b in basis:
                for z in zs:
                    assert b.dot(z) == 0
            assert rank_mod_p(list(basis)) == n - j
            # u is orthogonal to every basis vector iff u lies in the span
            span = {(0,) * n}
            for z in reduced:
                span = {
                    tuple((s[i] + c * z.entries[i]) % p for i in range(n))
                    for s in span
                    for c in range(p)
                }
                for _ in range(j):
                    span |= {
                        tuple((a[i] + b2[i]) % p for i in range(n))
                        for a in span
                        for b2 in span
                    }
            for u in itertools.product(range(p), repeat=n):
                ortho = all(b.dot(u) % p == 0 for b in basis)
                assert ortho == (u in span)


class TestIndependenceLemma:
    def test_standard_basis(self):
        assert independent_over_some_prime([(1, 0), (0, 1)], prime_set(2))

    def test_dependent_mod2_independent_mod3(self):
        vs = [(1, 1, 0), (0, 1, 1), (1, 0, 1)]
        ps = prime_set(3)
        assert rational_rank(vs) == 3
        assert rank_mod_p([ModVector(2, v) for v in vs]) == 2
        assert independent_over_some_prime(vs, ps)

    def test_duplicates_dependent_everywhere(self):
        assert not independent_over_some_prime([(1, 1), (1, 1)], prime_set(2))

    def test_equivalence_with_rational_rank(self, rng):
        ps_cache = {}
        for _ in range(200):
            n = rng.randint(1, 8)
            k = rng.randint(1, n)
            vs = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(k)]
            ps = ps_cache.setdefault(n, prime_set(n))
            assert independent_over_some_prime(vs, ps) == (rational_rank(vs) == k)


class TestRationalRank:
    def test_examples(self):
        assert rational_rank([(1, 0), (0, 1)]) == 2
        assert rational_rank([(1, 1, 0), (0, 1, 1), (1, 0, 1)]) == 3
        assert rational_rank([]) == 0
        assert rational_rank([(1, 1), (1, 1)]) == 1

    def test_rank_mod_p_never_exceeds(self, rng):
        for _ in range(100):
            n = rng.randint(1, 6)
            k = rng.randint(1, 4)
            p = rng.choice((2, 3, 5))
            vs = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(k)]
            assert rank_mod_p([ModVector(p, v) for v in vs]) <= rational_rank(vs)
