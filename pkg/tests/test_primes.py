import math

import pytest

from wvg_nucleolus.primes import PrimeSet, is_prime, prime_set


class TestIsPrime:
    @pytest.mark.parametrize("m,expected", [
        (0, False), (1, False), (2, True), (3, True), (4, False),
        (17, True), (91, False), (97, True), (7919, True),
    ])
    def test_values(self, m, expected):
        assert is_prime(m) is expected

    def test_matches_sieve(self):
        limit = 2000
        sieve = [True] * (limit + 1)
        sieve[0] = sieve[1] = False
        for i in range(2, int(limit ** 0.5) + 1):
            if sieve[i]:
                for k in range(i * i, limit + 1, i):
                    sieve[k] = False
        for m in range(limit + 1):
            assert is_prime(m) is sieve[m]


class TestPrimeSet:
    def test_three_players(self):
        ps = prime_set(3)
        assert ps.primes == (2, 3, 5)

    def test_single_player_minimum_one_prime(self):
        assert prime_set(1).primes == (2,)

    def test_ten_players(self):
        ps = prime_set(10)
        # ceil(log2(10!)) = 22 and the first 22 primes already clear 10!
        assert len(ps) == 22
        prod = math.prod(ps.primes)
        assert prod > math.factorial(10)

    def test_invariants_up_to_100(self):
        for n in range(1, 101):
            ps = prime_set(n)
            fact = math.factorial(n)
            assert math.prod(ps.primes) > fact
            need = max(1, (fact - 1).bit_length())
            assert len(ps) >= need
            assert all(is_prime(p) for p in ps)
            assert list(ps.primes) == sorted(set(ps.primes))

    def test_prefix_extension(self):
        # all sets draw from the same smallest-primes enumeration
        prev = prime_set(1).primes
        for n in range(2, 40):
            cur = prime_set(n).primes
            assert cur[: len(prev)] == prev
            prev = cur

    def test_growth_sanity_bound(self):
        # largest prime stays within a generous k log k envelope
        for n in (1, 3, 10, 30, 60, 100):
            ps = prime_set(n)
            k = len(ps)
            assert max(ps.primes) <= 2 * k * math.log(k + 2)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            prime_set(0)
