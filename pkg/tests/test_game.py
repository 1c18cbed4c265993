import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wvg_nucleolus.game import (
    Allocation,
    Coalition,
    GameInputError,
    Instance,
    SizeLimitError,
    excess,
    excess_vector,
    lex_compare,
    value,
)
from conftest import subset_payoff, subset_value, subset_weight


def coal(members, n):
    return Coalition.from_members(members, n)


class TestInstance:
    def test_basic_fields(self):
        inst = Instance((1, 2, 3), 4, name="demo")
        assert inst.n == 3
        assert inst.total_weight == 6
        assert inst.weight(2) == 2
        assert inst.grand_value() == 1

    def test_rejects_bad_data(self):
        with pytest.raises(GameInputError):
            Instance((), 1)
        with pytest.raises(GameInputError):
            Instance((1, -1), 1)
        with pytest.raises(GameInputError):
            Instance((1, 1), -1)
        with pytest.raises(GameInputError):
            Instance((1, True), 1)
        with pytest.raises(GameInputError):
            Instance((1.0, 1), 1)

    def test_zero_quota_and_losing_grand(self):
        assert Instance((0, 0), 0).grand_value() == 1
        assert Instance((1, 1), 3).grand_value() == 0


class TestCoalition:
    def test_round_trip_members_chi(self):
        c = coal([1, 3], 4)
        assert c.members == (1, 3)
        assert c.chi() == (1, 0, 1, 0)
        assert Coalition.from_chi(c.chi()) == c
        assert 3 in c and 2 not in c
        assert len(c) == 2
        assert c.complement().members == (2, 4)

    def test_rejects_out_of_range(self):
        with pytest.raises(GameInputError):
            coal([0], 3)
        with pytest.raises(GameInputError):
            coal([4], 3)
        with pytest.raises(GameInputError):
            Coalition(1 << 3, 3)


class TestValue:
    def test_majority_pair_wins(self):
        inst = Instance((1, 1, 1), 2)
        assert value(inst, coal([1, 2], 3)) == 1

    def test_empty_loses(self):
        inst = Instance((1, 1, 1), 2)
        assert value(inst, Coalition(0, 3)) == 0

    def test_security_council_threshold(self):
        inst = Instance((7,) * 5 + (1,) * 10, 39)
        s = coal([1, 2, 3, 4, 5, 6, 7, 8, 9], 15)
        assert subset_weight(inst, s.mask) == 39
        assert value(inst, s) == 1

    def test_monotone_under_superset(self, rng):
        for _ in range(200):
            n = rng.randint(1, 8)
            inst = Instance(tuple(rng.randint(0, 9) for _ in range(n)), rng.randint(0, 20))
            small = rng.randrange(1 << n)
            big = small | rng.randrange(1 << n)
            assert value(inst, Coalition(small, n)) <= value(inst, Coalition(big, n))


class TestAllocation:
    def test_validates_sign_and_sum(self):
        inst = Instance((1, 1), 2)
        Allocation.for_instance(inst, [Fraction(1, 2), Fraction(1, 2)])
        with pytest.raises(GameInputError):
            Allocation.for_instance(inst, [Fraction(3, 2), Fraction(-1, 2)])
        with pytest.raises(GameInputError):
            Allocation.for_instance(inst, [Fraction(1, 2), Fraction(1, 4)])
        with pytest.raises(GameInputError):
            Allocation.for_instance(inst, [Fraction(1)])

    def test_zero_sum_when_grand_loses(self):
        inst = Instance((1, 1), 3)
        Allocation.for_instance(inst, [0, 0])
        with pytest.raises(GameInputError):
            Allocation.for_instance(inst, [Fraction(1, 2), Fraction(1, 2)])


class TestExcess:
    def test_majority_pair(self):
        inst = Instance((1, 1, 1), 2)
        x = Allocation.for_instance(inst, [Fraction(1, 3)] * 3)
        assert excess(inst, x, coal([1, 2], 3)) == Fraction(-1, 3)

    def test_grand_coalition_zero(self, rng):
        for _ in range(50):
            n = rng.randint(1, 6)
            inst = Instance(tuple(rng.randint(0, 5) for _ in range(n)), rng.randint(0, 10))
            shares = [rng.randint(0, 9) for _ in range(n)]
            total = inst.grand_value()
            if sum(shares) == 0:
                shares[0] = 1
            x = Allocation.for_instance(
                inst, [Fraction(total) * Fraction(s, sum(shares)) for s in shares]
            )
            assert excess(inst, x, inst.grand_coalition()) == 0

    def test_empty_zero_when_quota_positive(self):
        inst = Instance((2, 1), 2)
        x = Allocation.for_instance(inst, [1, 0])
        assert excess(inst, x, Coalition(0, 2)) == 0


class TestExcessVector:
    def test_single_player(self):
        inst = Instance((1,), 1)
        x = Allocation.for_instance(inst, [1])
        assert excess_vector(inst, x) == (Fraction(0), Fraction(0))

    def test_two_player_unanimity(self):
        inst = Instance((1, 1), 2)
        x = Allocation.for_instance(inst, [Fraction(1, 2), Fraction(1, 2)])
        assert excess_vector(inst, x) == (
            Fraction(0),
            Fraction(0),
            Fraction(1, 2),
            Fraction(1, 2),
        )

    def test_majority_smallest_entry(self):
        inst = Instance((1, 1, 1), 2)
        x = Allocation.for_instance(inst, [Fraction(1, 3)] * 3)
        assert excess_vector(inst, x)[0] == Fraction(-1, 3)

    def test_matches_enumeration_and_sorted(self, rng):
        for _ in range(30):
            n = rng.randint(1, 6)
            inst = Instance(tuple(rng.randint(0, 5) for _ in range(n)), rng.randint(1, 12))
            total = inst.grand_value()
            shares = [rng.randint(0, 9) for _ in range(n)]
            if sum(shares) == 0:
                shares[0] = 1
            x = Allocation.for_instance(
                inst, [Fraction(total) * Fraction(s, sum(shares)) for s in shares]
            )
            vec = excess_vector(inst, x)
            expected = sorted(
                subset_payoff(x.values, m) - subset_value(inst, m)
                for m in range(1 << n)
            )
            assert list(vec) == expected
            assert all(a <= b for a, b in zip(vec, vec[1:]))

    def test_size_limit(self):
        inst = Instance((1,) * 17, 5)
        x = Allocation.for_instance(
            inst, [Fraction(1, 17)] * 17
        )
        with pytest.raises(SizeLimitError):
            excess_vector(inst, x)


class TestLexCompare:
    def test_equal(self):
        assert lex_compare((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))) == 0

    def test_first_entry_dominates(self):
        a = (Fraction(-1, 3), Fraction(0))
        b = (Fraction(-1, 2), Fraction(5))
        assert lex_compare(a, b) == 1
        assert lex_compare(b, a) == -1

    def test_length_mismatch(self):
        with pytest.raises(GameInputError):
            lex_compare((Fraction(0),), (Fraction(0), Fraction(0)))

    @given(
        st.lists(st.fractions(), min_size=1, max_size=6),
        st.lists(st.fractions(), min_size=1, max_size=6),
    )
    def test_total_order_and_first_difference(self, xs, ys):
        k = min(len(xs), len(ys))
        a, b = tuple(xs[:k]), tuple(ys[:k])
        c = lex_compare(a, b)
        assert c in (-1, 0, 1)
        assert c == -lex_compare(b, a)
        if c == 0:
            assert a == b
        else:
            i = next(j for j in range(k) if a[j] != b[j])
            assert (a[i] > b[i]) == (c == 1)
