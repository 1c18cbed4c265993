"""Shared test helpers: tiny independent enumerators used as oracles."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from wvg_nucleolus.game import Allocation, Instance


def subset_weight(instance: Instance, mask: int) -> int:
    return sum(instance.weights[i] for i in range(instance.n) if mask >> i & 1)


def subset_payoff(values, mask: int) -> Fraction:
    return sum((values[i] for i in range(len(values)) if mask >> i & 1), Fraction(0))


def subset_value(instance: Instance, mask: int) -> int:
    return 1 if subset_weight(instance, mask) >= instance.quota else 0


def random_instance(rng: random.Random, n_min=3, n_max=7, weight_bound=12) -> Instance:
    n = rng.randint(n_min, n_max)
    weights = tuple(rng.randint(0, weight_bound) for _ in range(n))
    quota = rng.randint(1, max(1, sum(weights)))
    return Instance(weights, quota)


def random_allocation(rng: random.Random, instance: Instance) -> Allocation:
    """Random rational allocation: draws integer shares and normalizes."""
    total = instance.grand_value()
    if total == 0:
        return Allocation.for_instance(instance, [Fraction(0)] * instance.n)
    shares = [rng.randint(0, 20) for _ in range(instance.n)]
    if sum(shares) == 0:
        shares[rng.randrange(instance.n)] = 1
    s = sum(shares)
    return Allocation.for_instance(
        instance, [Fraction(total) * Fraction(v, s) for v in shares]
    )


@pytest.fixture
def rng():
    return random.Random(0xC0A1)
