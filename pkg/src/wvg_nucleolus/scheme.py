"""Top-level nucleolus driver: a ladder of n exact LPs over shrinking families.

Level 1 maximizes the smallest excess over every coalition.  Each later
level keeps the earlier optima frozen and maximizes the excess over the
coalitions whose characteristic vectors lie outside the span of those fixed
so far; the span is encoded by 0/1 vectors and grows by one fixed coalition
per level, found in the dual support of the level's final master and
confirmed by pinning its payoff.  After n levels the feasible set is a
single point, the nucleolus, which is verified coordinate by coordinate.

The level loop is inherently sequential; distinct instances can be solved
concurrently since all state is per-solve.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .game import Allocation, Coalition, Instance, mask_payoff, mask_value
from .lp import ConstraintRecord, MasterOutcome, optimize_linear, solve_max_eps
from .modlinalg import BasisFamily
from .primes import PrimeSet, prime_set
from .separation import SpanData, bases_for_level, build_span_data, full_separate

__all__ = [
    "LevelState",
    "NucleolusResult",
    "SchemeError",
    "SolveStats",
    "extract_fixed_coalition",
    "is_fixed",
    "solve_nucleolus",
]


class SchemeError(RuntimeError):
    """Internal consistency failure; indicates a bug, never a bad input."""


@dataclass(frozen=True)
class LevelState:
    """Everything one level leaves behind for later levels and for the trace."""

    level: int
    n: int
    eps: Fraction
    z_masks: tuple[int, ...]
    chosen: Coalition | None
    bases: BasisFamily | None  # orthogonal bases of this level's span (None at level n)
    span: SpanData | None  # fast span-membership data (None at level n)
    cuts: int
    oracle_calls: int

    @property
    def z_vectors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(m >> i & 1 for i in range(self.n)) for m in self.z_masks
        )


@dataclass
class SolveStats:
    oracle_calls: int = 0
    cuts: int = 0
    master_iterations: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class NucleolusResult:
    allocation: Allocation
    levels: tuple[LevelState, ...]
    stats: SolveStats
    shortcut: str | None = None  # set when a degenerate case bypassed the ladder

    def to_trace_dict(self) -> dict:
        """Stable JSON-ready trace: per-level epsilon, chosen coalition, counters."""
        return {
            "schema_version": 1,
            "shortcut": self.shortcut,
            "levels": [
                {
                    "level": ls.level,
                    "eps": f"{ls.eps.numerator}/{ls.eps.denominator}",
                    "coalition": list(ls.chosen.members) if ls.chosen else None,
                    "cuts": ls.cuts,
                    "oracle_calls": ls.oracle_calls,
                }
                for ls in self.levels
            ],
            "stats": {
                "oracle_calls": self.stats.oracle_calls,
                "cuts": self.stats.cuts,
                "master_iterations": self.stats.master_iterations,
                "wall_time_s": self.stats.wall_time,
            },
        }


def _membership_oracle(
    instance: Instance, history: Sequence[LevelState], mode: str
) -> Callable[[Allocation], object]:
    level = len(history) + 1
    return lambda x: full_separate(instance, x, None, history, level, mode)


def extract_fixed_coalition(
    instance: Instance,
    level: int,
    outcome: MasterOutcome,
    history: Sequence[LevelState],
    pool: list[ConstraintRecord],
    eps_map: dict[int, Fraction],
    counter,
    mode: str = "fast",
) -> tuple[Coalition, Fraction]:
    """Find a coalition fixed by the level's optimum and outside the span.

    Candidates are the level's generated cuts with positive dual multiplier,
    then the remaining level cuts tight at the master optimum; a candidate is
    accepted when maximizing its payoff over the frozen region still yields
    exactly v(S) + eps, which pins the payoff at every optimum.  Cuts
    generated during rejected candidates' probes join the queue.  Returns the
    coalition and its pinned payoff.
    """
    eps_j = outcome.eps
    span_prev = history[level - 2].span
    stub = LevelState(
        level=level,
        n=instance.n,
        eps=eps_j,
        z_masks=history[-1].z_masks,
        chosen=None,
        bases=None,
        span=None,
        cuts=0,
        oracle_calls=0,
    )
    temp_history = list(history) + [stub]
    oracle = _membership_oracle(instance, temp_history, mode)

    queue: list[int] = []
    seen: set[int] = set()

    def push(mask: int) -> None:
        if mask not in seen:
            seen.add(mask)
            queue.append(mask)

    for rec in pool:
        if rec.level == level and outcome.duals.get(rec.key, 0) > 0:
            push(rec.mask)
    for rec in pool:
        if rec.level == level and mask_payoff(outcome.x, rec.mask) == rec.nu + eps_j:
            push(rec.mask)

    idx = 0
    while idx < len(queue):
        mask = queue[idx]
        idx += 1
        if span_prev.in_span(mask):
            raise SchemeError(
                f"level-{level} candidate lies in the fixed span; oracle bug"
            )
        target = mask_value(instance, mask) + eps_j
        obj = [Fraction(mask >> i & 1) for i in range(instance.n)]
        probe = optimize_linear(
            instance, obj, "max", oracle, pool, eps_map, counter
        )
        for rec in probe.new_records:
            if rec.level == level:
                push(rec.mask)
        if probe.value == target:
            return Coalition(mask, instance.n), Fraction(target)
    raise SchemeError(
        f"level {level}: no candidate among {len(seen)} generated cuts is fixed; "
        "this contradicts the well-definedness of the scheme and means a bug"
    )


def is_fixed(
    instance: Instance,
    s: Coalition,
    history: Sequence[LevelState],
    mode: str = "fast",
) -> bool:
    """Whether x(S) is constant over the region frozen by ``history``.

    Two frozen-region optimizations (max and min of x(S)); exact comparison.
    Uses a private cut pool, so repeated queries do not interact.
    """
    eps_map = {ls.level: ls.eps for ls in history}
    oracle = _membership_oracle(instance, history, mode)
    obj = [Fraction(s.mask >> i & 1) for i in range(instance.n)]
    pool: list[ConstraintRecord] = []
    counter = itertools.count()
    hi = optimize_linear(instance, obj, "max", oracle, pool, eps_map, counter)
    lo = optimize_linear(instance, obj, "min", oracle, pool, eps_map, counter)
    return hi.value == lo.value


def solve_nucleolus(
    instance: Instance,
    mode: str = "fast",
    trace: Callable[[str], None] | None = None,
) -> NucleolusResult:
    """Compute the nucleolus of a weighted voting game exactly.

    mode selects the separation strategy ("fast" or "literal"); both describe
    the same constraint families and produce the same optima.  ``trace``
    receives one line per master iteration.
    """
    t0 = time.perf_counter()
    n = instance.n

    if instance.total_weight < instance.quota:
        # every coalition loses, so v(N) = 0 forces the zero allocation
        zeros = Allocation.for_instance(instance, [Fraction(0)] * n)
        return NucleolusResult(
            zeros, (), SolveStats(wall_time=time.perf_counter() - t0), shortcut="all-losing"
        )

    primes = prime_set(n)
    pool: list[ConstraintRecord] = []
    eps_map: dict[int, Fraction] = {}
    history: list[LevelState] = []
    counter = itertools.count()
    stats = SolveStats()
    full_mask = (1 << n) - 1

    last_outcome: MasterOutcome | None = None
    for level in range(1, n + 1):
        def oracle(x: Allocation, eps: Fraction, _level=level):
            return full_separate(instance, x, eps, history, _level, mode)

        outcome = solve_max_eps(
            instance, oracle, pool, level, eps_map, counter, trace
        )
        stats.oracle_calls += outcome.oracle_calls
        stats.master_iterations += outcome.iterations
        eps_map[level] = outcome.eps
        if level >= 2 and outcome.eps < history[-1].eps:
            raise SchemeError("excess bound decreased across levels; solver bug")

        if level == 1:
            chosen = None
            z_masks: tuple[int, ...] = (full_mask,)
        else:
            coalition, _pinned = extract_fixed_coalition(
                instance, level, outcome, history, pool, eps_map, counter, mode
            )
            chosen = coalition
            z_masks = history[-1].z_masks + (coalition.mask,)

        bases = span = None
        if level < n:
            bases = bases_for_level(instance, z_masks, primes)
            span = build_span_data(instance, z_masks, primes)
        history.append(
            LevelState(
                level=level,
                n=n,
                eps=outcome.eps,
                z_masks=z_masks,
                chosen=chosen,
                bases=bases,
                span=span,
                cuts=len(outcome.new_records),
                oracle_calls=outcome.oracle_calls,
            )
        )
        last_outcome = outcome

    # final region is a single point: pin every coordinate both ways
    oracle = _membership_oracle(instance, history, mode)
    coords: list[Fraction] = []
    for i in range(n):
        obj = [Fraction(1) if k == i else Fraction(0) for k in range(n)]
        hi = optimize_linear(instance, obj, "max", oracle, pool, eps_map, counter)
        lo = optimize_linear(instance, obj, "min", oracle, pool, eps_map, counter)
        if hi.value != lo.value:
            raise SchemeError(
                f"final region not a single point: coordinate {i + 1} ranges "
                f"over [{lo.value}, {hi.value}]; solver bug"
            )
        coords.append(hi.value)
    if tuple(coords) != tuple(last_outcome.x):
        raise SchemeError("final master optimum differs from the pinned point; solver bug")

    stats.cuts = len(pool)
    stats.wall_time = time.perf_counter() - t0
    allocation = Allocation.for_instance(instance, coords)
    return NucleolusResult(allocation, tuple(history), stats)
