"""Pseudo-polynomial separation oracles for the scheme's linear programs.

The level-1 family is every coalition; the level-j family (j >= 2) is every
coalition whose characteristic vector lies outside the span of the vectors
fixed so far.  Both are separated through knapsack-style minimum-payoff
tables gamma[k][U] (and gamma[k][g][U] with a residue axis mod p), checked
against the bound 1+eps for winning weight levels and eps for losing ones,
with violated coalitions recovered by backtracing.

Two interchangeable strategies implement the same constraint family:

* literal: one modular table per prime and orthogonal-basis vector, scanned
  in increasing (p, t, U, g) order;
* fast (default in the solver): a single plain table screens all weight
  levels, and only suspicious levels are resolved, by cached enumeration of
  the zero/full-weight classes, by best-first enumeration of coalitions in
  increasing payoff order, or by a modular sweep over a product-bounded set
  of small primes whose joint reduction already certifies span membership
  over the rationals.

Verdicts agree between the strategies; returned witnesses may differ but are
always violated members of the family.  Tables are rebuilt per oracle call:
the queried point changes every cutting-plane iteration.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .game import Allocation, Coalition, Instance, mask_weight
from .modlinalg import BasisFamily, ModVector, orth_basis, reduce_against_rref_mod, _rref_mod
from .primes import PrimeSet

__all__ = [
    "DPTable",
    "SeparationVerdict",
    "SpanData",
    "ViolationWitness",
    "backtrace_witness",
    "build_span_data",
    "dp_min_table",
    "dp_min_table_mod",
    "full_separate",
    "separate_level1",
    "separate_level_j",
]

_INF = math.inf
_ZW_CACHE_LIMIT = 12  # max zero-weight players for the cached weight-class lists
_ENUM_POP_BUDGET = 4096  # best-first expansion cap before falling back to the sweep


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ViolationWitness:
    """A violated constraint: a coalition cut, or a base-constraint breach."""

    kind: str  # "coalition" | "nonneg" | "efficiency"
    level: int | None = None
    coalition: Coalition | None = None
    player: int | None = None
    rhs: Fraction | None = None
    family: tuple[int, int] | None = None  # certifying (p, t) for level >= 2


@dataclass(frozen=True)
class SeparationVerdict:
    feasible: bool
    witness: ViolationWitness | None = None


# ---------------------------------------------------------------------------
# Integer-scaled tables (internal)
# ---------------------------------------------------------------------------


def _scale(values: Sequence[Fraction]) -> tuple[list[int], int]:
    """Common-denominator numerators; all table arithmetic is then integral."""
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return [int(v.numerator) * (d // v.denominator) for v in values], d


def _plain_grid(weights: Sequence[int], nums: Sequence[int]) -> list[list]:
    w_total = sum(weights)
    prev: list = [_INF] * (w_total + 1)
    prev[0] = 0
    grid = [prev]
    for k in range(1, len(weights) + 1):
        w = weights[k - 1]
        a = nums[k - 1]
        cur = prev.copy()
        for u in range(w, w_total + 1):
            alt = prev[u - w]
            if alt != _INF:
                cand = alt + a
                if cand < cur[u]:
                    cur[u] = cand
        prev = cur
        grid.append(cur)
    return grid


def _mod_grid(
    weights: Sequence[int], nums: Sequence[int], ventries: Sequence[int], p: int
) -> list[list[list]]:
    w_total = sum(weights)
    prev = [[_INF] * (w_total + 1) for _ in range(p)]
    prev[0][0] = 0
    grid = [prev]
    for k in range(1, len(weights) + 1):
        w = weights[k - 1]
        a = nums[k - 1]
        vk = ventries[k - 1] % p
        cur = [row.copy() for row in prev]
        for g in range(p):
            src = prev[(g - vk) % p]
            dst = cur[g]
            for u in range(w, w_total + 1):
                alt = src[u - w]
                if alt != _INF:
                    cand = alt + a
                    if cand < dst[u]:
                        dst[u] = cand
        prev = cur
        grid.append(cur)
    return grid


def _backtrace_plain(
    grid: Sequence[Sequence], weights: Sequence[int], nums: Sequence[int], u: int
) -> int:
    """Mask achieving grid[n][u]; ties prefer excluding the highest player."""
    target = grid[len(weights)][u]
    if target == _INF:
        raise ValueError("cannot backtrace an infinite cell")
    mask = 0
    for k in range(len(weights), 0, -1):
        if grid[k - 1][u] == target:
            continue
        w = weights[k - 1]
        a = nums[k - 1]
        assert u >= w and grid[k - 1][u - w] != _INF and grid[k - 1][u - w] + a == target
        mask |= 1 << (k - 1)
        u -= w
        target -= a
    assert u == 0 and target == 0
    return mask


def _backtrace_mod(
    grid: Sequence[Sequence[Sequence]],
    weights: Sequence[int],
    nums: Sequence[int],
    ventries: Sequence[int],
    p: int,
    g: int,
    u: int,
) -> int:
    target = grid[len(weights)][g][u]
    if target == _INF:
        raise ValueError("cannot backtrace an infinite cell")
    mask = 0
    for k in range(len(weights), 0, -1):
        if grid[k - 1][g][u] == target:
            continue
        w = weights[k - 1]
        a = nums[k - 1]
        vk = ventries[k - 1] % p
        g2 = (g - vk) % p
        assert u >= w and grid[k - 1][g2][u - w] != _INF
        assert grid[k - 1][g2][u - w] + a == target
        mask |= 1 << (k - 1)
        u -= w
        g = g2
        target -= a
    assert u == 0 and g == 0 and target == 0
    return mask


def _mask_num(nums: Sequence[int], mask: int) -> int:
    total = 0
    m = mask
    while m:
        low = m & -m
        total += nums[low.bit_length() - 1]
        m ^= low
    return total


def _ceil_frac(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


class _EnumBudget(Exception):
    pass


def _ascending_at_weight(
    weights: Sequence[int],
    nums: Sequence[int],
    grid: Sequence[Sequence],
    u: int,
    pop_budget: int = _ENUM_POP_BUDGET,
) -> Iterator[tuple[int, int]]:
    """Yield (mask, scaled payoff) of weight-u coalitions in ascending payoff.

    Best-first search over the table's take/skip recursion; the table value
    is an exact completion bound, so completed states pop in true order.
    Raises _EnumBudget when the expansion cap is hit.
    """
    n = len(weights)
    if grid[n][u] == _INF:
        return
    heap: list[tuple[int, int, int, int, int]] = [(grid[n][u], n, u, 0, 0)]
    pops = 0
    while heap:
        pops += 1
        if pops > pop_budget:
            raise _EnumBudget
        _, k, uu, acc, mask = heapq.heappop(heap)
        if k == 0:
            yield mask, acc
            continue
        w = weights[k - 1]
        a = nums[k - 1]
        below = grid[k - 1]
        if below[uu] != _INF:
            heapq.heappush(heap, (acc + below[uu], k - 1, uu, acc, mask))
        if uu >= w and below[uu - w] != _INF:
            acc2 = acc + a
            heapq.heappush(
                heap, (acc2 + below[uu - w], k - 1, uu - w, acc2, mask | (1 << (k - 1)))
            )


# ---------------------------------------------------------------------------
# Public DP tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DPTable:
    """Minimum-payoff table over weight (and optionally residue) classes.

    gamma(k, U) is the least x(S) over S within the first k players at exact
    weight U, or None when the class is empty; the modular variant adds the
    residue of a weighting vector mod its prime.  Weights and payoffs are
    retained so witnesses can be backtraced from the table alone.
    """

    kind: str  # "plain" | "modular"
    weights: tuple[int, ...]
    payoffs: tuple[Fraction, ...]
    cells: tuple
    prime: int | None = None
    weighting: ModVector | None = None

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def gamma(self, k: int, u: int, g: int | None = None) -> Fraction | None:
        if self.kind == "plain":
            if g is not None:
                raise ValueError("plain table has no residue axis")
            return self.cells[k][u]
        if g is None:
            raise ValueError("modular table requires a residue")
        return self.cells[k][g][u]


def dp_min_table(instance: Instance, x: Allocation) -> DPTable:
    """gamma[k][U] = min{x(S) : S within first k players, w(S) = U}."""
    nums, d = _scale(x.values)
    grid = _plain_grid(instance.weights, nums)
    cells = tuple(
        tuple(None if c == _INF else Fraction(c, d) for c in row) for row in grid
    )
    return DPTable("plain", instance.weights, x.values, cells)


def dp_min_table_mod(instance: Instance, x: Allocation, v: ModVector) -> DPTable:
    """Modular variant: additionally v(S) = g (mod p) indexes the rows."""
    if len(v) != instance.n:
        raise ValueError("weighting vector length must equal player count")
    nums, d = _scale(x.values)
    grid = _mod_grid(instance.weights, nums, v.entries, v.modulus)
    cells = tuple(
        tuple(
            tuple(None if c == _INF else Fraction(c, d) for c in row)
            for row in layer
        )
        for layer in grid
    )
    return DPTable("modular", instance.weights, x.values, cells, v.modulus, v)


def backtrace_witness(table: DPTable, cell: tuple[int, int] | int) -> Coalition:
    """Coalition achieving a finite cell of a public table.

    ``cell`` is U for plain tables and (g, U) for modular ones.  Ties between
    taking and skipping a player are broken by excluding the player.
    """
    nums, _ = _scale(table.payoffs)
    if table.kind == "plain":
        if not isinstance(cell, int):
            raise ValueError("plain table cell is a weight U")
        if table.cells[table.n][cell] is None:
            raise ValueError("cannot backtrace an infinite cell")
        grid = _plain_grid(table.weights, nums)
        mask = _backtrace_plain(grid, table.weights, nums, cell)
        return Coalition(mask, table.n)
    g, u = cell
    if table.cells[table.n][g][u] is None:
        raise ValueError("cannot backtrace an infinite cell")
    grid = _mod_grid(table.weights, nums, table.weighting.entries, table.prime)
    mask = _backtrace_mod(
        grid, table.weights, nums, table.weighting.entries, table.prime, g, u
    )
    return Coalition(mask, table.n)


# ---------------------------------------------------------------------------
# Level checks
# ---------------------------------------------------------------------------


def _thresholds(eps: Fraction, d: int, quota: int, w_total: int) -> tuple[int, int]:
    """Scaled violation cutoffs: a cell violates its bound iff cell < K."""
    k_win = _ceil_frac((1 + eps) * d)
    k_lose = _ceil_frac(eps * d)
    return k_win, k_lose


def separate_level1(instance: Instance, x: Allocation, eps: Fraction) -> SeparationVerdict:
    """Check x(S) >= v(S) + eps over every coalition via the plain table.

    Winning weight levels (U >= quota) must reach 1 + eps, losing ones eps.
    The first failing level, scanned in increasing U, is backtraced to a
    violated coalition.  Assumes x >= 0 and x(N) = v(N) were checked by the
    caller (full_separate does).
    """
    nums, d = _scale(x.values)
    grid = _plain_grid(instance.weights, nums)
    k_win, k_lose = _thresholds(Fraction(eps), d, instance.quota, instance.total_weight)
    last = grid[instance.n]
    for u in range(instance.total_weight + 1):
        cell = last[u]
        if cell == _INF:
            continue
        bound = k_win if u >= instance.quota else k_lose
        if cell < bound:
            mask = _backtrace_plain(grid, instance.weights, nums, u)
            nu = 1 if u >= instance.quota else 0
            return SeparationVerdict(
                False,
                ViolationWitness(
                    "coalition",
                    level=1,
                    coalition=Coalition(mask, instance.n),
                    rhs=Fraction(nu) + eps,
                ),
            )
    return SeparationVerdict(True)


def separate_level_j(
    instance: Instance, x: Allocation, eps: Fraction, basis: BasisFamily
) -> SeparationVerdict:
    """Literal family check for level j = basis.level + 1.

    For every prime and every nonzero orthogonal-basis vector, builds the
    modular table and requires each nonzero-residue cell to meet its bound;
    scanned in increasing (p, t, U, g) order, first violation backtraced.
    """
    nums, d = _scale(x.values)
    eps = Fraction(eps)
    k_win, k_lose = _thresholds(eps, d, instance.quota, instance.total_weight)
    level = basis.level + 1
    for p in sorted(basis.primes()):
        vectors = basis.vectors(p)
        for t, v in enumerate(vectors, start=1):
            if v.is_zero():
                continue
            grid = _mod_grid(instance.weights, nums, v.entries, p)
            last = grid[instance.n]
            for u in range(instance.total_weight + 1):
                bound = k_win if u >= instance.quota else k_lose
                for g in range(1, p):
                    cell = last[g][u]
                    if cell != _INF and cell < bound:
                        mask = _backtrace_mod(
                            grid, instance.weights, nums, v.entries, p, g, u
                        )
                        nu = 1 if u >= instance.quota else 0
                        return SeparationVerdict(
                            False,
                            ViolationWitness(
                                "coalition",
                                level=level,
                                coalition=Coalition(mask, instance.n),
                                rhs=Fraction(nu) + eps,
                                family=(p, t),
                            ),
                        )
    return SeparationVerdict(True)


# ---------------------------------------------------------------------------
# Span data for the fast path
# ---------------------------------------------------------------------------


def _hadamard_01_bound(k: int) -> int:
    """Upper bound on |det| of a k x k 0/1 matrix."""
    if k <= 1:
        return 1
    return math.isqrt((k + 1) ** (k + 1)) // (1 << k) + 1


@dataclass(frozen=True)
class SpanData:
    """Rational-span test data for one level's fixed subspace.

    good_primes is an increasing run of primes from the configured set over
    which the span's encoding vectors stay independent and whose product
    exceeds the largest possible minor of any extension of the encoding by
    one more 0/1 vector; joint reduction against the per-prime echelon forms
    then decides rational span membership exactly, without rational
    arithmetic.
    """

    n: int
    z_masks: tuple[int, ...]
    good_primes: tuple[int, ...]
    rrefs: dict
    nonspan_zero_masks: tuple[int, ...] | None
    nonspan_full_masks: tuple[int, ...] | None

    def in_span(self, mask: int) -> bool:
        chi = [mask >> i & 1 for i in range(self.n)]
        for p in self.good_primes:
            rref, pivots = self.rrefs[p]
            residual = reduce_against_rref_mod(rref, pivots, chi, p)
            if any(residual):
                return False
        return True

    def certify_family(self, mask: int, bases: BasisFamily) -> tuple[int, int]:
        """A (p, t) with <v_{p,t}, chi(S)> != 0 mod p, for a non-span mask."""
        chi = [mask >> i & 1 for i in range(self.n)]
        for p in self.good_primes:
            rref, pivots = self.rrefs[p]
            residual = reduce_against_rref_mod(rref, pivots, chi, p)
            if any(residual):
                for t, v in enumerate(bases.vectors(p), start=1):
                    if not v.is_zero() and v.dot(chi) != 0:
                        return (p, t)
        raise AssertionError("mask certified outside the span has no family vector")


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def build_span_data(
    instance: Instance, z_masks: Sequence[int], primes: PrimeSet
) -> SpanData:
    """Prepare the exact span tests for a level's encoding vectors."""
    n = instance.n
    z_rows = [[m >> i & 1 for i in range(n)] for m in z_masks]
    bound = _hadamard_01_bound(len(z_masks) + 1)
    good: list[int] = []
    rrefs = {}
    product = 1
    for p in primes:
        rref, pivots = _rref_mod(z_rows, p)
        if len(rref) == len(z_rows):
            good.append(p)
            rrefs[p] = (tuple(tuple(r) for r in rref), tuple(pivots))
            product *= p
            if product > bound:
                break
    if product <= bound:
        raise AssertionError(
            "prime set cannot certify span membership; encoding vectors "
            "dependent over the rationals?"
        )

    zero_players = [i for i in range(n) if instance.weights[i] == 0]
    nonspan_zero = nonspan_full = None
    if len(zero_players) <= _ZW_CACHE_LIMIT:
        zmask = 0
        for i in zero_players:
            zmask |= 1 << i
        full = (1 << n) - 1
        span_data_probe = SpanData(n, tuple(z_masks), tuple(good), rrefs, None, None)
        zero_list = []
        full_list = []
        for sub in _submasks(zmask):
            if not span_data_probe.in_span(sub):
                zero_list.append(sub)
            co = full ^ sub
            if not span_data_probe.in_span(co):
                full_list.append(co)
        nonspan_zero = tuple(sorted(zero_list))
        nonspan_full = tuple(sorted(full_list))
    return SpanData(n, tuple(z_masks), tuple(good), rrefs, nonspan_zero, nonspan_full)


# ---------------------------------------------------------------------------
# Full separation
# ---------------------------------------------------------------------------


def _fast_check_level(
    instance: Instance,
    nums: list[int],
    d: int,
    grid: list[list],
    eps: Fraction,
    level: int,
    span: SpanData | None,
    bases: BasisFamily | None,
) -> ViolationWitness | None:
    """Exact check of one level's family at the given epsilon; None if clean."""
    n = instance.n
    weights = instance.weights
    w_total = instance.total_weight
    quota = instance.quota
    k_win, k_lose = _thresholds(eps, d, quota, w_total)
    last = grid[n]

    def bound(u: int) -> int:
        return k_win if u >= quota else k_lose

    failing = [
        u
        for u in range(w_total + 1)
        if last[u] != _INF and last[u] < bound(u)
    ]
    if not failing:
        return None

    if level == 1:
        u = failing[0]
        mask = _backtrace_plain(grid, weights, nums, u)
        nu = 1 if u >= quota else 0
        return ViolationWitness(
            "coalition", level=1, coalition=Coalition(mask, n), rhs=Fraction(nu) + eps
        )

    def coalition_witness(mask: int) -> ViolationWitness:
        u = mask_weight(instance, mask)
        nu = 1 if u >= quota else 0
        return ViolationWitness(
            "coalition",
            level=level,
            coalition=Coalition(mask, n),
            rhs=Fraction(nu) + eps,
            family=span.certify_family(mask, bases),
        )

    remaining: list[int] = []
    for u in failing:
        if u == 0 and span.nonspan_zero_masks is not None:
            for mask in span.nonspan_zero_masks:
                if _mask_num(nums, mask) < bound(0):
                    return coalition_witness(mask)
            continue
        if u == w_total and w_total > 0 and span.nonspan_full_masks is not None:
            for mask in span.nonspan_full_masks:
                if _mask_num(nums, mask) < bound(w_total):
                    return coalition_witness(mask)
            continue
        try:
            for mask, val in _ascending_at_weight(weights, nums, grid, u):
                if val >= bound(u):
                    break
                if not span.in_span(mask):
                    return coalition_witness(mask)
        except _EnumBudget:
            remaining.append(u)

    if not remaining:
        return None

    # modular sweep over the product-bounded good primes: complete for the
    # whole family, so it settles every remaining weight level at once
    for p in span.good_primes:
        vectors = bases.vectors(p)
        for t, v in enumerate(vectors, start=1):
            if v.is_zero():
                continue
            mgrid = _mod_grid(weights, nums, v.entries, p)
            mlast = mgrid[n]
            for u in remaining:
                b = bound(u)
                for g in range(1, p):
                    cell = mlast[g][u]
                    if cell != _INF and cell < b:
                        mask = _backtrace_mod(mgrid, weights, nums, v.entries, p, g, u)
                        nu = 1 if u >= quota else 0
                        return ViolationWitness(
                            "coalition",
                            level=level,
                            coalition=Coalition(mask, n),
                            rhs=Fraction(nu) + eps,
                            family=(p, t),
                        )
    return None


def full_separate(
    instance: Instance,
    x: Allocation,
    eps: Fraction | None,
    history: Sequence,
    level: int,
    mode: str = "fast",
) -> SeparationVerdict:
    """Feasibility of (x, eps) for the level-th program given frozen history.

    Checks, in order: the base constraints x >= 0 and x(N) = v(N); each prior
    level's family at its frozen optimal epsilon; finally the active level's
    family at the queried eps (skipped when eps is None, which turns the call
    into a pure membership test for the region defined by ``history``).

    ``history`` holds one state per completed level, each carrying the frozen
    epsilon plus the span/basis data of its fixed subspace.
    """
    if mode not in ("fast", "literal"):
        raise ValueError(f"unknown separation mode {mode!r}")
    n = instance.n
    for i, v in enumerate(x.values):
        if v < 0:
            return SeparationVerdict(
                False, ViolationWitness("nonneg", player=i + 1)
            )
    if sum(x.values) != instance.grand_value():
        return SeparationVerdict(False, ViolationWitness("efficiency"))

    checks: list[tuple[int, Fraction]] = []
    for i in range(1, level):
        checks.append((i, Fraction(history[i - 1].eps)))
    if eps is not None:
        checks.append((level, Fraction(eps)))

    if mode == "literal":
        for lvl, e in checks:
            if lvl == 1:
                verdict = separate_level1(instance, x, e)
            else:
                verdict = separate_level_j(instance, x, e, history[lvl - 2].bases)
            if not verdict.feasible:
                return verdict
        return SeparationVerdict(True)

    nums, d = _scale(x.values)
    grid = _plain_grid(instance.weights, nums)
    for lvl, e in checks:
        span = history[lvl - 2].span if lvl >= 2 else None
        bases = history[lvl - 2].bases if lvl >= 2 else None
        witness = _fast_check_level(instance, nums, d, grid, e, lvl, span, bases)
        if witness is not None:
            return SeparationVerdict(False, witness)
    return SeparationVerdict(True)


def bases_for_level(instance: Instance, z_masks: Sequence[int], primes: PrimeSet) -> BasisFamily:
    """Orthogonal-complement bases of the span of z over every prime."""
    n = instance.n
    z_rows = [[m >> i & 1 for i in range(n)] for m in z_masks]
    per_prime = {p: orth_basis(z_rows, p) for p in primes}
    return BasisFamily(level=len(z_masks), per_prime=per_prime)
