"""Ground-truth machinery for small instances, used to validate the solver.

Everything here enumerates all 2^n coalitions explicitly: the scheme is run
with fully materialized constraint systems, span tracking is exact integer
row reduction over the rationals, and the gamma tables are filled by subset
enumeration.  Only the low-level LP solver is shared with the production
path; the separation oracles, prime sets and finite-field machinery are
deliberately not used, so agreement between this module and the solver is
meaningful evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .game import (
    ENUMERATION_LIMIT,
    Allocation,
    Coalition,
    Instance,
    SizeLimitError,
    mask_payoff,
    mask_weight,
)
from .lp import CoalitionLP, LPError
from .separation import DPTable, SeparationVerdict, ViolationWitness

__all__ = ["ExplicitGame", "brute_gamma", "brute_nucleolus", "brute_separate"]


@dataclass(frozen=True)
class ExplicitGame:
    """An instance with its full 2^n value table, indexed by coalition mask."""

    instance: Instance
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.instance.n
        if n > ENUMERATION_LIMIT:
            raise SizeLimitError(
                f"explicit game needs 2^{n} entries; limit is n <= {ENUMERATION_LIMIT}"
            )
        if len(self.values) != 1 << n:
            raise ValueError("value table must have one entry per coalition")
        weights = self.instance.weights
        quota = self.instance.quota
        wsum = [0] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            wsum[mask] = wsum[mask ^ low] + weights[low.bit_length() - 1]
            if self.values[mask] != (1 if wsum[mask] >= quota else 0):
                raise ValueError(f"value table disagrees with the game at mask {mask}")
        if self.values[0] != (1 if 0 >= quota else 0):
            raise ValueError("value table disagrees with the game at the empty set")

    @classmethod
    def from_instance(cls, instance: Instance) -> "ExplicitGame":
        n = instance.n
        if n > ENUMERATION_LIMIT:
            raise SizeLimitError(
                f"explicit game needs 2^{n} entries; limit is n <= {ENUMERATION_LIMIT}"
            )
        weights = instance.weights
        quota = instance.quota
        wsum = [0] * (1 << n)
        vals = [1 if 0 >= quota else 0] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            wsum[mask] = wsum[mask ^ low] + weights[low.bit_length() - 1]
            vals[mask] = 1 if wsum[mask] >= quota else 0
        return cls(instance, tuple(vals))


# ---------------------------------------------------------------------------
# Exact integer span tracking
# ---------------------------------------------------------------------------


class _IntEchelon:
    """Integer row echelon over Q with exact membership tests.

    Rows are kept gcd-reduced; candidate vectors are eliminated by
    cross-multiplication, so no fractions ever appear.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    def _reduced(self, vec: Sequence[int]) -> list[int]:
        v = list(vec)
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                f1, f2 = row[c], v[c]
                v = [f1 * a - f2 * b for a, b in zip(v, row)]
                g = 0
                for e in v:
                    g = math.gcd(g, e)
                if g > 1:
                    v = [e // g for e in v]
        return v

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self._reduced(vec))

    def add(self, vec: Sequence[int]) -> bool:
        """Insert if independent; returns True when the rank grew."""
        v = self._reduced(vec)
        for c, e in enumerate(v):
            if e:
                if e < 0:
                    v = [-x for x in v]
                self.rows.append(v)
                self.pivots.append(c)
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)


class _Mod2Screen:
    """Bitmask row echelon over F_2; a sound 'definitely outside' prescreen.

    When the tracked rows stay independent mod 2, any vector outside their
    F_2 span is also outside the rational span.  Vectors inside the F_2 span
    remain undecided and go to the exact integer test.
    """

    def __init__(self) -> None:
        self.rows: list[int] = []  # masks, kept with distinct leading bits
        self.leads: list[int] = []
        self.independent = True

    def add(self, mask: int) -> None:
        m = mask
        for row, lead in zip(self.rows, self.leads):
            if m >> lead & 1:
                m ^= row
        if m == 0:
            self.independent = False
            return
        self.rows.append(m)
        self.leads.append(m.bit_length() - 1)

    def maybe_in_span(self, mask: int) -> bool:
        if not self.independent:
            return True
        m = mask
        for row, lead in zip(self.rows, self.leads):
            if m >> lead & 1:
                m ^= row
        return m == 0


def _chi(mask: int, n: int) -> list[int]:
    return [mask >> i & 1 for i in range(n)]


# ---------------------------------------------------------------------------
# Explicit scheme
# ---------------------------------------------------------------------------


def _solve_square(z_masks: Sequence[int], consts: Sequence[Fraction], n: int) -> list[Fraction]:
    """Unique solution of chi(z_k) . x = consts[k] for n independent masks."""
    mat = [[Fraction(m >> i & 1) for i in range(n)] + [Fraction(consts[k])] for k, m in enumerate(z_masks)]
    for col in range(n):
        piv = next(i for i in range(col, n) if mat[i][col])
        mat[col], mat[piv] = mat[piv], mat[col]
        pv = mat[col][col]
        mat[col] = [e / pv for e in mat[col]]
        for i in range(n):
            if i != col and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
    return [mat[i][n] for i in range(n)]


def brute_nucleolus(game: ExplicitGame) -> Allocation:
    """Nucleolus by the sequential scheme with every constraint materialized.

    Per level: one exact LP over all 2^n coalition rows maximizes the excess
    bound; a coalition fixed at the optimum and independent of the tracked
    span (candidates ordered by positive dual multiplier, fixedness verified
    by explicit max and min LPs) extends the span; after n levels the pinned
    payoffs of the n independent coalitions determine the point, which is
    also cross-checked against the final LP optimum.
    """
    inst = game.instance
    n = inst.n
    nmasks = 1 << n
    full = nmasks - 1

    ech = _IntEchelon(n)
    screen = _Mod2Screen()
    eps_lock: list[Fraction | None] = [None] * nmasks
    in_family = [True] * nmasks
    zero_obj = [Fraction(0)] * n

    z_masks: list[int] = []
    z_consts: list[Fraction] = []
    eps_prev: Fraction | None = None
    final_x: tuple[Fraction, ...] | None = None

    for level in range(1, n + 1):
        family: list[int] = []
        if level == 1:
            family = list(range(nmasks))
        else:
            for mask in range(nmasks):
                if not in_family[mask]:
                    continue
                if screen.maybe_in_span(mask) and ech.contains(_chi(mask, n)):
                    in_family[mask] = False
                else:
                    family.append(mask)
        if not family:
            raise LPError(f"empty constraint family at level {level}; oracle bug")

        rhs = [
            Fraction(game.values[mask])
            if in_family[mask]
            else Fraction(game.values[mask]) + eps_lock[mask]
            for mask in range(nmasks)
        ]
        program = CoalitionLP(n, inst.grand_value(), rhs, in_family[:])
        res = program.solve(zero_obj, Fraction(1), "max")
        if res.status != "optimal":
            raise LPError(f"explicit level-{level} program is {res.status}")
        eps_j = res.eps
        if eps_prev is not None and eps_j < eps_prev:
            raise LPError("excess bounds decreased across levels; oracle bug")
        eps_prev = eps_j
        final_x = res.x

        # choose the coalition to fix
        if level == 1:
            chosen = full
            chosen_const = Fraction(inst.grand_value())
        else:
            candidates = [m for m in family if res.duals.get(m, 0) > 0]
            seen = set(candidates)
            for m in family:
                if m not in seen and mask_payoff(res.x, m) == game.values[m] + eps_j:
                    candidates.append(m)
            chosen = None
            chosen_const = None
            for cand in candidates:
                obj = [Fraction(cand >> i & 1) for i in range(n)]
                hi = program.solve(obj, 0, "max", pin_eps=eps_j)
                lo = program.solve(obj, 0, "min", pin_eps=eps_j)
                if hi.status != "optimal" or lo.status != "optimal":
                    raise LPError("fixedness probe failed")
                if hi.value == lo.value:
                    chosen = cand
                    chosen_const = hi.value
                    break
            if chosen is None:
                raise LPError(f"no fixed coalition found at level {level}; oracle bug")

        if not ech.add(_chi(chosen, n)):
            raise LPError("chosen coalition lies in the tracked span; oracle bug")
        screen.add(chosen)
        z_masks.append(chosen)
        z_consts.append(chosen_const)
        for mask in family:
            eps_lock[mask] = eps_j

    point = _solve_square(z_masks, z_consts, n)
    if tuple(point) != tuple(final_x):
        raise LPError("pinned system and final optimum disagree; oracle bug")
    return Allocation.for_instance(inst, point)


# ---------------------------------------------------------------------------
# Enumerated gamma tables and separation
# ---------------------------------------------------------------------------


def brute_gamma(
    instance: Instance,
    x: Allocation,
    v=None,
) -> DPTable:
    """gamma tables filled by enumerating all subsets of every prefix."""
    n = instance.n
    if n > ENUMERATION_LIMIT:
        raise SizeLimitError(f"enumeration limit is n <= {ENUMERATION_LIMIT}")
    w_total = instance.total_weight
    if v is None:
        cells = [[None] * (w_total + 1) for _ in range(n + 1)]
        for k in range(n + 1):
            for mask in range(1 << k):
                u = mask_weight(instance, mask)
                val = mask_payoff(x.values, mask)
                cur = cells[k][u]
                if cur is None or val < cur:
                    cells[k][u] = val
        return DPTable(
            "plain",
            instance.weights,
            x.values,
            tuple(tuple(row) for row in cells),
        )
    p = v.modulus
    cells = [[[None] * (w_total + 1) for _ in range(p)] for _ in range(n + 1)]
    for k in range(n + 1):
        for mask in range(1 << k):
            u = mask_weight(instance, mask)
            g = sum(v.entries[i] for i in range(k) if mask >> i & 1) % p
            val = mask_payoff(x.values, mask)
            cur = cells[k][g][u]
            if cur is None or val < cur:
                cells[k][g][u] = val
    return DPTable(
        "modular",
        instance.weights,
        x.values,
        tuple(tuple(tuple(row) for row in layer) for layer in cells),
        p,
        v,
    )


def brute_separate(
    instance: Instance,
    x: Allocation,
    eps: Fraction | None,
    history: Sequence,
    level: int,
) -> SeparationVerdict:
    """Explicit-family separation: every coalition tested one by one.

    Family membership for levels >= 2 uses the per-prime orthogonal bases
    exactly as the reformulated programs state it: some scalar product with a
    basis vector is nonzero mod p.  Verdicts must agree with full_separate;
    witnesses may differ.
    """
    n = instance.n
    if n > ENUMERATION_LIMIT:
        raise SizeLimitError(f"enumeration limit is n <= {ENUMERATION_LIMIT}")
    for i, val in enumerate(x.values):
        if val < 0:
            return SeparationVerdict(False, ViolationWitness("nonneg", player=i + 1))
    if sum(x.values) != instance.grand_value():
        return SeparationVerdict(False, ViolationWitness("efficiency"))

    checks: list[tuple[int, Fraction]] = []
    for i in range(1, level):
        checks.append((i, Fraction(history[i - 1].eps)))
    if eps is not None:
        checks.append((level, Fraction(eps)))

    for lvl, e in checks:
        bases = history[lvl - 2].bases if lvl >= 2 else None
        for mask in range(1 << n):
            if lvl >= 2:
                chi = _chi(mask, n)
                in_fam = False
                for p in bases.primes():
                    for t, vec in enumerate(bases.vectors(p), start=1):
                        if not vec.is_zero() and vec.dot(chi) != 0:
                            in_fam = True
                            break
                    if in_fam:
                        break
                if not in_fam:
                    continue
            nu = 1 if mask_weight(instance, mask) >= instance.quota else 0
            if mask_payoff(x.values, mask) < nu + e:
                return SeparationVerdict(
                    False,
                    ViolationWitness(
                        "coalition",
                        level=lvl,
                        coalition=Coalition(mask, n),
                        rhs=Fraction(nu) + e,
                    ),
                )
    return SeparationVerdict(True)
