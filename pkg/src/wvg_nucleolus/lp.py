"""Exact rational linear programming and cutting-plane constraint generation.

The solver is a revised simplex over ``fractions.Fraction`` with a symbolic
big-M phase (costs are lexicographic (M, real) pairs) and Bland's smallest
index rule, so every run terminates and every reported optimum is exact.
Problems with many more rows than variables are solved through their duals:
the basis then stays variable-sized while the row set (for instance all 2^n
coalition inequalities of the brute-force oracle) only contributes columns,
which are priced lazily.

Problem shape, shared by every LP in this package: variables x_1..x_n >= 0
plus at most one free scalar (the excess bound being maximized), ">=" rows,
and at most one equality row.  Exposed dual multipliers follow the
``verify_certificate`` convention below; in particular multipliers of ">="
rows are non-negative and positive multipliers mark rows that are tight at
every optimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from .game import Allocation, Instance, mask_value

__all__ = [
    "ConstraintRecord",
    "LPError",
    "LPResult",
    "LPRow",
    "exact_lp_solve",
    "optimize_linear",
    "solve_max_eps",
    "verify_certificate",
]

_ITERATION_LIMIT = 200_000
_DUALIZE_ROW_FACTOR = 3


class LPError(RuntimeError):
    """Internal LP failure: infeasible master, iteration blow-up, or misuse."""


@dataclass(frozen=True)
class LPRow:
    """One constraint: coeffs . x + eps_coeff . eps  (>= | ==)  rhs."""

    key: Hashable
    coeffs: tuple[Fraction, ...]
    eps_coeff: Fraction
    rel: str  # "ge" | "eq"
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.rel not in ("ge", "eq"):
            raise LPError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class LPResult:
    """Outcome of an exact solve.

    status is "optimal", "infeasible" or "unbounded".  At optimality ``x``
    (and ``eps`` when the problem has the free variable) is an exact optimal
    point, ``value`` the exact objective, and ``duals`` maps row keys to
    multipliers in the verify_certificate convention.
    """

    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    eps: Fraction | None = None
    duals: Mapping[Hashable, Fraction] | None = None


# ---------------------------------------------------------------------------
# Standard-form construction
# ---------------------------------------------------------------------------


@dataclass
class _Standard:
    """min c.u, A u = b >= 0, u >= 0, columns stored sparse."""

    n_rows: int
    col_entries: list[tuple[tuple[int, Fraction], ...]]
    col_cost: list[Fraction]
    b: list[Fraction]
    row_flip: list[int]  # +1 / -1 applied to each original row
    # extraction data
    n_x: int
    has_eps: bool
    surplus_of_row: dict[int, int]  # original row idx -> column idx

    @property
    def n_cols(self) -> int:
        return len(self.col_entries)

    def column(self, j: int):
        return self.col_entries[j]

    def real_cost(self, j: int) -> Fraction:
        return self.col_cost[j]


def _build_standard(
    rows: Sequence[LPRow], obj_x: Sequence[Fraction], obj_eps: Fraction, n_x: int, has_eps: bool
) -> _Standard:
    """Internal min problem for the external max problem (objective negated).

    Variable order: x_1..x_n, eps+, eps-, surplus per ">=" row.  Rows are
    sign-flipped where needed so the right-hand side is non-negative.
    """
    m = len(rows)
    flips = [1] * m
    b: list[Fraction] = []
    for i, row in enumerate(rows):
        r = Fraction(row.rhs)
        if r < 0:
            flips[i] = -1
            r = -r
        b.append(r)

    cols: list[tuple[tuple[int, Fraction], ...]] = []
    costs: list[Fraction] = []

    def add_col(entries: list[tuple[int, Fraction]], cost: Fraction) -> int:
        cols.append(tuple((i, v) for i, v in entries if v != 0))
        costs.append(cost)
        return len(cols) - 1

    for j in range(n_x):
        entries = [(i, flips[i] * rows[i].coeffs[j]) for i in range(m)]
        add_col(entries, -Fraction(obj_x[j]))
    if has_eps:
        entries = [(i, flips[i] * rows[i].eps_coeff) for i in range(m)]
        add_col(entries, -Fraction(obj_eps))
        add_col([(i, -v) for i, v in entries], Fraction(obj_eps))
    surplus_of_row: dict[int, int] = {}
    for i, row in enumerate(rows):
        if row.rel == "ge":
            surplus_of_row[i] = add_col([(i, -Fraction(flips[i]))], Fraction(0))

    return _Standard(
        n_rows=m,
        col_entries=cols,
        col_cost=costs,
        b=b,
        row_flip=flips,
        n_x=n_x,
        has_eps=has_eps,
        surplus_of_row=surplus_of_row,
    )


# ---------------------------------------------------------------------------
# Revised simplex with symbolic big-M costs
# ---------------------------------------------------------------------------

_BLAND_STREAK = 12  # degenerate pivots tolerated before Bland's rule engages


def _generic_price(std):
    """Column pricer scanning the problem's sparse columns."""

    zero = Fraction(0)

    def price(y_m, y_r, in_basis, bland: bool, phase1: bool) -> int:
        best = -1
        best_pair: tuple[Fraction, Fraction] | None = None
        for j in range(std.n_cols):
            if j in in_basis:
                continue
            rm = zero
            for i, v in std.column(j):
                if y_m[i]:
                    rm -= y_m[i] * v
            if rm > 0 or (phase1 and rm == 0):
                continue
            rr = std.real_cost(j)
            for i, v in std.column(j):
                if y_r[i]:
                    rr -= y_r[i] * v
            if rm == 0 and rr >= 0:
                continue
            if bland:
                return j
            pair = (rm, rr)
            if best_pair is None or pair < best_pair:
                best = j
                best_pair = pair
        return best

    return price


def _revised_simplex(
    std, pricer=None
) -> tuple[str, list[Fraction], list[int], list[Fraction]]:
    """Solve a standard-form problem (min cost, A u = b >= 0, u >= 0).

    Costs are lexicographic (M, real) pairs; artificial variables cost (1, 0)
    and provide the initial basis, so no separate phase-1 is needed and
    infeasibility shows up as a positive residual M objective.  Entering
    columns follow steepest reduced cost until a run of degenerate pivots,
    after which Bland's smallest-index rule takes over, which guarantees
    termination.

    At optimality any artificial still basic (necessarily at value zero) is
    pivoted out onto a structural column when one crosses its row; artificials
    that cannot be pivoted out sit in rows outside the structural column
    space, where they cannot disturb the real reduced costs, so the returned
    y = c_B B^-1 (real part) is a valid dual certificate.

    Returns (status, structural values, basis, y).  "unbounded" means the
    real objective is unbounded below on the feasible region.
    """
    m = std.n_rows
    ncols = std.n_cols
    column = std.column
    real_cost = std.real_cost
    price = _generic_price(std) if pricer is None else pricer

    basis = [ncols + i for i in range(m)]
    binv: list[list[Fraction]] = [
        [Fraction(1) if i == j else Fraction(0) for j in range(m)] for i in range(m)
    ]
    xb = [Fraction(v) for v in std.b]
    zero = Fraction(0)
    one = Fraction(1)
    degenerate_streak = 0

    def pivot(leaving: int, entering: int, t: list[Fraction]) -> None:
        theta = xb[leaving] / t[leaving]
        inv_piv = one / t[leaving]
        binv[leaving] = [e * inv_piv for e in binv[leaving]]
        xb[leaving] = theta
        prow = binv[leaving]
        for i in range(m):
            if i != leaving and t[i]:
                f = t[i]
                row = binv[i]
                binv[i] = [a - f * b_ for a, b_ in zip(row, prow)]
                xb[i] -= f * theta
        basis[leaving] = entering

    for _ in range(_ITERATION_LIMIT):
        y_m = [zero] * m
        y_r = [zero] * m
        for i, bj in enumerate(basis):
            if bj >= ncols:  # artificial: cost (1, 0)
                row = binv[i]
                for k in range(m):
                    if row[k]:
                        y_m[k] += row[k]
            else:
                cr = real_cost(bj)
                if cr:
                    row = binv[i]
                    for k in range(m):
                        if row[k]:
                            y_r[k] += cr * row[k]

        in_basis = set(basis)
        entering = price(y_m, y_r, in_basis, degenerate_streak >= _BLAND_STREAK)
        if entering < 0:
            if any(basis[i] >= ncols and xb[i] != 0 for i in range(m)):
                return "infeasible", [], basis, y_r
            # drive out degenerate basic artificials where a structural
            # column crosses their row; a zero-length step keeps the point
            cleaned = False
            for i in range(m):
                if basis[i] < ncols:
                    continue
                row_i = binv[i]
                for j in range(ncols):
                    if j in in_basis:
                        continue
                    ti = zero
                    for r, v in column(j):
                        if row_i[r]:
                            ti += row_i[r] * v
                    if ti:
                        t = [zero] * m
                        for r, v in column(j):
                            for k in range(m):
                                if binv[k][r]:
                                    t[k] += binv[k][r] * v
                        pivot(i, j, t)
                        cleaned = True
                        break
                if cleaned:
                    break
            if cleaned:
                degenerate_streak += 1
                continue
            u = [zero] * ncols
            for i, bj in enumerate(basis):
                if bj < ncols:
                    u[bj] = xb[i]
            return "optimal", u, basis, y_r

        t = [zero] * m
        for i, v in column(entering):
            for k in range(m):
                if binv[k][i]:
                    t[k] += binv[k][i] * v

        leaving = -1
        best_num = zero
        best_den = one
        for i in range(m):
            if t[i] > 0:
                if leaving < 0 or xb[i] * best_den < best_num * t[i] or (
                    xb[i] * best_den == best_num * t[i] and basis[i] < basis[leaving]
                ):
                    leaving = i
                    best_num = xb[i]
                    best_den = t[i]
        if leaving < 0:
            rm_check = zero
            for i, v in column(entering):
                rm_check -= y_m[i] * v
            if rm_check < 0:
                raise LPError("artificial objective unbounded; solver invariant broken")
            return "unbounded", [], basis, y_r

        degenerate_streak = degenerate_streak + 1 if xb[leaving] == 0 else 0
        pivot(leaving, entering, t)
    raise LPError("simplex iteration limit exceeded")


# ---------------------------------------------------------------------------
# Public solve, with automatic dualization for row-heavy systems
# ---------------------------------------------------------------------------


def _solve_direct(
    rows: Sequence[LPRow],
    obj_x: Sequence[Fraction],
    obj_eps: Fraction,
    n_x: int,
    has_eps: bool,
    sense: str,
) -> LPResult:
    if sense == "min":
        res = _solve_direct(
            rows, [-c for c in obj_x], -obj_eps, n_x, has_eps, "max"
        )
        if res.status != "optimal":
            return res
        return LPResult("optimal", -res.value, res.x, res.eps, res.duals)

    std = _build_standard(rows, obj_x, obj_eps, n_x, has_eps)
    status, u, _, y = _revised_simplex(std)
    if status != "optimal":
        return LPResult(status)
    x = tuple(u[j] for j in range(n_x))
    eps = None
    if has_eps:
        eps = u[n_x] - u[n_x + 1]
    value = sum(c * v for c, v in zip(obj_x, x))
    if has_eps:
        value += obj_eps * eps
    duals: dict[Hashable, Fraction] = {}
    for i, row in enumerate(rows):
        yi = std.row_flip[i] * y[i]
        duals[row.key] = yi if row.rel == "ge" else -yi
    return LPResult("optimal", Fraction(value), x, eps, duals)


def _dualize(
    rows: Sequence[LPRow],
    obj_x: Sequence[Fraction],
    obj_eps: Fraction,
    n_x: int,
    has_eps: bool,
) -> tuple[list[LPRow], list[Fraction], Fraction, int, bool, list[int]]:
    """Dual of the max problem; see verify_certificate for the conventions.

    Dual variables: one y_k >= 0 per ">=" row plus one free multiplier for
    the single equality row.  Dual rows: one ">=" row per x_i and one
    equality row for the free eps variable.
    """
    ge_rows = [i for i, r in enumerate(rows) if r.rel == "ge"]
    eq_rows = [i for i, r in enumerate(rows) if r.rel == "eq"]
    if len(eq_rows) > 1:
        raise LPError("dualization supports at most one equality row")
    eq = rows[eq_rows[0]] if eq_rows else None

    dual_rows: list[LPRow] = []
    for i in range(n_x):
        coeffs = tuple(-rows[k].coeffs[i] for k in ge_rows)
        dual_rows.append(
            LPRow(
                key=("var", i),
                coeffs=coeffs,
                eps_coeff=eq.coeffs[i] if eq else Fraction(0),
                rel="ge",
                rhs=Fraction(obj_x[i]),
            )
        )
    if has_eps:
        coeffs = tuple(-rows[k].eps_coeff for k in ge_rows)
        dual_rows.append(
            LPRow(
                key=("var", "eps"),
                coeffs=coeffs,
                eps_coeff=eq.eps_coeff if eq else Fraction(0),
                rel="eq",
                rhs=Fraction(obj_eps),
            )
        )
    dual_obj = [-rows[k].rhs for k in ge_rows]
    dual_obj_eps = eq.rhs if eq else Fraction(0)
    return dual_rows, dual_obj, dual_obj_eps, len(ge_rows), eq is not None, ge_rows


def exact_lp_solve(
    rows: Sequence[LPRow],
    objective_x: Sequence[Fraction | int],
    objective_eps: Fraction | int = 0,
    sense: str = "max",
    force_orientation: str | None = None,
) -> LPResult:
    """Exact optimum of a linear program over x >= 0 and one optional free eps.

    ``rows`` may mix ">=" and (at most one, if dualization is wanted) "=="
    constraints.  Detects infeasibility and unboundedness exactly.  Row-heavy
    systems are solved through their dual so the simplex basis stays small;
    ``force_orientation`` ("direct" | "dual") overrides the heuristic,
    mainly for tests.
    """
    if sense not in ("max", "min"):
        raise LPError(f"unknown sense {sense!r}")
    obj_x = [Fraction(c) for c in objective_x]
    obj_eps = Fraction(objective_eps)
    n_x = len(obj_x)
    for row in rows:
        if len(row.coeffs) != n_x:
            raise LPError("row coefficient length does not match objective")
    has_eps = obj_eps != 0 or any(r.eps_coeff != 0 for r in rows)

    n_eq = sum(1 for r in rows if r.rel == "eq")
    orientation = force_orientation
    if orientation is None:
        heavy = len(rows) > max(_DUALIZE_ROW_FACTOR * (n_x + 2), 24)
        orientation = "dual" if (heavy and n_eq <= 1) else "direct"

    if orientation == "direct":
        return _solve_direct(rows, obj_x, obj_eps, n_x, has_eps, sense)

    # -- dualized path ------------------------------------------------------
    if sense == "min":
        res = exact_lp_solve(
            rows, [-c for c in obj_x], -obj_eps, "max", force_orientation="dual"
        )
        if res.status != "optimal":
            return res
        return LPResult("optimal", -res.value, res.x, res.eps, res.duals)

    d_rows, d_obj, d_obj_eps, d_nx, d_has_eps, ge_rows = _dualize(
        rows, obj_x, obj_eps, n_x, has_eps
    )
    dres = _solve_direct(d_rows, d_obj, d_obj_eps, d_nx, d_has_eps, "min")
    if dres.status == "unbounded":
        return LPResult("infeasible")
    if dres.status == "infeasible":
        # primal unbounded or infeasible; resolve honestly the slow way
        return _solve_direct(rows, obj_x, obj_eps, n_x, has_eps, "max")

    # primal point = duals of the dual problem; eps = -(multiplier of the
    # dual's equality row); primal duals = the dual solution itself.
    assert dres.duals is not None
    x = tuple(dres.duals[("var", i)] for i in range(n_x))
    eps = -dres.duals[("var", "eps")] if has_eps else None
    duals = {rows[k].key: dres.x[pos] for pos, k in enumerate(ge_rows)}
    for i, r in enumerate(rows):
        if r.rel == "eq":
            duals[r.key] = dres.eps if dres.eps is not None else Fraction(0)
    value = sum(c * v for c, v in zip(obj_x, x))
    if has_eps:
        value += obj_eps * eps
    if value != dres.value:
        raise LPError("strong duality violated; solver invariant broken")
    return LPResult("optimal", Fraction(value), x, eps, duals)


def verify_certificate(
    rows: Sequence[LPRow],
    objective_x: Sequence[Fraction | int],
    objective_eps: Fraction | int,
    result: LPResult,
) -> None:
    """Exact optimality check for a sense="max" result; raises LPError on failure.

    With y_k the multiplier of row k and lam of the equality row, the
    conditions are: primal feasibility; y_k >= 0 with y_k > 0 only on tight
    ">=" rows; stationarity  -sum y_k a_k[i] + lam a_eq[i] >= c_i  for every
    x_i (equality where x_i > 0) and with exact equality for the free eps
    coordinate; strong duality  c.x + c_eps.eps = lam b_eq - sum y_k r_k.
    """
    if result.status != "optimal":
        raise LPError("certificate requires an optimal result")
    obj_x = [Fraction(c) for c in objective_x]
    obj_eps = Fraction(objective_eps)
    x = result.x
    eps = result.eps if result.eps is not None else Fraction(0)
    duals = result.duals
    value = sum(c * v for c, v in zip(obj_x, x)) + obj_eps * eps
    if value != result.value:
        raise LPError("reported value does not match the reported point")
    if any(v < 0 for v in x):
        raise LPError("primal point violates x >= 0")
    dual_total = Fraction(0)
    stat = [-c for c in obj_x]
    stat_eps = -obj_eps
    for row in rows:
        lhs = sum(a * v for a, v in zip(row.coeffs, x)) + row.eps_coeff * eps
        y = duals.get(row.key, Fraction(0))
        if row.rel == "ge":
            if lhs < row.rhs:
                raise LPError(f"row {row.key!r} violated at the primal point")
            if y < 0:
                raise LPError(f"negative multiplier on row {row.key!r}")
            if y > 0 and lhs != row.rhs:
                raise LPError(f"positive multiplier on slack row {row.key!r}")
            dual_total -= y * row.rhs
            for i, a in enumerate(row.coeffs):
                stat[i] -= y * a
            stat_eps -= y * row.eps_coeff
        else:
            if lhs != row.rhs:
                raise LPError(f"equality row {row.key!r} violated")
            dual_total += y * row.rhs
            for i, a in enumerate(row.coeffs):
                stat[i] += y * a
            stat_eps += y * row.eps_coeff
    for i in range(len(obj_x)):
        if stat[i] < 0:
            raise LPError(f"dual infeasible at variable {i}")
        if x[i] > 0 and stat[i] != 0:
            raise LPError(f"complementary slackness violated at variable {i}")
    if (result.eps is not None or obj_eps != 0) and stat_eps != 0:
        raise LPError("dual stationarity violated for the free variable")
    if dual_total != value:
        raise LPError("strong duality violated")


# ---------------------------------------------------------------------------
# Prepared solver for LPs with one row per coalition mask
# ---------------------------------------------------------------------------


class _CoalitionDual:
    """Standard form of the dual when the primal has one row per mask.

    Dual rows: one ">=" row per x_i (index 0..n-1, each with a surplus
    column) and one equality row for the free eps (index n).  Dual columns:
    the 2^n coalition multipliers (synthesized from the mask, never stored),
    then guard, optional eps-pin pair, the split efficiency multiplier, and
    the surpluses.  Pricing over the coalition block uses subset sums, one
    addition per mask.
    """

    def __init__(self, owner: "CoalitionLP", b_raw: list[Fraction], pin_eps):
        self.owner = owner
        n = owner.n
        self.n_rows = n + 1
        self.flip = [-1 if v < 0 else 1 for v in b_raw]
        self.b = [abs(v) for v in b_raw]
        self.pin_eps = pin_eps
        self.nmasks = 1 << n
        specials: list[tuple[tuple[tuple[int, int], ...], Fraction]] = []
        f_eps = self.flip[n]
        specials.append((((n, f_eps),), Fraction(1)))  # guard multiplier
        if pin_eps is not None:
            specials.append((((n, -f_eps),), -Fraction(pin_eps)))
            specials.append((((n, f_eps),), Fraction(pin_eps)))
        q = Fraction(owner.grand_value)
        specials.append((tuple((i, self.flip[i]) for i in range(n)), q))
        specials.append((tuple((i, -self.flip[i]) for i in range(n)), -q))
        for i in range(n):
            specials.append((((i, -self.flip[i]),), Fraction(0)))
        self.specials = specials
        self.n_cols = self.nmasks + len(specials)

    def column(self, j: int):
        if j >= self.nmasks:
            return self.specials[j - self.nmasks][0]
        entries = []
        m = j
        while m:
            low = m & -m
            i = low.bit_length() - 1
            entries.append((i, -self.flip[i]))
            m ^= low
        if self.owner.active[j]:
            entries.append((self.owner.n, self.flip[self.owner.n]))
        return entries

    def real_cost(self, j: int) -> Fraction:
        if j >= self.nmasks:
            return self.specials[j - self.nmasks][1]
        return -self.owner.rhs[j]

    def price(self, y_m, y_r, in_basis, bland: bool):
        # All mask-block arithmetic is integer: multipliers and right-hand
        # sides are brought over one common denominator, after which reduced
        # costs are subset sums plus one subtraction per mask.
        owner = self.owner
        n = owner.n
        zero = Fraction(0)
        flip = self.flip
        f_m = [y_m[i] * flip[i] for i in range(n)]
        f_r = [y_r[i] * flip[i] for i in range(n)]
        fm_eps = y_m[n] * flip[n]
        fr_eps = y_r[n] * flip[n]
        need_m = any(f_m) or fm_eps
        active = owner.active
        nmasks = self.nmasks

        d_y = 1
        for v in f_r:
            d_y = d_y * v.denominator // math.gcd(d_y, v.denominator)
        d_y = d_y * fr_eps.denominator // math.gcd(d_y, fr_eps.denominator)
        d = d_y * owner.rhs_den // math.gcd(d_y, owner.rhs_den)
        a = d // d_y
        b = d // owner.rhs_den
        fr = [v.numerator * (d // v.denominator) for v in f_r]
        fre = fr_eps.numerator * (d // fr_eps.denominator)
        rhsn = owner.rhs_num
        ss = [0] * nmasks
        for mask in range(1, nmasks):
            low = mask & -mask
            ss[mask] = ss[mask ^ low] + fr[low.bit_length() - 1]
        if need_m:
            d_m = 1
            for v in f_m:
                d_m = d_m * v.denominator // math.gcd(d_m, v.denominator)
            d_m = d_m * fm_eps.denominator // math.gcd(d_m, fm_eps.denominator)
            fm = [v.numerator * (d_m // v.denominator) for v in f_m]
            fme = fm_eps.numerator * (d_m // fm_eps.denominator)
            ss_m = [0] * nmasks
            for mask in range(1, nmasks):
                low = mask & -mask
                ss_m[mask] = ss_m[mask ^ low] + fm[low.bit_length() - 1]

        best = -1
        best_pair: tuple[int, int] | None = None  # scaled (rm, rr)
        for mask in range(nmasks):
            if need_m:
                rm = ss_m[mask] - fme if active[mask] else ss_m[mask]
                if rm > 0:
                    continue
            else:
                rm = 0
            rr = ss[mask] - rhsn[mask] * b
            if active[mask]:
                rr -= fre
            if rm == 0 and rr >= 0:
                continue
            if mask in in_basis:
                continue
            if bland:
                return mask
            pair = (rm, rr)
            if best_pair is None or pair < best_pair:
                best = mask
                best_pair = pair

        best_special = -1
        best_special_pair: tuple[Fraction, Fraction] | None = None
        for idx in range(len(self.specials)):
            j = nmasks + idx
            if j in in_basis:
                continue
            rm_f = zero
            rr_f = self.specials[idx][1]
            for i, v in self.specials[idx][0]:
                if y_m[i]:
                    rm_f -= y_m[i] * v
                if y_r[i]:
                    rr_f -= y_r[i] * v
            if rm_f > 0 or (rm_f == 0 and rr_f >= 0):
                continue
            if bland:
                if best >= 0:
                    return best
                return j
            pair_f = (rm_f, rr_f)
            if best_special_pair is None or pair_f < best_special_pair:
                best_special = j
                best_special_pair = pair_f

        if best < 0:
            return best_special
        if best_special < 0:
            return best
        # exact cross-block comparison of the two finalists
        scale_m = Fraction(1, d_m) if need_m else Fraction(0)
        mask_pair = (best_pair[0] * scale_m, Fraction(best_pair[1], d))
        return best if mask_pair <= best_special_pair else best_special


class CoalitionLP:
    """Exact LP with one constraint per coalition, solvable repeatedly.

    Primal: variables x >= 0 and a free eps; rows x(S) >= rhs_S (+ eps when
    active_S) for every mask S, the efficiency equality x(N) = grand value,
    and the bound eps <= 1.  Built once per row configuration; each solve
    picks an objective over (x, eps), a sense, and optionally pins eps to a
    value, which turns the region into the frozen one.

    Shares the simplex pivoter with exact_lp_solve; only the pricing walk
    differs, exploiting that coalition columns are subset-sum structured.
    The brute-force oracle runs on this front end.
    """

    def __init__(
        self,
        n: int,
        grand_value: int,
        rhs: Sequence[Fraction],
        active: Sequence[bool],
    ) -> None:
        if len(rhs) != 1 << n or len(active) != 1 << n:
            raise LPError("need one rhs and activity flag per coalition")
        self.n = n
        self.grand_value = grand_value
        self.rhs = [Fraction(v) for v in rhs]
        self.active = list(active)
        den = 1
        for v in self.rhs:
            den = den * v.denominator // math.gcd(den, v.denominator)
        self.rhs_den = den
        self.rhs_num = [v.numerator * (den // v.denominator) for v in self.rhs]

    def solve(
        self,
        objective_x: Sequence[Fraction | int],
        objective_eps: Fraction | int = 0,
        sense: str = "max",
        pin_eps: Fraction | None = None,
    ) -> LPResult:
        if sense == "min":
            res = self.solve(
                [-Fraction(c) for c in objective_x], -Fraction(objective_eps), "max", pin_eps
            )
            if res.status != "optimal":
                return res
            return LPResult("optimal", -res.value, res.x, res.eps, res.duals)
        n = self.n
        obj_x = [Fraction(c) for c in objective_x]
        b_raw = obj_x + [Fraction(objective_eps)]
        dual = _CoalitionDual(self, b_raw, pin_eps)
        status, u, basis, y = _revised_simplex(dual, pricer=dual.price)
        if status == "unbounded":
            return LPResult("infeasible")
        if status == "infeasible":
            return LPResult("unbounded")
        x = tuple(dual.flip[i] * y[i] for i in range(n))
        eps = dual.flip[n] * y[n]
        value = sum(c * v for c, v in zip(obj_x, x)) + Fraction(objective_eps) * eps
        dual_value = sum(
            dual.real_cost(j) * u[j] for j in set(basis) if j < dual.n_cols
        )
        if value != dual_value:
            raise LPError("strong duality violated in coalition solve; solver bug")
        duals: dict[Hashable, Fraction] = {}
        for bj in basis:
            if bj < dual.nmasks and u[bj]:
                duals[bj] = u[bj]
        return LPResult("optimal", Fraction(value), x, eps, duals)


# ---------------------------------------------------------------------------
# Cutting-plane layer
# ---------------------------------------------------------------------------

EPS_UPPER_GUARD = Fraction(1)


@dataclass(frozen=True)
class ConstraintRecord:
    """A generated coalition cut: x(S) >= v(S) + eps_level.

    While its level is the active one the epsilon term is the LP variable
    (sigma = 1); afterwards the level's optimal value is folded into the
    right-hand side.
    """

    mask: int
    level: int
    nu: int
    origin: int
    kind: str = "coalition"

    @property
    def key(self) -> tuple[str, int, int]:
        return ("cut", self.level, self.mask)

    def row(
        self, n: int, active_level: int | None, eps_map: Mapping[int, Fraction]
    ) -> LPRow:
        coeffs = tuple(Fraction(self.mask >> i & 1) for i in range(n))
        if active_level is not None and self.level == active_level:
            return LPRow(self.key, coeffs, Fraction(-1), "ge", Fraction(self.nu))
        return LPRow(
            self.key, coeffs, Fraction(0), "ge", Fraction(self.nu) + eps_map[self.level]
        )


@dataclass
class MasterOutcome:
    """Result of one constraint-generation run at the full-LP optimum."""

    x: tuple[Fraction, ...]
    eps: Fraction | None
    value: Fraction
    duals: Mapping[Hashable, Fraction]
    new_records: tuple[ConstraintRecord, ...]
    iterations: int
    oracle_calls: int


def _mask_repr(mask: int, n: int) -> str:
    members = [str(i + 1) for i in range(n) if mask >> i & 1]
    return "{" + ",".join(members) + "}"


def _base_rows(instance: Instance) -> list[LPRow]:
    n = instance.n
    ones = tuple(Fraction(1) for _ in range(n))
    nu_n = Fraction(instance.grand_value())
    return [LPRow("efficiency", ones, Fraction(0), "eq", nu_n)]


def _pool_rows(
    instance: Instance,
    pool: Sequence[ConstraintRecord],
    active_level: int | None,
    eps_map: Mapping[int, Fraction],
) -> list[LPRow]:
    return [rec.row(instance.n, active_level, eps_map) for rec in pool]


def solve_max_eps(
    instance: Instance,
    oracle: Callable[[Allocation, Fraction], "object"],
    pool: list[ConstraintRecord],
    level: int,
    eps_map: Mapping[int, Fraction],
    origin_counter: "itertools.count[int] | None" = None,
    trace: Callable[[str], None] | None = None,
) -> MasterOutcome:
    """Maximize eps over the oracle-described constraint family at ``level``.

    The master holds the efficiency equality, an eps <= 1 safety bound (the
    excess of any coalition is at most 1, so the bound can never cut off the
    true optimum; this is asserted), and the generated cuts.  Each round the
    master optimum is queried against the oracle; a violated constraint
    becomes a new ConstraintRecord in ``pool``.  Terminates because the
    coalition family is finite and no record repeats.
    """
    n = instance.n
    counter = origin_counter if origin_counter is not None else itertools.count()
    seen = {(rec.level, rec.mask) for rec in pool}
    new_records: list[ConstraintRecord] = []
    guard = LPRow("guard", tuple(Fraction(0) for _ in range(n)), Fraction(-1), "ge", -EPS_UPPER_GUARD)
    obj_x = [Fraction(0)] * n
    oracle_calls = 0
    for iteration in itertools.count(1):
        rows = _base_rows(instance) + [guard] + _pool_rows(instance, pool, level, eps_map)
        res = exact_lp_solve(rows, obj_x, Fraction(1), "max")
        if res.status != "optimal":
            raise LPError(
                f"level-{level} master is {res.status}; the scheme guarantees a "
                "feasible bounded master, so this is a solver bug"
            )
        x = Allocation(res.x)
        eps = res.eps
        verdict = oracle(x, eps)
        oracle_calls += 1
        if verdict.feasible:
            if eps == EPS_UPPER_GUARD:
                wide = LPRow(
                    "guard", guard.coeffs, Fraction(-1), "ge", -2 * EPS_UPPER_GUARD
                )
                rows2 = _base_rows(instance) + [wide] + _pool_rows(
                    instance, pool, level, eps_map
                )
                res2 = exact_lp_solve(rows2, obj_x, Fraction(1), "max")
                if res2.status != "optimal" or res2.value != eps:
                    raise LPError("eps guard bound the master optimum")
            if trace is not None:
                trace(
                    f"iter={iteration} level={level} eps={eps} "
                    f"family=- witness=- verdict=feasible"
                )
            return MasterOutcome(
                x=res.x,
                eps=eps,
                value=res.value,
                duals=res.duals,
                new_records=tuple(new_records),
                iterations=iteration,
                oracle_calls=oracle_calls,
            )
        wit = verdict.witness
        if wit.kind != "coalition":
            raise LPError(
                f"master produced a point violating base constraint {wit.kind}; "
                "masters enforce those rows directly, so this is a solver bug"
            )
        key = (wit.level, wit.coalition.mask)
        if key in seen:
            raise LPError(
                f"oracle repeated cut level={wit.level} S={_mask_repr(wit.coalition.mask, n)}"
            )
        seen.add(key)
        rec = ConstraintRecord(
            mask=wit.coalition.mask,
            level=wit.level,
            nu=mask_value(instance, wit.coalition.mask),
            origin=next(counter),
        )
        pool.append(rec)
        new_records.append(rec)
        if trace is not None:
            fam = f"p{wit.family[0]}t{wit.family[1]}" if wit.family else "plain"
            trace(
                f"iter={iteration} level={level} eps={eps} family={fam} "
                f"witness={_mask_repr(wit.coalition.mask, n)} verdict=cut"
            )
    raise LPError("unreachable")


def optimize_linear(
    instance: Instance,
    objective_x: Sequence[Fraction | int],
    sense: str,
    oracle: Callable[[Allocation], "object"],
    pool: list[ConstraintRecord],
    eps_map: Mapping[int, Fraction],
    origin_counter: "itertools.count[int] | None" = None,
) -> MasterOutcome:
    """Optimize a linear functional of x over the frozen region P_j(eps_j).

    All epsilon values are fixed, so the membership oracle only takes x.
    Used for fixedness tests and the final uniqueness check.
    """
    if sense not in ("max", "min"):
        raise LPError(f"unknown sense {sense!r}")
    counter = origin_counter if origin_counter is not None else itertools.count()
    seen = {(rec.level, rec.mask) for rec in pool}
    new_records: list[ConstraintRecord] = []
    obj = [Fraction(c) for c in objective_x]
    oracle_calls = 0
    for iteration in itertools.count(1):
        rows = _base_rows(instance) + _pool_rows(instance, pool, None, eps_map)
        res = exact_lp_solve(rows, obj, 0, sense)
        if res.status != "optimal":
            raise LPError(f"frozen-region master is {res.status}; solver bug")
        verdict = oracle(Allocation(res.x))
        oracle_calls += 1
        if verdict.feasible:
            return MasterOutcome(
                x=res.x,
                eps=None,
                value=res.value,
                duals=res.duals,
                new_records=tuple(new_records),
                iterations=iteration,
                oracle_calls=oracle_calls,
            )
        wit = verdict.witness
        if wit.kind != "coalition":
            raise LPError("frozen master violated a base constraint; solver bug")
        key = (wit.level, wit.coalition.mask)
        if key in seen:
            raise LPError("oracle repeated cut in frozen-region optimization")
        seen.add(key)
        rec = ConstraintRecord(
            mask=wit.coalition.mask,
            level=wit.level,
            nu=mask_value(instance, wit.coalition.mask),
            origin=next(counter),
        )
        pool.append(rec)
        new_records.append(rec)
    raise LPError("unreachable")
