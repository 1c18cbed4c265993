import itertools
import random
from fractions import Fraction

import pytest

from wvg_nucleolus.game import Allocation, Instance
from wvg_nucleolus.lp import (
    CoalitionLP,
    ConstraintRecord,
    LPError,
    LPRow,
    exact_lp_solve,
    optimize_linear,
    solve_max_eps,
    verify_certificate,
)
from wvg_nucleolus.separation import full_separate

F = Fraction


def ge(key, coeffs, eps, rhs):
    return LPRow(key, tuple(F(c) for c in coeffs), F(eps), "ge", F(rhs))


def eq(key, coeffs, rhs):
    return LPRow(key, tuple(F(c) for c in coeffs), F(0), "eq", F(rhs))


class TestExactLPSolve:
    def test_eps_capped_at_zero(self):
        rows = [ge("r", (), -1, 0)]
        res = exact_lp_solve(rows, [], 1, "max")
        assert res.status == "optimal" and res.value == 0 and res.eps == 0
        verify_certificate(rows, [], F(1), res)

    def test_symmetric_split(self):
        rows = [
            ge("a", (1, 0), -1, 0),
            ge("b", (0, 1), -1, 0),
            eq("eff", (1, 1), 1),
        ]
        res = exact_lp_solve(rows, [0, 0], 1, "max")
        assert res.status == "optimal"
        assert res.value == F(1, 2)
        assert res.x == (F(1, 2), F(1, 2)) and res.eps == F(1, 2)
        verify_certificate(rows, [F(0), F(0)], F(1), res)

    def test_infeasible_pair(self):
        rows = [ge("a", (1,), 0, 1), ge("b", (-1,), 0, 0)]
        assert exact_lp_solve(rows, [0], 0, "max").status == "infeasible"

    def test_unbounded(self):
        rows = [ge("a", (1,), 0, 0)]
        assert exact_lp_solve(rows, [1], 0, "max").status == "unbounded"

    def test_min_sense(self):
        rows = [ge("a", (1,), 0, F(1, 3)), eq("eff", (1,), 1)]
        res = exact_lp_solve(rows, [1], 0, "min")
        assert res.status == "optimal" and res.value == 1

    def test_degenerate_does_not_cycle(self):
        # classic degenerate vertex: many rows tight at the origin
        rows = [
            ge("a", (1, 1, 1), 0, 0),
            ge("b", (1, 1, 0), 0, 0),
            ge("c", (1, 0, 1), 0, 0),
            ge("d", (0, 1, 1), 0, 0),
            ge("e", (-1, -1, -1), 0, -1),
        ]
        res = exact_lp_solve(rows, [-1, 2, -3], 0, "min")
        assert res.status == "optimal"
        verify = exact_lp_solve(rows, [1, -2, 3], 0, "max")
        assert verify.value == -res.value

    def test_orientations_agree(self, rng):
        for _ in range(60):
            n = rng.randint(1, 4)
            m = rng.randint(1, 6)
            rows = []
            for k in range(m):
                coeffs = [rng.randint(-2, 3) for _ in range(n)]
                rows.append(ge(("r", k), coeffs, rng.choice((0, 0, -1)), rng.randint(-2, 2)))
            rows.append(eq("eff", [1] * n, rng.randint(1, 2)))
            obj = [rng.randint(-2, 2) for _ in range(n)]
            direct = exact_lp_solve(rows, obj, 1, "max", force_orientation="direct")
            dual = exact_lp_solve(rows, obj, 1, "max", force_orientation="dual")
            assert direct.status == dual.status
            if direct.status == "optimal":
                assert direct.value == dual.value
                verify_certificate(rows, [F(c) for c in obj], F(1), direct)
                verify_certificate(rows, [F(c) for c in obj], F(1), dual)

    def test_dual_support_rows_tight_at_every_optimum(self, rng):
        # positive multiplier rows must stay tight when re-optimized
        for seed in range(20):
            local = random.Random(seed)
            n = local.randint(2, 3)
            rows = [
                ge(("r", k), [local.randint(0, 1) for _ in range(n)], -1, local.randint(0, 1))
                for k in range(local.randint(2, 5))
            ]
            rows.append(eq("eff", [1] * n, 1))
            rows.append(ge("guard", [0] * n, -1, -1))
            res = exact_lp_solve(rows, [0] * n, 1, "max")
            if res.status != "optimal":
                continue
            for row in rows:
                if row.rel != "ge" or res.duals.get(row.key, 0) <= 0:
                    continue
                # maximize the row's slack; it must stay at zero
                slack_obj = list(row.coeffs)
                probe_rows = [r for r in rows] + [
                    LPRow("pin", tuple(F(0) for _ in range(n)), F(1), "ge", res.eps),
                    LPRow("pin2", tuple(F(0) for _ in range(n)), F(-1), "ge", -res.eps),
                ]
                probe = exact_lp_solve(probe_rows, slack_obj, row.eps_coeff, "max")
                assert probe.status == "optimal"
                assert probe.value == row.rhs


class TestCoalitionLP:
    def exhaustive_check(self, inst, rhs, active, obj, obj_eps, sense, pin):
        """Cross-check CoalitionLP against the generic solver."""
        n = inst.n
        rows = []
        for mask in range(1 << n):
            coeffs = [F(mask >> i & 1) for i in range(n)]
            rows.append(
                LPRow(("c", mask), tuple(coeffs), F(-1) if active[mask] else F(0), "ge", rhs[mask])
            )
        rows.append(eq("eff", [1] * n, inst.grand_value()))
        rows.append(ge("guard", [0] * n, -1, -1))
        if pin is not None:
            rows.append(ge("p1", [0] * n, 1, pin))
            rows.append(ge("p2", [0] * n, -1, -pin))
        want = exact_lp_solve(rows, obj, obj_eps, sense, force_orientation="direct")
        prog = CoalitionLP(n, inst.grand_value(), rhs, active)
        got = prog.solve(obj, obj_eps, sense, pin_eps=pin)
        assert got.status == want.status
        if want.status == "optimal":
            assert got.value == want.value
            # the point must be feasible for the explicit rows
            for row in rows:
                lhs = sum(a * v for a, v in zip(row.coeffs, got.x)) + row.eps_coeff * got.eps
                if row.rel == "ge":
                    assert lhs >= row.rhs
                else:
                    assert lhs == row.rhs
            # reported coalition duals must mark tight rows
            for mask, y in got.duals.items():
                assert y >= 0
                lhs = sum(got.x[i] for i in range(n) if mask >> i & 1)
                if active[mask]:
                    lhs -= got.eps
                assert lhs == rhs[mask]

    def test_against_generic_small(self, rng):
        for trial in range(25):
            n = rng.randint(2, 4)
            inst = Instance(tuple(rng.randint(0, 4) for _ in range(n)), rng.randint(1, 9))
            nm = 1 << n
            active = [bool(rng.randint(0, 1)) for _ in range(nm)]
            rhs = [F(rng.randint(-1, 1), rng.randint(1, 3)) for _ in range(nm)]
            self.exhaustive_check(inst, rhs, active, [0] * n, 1, "max", None)
            obj = [F(rng.randint(0, 2)) for _ in range(n)]
            pin = F(rng.randint(-1, 1), 2)
            self.exhaustive_check(inst, rhs, active, obj, 0, "max", pin)
            self.exhaustive_check(inst, rhs, active, obj, 0, "min", pin)


def leastcore_oracle(instance):
    def oracle(x, eps):
        return full_separate(instance, x, eps, [], 1, "fast")

    return oracle


class TestSolveMaxEps:
    def test_three_player_majority(self):
        inst = Instance((1, 1, 1), 2)
        pool = []
        out = solve_max_eps(inst, leastcore_oracle(inst), pool, 1, {})
        assert out.eps == F(-1, 3)
        assert out.x == (F(1, 3), F(1, 3), F(1, 3))

    def test_dictator_core_nonempty(self):
        inst = Instance((3, 1, 1), 3)
        out = solve_max_eps(inst, leastcore_oracle(inst), [], 1, {})
        assert out.eps == 0

    def test_no_cut_repeats(self):
        inst = Instance((2, 1, 1, 1, 1), 4)
        pool = []
        out = solve_max_eps(inst, leastcore_oracle(inst), pool, 1, {})
        keys = [(r.level, r.mask) for r in pool]
        assert len(keys) == len(set(keys))
        # oracle confirms feasibility at the reported optimum
        x = Allocation(out.x)
        assert full_separate(inst, x, out.eps, [], 1).feasible

    def test_trace_lines(self):
        inst = Instance((1, 1), 2)
        lines = []
        solve_max_eps(inst, leastcore_oracle(inst), [], 1, {}, trace=lines.append)
        assert lines and lines[-1].endswith("verdict=feasible")
        assert all(line.startswith("iter=") for line in lines)


class TestOptimizeLinear:
    def test_simplex_extremes_level1(self):
        # region: leastcore of the two-player unanimity game at eps_1 = 0
        inst = Instance((1, 1), 2)
        pool = []
        out = solve_max_eps(inst, leastcore_oracle(inst), pool, 1, {})
        assert out.eps == 0
        eps_map = {1: F(0)}

        class _L1:
            eps = F(0)

        history = [_L1()]

        def member(x):
            return full_separate(inst, x, None, history, 2, "fast")

        hi = optimize_linear(inst, [1, 0], "max", member, pool, eps_map)
        lo = optimize_linear(inst, [1, 0], "min", member, pool, eps_map)
        assert hi.value == 1 and lo.value == 0
        grand = optimize_linear(inst, [1, 1], "max", member, pool, eps_map)
        assert grand.value == 1
