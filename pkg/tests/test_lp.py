import numpy as np
import pytest

from oracles import lp_optimum_by_vertex_enumeration
from twosided.instance import Instance, generate
from twosided.lp import (
    DualPoint,
    ViolatedSets,
    build_aux_primal,
    check_lp_solution,
    dual_feasibility_report,
    lp1_exact_small,
    lp2_exact_small,
)
from twosided.mnl import SizeLimitError, subset_of
from twosided.simplex import solve_lp

TOL = 1e-9


def test_lp2_unit_instance(unit_instance):
    sol = lp2_exact_small(unit_instance)
    assert sol.objective == pytest.approx(0.25, abs=TOL)
    assert sol.x[0, 0] == pytest.approx(0.5, abs=TOL)
    assert sol.lam[0].get((0,), 0.0) == pytest.approx(0.5, abs=TOL)
    assert check_lp_solution(unit_instance, sol) == []


def test_lp2_zero_revenue(zero_revenue_instance):
    sol = lp2_exact_small(zero_revenue_instance)
    assert sol.objective == pytest.approx(0.0, abs=TOL)
    assert check_lp_solution(zero_revenue_instance, sol) == []


def test_lp2_solution_invariants_random():
    for seed in range(10):
        inst = generate("uniform-random", 4, 2, seed)
        sol = lp2_exact_small(inst)
        assert check_lp_solution(inst, sol) == []


def test_lp2_size_guard():
    inst = generate("uniform-random", 11, 2, 0)
    with pytest.raises(SizeLimitError):
        lp2_exact_small(inst)


def test_lp2_supplier_permutation_invariance():
    inst = generate("uniform-random", 4, 3, 12)
    perm = [2, 0, 1]
    permuted = Instance(
        n=inst.n,
        m=inst.m,
        u=inst.u[:, perm],
        w=inst.w[perm, :],
        r=inst.r[:, perm],
    )
    assert lp2_exact_small(permuted).objective == pytest.approx(
        lp2_exact_small(inst).objective, abs=TOL
    )


def test_lp1_unit_instance(unit_instance):
    assert lp1_exact_small(unit_instance) == pytest.approx(0.25, abs=TOL)


def test_lp1_zero_revenue(zero_revenue_instance):
    assert lp1_exact_small(zero_revenue_instance) == pytest.approx(0.0, abs=TOL)


def test_lp1_below_lp2():
    for seed in range(15):
        inst = generate("uniform-random", 3, 2, seed)
        assert lp1_exact_small(inst) <= lp2_exact_small(inst).objective + 1e-7


def test_lp1_size_guard():
    with pytest.raises(SizeLimitError):
        lp1_exact_small(generate("uniform-random", 5, 2, 0))


def test_aux_primal_empty_support_only():
    inst = generate("uniform-random", 3, 2, 4)
    violated = ViolatedSets(inst.m)
    columns = build_aux_primal(inst, violated)
    sol = columns.extract(solve_lp(columns.lp))
    assert sol.objective == pytest.approx(0.0, abs=TOL)
    assert check_lp_solution(inst, sol) == []


def test_aux_primal_full_support_matches_exact():
    inst = generate("uniform-random", 3, 2, 8)
    violated = ViolatedSets(inst.m)
    for j in range(inst.m):
        for mask in range(1, 2**inst.n):
            violated.add(j, subset_of(mask, inst.n))
    columns = build_aux_primal(inst, violated)
    sol = columns.extract(solve_lp(columns.lp))
    assert sol.objective == pytest.approx(lp2_exact_small(inst).objective, abs=1e-7)


def test_aux_primal_matches_vertex_enumeration():
    inst = generate("uniform-random", 2, 2, 3)
    violated = ViolatedSets(2)
    violated.add(0, (0,))
    violated.add(0, (0, 1))
    violated.add(1, (1,))
    columns = build_aux_primal(inst, violated)
    res = solve_lp(columns.lp)
    oracle = lp_optimum_by_vertex_enumeration(columns.lp)
    assert res.objective == pytest.approx(oracle, abs=1e-8)


def test_violated_sets_dedupe_and_order():
    violated = ViolatedSets(2)
    assert violated.add(0, (1, 0))
    assert not violated.add(0, (0, 1))
    assert violated.add(0, ())
    assert violated[0] == [(0, 1), ()]
    assert violated.counts() == [2, 0]
    assert violated.total() == 2


def test_dual_feasible_baseline_point():
    # beta at the revenue peak with zero alpha and gamma is always feasible
    for seed in range(5):
        inst = generate("uniform-random", 4, 2, seed)
        point = DualPoint(
            alpha=np.zeros((4, 2)),
            beta=np.full(2, float(inst.r.max())),
            gamma=np.zeros((4, 2)),
        )
        assert dual_feasibility_report(inst, point, exact=True).feasible


def test_dual_zero_point_violates_with_positive_revenue():
    inst = generate("uniform-random", 3, 2, 2)
    point = DualPoint(alpha=np.zeros((3, 2)), beta=np.zeros(2), gamma=np.zeros((3, 2)))
    report = dual_feasibility_report(inst, point, exact=True)
    assert any(v.kind == "assortment-cost" for v in report.violations)


def test_dual_report_matches_direct_scan():
    rng = np.random.default_rng(14)
    for seed in range(10):
        inst = generate("uniform-random", 4, 2, seed)
        point = DualPoint(
            alpha=rng.normal(0.0, 0.2, (4, 2)),
            beta=rng.normal(0.3, 0.3, 2),
            gamma=rng.normal(0.0, 0.2, (4, 2)),
        )
        report = dual_feasibility_report(inst, point, exact=True)
        got = {(v.kind, v.index) for v in report.violations}
        want = set()
        for i in range(4):
            for j in range(2):
                if point.alpha[i, j] < -TOL:
                    want.add(("alpha-nonnegative", (i, j)))
                slack = point.alpha[i, j] / inst.u[i, j] + point.alpha[i].sum() - point.gamma[i, j]
                if slack < -TOL:
                    want.add(("weight-link", (i, j)))
        from twosided.cost_assortment import rev_cost

        for j in range(2):
            worst = max(
                rev_cost(inst, j, subset_of(mask, 4), point.gamma) for mask in range(16)
            )
            if worst > point.beta[j] + TOL:
                want.add(("assortment-cost", (j,)))
        assert got == want


def test_weak_duality():
    for seed in range(8):
        inst = generate("uniform-random", 3, 2, seed)
        primal = lp2_exact_small(inst).objective
        point = DualPoint(
            alpha=np.zeros((3, 2)),
            beta=np.full(2, float(inst.r.max())),
            gamma=np.zeros((3, 2)),
        )
        assert dual_feasibility_report(inst, point, exact=True).feasible
        assert point.objective >= primal - TOL


def test_lp_ordering_on_counterexample_derived_instance(counterexample):
    # single-supplier fixture: the marginal LP relaxes the set-distribution LP
    lp1 = lp1_exact_small(counterexample)
    lp2 = lp2_exact_small(counterexample).objective
    assert lp1 <= lp2 + 1e-7


def test_lp1_upper_bounds_adaptive_optimum_3x3():
    from twosided.policies import exact_dp_atar

    for seed in range(5):
        inst = generate("uniform-random", 3, 3, 60 + seed)
        opt, _ = exact_dp_atar(inst)
        assert opt <= lp1_exact_small(inst) + 1e-7


def test_lp2_objective_bounded_by_suppliers_times_peak_revenue():
    for seed in range(8):
        inst = generate("uniform-random", 3, 2, 70 + seed)
        sol = lp2_exact_small(inst)
        assert sol.objective <= inst.m * float(inst.r.max()) + 1e-9
