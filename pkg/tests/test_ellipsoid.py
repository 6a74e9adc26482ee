import numpy as np
import pytest

from twosided.cost_assortment import OracleConfig, rev_cost
from twosided.ellipsoid import (
    EllipsoidBreakdown,
    EllipsoidInit,
    default_iteration_budget,
    run_ellipsoid,
    solve_lp2_approx,
)
from twosided.instance import generate, normalize_revenues
from twosided.lp import check_lp_solution, dual_feasibility_report, lp2_exact_small


def test_requires_normalized_revenues():
    inst = generate("same-order-additive", 2, 2, 0)  # revenues can exceed 1
    assert float(inst.r.max()) > 1.0
    with pytest.raises(ValueError, match="normalized"):
        run_ellipsoid(inst, t_max=10)


def test_zero_revenue_objective_converges_to_zero(zero_revenue_instance):
    run = run_ellipsoid(zero_revenue_instance, t_max=4000)
    assert run.objective <= 1e-3
    assert run.objective >= -1e-9


def test_unit_instance_objective_and_recovery(unit_instance):
    sol, run = solve_lp2_approx(unit_instance, details=True)
    assert abs(run.objective - 0.25) <= 1e-4
    assert sol.objective >= 0.25 - 1e-6
    assert check_lp_solution(unit_instance, sol) == []


def test_random_instances_match_exact_lp():
    for seed in range(6):
        inst = normalize_revenues(generate("uniform-random", 3, 2, seed))
        exact = lp2_exact_small(inst).objective
        sol, run = solve_lp2_approx(inst, t_max=20000, details=True)
        assert run.violated.total() <= run.iterations
        assert sol.objective >= exact - 1e-4
        assert sol.objective <= exact + 1e-9
        # final incumbent upper-bounds the LP optimum
        assert run.objective >= exact - 1e-6


def test_incumbent_monotone_and_exactly_feasible():
    inst = normalize_revenues(generate("uniform-random", 3, 2, 13))
    run = run_ellipsoid(inst, t_max=15000)
    objs = [obj for _, obj in run.incumbent_history]
    assert all(a >= b for a, b in zip(objs, objs[1:]))
    assert len(run.incumbents) >= 1
    # every incumbent passed the exact checks with zero slack
    for point in run.incumbents[:: max(1, len(run.incumbents) // 10)]:
        assert dual_feasibility_report(inst, point, exact=True, tol=0.0).feasible


def test_recorded_sets_were_genuinely_violating():
    inst = normalize_revenues(generate("uniform-random", 3, 2, 21))
    run = run_ellipsoid(inst, t_max=8000, log_cuts=True)
    assert run.ac_cuts
    for cut in run.ac_cuts:
        assert cut.gamma is not None
        value = rev_cost(inst, cut.j, cut.subset, cut.gamma)
        assert value == pytest.approx(cut.value, abs=1e-12)
        assert value > cut.beta


def test_iteration_budget_respected():
    inst = normalize_revenues(generate("uniform-random", 2, 2, 5))
    run = run_ellipsoid(inst, t_max=500)
    assert run.iterations <= 500
    assert run.t_max == 500


def test_early_exit_flag(unit_instance):
    # the 1x1 run collapses (trace -> 0), so the trace threshold fires first
    run = run_ellipsoid(unit_instance, t_max=10**6, early_exit=True)
    assert run.early_exited
    assert run.iterations < 10**6
    plain = run_ellipsoid(unit_instance, t_max=10**6)
    assert run.iterations <= plain.iterations
    assert plain.degenerate_stop


def test_relaxed_oracle_band():
    config = OracleConfig(kind="relaxed", delta=0.2)
    for seed in range(3):
        inst = normalize_revenues(generate("uniform-random", 3, 2, seed))
        exact = lp2_exact_small(inst).objective
        sol = solve_lp2_approx(inst, config, t_max=20000)
        assert sol.objective >= (1.0 - 0.2) * exact - 1e-6
        assert sol.objective <= exact + 1e-9
        assert check_lp_solution(inst, sol) == []


def test_breakdown_on_corrupt_shape(unit_instance):
    corrupt = -np.eye(2 * 1 * 1 + 1)  # negative definite beyond any noise floor
    with pytest.raises(EllipsoidBreakdown, match="a'Da"):
        run_ellipsoid(unit_instance, t_max=10, init=EllipsoidInit(shape=corrupt))


def test_default_budget_formula(unit_instance):
    # 50 N^2 ln(10 N rho) with N = 3, rho = 20
    assert default_iteration_budget(unit_instance) == 2879


def test_trace_records(unit_instance):
    run = run_ellipsoid(unit_instance, t_max=50, trace=True)
    assert run.trace is not None and len(run.trace) == run.iterations
    first = run.trace[0]
    assert set(first) == {"t", "cut", "index", "obj", "incumbent_updated"}


def test_zero_revenue_approx_solve(zero_revenue_instance):
    sol, run = solve_lp2_approx(zero_revenue_instance, t_max=3000, details=True)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert check_lp_solution(zero_revenue_instance, sol) == []
    assert run.violated.total() <= run.cut_counts["assortment-cost"]


def test_debug_mode_keeps_shape_positive_definite(unit_instance):
    # short healthy run: the update formula must preserve positive
    # definiteness, verified by Cholesky after every cut
    run = run_ellipsoid(unit_instance, t_max=300, debug=True)
    assert run.iterations == 300


def test_incumbent_objective_matches_point():
    inst = normalize_revenues(generate("uniform-random", 2, 2, 33))
    run = run_ellipsoid(inst, t_max=5000)
    assert abs(run.objective - run.best.objective) <= 1e-12
