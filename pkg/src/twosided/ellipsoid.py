"""Ellipsoid method over the dual of the marginal LP.

The dual has 2nm + m variables (alpha, beta, gamma) but exponentially many
backlog constraints, one per (supplier, customer set). Each iteration scans
for a violated constraint in a fixed order -- objective cut first, then the
weight-link rows, alpha nonnegativity, and finally the backlog family
through the (1 - delta)-approximate sub-dual oracle -- and applies the
central-cut update. Backlog sets that ever produced a cut are recorded;
restricting the primal to that support (the auxiliary primal) and solving
it exactly recovers a feasible, (1 - delta)-approximate solution of the
full marginal LP.

Iterations count cut steps only: when the center passes every check the
incumbent is updated in place and the loop re-enters without advancing the
counter (the objective cut necessarily fires next).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost_assortment import OracleConfig, make_oracle
from .instance import Instance
from .lp import (
    DualPoint,
    LpSolverError,
    ViolatedSets,
    build_aux_primal,
    check_lp_solution,
)
from .simplex import solve_lp

TRACE_EARLY_EXIT = 1e-24
# a'Da at or below this multiple of eps * |a|^2 * trace(D) carries no float64
# information: the ellipsoid has zero numerical extent along the cut, either
# because it collapsed or because anisotropic growth exhausted the mantissa.
NOISE_FLOOR = 32.0 * np.finfo(float).eps


class EllipsoidBreakdown(RuntimeError):
    """The shape matrix lost positive definiteness along a cut direction."""


@dataclass(frozen=True)
class EllipsoidInit:
    """Optional overrides for the starting center and shape (full matrix or
    ball radius)."""

    center: np.ndarray | None = None
    radius: float | None = None
    shape: np.ndarray | None = None


@dataclass
class AcCut:
    t: int
    j: int
    subset: tuple[int, ...]
    value: float
    beta: float
    gamma: np.ndarray | None = None


@dataclass
class EllipsoidResult:
    violated: ViolatedSets
    best: DualPoint
    objective: float
    iterations: int
    t_max: int
    cut_counts: dict[str, int]
    incumbent_history: list[tuple[int, float]]
    incumbents: list[DualPoint]
    ac_cuts: list[AcCut]
    early_exited: bool = False
    degenerate_stop: bool = False
    trace: list[dict] | None = None


def default_radius(inst: Instance) -> float:
    """Ball radius containing every candidate optimum of the normalized
    dual: the box 0 <= alpha <= 1, 0 <= beta <= 1, |gamma| <= 1 + max 1/u
    fits inside radius 10 (m + nm) max(1, max 1/u)."""
    return 10.0 * (inst.m + inst.n * inst.m) * max(1.0, float((1.0 / inst.u).max()))


def default_iteration_budget(inst: Instance, radius: float | None = None) -> int:
    """Practical stand-in for the theoretical polynomial bound, which is
    astronomically conservative at desk scale; configurable everywhere."""
    n_dim = 2 * inst.n * inst.m + inst.m
    rho = default_radius(inst) if radius is None else radius
    return int(math.ceil(50.0 * n_dim * n_dim * math.log(10.0 * n_dim * rho)))


def run_ellipsoid(
    inst: Instance,
    oracle_config: OracleConfig | None = None,
    t_max: int | None = None,
    init: EllipsoidInit | None = None,
    *,
    early_exit: bool = False,
    trace: bool = False,
    log_cuts: bool = False,
    debug: bool = False,
) -> EllipsoidResult:
    """Run the cut loop for exactly ``t_max`` cut steps (fewer only with
    ``early_exit``, which stops once trace(D) < 1e-24).

    Requires revenues normalized so every expected revenue is at most 1
    (the initial incumbent beta = 1 must be feasible). ``debug`` verifies
    positive definiteness of the shape matrix after every update via a
    Cholesky factorization.
    """
    if float(inst.r.max()) > 1.0 + 1e-12:
        raise ValueError("revenues must be normalized (max pair revenue <= 1) before running")
    n, m = inst.n, inst.m
    nm = n * m
    n_dim = 2 * nm + m
    if t_max is None:
        t_max = default_iteration_budget(inst)
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")

    oracle = make_oracle(oracle_config, inst)
    radius = init.radius if init and init.radius is not None else default_radius(inst)
    s = np.zeros(n_dim)
    if init and init.center is not None:
        s[:] = np.asarray(init.center, dtype=float)
    if init and init.shape is not None:
        shape = np.array(init.shape, dtype=float)
    else:
        shape = np.eye(n_dim) * radius**2

    alpha = s[:nm].reshape(n, m)
    gamma = s[nm + m :].reshape(n, m)
    beta = s[nm : nm + m]
    inv_u = 1.0 / inst.u

    best = DualPoint(alpha=np.zeros((n, m)), beta=np.ones(m), gamma=np.zeros((n, m)))
    obj = float(m)
    violated = ViolatedSets(m)
    cut_counts = {"objective": 0, "weight-link": 0, "alpha-nonnegative": 0, "assortment-cost": 0}
    incumbent_history: list[tuple[int, float]] = []
    incumbents: list[DualPoint] = []
    ac_cuts: list[AcCut] = []
    trace_rows: list[dict] | None = [] if trace else None

    growth = n_dim * n_dim / (n_dim * n_dim - 1.0)
    step_frac = 1.0 / (n_dim + 1.0)
    t = 0
    early_exited = False
    degenerate_stop = False
    incumbent_flag = False

    while t < t_max:
        kind, index, a = _find_cut(
            inst, oracle, s, alpha, beta, gamma, inv_u, obj, violated, ac_cuts, t, log_cuts
        )
        if kind is None:
            # feasible center that improves the objective: update in place,
            # re-enter without counting an iteration
            best = DualPoint(alpha=alpha.copy(), beta=beta.copy(), gamma=gamma.copy())
            obj = float(s[: nm + m].sum())
            incumbent_history.append((t, obj))
            incumbents.append(best)
            incumbent_flag = True
            continue

        cut_counts[kind] += 1
        da = shape @ a
        ada = float(a @ da)
        noise = NOISE_FLOOR * float(a @ a) * abs(float(np.trace(shape)))
        if ada <= noise:
            trace_d = float(np.trace(shape))
            if trace_d > 0.0 and ada > -noise:
                # zero numerical extent along the cut: float64 is exhausted,
                # stop with the current state
                degenerate_stop = True
                break
            raise EllipsoidBreakdown(
                f"a'Da = {ada:.3e} <= 0 at t={t} on {kind} cut {index}; "
                f"trace(D) = {trace_d:.3e}"
            )
        s += da * (step_frac / math.sqrt(ada))
        shape -= (2.0 * step_frac / ada) * np.outer(da, da)
        shape *= growth
        shape = (shape + shape.T) * 0.5
        if debug:
            try:
                np.linalg.cholesky(shape)
            except np.linalg.LinAlgError as exc:
                raise EllipsoidBreakdown(
                    f"shape matrix not positive definite after cut {t} "
                    f"({kind} {index}): {exc}"
                ) from exc
        t += 1
        if trace_rows is not None:
            trace_rows.append(
                {"t": t, "cut": kind, "index": index, "obj": obj, "incumbent_updated": incumbent_flag}
            )
        incumbent_flag = False
        if early_exit and float(np.trace(shape)) < TRACE_EARLY_EXIT:
            early_exited = True
            break

    return EllipsoidResult(
        violated=violated,
        best=best,
        objective=obj,
        iterations=t,
        t_max=t_max,
        cut_counts=cut_counts,
        incumbent_history=incumbent_history,
        incumbents=incumbents,
        ac_cuts=ac_cuts,
        early_exited=early_exited,
        degenerate_stop=degenerate_stop,
        trace=trace_rows,
    )


def _find_cut(inst, oracle, s, alpha, beta, gamma, inv_u, obj, violated, ac_cuts, t, log_cuts):
    """Locate the first violated constraint in the fixed scan order and
    return (kind, index, cut vector a); kind None when the center is
    feasible and improving."""
    n, m = inst.n, inst.m
    nm = n * m
    n_dim = s.size

    if float(s[: nm + m].sum()) >= obj:
        a = np.zeros(n_dim)
        a[: nm + m] = -1.0
        return "objective", None, a

    # same float expression as dual_feasibility_report so that accepted
    # incumbents remain feasible under the exact checker at zero tolerance
    link = alpha / inst.u + alpha.sum(axis=1, keepdims=True) - gamma
    flat = (link < 0.0).ravel()
    if flat.any():
        pos = int(np.argmax(flat))
        i, j = divmod(pos, m)
        a = np.zeros(n_dim)
        a[i * m : (i + 1) * m] = 1.0
        a[i * m + j] += inv_u[i, j]
        a[nm + m + i * m + j] = -1.0
        return "weight-link", (i, j), a

    flat = (alpha < 0.0).ravel()
    if flat.any():
        pos = int(np.argmax(flat))
        i, j = divmod(pos, m)
        a = np.zeros(n_dim)
        a[i * m + j] = 1.0
        return "alpha-nonnegative", (i, j), a

    for j in range(m):
        value, subset, _ = oracle(j, gamma)
        if value > beta[j]:
            violated.add(j, subset)
            ac_cuts.append(
                AcCut(
                    t=t,
                    j=j,
                    subset=subset,
                    value=value,
                    beta=float(beta[j]),
                    gamma=gamma.copy() if log_cuts else None,
                )
            )
            a = np.zeros(n_dim)
            a[nm + j] = 1.0
            for i in subset:
                a[nm + m + i * m + j] = 1.0
            return "assortment-cost", (j, subset), a

    return None, None, None


def solve_lp2_approx(
    inst: Instance,
    oracle_config: OracleConfig | None = None,
    t_max: int | None = None,
    *,
    early_exit: bool = False,
    details: bool = False,
    feasibility_tol: float = 1e-9,
):
    """Approximately solve the marginal LP: cut loop, then exact solve of
    the primal restricted to the recorded backlog support.

    The returned point is feasible for the full marginal LP; with the exact
    oracle and a sufficient iteration budget its objective matches the true
    optimum to working precision, and with a (1 - delta) oracle it is at
    least (1 - delta) times the optimum. With ``details=True`` also returns
    the ellipsoid run record.
    """
    run = run_ellipsoid(inst, oracle_config, t_max, early_exit=early_exit)
    columns = build_aux_primal(inst, run.violated)
    solution = columns.extract(solve_lp(columns.lp))
    problems = check_lp_solution(inst, solution, tol=feasibility_tol)
    if problems:
        raise LpSolverError(
            "restricted-support solve returned an infeasible point: " + "; ".join(problems)
        )
    if details:
        return solution, run
    return solution
