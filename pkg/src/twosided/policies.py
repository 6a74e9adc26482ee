"""Executable policies and exact desk-scale oracles.

Oracles: a memoized dynamic program over per-customer statuses for the
adaptive-order problem, the same recursion with a forced processing order,
and exhaustive search over static assortment profiles. All three are exact
and exist to verify the approximation guarantees of the two policies:

* randomized static -- sample each customer's assortment from the nested
  distribution induced by LP marginals, then let every supplier keep the
  best subset of its backlog;
* same-order greedy -- process customers along the common revenue order,
  offering the assortment that maximizes marginal revenue weighted by
  choice probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import mnl
from .mnl import SizeLimitError
from .instance import Instance, SameOrderCertificate
from .lp import LpSolution
from .rounding import mnl_distribution, sample_choice

UNPROCESSED = -2
OUTSIDE = -1

DP_WORK_LIMIT = 4_000_000
STAR_WORK_LIMIT = 4_000_000
GREEDY_TREE_LIMIT = 200_000
EXACT_EVAL_MAX_N = 15


class PolicyPreconditionError(RuntimeError):
    """A policy prerequisite (e.g. a same-order certificate) is missing."""


@dataclass(frozen=True)
class BacklogAssignment:
    """Realized choices of all customers; ``None`` means the outside option.
    The induced per-supplier backlogs are disjoint by construction."""

    m: int
    choice: tuple[int | None, ...]

    def backlogs(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.m)]
        for i, pick in enumerate(self.choice):
            if pick is not None:
                out[pick].append(i)
        return [tuple(b) for b in out]


@dataclass
class SupplierOutcome:
    backlog: tuple[int, ...]
    offered: tuple[int, ...]
    value: float


@dataclass
class PolicyOutcome:
    expected_revenue: float
    per_supplier: list[SupplierOutcome]
    trace: list[dict] | None = None


def finalize_suppliers(inst: Instance, assignment: BacklogAssignment, trace=None) -> PolicyOutcome:
    """Offer every supplier the best subset of its backlog and total up the
    resulting expected revenue."""
    per: list[SupplierOutcome] = []
    total = 0.0
    for j, backlog in enumerate(assignment.backlogs()):
        value, offered = mnl.optimal_revenue(inst, j, backlog)
        per.append(SupplierOutcome(backlog=backlog, offered=offered, value=value))
        total += value
    return PolicyOutcome(expected_revenue=total, per_supplier=per, trace=trace)


def _require_dp_size(inst: Instance) -> None:
    work = (inst.m + 2) ** inst.n * 2**inst.m * max(inst.n, 1)
    if work > DP_WORK_LIMIT:
        raise SizeLimitError(
            f"adaptive dynamic program needs ~{work} state-action steps for "
            f"{inst.n}x{inst.m}; limit is {DP_WORK_LIMIT}"
        )


def _with(status: tuple[int, ...], i: int, value: int) -> tuple[int, ...]:
    out = list(status)
    out[i] = value
    return tuple(out)


def exact_dp_atar(inst: Instance):
    """Optimal adaptive value and policy table.

    States are per-customer statuses (unprocessed / outside / chosen
    supplier); at each state the program picks any remaining customer and
    any supplier assortment, maximizing over both by brute force. The
    boundary value sums each supplier's optimal revenue over its backlog.
    Returns (optimal value, {status: (customer, assortment)}).
    """
    _require_dp_size(inst)
    n, m = inst.n, inst.m
    assortments = [mnl.subset_of(mask, m) for mask in range(2**m)]
    gtabs = [mnl.optimal_revenue_table(inst, j) for j in range(m)]
    memo: dict[tuple[int, ...], float] = {}
    policy: dict[tuple[int, ...], tuple[int, tuple[int, ...]]] = {}

    def boundary(status: tuple[int, ...]) -> float:
        total = 0.0
        for j in range(m):
            mask = 0
            for i, st in enumerate(status):
                if st == j:
                    mask |= 1 << i
            total += gtabs[j][mask]
        return total

    def value(status: tuple[int, ...]) -> float:
        cached = memo.get(status)
        if cached is not None:
            return cached
        unprocessed = [i for i, st in enumerate(status) if st == UNPROCESSED]
        if not unprocessed:
            v = boundary(status)
            memo[status] = v
            return v
        best = -np.inf
        best_action = None
        for i in unprocessed:
            u_i = inst.u[i]
            succ_out = value(_with(status, i, OUTSIDE))
            succ = [value(_with(status, i, j)) for j in range(m)]
            for offer in assortments:
                den = 1.0
                num = succ_out
                for j in offer:
                    den += u_i[j]
                    num += u_i[j] * succ[j]
                v = num / den
                if v > best:
                    best = v
                    best_action = (i, offer)
        memo[status] = best
        policy[status] = best_action
        return best

    opt = value((UNPROCESSED,) * n)
    return opt, policy


def exact_dp_ftar(inst: Instance, order) -> float:
    """Optimal value when customers must be processed in ``order`` but
    assortments stay adaptive. Never exceeds the adaptive-order value."""
    _require_dp_size(inst)
    n, m = inst.n, inst.m
    order = tuple(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    assortments = [mnl.subset_of(mask, m) for mask in range(2**m)]
    gtabs = [mnl.optimal_revenue_table(inst, j) for j in range(m)]
    memo: dict[tuple[int, ...], float] = {}

    def value(status: tuple[int, ...], t: int) -> float:
        cached = memo.get(status)
        if cached is not None:
            return cached
        if t == n:
            total = 0.0
            for j in range(m):
                mask = 0
                for i, st in enumerate(status):
                    if st == j:
                        mask |= 1 << i
                total += gtabs[j][mask]
            memo[status] = total
            return total
        i = order[t]
        u_i = inst.u[i]
        succ_out = value(_with(status, i, OUTSIDE), t + 1)
        succ = [value(_with(status, i, j), t + 1) for j in range(m)]
        best = -np.inf
        for offer in assortments:
            den = 1.0
            num = succ_out
            for j in offer:
                den += u_i[j]
                num += u_i[j] * succ[j]
            best = max(best, num / den)
        memo[status] = best
        return best

    return value((UNPROCESSED,) * n, 0)


def exact_star(inst: Instance) -> float:
    """Optimal value over deterministic static assortment profiles, all
    customers processed simultaneously; expectation by exhaustive
    enumeration of joint choice outcomes."""
    n, m = inst.n, inst.m
    work = (2**m) ** n * (m + 1) ** n
    if work > STAR_WORK_LIMIT:
        raise SizeLimitError(
            f"static exhaustive search needs ~{work} outcome evaluations for "
            f"{n}x{m}; limit is {STAR_WORK_LIMIT}"
        )
    assortments = [mnl.subset_of(mask, m) for mask in range(2**m)]
    gtabs = [mnl.optimal_revenue_table(inst, j) for j in range(m)]
    masks = [0] * m
    best = -np.inf

    for profile in product(assortments, repeat=n):
        total = 0.0

        def walk(i: int, prob: float) -> None:
            nonlocal total
            if i == n:
                total += prob * sum(gtabs[j][masks[j]] for j in range(m))
                return
            offer = profile[i]
            u_i = inst.u[i]
            den = 1.0 + sum(u_i[j] for j in offer)
            walk(i + 1, prob / den)
            bit = 1 << i
            for j in offer:
                masks[j] |= bit
                walk(i + 1, prob * u_i[j] / den)
                masks[j] &= ~bit

        walk(0, 1.0)
        best = max(best, total)
    return float(best)


class RandomizedStaticPolicy:
    """Static policy realized from a feasible marginal-LP point: every
    customer is shown an assortment drawn from the nested distribution with
    their x marginals, independently of all other customers."""

    def __init__(self, inst: Instance, solution: LpSolution):
        self.inst = inst
        self.x = np.clip(np.asarray(solution.x, dtype=float), 0.0, 1.0)
        self.distributions = [
            mnl_distribution(solution.x[i], inst.u[i]) for i in range(inst.n)
        ]

    def sample(self, seed) -> PolicyOutcome:
        """One realized run: sample assortments, observe MNL choices, then
        finalize the suppliers."""
        rng = np.random.default_rng(seed)
        picks: list[int | None] = []
        trace: list[dict] = []
        for i in range(self.inst.n):
            offered = self.distributions[i].sample(rng)
            pick = sample_choice(self.inst.u[i], offered, rng)
            picks.append(pick)
            trace.append({"customer": i, "offered": list(offered), "choice": pick})
        assignment = BacklogAssignment(m=self.inst.m, choice=tuple(picks))
        return finalize_suppliers(self.inst, assignment, trace=trace)

    def exact_expected_revenue(self) -> float:
        """True expectation over all backlog realizations: per supplier the
        backlog is product-Bernoulli with the x marginals, so the value is
        the product distribution integrated against the optimal-revenue
        table (n <= 15)."""
        n = self.inst.n
        if n > EXACT_EVAL_MAX_N:
            raise SizeLimitError(
                f"exact evaluation enumerates 2^{n} backlogs per supplier; limit n <= {EXACT_EVAL_MAX_N}"
            )
        total = 0.0
        for j in range(self.inst.m):
            p = self.x[:, j]
            probs = np.ones(1)
            for i in range(n):
                probs = np.concatenate([probs * (1.0 - p[i]), probs * p[i]])
            total += float(probs @ mnl.optimal_revenue_table(self.inst, j))
        return total


def best_marginal_assortment(rho, u_row) -> tuple[tuple[int, ...], float]:
    """Maximize sum_{j in S} rho[j] * phi(j, S) over supplier assortments S
    for nonnegative values rho.

    The maximizer is a prefix of suppliers sorted by rho descending (ties by
    index), so m+1 prefixes suffice; ties in value keep the smaller prefix.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u_row, dtype=float)
    order = sorted(range(rho.size), key=lambda j: (-rho[j], j))
    best_val = 0.0
    best_len = 0
    num = 0.0
    den = 1.0
    for t, j in enumerate(order, start=1):
        num += rho[j] * u[j]
        den += u[j]
        val = num / den
        if val > best_val:
            best_val = val
            best_len = t
    return tuple(sorted(order[:best_len])), float(best_val)


@dataclass
class GreedyStep:
    customer: int
    offered: tuple[int, ...]
    choice: int | None
    backlogs_before: tuple[tuple[int, ...], ...]


@dataclass
class GreedyPath:
    probability: float
    steps: list[GreedyStep]
    backlogs: tuple[tuple[int, ...], ...]
    value: float


class SameOrderGreedyPolicy:
    """Deterministic adaptive greedy for instances whose suppliers share a
    common descending revenue order over customers.

    Refuses to run without a certificate: the 1/2 guarantee needs the
    common order. Passing ``order`` explicitly runs it anyway as a labeled
    heuristic.
    """

    def __init__(
        self,
        inst: Instance,
        certificate: SameOrderCertificate | None = None,
        order: tuple[int, ...] | None = None,
    ):
        if certificate is not None and certificate.sigma is not None:
            self.order = certificate.sigma
        elif order is not None:
            order = tuple(order)
            if sorted(order) != list(range(inst.n)):
                raise ValueError(f"order must be a permutation of range({inst.n})")
            self.order = order
        else:
            raise PolicyPreconditionError(
                "no same-order certificate; pass an explicit order to run as a heuristic"
            )
        self.inst = inst
        self._g_cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def _g(self, j: int, members: tuple[int, ...]) -> float:
        key = (j, members)
        cached = self._g_cache.get(key)
        if cached is None:
            cached, _ = mnl.optimal_revenue(self.inst, j, members)
            self._g_cache[key] = cached
        return cached

    def _marginals(self, i: int, backlogs: list[tuple[int, ...]]) -> list[float]:
        out = []
        for j in range(self.inst.m):
            grown = tuple(sorted(backlogs[j] + (i,)))
            out.append(self._g(j, grown) - self._g(j, backlogs[j]))
        return out

    def offered_assortment(self, i: int, backlogs: list[tuple[int, ...]]):
        return best_marginal_assortment(self._marginals(i, backlogs), self.inst.u[i])

    def sample(self, seed) -> PolicyOutcome:
        rng = np.random.default_rng(seed)
        backlogs: list[tuple[int, ...]] = [() for _ in range(self.inst.m)]
        picks: dict[int, int | None] = {}
        trace: list[dict] = []
        for i in self.order:
            offered, _ = self.offered_assortment(i, backlogs)
            pick = sample_choice(self.inst.u[i], offered, rng)
            picks[i] = pick
            trace.append({"customer": i, "offered": list(offered), "choice": pick})
            if pick is not None:
                backlogs[pick] = tuple(sorted(backlogs[pick] + (i,)))
        choice = tuple(picks[i] for i in range(self.inst.n))
        assignment = BacklogAssignment(m=self.inst.m, choice=choice)
        return finalize_suppliers(self.inst, assignment, trace=trace)

    def exact_expected_revenue(self, collect_paths: bool = False):
        """True expectation by full outcome-tree enumeration; optionally
        also returns every path with its steps and probability."""
        n, m = self.inst.n, self.inst.m
        if (m + 1) ** n > GREEDY_TREE_LIMIT:
            raise SizeLimitError(
                f"outcome tree has up to {(m + 1) ** n} paths for {n}x{m}; "
                f"limit is {GREEDY_TREE_LIMIT}"
            )
        backlogs: list[tuple[int, ...]] = [() for _ in range(m)]
        steps: list[GreedyStep] = []
        paths: list[GreedyPath] = []
        total = 0.0

        def walk(t: int, prob: float) -> None:
            nonlocal total
            if t == n:
                value = sum(self._g(j, backlogs[j]) for j in range(m))
                total += prob * value
                if collect_paths:
                    paths.append(
                        GreedyPath(
                            probability=prob,
                            steps=list(steps),
                            backlogs=tuple(backlogs),
                            value=value,
                        )
                    )
                return
            i = self.order[t]
            offered, _ = self.offered_assortment(i, backlogs)
            u_i = self.inst.u[i]
            den = 1.0 + sum(u_i[j] for j in offered)
            before = tuple(backlogs)
            steps.append(GreedyStep(i, offered, None, before))
            walk(t + 1, prob / den)
            steps.pop()
            for j in offered:
                old = backlogs[j]
                backlogs[j] = tuple(sorted(old + (i,)))
                steps.append(GreedyStep(i, offered, j, before))
                walk(t + 1, prob * u_i[j] / den)
                steps.pop()
                backlogs[j] = old

        walk(0, 1.0)
        if collect_paths:
            return total, paths
        return total
