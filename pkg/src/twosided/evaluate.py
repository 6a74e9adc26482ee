"""Monte Carlo evaluation and structural property checks.

The checkers falsify (never prove) the structural facts the policies rely
on: the correlation-gap bound on the optimal-revenue function, the
cross-monotone budget-balanced cost-sharing scheme behind it, the
submodular-order marginal inequality along a common revenue order, and the
interleaved-partition inequality used by the greedy analysis. Every
expectation inside a check is computed by exhaustive enumeration so
inequalities are asserted at 1e-9, not statistically; randomness only picks
which cases to try and everything is deterministic in (trials, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mnl
from .instance import Instance
from .mnl import SizeLimitError

CHECK_TOL = 1e-9
GAP_MAX_N = 10


@dataclass
class PropertyReport:
    name: str
    cases: int = 0
    violations: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, **witness) -> None:
        self.violations.append(witness)


def monte_carlo(sampler, trials: int, master_seed: int) -> tuple[float, float]:
    """Mean and standard error of realized policy revenue over ``trials``
    independent runs.

    Per-trial seeds derive from (master_seed, trial index), so the result
    does not depend on any execution schedule.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    values = np.empty(trials)
    for k in range(trials):
        outcome = sampler(np.random.SeedSequence((master_seed, k)))
        values[k] = outcome.expected_revenue
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


@dataclass(frozen=True)
class SubsetDistribution:
    """Finite distribution over customer subsets (sorted index tuples)."""

    support: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        total = sum(p for _, p in self.support)
        if any(p < 0 for _, p in self.support):
            raise ValueError("negative probability")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @staticmethod
    def point_mass(subset) -> "SubsetDistribution":
        return SubsetDistribution(((mnl.as_subset(subset), 1.0),))

    @staticmethod
    def product(marginals) -> "SubsetDistribution":
        """Independent inclusion with the given per-customer marginals; the
        support enumerates all subsets."""
        q = np.asarray(marginals, dtype=float)
        n = q.size
        probs = np.ones(1)
        for i in range(n):
            probs = np.concatenate([probs * (1.0 - q[i]), probs * q[i]])
        support = tuple(
            (mnl.subset_of(mask, n), float(probs[mask])) for mask in range(2**n)
        )
        return SubsetDistribution(support)

    @staticmethod
    def random_correlated(n: int, rng: np.random.Generator, max_support: int = 8) -> "SubsetDistribution":
        """Up to ``max_support`` subsets drawn uniformly, Dirichlet weights;
        a falsification net over correlated distributions, not a proof."""
        k = int(rng.integers(1, max_support + 1))
        masks = rng.integers(0, 2**n, size=k)
        weights = rng.dirichlet(np.ones(k))
        merged: dict[tuple[int, ...], float] = {}
        for mask, p in zip(masks, weights):
            subset = mnl.subset_of(int(mask), n)
            merged[subset] = merged.get(subset, 0.0) + float(p)
        return SubsetDistribution(tuple(sorted(merged.items())))

    def marginals(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for subset, p in self.support:
            for i in subset:
                out[i] += p
        return out


def expected_optimal_revenue(inst: Instance, j: int, dist: SubsetDistribution) -> float:
    gtab = mnl.optimal_revenue_table(inst, j)
    return float(sum(p * gtab[mnl.mask_of(subset, inst.n)] for subset, p in dist.support))


def expected_optimal_revenue_independent(inst: Instance, j: int, marginals) -> float:
    q = np.asarray(marginals, dtype=float)
    probs = np.ones(1)
    for i in range(inst.n):
        probs = np.concatenate([probs * (1.0 - q[i]), probs * q[i]])
    return float(probs @ mnl.optimal_revenue_table(inst, j))


def correlation_gap_check(inst: Instance, j: int, dist: SubsetDistribution) -> float | None:
    """Ratio of the correlated expectation of the optimal-revenue function
    to the expectation under the independent distribution with the same
    marginals; ``None`` when the denominator vanishes (only possible when
    the marginals put no mass on any revenue-positive set)."""
    if inst.n > GAP_MAX_N:
        raise SizeLimitError(f"gap check enumerates 2^{inst.n} subsets; limit n <= {GAP_MAX_N}")
    numerator = expected_optimal_revenue(inst, j, dist)
    denominator = expected_optimal_revenue_independent(inst, j, dist.marginals(inst.n))
    if denominator <= 0.0:
        return None
    return numerator / denominator


def revenue_order(inst: Instance, j: int) -> tuple[int, ...]:
    """Customers sorted by descending revenue for supplier j, ties by index."""
    return tuple(sorted(inst.customers(), key=lambda i: (-inst.r[i, j], i)))


def cost_share(inst: Instance, j: int, i: int, subset) -> float:
    """Share of the optimal revenue of ``subset`` allocated to customer i:
    the marginal of i over the members ranking strictly above it in the
    descending revenue order (0 when i is not a member)."""
    members = mnl.as_subset(subset)
    if i not in members:
        return 0.0
    pos = {c: t for t, c in enumerate(revenue_order(inst, j))}
    above = tuple(c for c in members if pos[c] < pos[i])
    at_or_above = tuple(sorted(above + (i,)))
    g_hi, _ = mnl.optimal_revenue(inst, j, at_or_above)
    g_lo, _ = mnl.optimal_revenue(inst, j, above)
    return g_hi - g_lo


def cost_sharing_check(inst: Instance, j: int, trials: int, seed: int) -> PropertyReport:
    """Random (A subset of B, i) triples: the shares must be cross-monotone
    and must telescope exactly to the optimal revenue (budget balance with
    factor 1)."""
    rng = np.random.default_rng(seed)
    report = PropertyReport(name="cost-sharing")
    n = inst.n
    for _ in range(trials):
        report.cases += 1
        b_mask = int(rng.integers(0, 2**n))
        a_mask = b_mask & int(rng.integers(0, 2**n))
        i = int(rng.integers(0, n))
        set_a = mnl.subset_of(a_mask, n)
        set_b = mnl.subset_of(b_mask, n)
        with_a = tuple(sorted(set(set_a) | {i}))
        with_b = tuple(sorted(set(set_b) | {i}))
        chi_a = cost_share(inst, j, i, with_a)
        chi_b = cost_share(inst, j, i, with_b)
        if chi_a < chi_b - CHECK_TOL:
            report.record(kind="cross-monotonicity", A=set_a, B=set_b, i=i, chi_A=chi_a, chi_B=chi_b)
        total = sum(cost_share(inst, j, i2, set_a) for i2 in range(n))
        g_a, _ = mnl.optimal_revenue(inst, j, set_a)
        if abs(total - g_a) > CHECK_TOL:
            report.record(kind="budget-balance", A=set_a, shares=total, g=g_a)
    return report


def submodularity_check(inst: Instance, j: int, max_n: int = 10) -> PropertyReport:
    """Exhaustive plain-submodularity scan (order-free): report every
    (A subset of B, i outside B) with a strictly larger marginal at B.
    Heterogeneous revenues generally violate this; the scan supplies the
    negative-control witnesses."""
    n = inst.n
    if n > max_n:
        raise ValueError(f"exhaustive scan limited to n <= {max_n}")
    report = PropertyReport(name="submodularity")
    gtab = mnl.optimal_revenue_table(inst, j)
    for b_mask in range(2**n):
        a_mask = b_mask
        while True:
            for i in range(n):
                bit = 1 << i
                if b_mask & bit:
                    continue
                report.cases += 1
                gain_a = gtab[a_mask | bit] - gtab[a_mask]
                gain_b = gtab[b_mask | bit] - gtab[b_mask]
                if gain_a < gain_b - CHECK_TOL:
                    report.record(
                        kind="submodularity",
                        A=mnl.subset_of(a_mask, n),
                        B=mnl.subset_of(b_mask, n),
                        i=i,
                        gain_A=float(gain_a),
                        gain_B=float(gain_b),
                    )
            if a_mask == 0:
                break
            a_mask = (a_mask - 1) & b_mask
    return report


def submodular_order_check(
    inst: Instance,
    j: int,
    order,
    trials: int = 0,
    seed: int = 0,
    exhaustive: bool = False,
) -> PropertyReport:
    """Submodular-order marginal inequality along ``order`` plus
    sub-additivity.

    For A subset of B and C entirely after B in the order, the marginal of
    C at B must not exceed the marginal at A; and the value of a union must
    not exceed the sum of values. Exhaustive mode scans every triple
    (n <= 10); otherwise ``trials`` random triples are drawn.
    """
    order = tuple(order)
    n = inst.n
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    report = PropertyReport(name="submodular-order")
    gtab = mnl.optimal_revenue_table(inst, j)
    pos = {c: t for t, c in enumerate(order)}

    def successors_mask(b_mask: int) -> int:
        last = max((pos[i] for i in range(n) if b_mask >> i & 1), default=-1)
        mask = 0
        for t in range(last + 1, n):
            mask |= 1 << order[t]
        return mask

    def union_value(x_mask: int, y_mask: int) -> float:
        return float(gtab[x_mask | y_mask])

    def check_triple(a_mask: int, b_mask: int, c_mask: int) -> None:
        report.cases += 1
        gain_b = union_value(c_mask, b_mask) - gtab[b_mask]
        gain_a = union_value(c_mask, a_mask) - gtab[a_mask]
        if gain_b > gain_a + CHECK_TOL:
            report.record(
                kind="submodular-order",
                A=mnl.subset_of(a_mask, n),
                B=mnl.subset_of(b_mask, n),
                C=mnl.subset_of(c_mask, n),
                gain_A=gain_a,
                gain_B=gain_b,
            )

    def check_subadditive(x_mask: int, y_mask: int) -> None:
        report.cases += 1
        if gtab[x_mask | y_mask] > gtab[x_mask] + gtab[y_mask] + CHECK_TOL:
            report.record(
                kind="sub-additivity",
                A=mnl.subset_of(x_mask, n),
                B=mnl.subset_of(y_mask, n),
                union=float(gtab[x_mask | y_mask]),
                parts=float(gtab[x_mask] + gtab[y_mask]),
            )

    if exhaustive:
        if n > 10:
            raise ValueError("exhaustive scan limited to n <= 10")
        for b_mask in range(2**n):
            succ = successors_mask(b_mask)
            c_mask = succ
            while True:
                a_mask = b_mask
                while True:
                    check_triple(a_mask, b_mask, c_mask)
                    if a_mask == 0:
                        break
                    a_mask = (a_mask - 1) & b_mask
                if c_mask == 0:
                    break
                c_mask = (c_mask - 1) & succ
        for x_mask in range(2**n):
            for y_mask in range(2**n):
                check_subadditive(x_mask, y_mask)
    else:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            b_mask = int(rng.integers(0, 2**n))
            a_mask = b_mask & int(rng.integers(0, 2**n))
            c_mask = successors_mask(b_mask) & int(rng.integers(0, 2**n))
            check_triple(a_mask, b_mask, c_mask)
            check_subadditive(int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))
    return report


def interleaved_partition_check(
    inst: Instance, j: int, order, trials: int, seed: int
) -> PropertyReport:
    """Simulated-backlog form of the interleaved-partition inequality.

    For a random backlog B and target C, walking the common order and
    splitting C union B into the backlog elements (E blocks) and the rest
    (O blocks) must satisfy: value of the union <= value of B plus the sum
    of each O block's marginal over the backlog elements seen so far.
    """
    order = tuple(order)
    n = inst.n
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    rng = np.random.default_rng(seed)
    report = PropertyReport(name="interleaved-partition")
    gtab = mnl.optimal_revenue_table(inst, j)
    for _ in range(trials):
        report.cases += 1
        backlog_mask = int(rng.integers(0, 2**n))
        target_mask = int(rng.integers(0, 2**n))
        lhs = float(gtab[backlog_mask | target_mask])
        rhs = float(gtab[backlog_mask])
        seen = 0
        for i in order:
            bit = 1 << i
            if backlog_mask & bit:
                seen |= bit
            elif target_mask & bit:
                rhs += float(gtab[seen | bit] - gtab[seen])
        if lhs > rhs + CHECK_TOL:
            report.record(
                kind="interleaved-partition",
                backlog=mnl.subset_of(backlog_mask, n),
                target=mnl.subset_of(target_mask, n),
                lhs=lhs,
                rhs=rhs,
            )
    return report
