"""Named verification suites shared by the CLI and the acceptance tests.

Each suite returns a list of :class:`~twosided.evaluate.PropertyReport`;
an empty violation list on every report means the suite passed. Negative
controls (facts that are supposed to fail, like plain submodularity under
heterogeneous revenues) are inverted so that "control did not fire" is
itself reported as a violation.
"""

from __future__ import annotations

import math

import numpy as np

from . import mnl
from .evaluate import (
    PropertyReport,
    SubsetDistribution,
    correlation_gap_check,
    expected_optimal_revenue,
    cost_share,
    cost_sharing_check,
    interleaved_partition_check,
    revenue_order,
    submodular_order_check,
    submodularity_check,
)
from .instance import Instance, detect_same_order, generate
from .lp import lp1_exact_small, lp2_exact_small
from .policies import exact_dp_atar, exact_dp_ftar, exact_star

GAP_GENERAL_BOUND = 2.0
GAP_UNIFORM_BOUND = math.e / (math.e - 1.0)
CHAIN_SLACK = 1e-7
TOL = 1e-9


def counterexample_instance() -> Instance:
    """Three customers, one supplier: the fixture whose optimal-revenue
    function is monotone but not submodular."""
    return Instance(
        n=3,
        m=1,
        u=np.ones((3, 1)),
        w=np.array([[1.0, 1.0, 3.0]]),
        r=np.array([[4.0], [3.0], [2.0]]),
    )


def _sub_seed(seed: int, k: int) -> int:
    return (seed * 1_000_003 + k) % (2**31 - 1)


def suite_appendix_a(seed: int = 0) -> list[PropertyReport]:
    del seed  # fully deterministic
    inst = counterexample_instance()
    report = PropertyReport(name="counterexample-values")

    expected = {
        (2,): 1.5,
        (0, 2): 2.0,
        (1, 2): 1.8,
        (0, 1, 2): 7.0 / 3.0,
    }
    for subset, want in expected.items():
        report.cases += 1
        got, _ = mnl.optimal_revenue(inst, 0, subset)
        if abs(got - want) > TOL:
            report.record(kind="value", subset=subset, got=got, want=want)
        brute, _ = mnl.optimal_revenue_bruteforce(inst, 0, subset)
        if abs(brute - want) > TOL:
            report.record(kind="bruteforce-value", subset=subset, got=brute, want=want)

    report.cases += 1
    gain_small = mnl.g_marginal(inst, 0, 0, (2,))
    gain_large = mnl.g_marginal(inst, 0, 0, (1, 2))
    if abs(gain_small - 0.5) > TOL:
        report.record(kind="marginal", base=(2,), got=gain_small, want=0.5)
    if abs(gain_large - 8.0 / 15.0) > TOL:
        report.record(kind="marginal", base=(1, 2), got=gain_large, want=8.0 / 15.0)
    if not gain_small < gain_large:
        report.record(kind="non-submodularity-witness", gain_small=gain_small, gain_large=gain_large)

    report.cases += 1
    shares = [cost_share(inst, 0, i, (0, 1, 2)) for i in range(3)]
    for i, want in enumerate([2.0, 1.0 / 3.0, 0.0]):
        if abs(shares[i] - want) > TOL:
            report.record(kind="cost-share", i=i, got=shares[i], want=want)
    if abs(sum(shares) - 7.0 / 3.0) > TOL:
        report.record(kind="cost-share-total", got=sum(shares), want=7.0 / 3.0)

    control = PropertyReport(name="submodularity-negative-control")
    control.cases = 1
    plain = submodularity_check(inst, 0)
    witnessed = any(
        v["A"] == (2,) and v["B"] == (1, 2) and v["i"] == 0 for v in plain.violations
    )
    if plain.passed or not witnessed:
        control.record(kind="missing-documented-witness", found=len(plain.violations))

    ordered = submodular_order_check(inst, 0, revenue_order(inst, 0), exhaustive=True)
    ordered.name = "submodular-order-correct-order"

    wrong = PropertyReport(name="submodular-order-wrong-order-control")
    wrong.cases = 1
    flipped = submodular_order_check(inst, 0, (1, 2, 0), exhaustive=True)
    if flipped.passed:
        wrong.record(kind="wrong-order-not-detected")

    return [report, control, ordered, wrong]


def suite_gap(seed: int, draws: int = 1000) -> list[PropertyReport]:
    report = PropertyReport(name="correlation-gap")
    exact = PropertyReport(name="correlation-gap-exactness")
    half = draws // 2
    specs = [("uniform-random", GAP_GENERAL_BOUND, half), ("supplier-uniform", GAP_UNIFORM_BOUND, draws - half)]
    case = 0
    max_seen = {"uniform-random": 0.0, "supplier-uniform": 0.0}
    for kind, bound, count in specs:
        for k in range(count):
            case += 1
            rng = np.random.default_rng(_sub_seed(seed, case))
            n = int(rng.integers(3, 7))
            m = int(rng.integers(1, 4))
            inst = generate(kind, n, m, _sub_seed(seed, case) + 7)
            j = int(rng.integers(0, m))
            dist = SubsetDistribution.random_correlated(n, rng)
            report.cases += 1
            ratio = correlation_gap_check(inst, j, dist)
            if ratio is None:
                # 0/0: the draw put all its mass on the empty set, so both
                # expectations vanish; flagged but consistent with the bound
                numerator = expected_optimal_revenue(inst, j, dist)
                if numerator > TOL:
                    report.record(kind="undefined-ratio", seed=_sub_seed(seed, case))
                else:
                    report.notes["undefined-draws"] = report.notes.get("undefined-draws", 0) + 1
                continue
            max_seen[kind] = max(max_seen[kind], ratio)
            if ratio > bound + TOL:
                report.record(kind=f"gap-bound-{kind}", ratio=ratio, bound=bound)
    report.notes["max-ratio"] = max_seen

    for k in range(50):
        rng = np.random.default_rng(_sub_seed(seed, 10_000 + k))
        n = int(rng.integers(2, 7))
        inst = generate("uniform-random", n, 2, _sub_seed(seed, 20_000 + k))
        subset = mnl.subset_of(int(rng.integers(0, 2**n)), n)
        exact.cases += 1
        ratio = correlation_gap_check(inst, 0, SubsetDistribution.point_mass(subset))
        if ratio is not None and abs(ratio - 1.0) > 1e-12:
            exact.record(kind="point-mass", ratio=ratio)
        marginals = rng.uniform(0.0, 1.0, size=n)
        exact.cases += 1
        ratio = correlation_gap_check(inst, 0, SubsetDistribution.product(marginals))
        if ratio is None or abs(ratio - 1.0) > 1e-12:
            exact.record(kind="product", ratio=ratio)
    return [report, exact]


def suite_sharing(seed: int, trials: int = 1000) -> list[PropertyReport]:
    reports: list[PropertyReport] = []
    per_instance = max(1, trials // 5)
    for k in range(5):
        inst = generate("uniform-random", 8, 2, _sub_seed(seed, 31 + k))
        j = k % inst.m
        rep = cost_sharing_check(inst, j, per_instance, _sub_seed(seed, 57 + k))
        rep.name = f"cost-sharing[{k}]"
        reports.append(rep)

    control = PropertyReport(name="sharing-negative-control")
    control.cases = 1
    plain = submodularity_check(counterexample_instance(), 0)
    witnessed = any(
        v["A"] == (2,) and v["B"] == (1, 2) and v["i"] == 0 for v in plain.violations
    )
    if plain.passed or not witnessed:
        control.record(kind="missing-documented-witness", found=len(plain.violations))
    reports.append(control)
    return reports


def suite_order(seed: int, trials: int = 1000) -> list[PropertyReport]:
    reports: list[PropertyReport] = []
    kinds = ("same-order-additive", "same-order-multiplicative", "supplier-uniform")
    per_instance = max(1, trials // 6)
    for k in range(6):
        kind = kinds[k % 3]
        inst = generate(kind, 6, 2, _sub_seed(seed, 101 + k))
        cert = detect_same_order(inst)
        rep = PropertyReport(name=f"order[{k}]-{kind}")
        if not cert:
            rep.record(kind="certificate-missing", seed=_sub_seed(seed, 101 + k))
            reports.append(rep)
            continue
        j = k % inst.m
        sub = submodular_order_check(inst, j, cert.sigma, trials=per_instance, seed=_sub_seed(seed, 211 + k))
        sub.name = rep.name + "-marginals"
        inter = interleaved_partition_check(inst, j, cert.sigma, trials=per_instance, seed=_sub_seed(seed, 307 + k))
        inter.name = rep.name + "-interleaved"
        reports.extend([sub, inter])

    wrong = PropertyReport(name="order-negative-control")
    wrong.cases = 1
    flipped = submodular_order_check(counterexample_instance(), 0, (1, 2, 0), exhaustive=True)
    if flipped.passed:
        wrong.record(kind="wrong-order-not-detected")
    reports.append(wrong)
    return reports


def suite_chain(seed: int, count: int = 200) -> list[PropertyReport]:
    """Value chain on random 3x2 instances: static <= fixed-order <=
    adaptive <= assortment-distribution LP <= marginal LP."""
    report = PropertyReport(name="relaxation-chain")
    for k in range(count):
        report.cases += 1
        inst = generate("uniform-random", 3, 2, _sub_seed(seed, 401 + k))
        star = exact_star(inst)
        ftar = exact_dp_ftar(inst, tuple(range(inst.n)))
        atar, _ = exact_dp_atar(inst)
        lp1 = lp1_exact_small(inst)
        lp2 = lp2_exact_small(inst).objective
        chain = [("static", star), ("fixed-order", ftar), ("adaptive", atar), ("lp-sets", lp1), ("lp-marginal", lp2)]
        for (lo_name, lo), (hi_name, hi) in zip(chain, chain[1:]):
            if lo > hi + CHAIN_SLACK:
                report.record(
                    kind="chain-violation",
                    seed=_sub_seed(seed, 401 + k),
                    lower=lo_name,
                    upper=hi_name,
                    lo=lo,
                    hi=hi,
                )
    return [report]


SUITES = {
    "appendix-a": suite_appendix_a,
    "gap": suite_gap,
    "sharing": suite_sharing,
    "order": suite_order,
    "chain": suite_chain,
}


def run_suites(name: str, seed: int) -> list[PropertyReport]:
    if name == "all":
        out: list[PropertyReport] = []
        for key in ("appendix-a", "gap", "sharing", "order", "chain"):
            out.extend(SUITES[key](seed))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    return SUITES[name](seed)
