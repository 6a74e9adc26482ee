"""Assortment optimization with per-pair fixed costs.

This is the separation problem behind the dual of the marginal LP: for a
cost matrix gamma (any sign), find the customer set maximizing expected
revenue minus the total cost of the offered customers. The production
implementation enumerates exhaustively at desk scale; callers interact
through a pluggable (1 - delta)-approximate oracle contract so the cited
polynomial-time scheme could be dropped in without touching the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance
from .mnl import (
    SizeLimitError,
    as_subset,
    expected_revenue,
    expected_revenue_table,
    subset_masks,
    subset_of,
)

SUB_DUAL_LIMIT = 20


def rev_cost(inst: Instance, j: int, customers, gamma) -> float:
    """Expected revenue of offering ``customers`` to supplier j minus the
    fixed costs gamma[i][j] of the included customers."""
    members = as_subset(customers)
    gamma = np.asarray(gamma, dtype=float)
    return expected_revenue(inst, j, members) - sum(float(gamma[i, j]) for i in members)


def sub_dual_exact(inst: Instance, j: int, gamma) -> tuple[float, tuple[int, ...]]:
    """Exhaustive maximum of rev_cost over all customer subsets (n <= 20).

    The value is always >= 0 since the empty set scores 0. Ties are broken
    toward smaller sets, then lexicographically.
    """
    if inst.n > SUB_DUAL_LIMIT:
        raise SizeLimitError(f"exact sub-dual limited to {SUB_DUAL_LIMIT} customers, got {inst.n}")
    gamma = np.asarray(gamma, dtype=float)
    values = expected_revenue_table(inst, j) - subset_masks(inst.n) @ gamma[:, j]
    return _pick(values, inst.n)


def _pick(values: np.ndarray, n: int) -> tuple[float, tuple[int, ...]]:
    vmax = float(values.max())
    candidates = np.flatnonzero(values == vmax)
    best = min(
        (int(c) for c in candidates),
        key=lambda c: (c.bit_count(), subset_of(c, n)),
    )
    return vmax, subset_of(best, n)


@dataclass(frozen=True)
class OracleConfig:
    """Selects the sub-dual oracle implementation.

    kind:
        "exact"     exhaustive enumeration, delta = 0 (default).
        "relaxed"   returns the first set, in size-then-lex order, whose
                    value reaches (1 - delta) times the exhaustive optimum;
                    exercises the approximate-oracle contract honestly.
        "singleton" best of the empty set and all singletons; no guarantee,
                    used only in robustness tests.
    """

    kind: str = "exact"
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "relaxed", "singleton"):
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")


class SubDualOracle:
    """Per-instance oracle with cached subset tables; call as oracle(j, gamma).

    Returns (value, customer set, delta) where the set's rev_cost is the
    reported value and is >= (1 - delta) * sub-dual optimum (delta None for
    the degraded singleton oracle, which promises nothing).
    """

    def __init__(self, config: OracleConfig, inst: Instance):
        if inst.n > SUB_DUAL_LIMIT:
            raise SizeLimitError(f"oracle limited to {SUB_DUAL_LIMIT} customers, got {inst.n}")
        self.config = config
        self.inst = inst
        self._masks = subset_masks(inst.n)
        self._rtab = np.stack([expected_revenue_table(inst, j) for j in inst.suppliers()])
        # size-then-lex scan order over bitmasks, shared by every call
        self._scan = sorted(range(2**inst.n), key=lambda c: (c.bit_count(), subset_of(c, inst.n)))

    def __call__(self, j: int, gamma) -> tuple[float, tuple[int, ...], float | None]:
        gamma = np.asarray(gamma, dtype=float)
        values = self._rtab[j] - self._masks @ gamma[:, j]
        kind = self.config.kind
        if kind == "exact":
            val, subset = _pick(values, self.inst.n)
            return val, subset, 0.0
        if kind == "relaxed":
            vmax = float(values.max())
            target = (1.0 - self.config.delta) * vmax
            for c in self._scan:
                if values[c] >= target:
                    return float(values[c]), subset_of(c, self.inst.n), self.config.delta
            raise RuntimeError("unreachable: the maximizer always meets the target")
        # singleton: empty set plus singletons only
        best_val, best_set = 0.0, ()
        for i in range(self.inst.n):
            v = float(values[1 << i])
            if v > best_val:
                best_val, best_set = v, (i,)
        return best_val, best_set, None


def make_oracle(config: OracleConfig | None, inst: Instance) -> SubDualOracle:
    return SubDualOracle(config or OracleConfig(), inst)


def oracle_call(
    config: OracleConfig | None, inst: Instance, j: int, gamma
) -> tuple[float, tuple[int, ...], float | None]:
    """One-shot oracle invocation; see :class:`SubDualOracle`."""
    return make_oracle(config, inst)(j, gamma)
