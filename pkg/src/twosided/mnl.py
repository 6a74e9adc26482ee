"""MNL choice probabilities and supplier-side revenue functions.

Subsets of agents are sorted tuples of distinct indices. ``k=None`` denotes
the outside option in :func:`choice_prob`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .instance import Instance

BRUTEFORCE_LIMIT = 20


class SizeLimitError(ValueError):
    """An exact computation would exceed its desk-scale budget."""


def as_subset(items) -> tuple[int, ...]:
    """Normalize to a sorted tuple of distinct indices."""
    members = tuple(sorted(int(i) for i in items))
    for a, b in zip(members, members[1:]):
        if a == b:
            raise ValueError(f"duplicate index {a} in subset")
    return members


def choice_prob(weights, subset, k: int | None) -> float:
    """Probability that an MNL agent with the given weights picks ``k`` from
    the offered ``subset``; ``k=None`` is the outside option (weight 1)."""
    weights = np.asarray(weights, dtype=float)
    members = as_subset(subset)
    if members and not (0 <= members[0] and members[-1] < weights.size):
        raise IndexError(f"subset {members} outside universe of size {weights.size}")
    denom = 1.0 + sum(weights[i] for i in members)
    if k is None:
        return 1.0 / denom
    if k in members:
        return float(weights[k]) / denom
    return 0.0


def expected_revenue(inst: Instance, j: int, customers) -> float:
    """Expected revenue when supplier j is shown exactly the set ``customers``."""
    members = as_subset(customers)
    num = 0.0
    den = 1.0
    for i in members:
        num += float(inst.r[i, j] * inst.w[j, i])
        den += float(inst.w[j, i])
    return num / den


def optimal_revenue(inst: Instance, j: int, customers) -> tuple[float, tuple[int, ...]]:
    """Best expected revenue over all subsets of ``customers`` for supplier j.

    The optimum under MNL is a prefix of the candidates sorted by descending
    revenue (ties by ascending index), so only |C|+1 prefixes are scanned.
    Returns (value, maximizing subset); the empty set gives 0.
    """
    members = sorted(as_subset(customers), key=lambda i: (-inst.r[i, j], i))
    best_val = 0.0
    best_len = 0
    num = 0.0
    den = 1.0
    for t, i in enumerate(members, start=1):
        num += float(inst.r[i, j] * inst.w[j, i])
        den += float(inst.w[j, i])
        val = num / den
        if val > best_val:
            best_val = val
            best_len = t
    return best_val, tuple(sorted(members[:best_len]))


def optimal_revenue_bruteforce(inst: Instance, j: int, customers) -> tuple[float, tuple[int, ...]]:
    """Exhaustive maximum of the expected revenue over all 2^|C| subsets.

    Independent oracle for :func:`optimal_revenue`; |C| <= 20.
    """
    members = as_subset(customers)
    k = len(members)
    if k > BRUTEFORCE_LIMIT:
        raise SizeLimitError(f"bruteforce limited to {BRUTEFORCE_LIMIT} customers, got {k}")
    if k == 0:
        return 0.0, ()
    masks = subset_masks(k)
    w = np.array([inst.w[j, i] for i in members])
    rw = np.array([inst.r[i, j] * inst.w[j, i] for i in members])
    values = (masks @ rw) / (1.0 + masks @ w)
    best = int(np.argmax(values))
    chosen = tuple(members[b] for b in range(k) if best >> b & 1)
    return float(values[best]), chosen


def g_marginal(inst: Instance, j: int, i: int, customers) -> float:
    """Marginal optimal revenue of adding customer i to the universe ``customers``."""
    members = as_subset(customers)
    if i in members:
        raise ValueError(f"customer {i} already in {members}")
    with_i, _ = optimal_revenue(inst, j, members + (i,))
    without, _ = optimal_revenue(inst, j, members)
    return with_i - without


@lru_cache(maxsize=32)
def subset_masks(k: int) -> np.ndarray:
    """(2^k, k) 0/1 membership matrix; row b describes bitmask b (bit i <->
    element i). Read-only, cached."""
    masks = ((np.arange(2**k)[:, None] >> np.arange(k)) & 1).astype(float)
    masks.setflags(write=False)
    return masks


def expected_revenue_table(inst: Instance, j: int) -> np.ndarray:
    """Expected revenue of every customer subset, indexed by bitmask."""
    masks = subset_masks(inst.n)
    w = inst.w[j]
    return (masks @ (inst.r[:, j] * w)) / (1.0 + masks @ w)


def optimal_revenue_table(inst: Instance, j: int) -> np.ndarray:
    """Optimal revenue of every customer subset, indexed by bitmask.

    Computed by a max-over-subsets sweep of the expected-revenue table, so
    this table does not rely on the revenue-ordered prefix structure.
    """
    g = expected_revenue_table(inst, j).copy()
    idx = np.arange(g.size)
    for b in range(inst.n):
        bit = 1 << b
        has = (idx & bit) != 0
        g[has] = np.maximum(g[has], g[idx[has] ^ bit])
    return g


def mask_of(subset, n: int) -> int:
    mask = 0
    for i in as_subset(subset):
        if not 0 <= i < n:
            raise IndexError(f"customer {i} outside universe of size {n}")
        mask |= 1 << i
    return mask


def subset_of(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)
