"""Independent test oracles kept outside the package on purpose."""

from fractions import Fraction
from itertools import combinations

import numpy as np

from twosided.simplex import LinearProgram


def lp_optimum_by_vertex_enumeration(lp: LinearProgram, tol: float = 1e-9) -> float | None:
    """Maximum objective over all basic feasible solutions of ``lp``.

    Converts to standard form (slacks for inequality rows), enumerates every
    square basis, solves it, and keeps feasible vertices. Exponential; only
    for tiny LPs. Returns None when no feasible vertex exists.
    """
    k = lp.num_vars
    mu = lp.a_ub.shape[0]
    me = lp.a_eq.shape[0]
    m = me + mu
    a = np.zeros((m, k + mu))
    b = np.zeros(m)
    a[:me, :k] = lp.a_eq
    b[:me] = lp.b_eq
    a[me:, :k] = lp.a_ub
    a[me:, k:] = np.eye(mu)
    b[me:] = lp.b_ub
    cost = np.concatenate([lp.c, np.zeros(mu)])
    sign = 1.0 if lp.maximize else -1.0

    best = None
    n_total = k + mu
    for basis in combinations(range(n_total), m):
        mat = a[:, basis]
        try:
            x_b = np.linalg.solve(mat, b)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(x_b).all() or (x_b < -tol).any():
            continue
        x = np.zeros(n_total)
        x[list(basis)] = x_b
        if np.abs(a @ x - b).max() > 1e-7:
            continue
        value = sign * float(cost @ x)
        if best is None or value > best:
            best = value
    return None if best is None else sign * best


def exact_g(w: list[Fraction], r: list[Fraction], members: tuple[int, ...]) -> Fraction:
    """Optimal expected revenue in exact rational arithmetic by exhaustive
    subset enumeration (independent of the prefix-search production path)."""
    best = Fraction(0)
    members = tuple(members)
    for mask in range(2 ** len(members)):
        num = Fraction(0)
        den = Fraction(1)
        for pos, i in enumerate(members):
            if mask >> pos & 1:
                num += r[i] * w[i]
                den += w[i]
        best = max(best, num / den)
    return best
