"""Independent reference evaluations used by the verification harness.

Everything here works on plain nested lists of floats with direct powers and
``math.fsum``; nothing is shared with the log-space library code it checks.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .errors import BudgetExceeded, DimensionTooLarge, DomainError
from .guessing import GuessingStrategy
from .pmf import JointPmf, NEParams, as_joint

ENUMERATION_BUDGET = 10**6


def _rows(source) -> list[list[float]]:
    return [list(map(float, r)) for r in as_joint(source).probs]


def moment(source, ranks, q: float, rho: float) -> float:
    rows = _rows(source)
    ranks = np.atleast_2d(ranks).tolist()
    num = math.fsum(g**rho * p**q for pr, gr in zip(rows, ranks) for p, g in zip(pr, gr))
    den = math.fsum(p**q for pr in rows for p in pr)
    return num / den


def log_moment(source, ranks, q: float) -> float:
    rows = _rows(source)
    ranks = np.atleast_2d(ranks).tolist()
    num = math.fsum(math.log(g) * p**q for pr, gr in zip(rows, ranks) for p, g in zip(pr, gr))
    return num / math.fsum(p**q for pr in rows for p in pr)


def bound_cond(source, q: float, rho: float) -> float:
    rows = _rows(source)
    a = q / (1 + rho)
    num = math.fsum(math.fsum(p**a for p in r) ** (1 + rho) for r in rows)
    return num / math.fsum(p**q for r in rows for p in r)


def bound_star(P, Q, q: float, rho: float) -> float:
    """Term-by-term triple sum with escorts formed from scratch."""
    prow, qrow = _rows(P), _rows(Q)
    w_total = math.fsum(p**q for r in prow for p in r)
    out = []
    for pr, qr in zip(prow, qrow):
        py_q = math.fsum(p**q for p in pr) / w_total
        wp = math.fsum(p**q for p in pr)
        wq = math.fsum(v**q for v in qr)
        qq = [v**q / wq for v in qr]
        for p, qx in zip(pr, qq):
            inner = math.fsum((qx2 / qx) ** (1 / (1 + rho)) for qx2 in qq)
            out.append(py_q * (p**q / wp) * inner**rho)
    return math.fsum(out)


def renyi(p, a: float) -> float:
    return math.log(math.fsum(x**a for x in p)) / (1 - a)


def lne(p, a: float, b: float) -> float:
    sa = math.fsum(x**a for x in p) ** (1 / a)
    sb = math.fsum(x**b for x in p) ** (1 / b)
    return a * b / (b - a) * math.log(sa / sb)


def clne(source, a: float, b: float) -> float:
    rows = _rows(source)
    num = math.fsum(math.fsum(p**a for p in r) ** (b / a) for r in rows)
    den = math.fsum(p**b for r in rows for p in r)
    return a / (b - a) * math.log(num / den)


def clne_diag(source, a: float) -> float:
    rows = _rows(source)
    s = [math.fsum(p**a for p in r) for r in rows]
    total = math.fsum(s)
    t1 = -a * math.fsum(p**a * math.log(p) for r in rows for p in r) / total
    t2 = math.fsum(v * math.log(v) for v in s) / total
    return t1 + t2


def relative_ab(p, q, a: float, b: float) -> float:
    cross = math.fsum(x**b * y ** (a - b) for x, y in zip(p, q))
    return (
        a / (b * (b - a)) * math.log(cross)
        + math.log(math.fsum(y**a for y in q)) / b
        - math.log(math.fsum(x**a for x in p)) / (b - a)
    )


def optimal_ranks(source, q: float) -> list[list[int]]:
    """Sort each row by P^q (largest first), ties by position."""
    out = []
    for r in _rows(source):
        order = sorted(range(len(r)), key=lambda i: (-(r[i] ** q), i))
        ranks = [0] * len(r)
        for k, i in enumerate(order):
            ranks[i] = k + 1
        out.append(ranks)
    return out


def redundancy(P, ranks, q: float, rho: float) -> float:
    best = optimal_ranks(P, q)
    return (math.log(moment(P, ranks, q, rho)) - math.log(moment(P, best, q, rho))) / rho


@functools.lru_cache(maxsize=16)
def permutation_table(n: int) -> np.ndarray:
    """All rank vectors of length n in lexicographic order, shape (n!, n)."""
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.float64)


def _combined(per_row: list[np.ndarray]) -> np.ndarray:
    """Totals over every choice of one entry per row, flattened row-major."""
    total = per_row[0]
    for c in per_row[1:]:
        total = (total[:, None] + c[None, :]).ravel()
    return total


def _unflatten(index: int, n_perm: int, ny: int) -> list[int]:
    digits = []
    for _ in range(ny):
        index, d = divmod(index, n_perm)
        digits.append(d)
    return digits[::-1]


def brute_force_optimal(
    J: JointPmf, params: NEParams, budget: int = ENUMERATION_BUDGET
) -> tuple[GuessingStrategy, float]:
    """Minimize E_q[G^rho] over every per-y permutation table.

    Ties (within 1e-12 relative) resolve to the lexicographically smallest
    flattened rank table.
    """
    J = as_joint(J)
    n_perm = math.factorial(J.nx)
    if n_perm**J.ny > budget:
        raise BudgetExceeded(f"{n_perm}^{J.ny} strategies exceed the budget of {budget}")
    perms = permutation_table(J.nx)
    w = J.probs**params.q
    gp = perms**params.rho
    moments = _combined([gp @ row for row in w]) / w.sum()
    return _select(moments, perms, J, n_perm)


def brute_force_log_optimal(J: JointPmf, q: float, budget: int = ENUMERATION_BUDGET):
    """Minimize E_q[ln G] over every per-y permutation table."""
    J = as_joint(J)
    n_perm = math.factorial(J.nx)
    if n_perm**J.ny > budget:
        raise BudgetExceeded(f"{n_perm}^{J.ny} strategies exceed the budget of {budget}")
    perms = permutation_table(J.nx)
    w = J.probs**q
    values = _combined([np.log(perms) @ row for row in w]) / w.sum()
    return _select(values, perms, J, n_perm)


def _select(values, perms, J, n_perm):
    vmin = values.min()
    k = int(np.flatnonzero(values <= vmin + 1e-12 * abs(vmin))[0])
    ranks = perms[_unflatten(k, n_perm, J.ny)].astype(int)
    return GuessingStrategy(ranks, J.y_labels, J.x_labels), float(values[k])


def simplex_grid(n: int, m: int) -> np.ndarray:
    """Interior lattice points {k/m : k_i >= 1, Σ k_i = m} of the n-simplex."""
    if n == 1:
        return np.ones((1, 1))
    pts = []
    for cut in itertools.combinations(range(1, m), n - 1):
        bounds = (0,) + cut + (m,)
        pts.append([bounds[i + 1] - bounds[i] for i in range(n)])
    return np.array(pts, dtype=np.float64) / m


def grid_minimax(
    family, params: NEParams, step: float, refine: int = 0, keep: int = 5,
    return_point: bool = False,
):
    """Smallest worst-case value q RE(P, Q) over a lattice of reference pmfs.

    ``refine`` extra passes re-grid a window of one coarse cell around the
    ``keep`` best points at a quarter of the previous spacing.  With
    ``return_point`` the minimizing lattice point (shape (|Y|, |X|)) is
    returned as well.
    """
    from .minimax import family_objective

    nx, ny = family.nx, family.ny
    n = nx * ny
    if n - 1 > 3:
        raise DimensionTooLarge(f"grid search over a {n - 1}-simplex is not supported")
    if not step > 0:
        raise DomainError(f"grid step must be positive, got {step!r}")
    log_members = family.log_stack()

    def evaluate(points: np.ndarray) -> np.ndarray:
        out = np.empty(len(points))
        for s in range(0, len(points), 20000):
            chunk = points[s : s + 20000]
            out[s : s + 20000] = family_objective(
                log_members, np.log(chunk).reshape(-1, ny, nx), params
            ).max(axis=1)
        return out

    m = max(round(1.0 / step), n)
    pts = simplex_grid(n, m)
    vals = evaluate(pts)
    h = 1.0 / m
    i = int(np.argmin(vals))
    best, best_pt = float(vals[i]), pts[i]
    if n > 1:
        offsets = np.array(list(itertools.product(range(-4, 5), repeat=n - 1)),
                           dtype=np.float64)
        basis = np.hstack([np.eye(n - 1), -np.ones((n - 1, 1))])
        for _ in range(refine):
            order = np.argsort(vals, kind="stable")[:keep]
            top, top_vals = pts[order], vals[order]
            h /= 4.0
            cand = (top[:, None, :] + h * (offsets @ basis)[None, :, :]).reshape(-1, n)
            cand = cand[np.all(cand > 0, axis=1)]
            cvals = evaluate(cand)
            pts = np.concatenate([top, cand])
            vals = np.concatenate([top_vals, cvals])
            i = int(np.argmin(vals))
            if vals[i] < best:
                best, best_pt = float(vals[i]), pts[i]
    if return_point:
        return best, best_pt.reshape(ny, nx)
    return best
