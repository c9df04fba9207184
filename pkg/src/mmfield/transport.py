"""Exact discrete optimal transport: W_p, bottleneck W_inf, Prokhorov.

All solvers are exact (LP / assignment / matching); there is no entropic
regularization anywhere.  Costs may contain ``+inf`` to forbid pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse.csgraph import maximum_bipartite_matching

from .core import TOL_MASS, Coupling

PROKHOROV_GRID = 10_000  # candidate lattice 1/K for the mass threshold


class InfeasibleTransportError(ValueError):
    """Some positive-mass row or column admits only forbidden pairs."""


def check_measure(w, tol: float = TOL_MASS) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError("measure must be a vector")
    if np.any(w < -tol):
        raise ValueError("measure has negative mass")
    if abs(w.sum() - 1.0) > tol:
        raise ValueError(f"measure mass {w.sum()} is not 1")
    return np.clip(w, 0.0, None)


def check_cost(C, n: int, m: int) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.shape != (n, m):
        raise ValueError(f"cost shape {C.shape} does not match marginals ({n}, {m})")
    if np.any(np.isnan(C)):
        raise ValueError("cost matrix contains NaN")
    if np.any(C[np.isfinite(C)] < 0):
        raise ValueError("cost matrix must be nonnegative")
    return C


def _uniform_equal(mu: np.ndarray, nu: np.ndarray) -> bool:
    n, m = len(mu), len(nu)
    return n == m and np.allclose(mu, 1.0 / n, atol=TOL_MASS) and np.allclose(nu, 1.0 / n, atol=TOL_MASS)


def _solve_transport_lp(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Minimize <cost, plan> over couplings; +inf entries are excluded."""
    n, m = cost.shape
    finite = np.isfinite(cost)
    if np.any(~finite.any(axis=1) & (mu > TOL_MASS)) or np.any(~finite.any(axis=0) & (nu > TOL_MASS)):
        raise InfeasibleTransportError("a positive-mass marginal has no admissible pair")
    cells = np.argwhere(finite)
    k = len(cells)
    rows, cols, data = [], [], []
    for v, (i, j) in enumerate(cells):
        rows.append(i)
        cols.append(v)
        data.append(1.0)
        if j < m - 1:  # last column constraint is redundant
            rows.append(n + j)
            cols.append(v)
            data.append(1.0)
    A = sparse.csr_matrix((data, (rows, cols)), shape=(n + m - 1, k))
    b = np.concatenate([mu, nu[:-1]])
    c = cost[cells[:, 0], cells[:, 1]]
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise InfeasibleTransportError(f"transport LP failed: {res.message}")
    plan = np.zeros((n, m))
    plan[cells[:, 0], cells[:, 1]] = np.clip(res.x, 0.0, None)
    return plan


def _power_cost(C: np.ndarray, p: float) -> tuple:
    """(C / scale)**p with the scale needed to undo it, overflow-safe."""
    finite = np.isfinite(C)
    scale = float(C[finite].max(initial=0.0))
    if scale == 0.0:
        return np.where(finite, 0.0, np.inf), 1.0
    Cp = np.where(finite, (C / scale) ** p, np.inf)
    return Cp, scale


def wasserstein_p(mu, nu, C, p: float = 1.0):
    """Exact p-Wasserstein distance; returns (value, optimal coupling).

    Uniform marginals of equal size go through the assignment solver, which
    is exact by Birkhoff extremality; everything else is a transport LP.
    """
    mu = check_measure(mu)
    nu = check_measure(nu)
    C = check_cost(C, len(mu), len(nu))
    if not (np.isfinite(p) and p >= 1):
        raise ValueError("p must be finite and >= 1")
    Cp, scale = _power_cost(C, p)
    if _uniform_equal(mu, nu):
        try:
            ri, ci = linear_sum_assignment(Cp)
        except ValueError as exc:  # scipy signals inf-infeasibility this way
            raise InfeasibleTransportError(str(exc)) from exc
        n = len(mu)
        plan = np.zeros_like(C)
        plan[ri, ci] = 1.0 / n
        total = float(Cp[ri, ci].sum() / n)
    else:
        plan = _solve_transport_lp(Cp, mu, nu)
        total = float((np.where(plan > 0, Cp, 0.0) * plan).sum())
    value = scale * total ** (1.0 / p)
    return value, Coupling(plan)


def max_mass_on(mu, nu, allowed) -> float:
    """Largest coupling mass that fits inside a boolean mask."""
    mass, _ = max_mass_coupling(mu, nu, allowed)
    return mass


def max_mass_coupling(mu, nu, allowed):
    mu = check_measure(mu)
    nu = check_measure(nu)
    allowed = np.asarray(allowed, dtype=bool)
    if allowed.shape != (len(mu), len(nu)):
        raise ValueError("mask shape mismatch")
    if _uniform_equal(mu, nu) and not np.all(allowed):
        # max fractional mass equals (max bipartite matching)/n here
        n = len(mu)
        match = maximum_bipartite_matching(sparse.csr_matrix(allowed), perm_type="column")
        hit = match >= 0
        k = int(hit.sum())
        plan = np.zeros((n, n))
        plan[np.flatnonzero(hit), match[hit]] = 1.0 / n
        free_rows = np.flatnonzero(~hit)
        free_cols = np.array(sorted(set(range(n)) - set(match[hit].tolist())), dtype=int)
        plan[free_rows, free_cols] = 1.0 / n
        return k / n, Coupling(plan)
    cost = np.where(allowed, 0.0, 1.0)
    plan = _solve_transport_lp(cost, mu, nu)
    off = float(plan[~allowed].sum())
    return 1.0 - off, Coupling(plan)


def wasserstein_inf(mu, nu, C):
    """Bottleneck transport cost; exact over the sorted cost multiset."""
    mu = check_measure(mu)
    nu = check_measure(nu)
    C = check_cost(C, len(mu), len(nu))
    live = np.ix_(mu > TOL_MASS, nu > TOL_MASS)
    cand = np.unique(C[live][np.isfinite(C[live])])
    if cand.size == 0:
        raise InfeasibleTransportError("no finite costs between supported points")
    lo, hi = 0, len(cand) - 1
    best = None
    mass, plan = max_mass_coupling(mu, nu, C <= cand[hi])
    if mass < 1.0 - 1e-9:
        raise InfeasibleTransportError("no coupling avoids forbidden pairs")
    best = (float(cand[hi]), plan)
    while lo < hi:
        mid = (lo + hi) // 2
        mass, plan = max_mass_coupling(mu, nu, C <= cand[mid])
        if mass >= 1.0 - 1e-9:
            best = (float(cand[mid]), plan)
            hi = mid
        else:
            lo = mid + 1
    return best[0], best[1]


@dataclass(frozen=True)
class ProkhorovResult:
    value: float
    resolution: float

    def __float__(self):
        return self.value


def prokhorov(mu, nu, C, grid: int = PROKHOROV_GRID) -> ProkhorovResult:
    """Least eps (on the documented candidate lattice) admitting a coupling
    with mass >= 1 - eps on pairs of cost <= eps.  Capped at 1, which is
    always feasible."""
    mu = check_measure(mu)
    nu = check_measure(nu)
    C = check_cost(C, len(mu), len(nu))
    finite = C[np.isfinite(C)]
    cand = np.unique(np.concatenate([
        finite[finite <= 1.0],
        np.arange(0, grid + 1) / grid,
    ]))
    lo, hi = 0, len(cand) - 1
    best = 1.0
    while lo <= hi:
        mid = (lo + hi) // 2
        eps = float(cand[mid])
        if max_mass_on(mu, nu, C <= eps) >= 1.0 - eps - 1e-9:
            best = eps
            hi = mid - 1
        else:
            lo = mid + 1
    return ProkhorovResult(value=best, resolution=1.0 / grid)


def wasserstein_1d(x, wx, y, wy, p: float = 1.0) -> float:
    """Exact W_p between weighted point sets on the line (quantile coupling)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    wx = check_measure(wx)
    wy = check_measure(wy)
    ix, iy = np.argsort(x, kind="stable"), np.argsort(y, kind="stable")
    xs, ws = x[ix], wx[ix]
    ys, wt = y[iy], wy[iy]
    cx, cy = np.cumsum(ws), np.cumsum(wt)
    cuts = np.unique(np.concatenate([cx, cy, [0.0]]))
    cuts = cuts[(cuts > 0) & (cuts <= 1 + 1e-12)]
    total, sup = 0.0, 0.0
    prev = 0.0
    for u in cuts:
        qx = xs[min(np.searchsorted(cx, prev + 1e-15), len(xs) - 1)]
        qy = ys[min(np.searchsorted(cy, prev + 1e-15), len(ys) - 1)]
        gap = abs(qx - qy)
        seg = u - prev
        if seg > 0:
            total += seg * gap ** p if math.isfinite(p) else 0.0
            sup = max(sup, gap)
        prev = u
    if not math.isfinite(p):
        return sup
    return total ** (1.0 / p)
