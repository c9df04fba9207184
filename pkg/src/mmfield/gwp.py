"""Measure-aware field distances: Gromov-Wasserstein and Gromov-Prokhorov.

The GW objective is the max of two terms (a pairwise-distance discrepancy
moment and a value-discrepancy moment), minimized over couplings.  Tiny
instances are solved globally; the infinity and Prokhorov variants reduce to
binary searches over finite threshold sets with a shared branch-and-bound
feasibility kernel (compatible pair set carrying enough coupling mass).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import transport
from .core import MMField, Coupling, Relation, check_embedding
from .transport import _solve_transport_lp, max_mass_coupling, wasserstein_1d
from .util import BudgetExhausted, dedupe_sorted, parallel_map, spawn_seeds

TAU_SUPP = 1e-12          # coupling mass below this does not count as support
EXACT_GATE_FINITE = 4     # support size cap for the global finite-p solver
EXACT_GATE_INF = 6        # support size cap for the combinatorial inf solver
DEFAULT_RESTARTS = 16
DEFAULT_SEARCH_BUDGET = 5_000   # branch-and-bound nodes per feasibility test
GP_GRID = 10_000
_TIE = 1e-12


@dataclass(frozen=True)
class GWObjectiveTerms:
    m_term: float
    d_term: float
    value: float
    p: float

    def to_dict(self) -> dict:
        return {"m_term": self.m_term, "d_term": self.d_term,
                "value": self.value, "p": None if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class GWResult:
    value: float
    coupling: Optional[Coupling]
    status: str  # "exact" | "local" | "bounds_only"
    lower: float
    upper: float
    p: float

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status, "lower": self.lower,
                "upper": self.upper, "p": None if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class GPResult:
    value: float
    coupling: Optional[Coupling]
    relation: Optional[Relation]
    status: str
    lower: float
    upper: float
    resolution: float

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status, "lower": self.lower,
                "upper": self.upper, "resolution": self.resolution}


def _value_cross(X: MMField, Y: MMField) -> np.ndarray:
    return X.space.pairwise(X.values, Y.values)


def _gap_tensor(X: MMField, Y: MMField) -> np.ndarray:
    """|d_X(i,k) - d_Y(j,l)| indexed (i, j, k, l)."""
    return np.abs(X.d[:, None, :, None] - Y.d[None, :, None, :])


def gw_objective(X: MMField, Y: MMField, mu: Coupling, p: float = 2.0) -> GWObjectiveTerms:
    """Evaluate the two GW terms for a coupling; exact sums, or support
    suprema for p = inf."""
    plan = np.asarray(mu.matrix, dtype=float)
    if not mu.checks_against(X.weights, Y.weights):
        raise ValueError("coupling marginals do not match the field weights")
    gaps = _gap_tensor(X, Y)
    dB = _value_cross(X, Y)
    if math.isinf(p):
        supp = plan > TAU_SUPP
        pair_supp = supp[:, :, None, None] & supp[None, None, :, :]
        m_term = float(gaps[pair_supp].max(initial=0.0))
        d_term = float(dB[supp].max(initial=0.0))
    else:
        if p < 1:
            raise ValueError("p must be >= 1")
        s1 = float(gaps.max(initial=0.0))
        s2 = float(dB.max(initial=0.0))
        mt = 0.0 if s1 == 0 else float(np.einsum("ijkl,ij,kl->", (gaps / s1) ** p, plan, plan))
        dt = 0.0 if s2 == 0 else float(((dB / s2) ** p * plan).sum())
        m_term = s1 * max(mt, 0.0) ** (1.0 / p)
        d_term = s2 * max(dt, 0.0) ** (1.0 / p)
    return GWObjectiveTerms(m_term=m_term, d_term=d_term,
                            value=max(m_term / 2.0, d_term), p=p)


def gw_lower_bound(X: MMField, Y: MMField, p: float) -> float:
    """Sound lower bound: each term minimized through its own relaxation.

    The value term relaxes to an exact transport problem on B-distances; the
    metric term relaxes to a 1-d transport problem between the laws of
    pairwise distances (any coupling pushes forward to a coupling of those
    laws).
    """
    dB = _value_cross(X, Y)
    if math.isinf(p):
        d_low, _ = transport.wasserstein_inf(X.weights, Y.weights, dB)
    else:
        d_low, _ = transport.wasserstein_p(X.weights, Y.weights, dB, p)
    wXX = np.outer(X.weights, X.weights).ravel()
    wYY = np.outer(Y.weights, Y.weights).ravel()
    m_low = 0.5 * wasserstein_1d(X.d.ravel(), wXX, Y.d.ravel(), wYY, p)
    return max(d_low, m_low)


# ---------------------------------------------------------------------------
# shared feasibility kernel: compatible pair set carrying enough mass
# ---------------------------------------------------------------------------

def _greedy_clique(adm: np.ndarray, comp: np.ndarray, order_key: np.ndarray,
                   mu: np.ndarray, nu: np.ndarray, target: float):
    """Cheap feasibility attempt: grow a compatible pair set greedily."""
    pairs = [(order_key[i, j], -min(mu[i], nu[j]), i, j)
             for i, j in np.argwhere(adm)]
    pairs.sort()
    mask = np.zeros_like(adm)
    chosen = []
    for _, _, i, j in pairs:
        if all(comp[i, j, a, b] for a, b in chosen):
            chosen.append((i, j))
            mask[i, j] = True
    if not chosen:
        return None
    mass, plan = max_mass_coupling(mu, nu, mask)
    if mass >= target - 1e-9:
        return mask, plan
    return None


def _mass_clique_search(adm: np.ndarray, comp: np.ndarray,
                        mu: np.ndarray, nu: np.ndarray,
                        target: float, budget: int):
    """Exists a pairwise-compatible subset of ``adm`` on which some coupling
    places mass >= target?  Complete branch and bound over include/exclude
    decisions with a mass relaxation bound; returns (mask, plan) or None."""
    if target <= 1e-9:
        return np.zeros_like(adm), None
    nodes = [0]

    def rec(in_set: np.ndarray, cand: np.ndarray):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExhausted(f"feasibility search exceeded {budget} nodes")
        bound_mask = in_set | cand
        mass, plan = max_mass_coupling(mu, nu, bound_mask)
        if mass < target - 1e-9:
            return None
        on_cand = float(plan.matrix[cand].sum())
        if on_cand <= 1e-12:
            return in_set, plan
        weights = np.where(cand, plan.matrix, -1.0)
        i, j = np.unravel_index(int(np.argmax(weights)), weights.shape)
        inc_cand = cand & comp[i, j]
        inc_cand[i, j] = False
        inc_set = in_set.copy()
        inc_set[i, j] = True
        got = rec(inc_set, inc_cand)
        if got is not None:
            return got
        exc = cand.copy()
        exc[i, j] = False
        return rec(in_set, exc)

    return rec(np.zeros_like(adm), adm.copy())


def _restrict_support(X: MMField):
    idx = X.support()
    if len(idx) == X.n:
        return X, idx
    sub = MMField(
        base=type(X.base)(space=X.space, d=X.d[np.ix_(idx, idx)],
                          values=X.values[idx], pseudo_ok=X.base.pseudo_ok),
        weights=X.weights[idx] / X.weights[idx].sum(),
    )
    return sub, idx


def _expand_plan(plan: np.ndarray, idx_x, idx_y, n: int, m: int) -> np.ndarray:
    full = np.zeros((n, m))
    full[np.ix_(idx_x, idx_y)] = plan
    return full


def _canonical_order(X: MMField, Y: MMField) -> bool:
    """True when (X, Y) is already in canonical order; makes solves symmetric."""
    kx = (X.n, X.d.tobytes(), np.asarray(X.values, dtype=float).tobytes(), X.weights.tobytes())
    ky = (Y.n, Y.d.tobytes(), np.asarray(Y.values, dtype=float).tobytes(), Y.weights.tobytes())
    return kx <= ky


# ---------------------------------------------------------------------------
# p = inf: binary search over critical thresholds
# ---------------------------------------------------------------------------

def _inf_candidates(X: MMField, Y: MMField) -> np.ndarray:
    gaps = 0.5 * _gap_tensor(X, Y).ravel()
    dB = _value_cross(X, Y).ravel()
    return dedupe_sorted(np.concatenate([[0.0], gaps, dB]), _TIE)


def _gw_solve_inf(X: MMField, Y: MMField, budget: int) -> GWResult:
    Xs, ix = _restrict_support(X)
    Ys, iy = _restrict_support(Y)
    dB = _value_cross(Xs, Ys)
    gaps = _gap_tensor(Xs, Ys)
    cand = _inf_candidates(Xs, Ys)
    lower_relax = gw_lower_bound(X, Y, math.inf)

    proven_infeasible = set()

    def feasible(eps: float, allow_search: bool):
        adm = dB <= eps + _TIE
        comp = gaps <= 2.0 * eps + _TIE
        got = _greedy_clique(adm, comp, dB, Xs.weights, Ys.weights, 1.0)
        if got is None and allow_search:
            got = _mass_clique_search(adm, comp, Xs.weights, Ys.weights, 1.0, budget)
        return got

    gate_ok = Xs.n <= EXACT_GATE_INF and Ys.n <= EXACT_GATE_INF
    try:
        if not gate_ok:
            raise BudgetExhausted("instance beyond the combinatorial gate")
        lo, hi = 0, len(cand) - 1
        best = (float(cand[hi]), feasible(float(cand[hi]), True))
        while lo < hi:
            mid = (lo + hi) // 2
            got = feasible(float(cand[mid]), True)
            if got is not None:
                best = (float(cand[mid]), got)
                hi = mid
            else:
                proven_infeasible.add(mid)
                lo = mid + 1
        value, (mask, _) = best
        # clean witness supported exactly inside the chosen pair set
        cost = np.where(mask, 0.0, np.inf)
        plan = _solve_transport_lp(cost, Xs.weights, Ys.weights)
        full = _expand_plan(plan, ix, iy, X.n, Y.n)
        return GWResult(value=value, coupling=Coupling(full), status="exact",
                        lower=value, upper=value, p=math.inf)
    except BudgetExhausted:
        upper = None
        for k in range(len(cand)):
            got = feasible(float(cand[k]), False)
            if got is not None:
                plan = _expand_plan(got[1].matrix, ix, iy, X.n, Y.n)
                upper = (float(cand[k]), Coupling(plan))
                break
        assert upper is not None  # the largest threshold always succeeds greedily
        comb_lower = max((float(cand[k + 1]) for k in proven_infeasible
                          if k + 1 < len(cand)), default=0.0)
        lower = max(lower_relax, comb_lower)
        return GWResult(value=upper[0], coupling=upper[1], status="bounds_only",
                        lower=min(lower, upper[0]), upper=upper[0], p=math.inf)


# ---------------------------------------------------------------------------
# finite p: multistart descent, global on tiny supports
# ---------------------------------------------------------------------------

def _scaled_terms(X: MMField, Y: MMField, p: float):
    gaps = _gap_tensor(X, Y)
    dB = _value_cross(X, Y)
    s1 = float(gaps.max(initial=0.0))
    s2 = float(dB.max(initial=0.0))
    Kt = (gaps / s1) ** p if s1 > 0 else np.zeros_like(gaps)
    Dt = (dB / s2) ** p if s2 > 0 else np.zeros_like(dB)
    return Kt, s1, Dt, s2


def _objective_of(Kt, s1, Dt, s2, p, plan):
    mt = float(np.einsum("ijkl,ij,kl->", Kt, plan, plan))
    dt = float((Dt * plan).sum())
    m_term = s1 * max(mt, 0.0) ** (1.0 / p)
    d_term = s2 * max(dt, 0.0) ** (1.0 / p)
    return max(m_term / 2.0, d_term)


def _fw_descent(Kt, s1, Dt, s2, p, mu, nu, start, iters: int = 120):
    """Conditional subgradient descent on the max-of-two-terms objective."""
    plan = start.copy()
    best_val = _objective_of(Kt, s1, Dt, s2, p, plan)
    best = plan.copy()
    for _ in range(iters):
        mt = float(np.einsum("ijkl,ij,kl->", Kt, plan, plan))
        dt = float((Dt * plan).sum())
        m_half = 0.5 * s1 * max(mt, 0.0) ** (1.0 / p)
        d_term = s2 * max(dt, 0.0) ** (1.0 / p)
        g_m = np.zeros_like(plan)
        if mt > 1e-300:
            g_m = (s1 / p) * mt ** (1.0 / p - 1.0) * np.einsum("ijkl,kl->ij", Kt, plan)
        g_d = np.zeros_like(plan)
        if dt > 1e-300:
            g_d = (s2 / p) * dt ** (1.0 / p - 1.0) * Dt
        if abs(m_half - d_term) <= 1e-12:
            g = 0.5 * (g_m + g_d)
        elif m_half > d_term:
            g = g_m
        else:
            g = g_d
        vertex = _solve_transport_lp(g - g.min() + 1.0, mu, nu)
        delta = vertex - plan
        # one-dimensional objective along the segment: quadratic + linear data
        a = mt
        b = 2.0 * float(np.einsum("ijkl,ij,kl->", Kt, plan, delta))
        c = float(np.einsum("ijkl,ij,kl->", Kt, delta, delta))
        d0 = dt
        d1 = float((Dt * delta).sum())

        def line(g_):
            mval = max(a + b * g_ + c * g_ * g_, 0.0)
            dval = max(d0 + d1 * g_, 0.0)
            return max(0.5 * s1 * mval ** (1.0 / p), s2 * dval ** (1.0 / p))

        grid = np.linspace(0.0, 1.0, 33)
        vals = [line(g_) for g_ in grid]
        k = int(np.argmin(vals))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, len(grid) - 1)]
        res = minimize_scalar(line, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        gamma = float(res.x) if res.fun < vals[k] else float(grid[k])
        new_val = line(gamma)
        if gamma <= 0 or new_val >= best_val - 1e-13:
            break
        plan = plan + gamma * delta
        best_val = new_val
        best = plan.copy()
    return best_val, best


def _epigraph_polish(Kt, s1, Dt, s2, p, mu, nu, start):
    """Local polish: minimize t subject to both terms <= t on the polytope."""
    n, m = start.shape

    def terms(z):
        plan = z[:-1].reshape(n, m)
        mt = float(np.einsum("ijkl,ij,kl->", Kt, plan, plan))
        dt = float((Dt * plan).sum())
        return (0.5 * s1 * max(mt, 0.0) ** (1.0 / p),
                s2 * max(dt, 0.0) ** (1.0 / p))

    cons = [
        {"type": "eq", "fun": lambda z, i=i: z[:-1].reshape(n, m)[i].sum() - mu[i]}
        for i in range(n)
    ] + [
        {"type": "eq", "fun": lambda z, j=j: z[:-1].reshape(n, m)[:, j].sum() - nu[j]}
        for j in range(m - 1)
    ] + [
        {"type": "ineq", "fun": lambda z: z[-1] - terms(z)[0]},
        {"type": "ineq", "fun": lambda z: z[-1] - terms(z)[1]},
    ]
    t0 = max(terms(np.concatenate([start.ravel(), [0.0]])))
    z0 = np.concatenate([start.ravel(), [t0]])
    bounds = [(0.0, None)] * (n * m) + [(0.0, None)]
    res = minimize(lambda z: z[-1], z0, method="SLSQP", bounds=bounds,
                   constraints=cons, options={"maxiter": 300, "ftol": 1e-14})
    plan = np.clip(res.x[:-1].reshape(n, m), 0.0, None)
    if not Coupling(plan).checks_against(mu, nu, tol=1e-6):
        return None
    plan = _ipf_project(plan + 1e-300, mu, nu)
    return _objective_of(Kt, s1, Dt, s2, p, plan), plan


def _ipf_project(plan: np.ndarray, mu: np.ndarray, nu: np.ndarray, iters: int = 300) -> np.ndarray:
    """Alternate marginal rescaling until the matrix is a coupling again."""
    plan = plan.copy()
    for _ in range(iters):
        rs = plan.sum(axis=1)
        plan = plan * np.where(rs > 0, mu / np.where(rs > 0, rs, 1.0), 0.0)[:, None]
        cs = plan.sum(axis=0)
        plan = plan * np.where(cs > 0, nu / np.where(cs > 0, cs, 1.0), 0.0)[None, :]
        if max(np.abs(plan.sum(axis=1) - mu).max(), np.abs(plan.sum(axis=0) - nu).max()) < 1e-13:
            break
    return plan


def _ipf_coupling(raw: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    return _ipf_project(raw * np.outer(mu, nu), mu, nu)


def _nw_corner(mu: np.ndarray, nu: np.ndarray, row_order, col_order) -> np.ndarray:
    n, m = len(mu), len(nu)
    plan = np.zeros((n, m))
    ri, ci = 0, 0
    rem_mu = mu[list(row_order)].copy()
    rem_nu = nu[list(col_order)].copy()
    while ri < n and ci < m:
        take = min(rem_mu[ri], rem_nu[ci])
        plan[row_order[ri], col_order[ci]] = take
        rem_mu[ri] -= take
        rem_nu[ci] -= take
        if rem_mu[ri] <= rem_nu[ci]:
            ri += 1
        else:
            ci += 1
    return plan


def _vertex_couplings(mu: np.ndarray, nu: np.ndarray, cap: int = 4) -> list:
    """Extreme-point candidates: permutation couplings when both marginals
    are uniform of equal size, otherwise greedy corner solutions over all
    row/column orderings."""
    n, m = len(mu), len(nu)
    out = []
    if n == m and np.allclose(mu, 1.0 / n) and np.allclose(nu, 1.0 / n):
        for perm in permutations(range(n)):
            plan = np.zeros((n, n))
            plan[range(n), perm] = 1.0 / n
            out.append(plan)
        return out
    for ro in permutations(range(n)):
        for co in permutations(range(m)):
            out.append(_nw_corner(mu, nu, ro, co))
    return out


def _grid_couplings(mu: np.ndarray, nu: np.ndarray, step: float, chunk: int = 100_000):
    """All couplings whose free block lies on a regular lattice, in chunks."""
    n, m = len(mu), len(nu)
    axes = []
    for i in range(n - 1):
        for j in range(m - 1):
            top = min(mu[i], nu[j])
            axes.append(np.arange(0.0, top + step * 0.5, step))
    if not axes:
        plan = np.outer(mu, nu)  # 1 x m or n x 1: the unique coupling
        if n == 1:
            plan = nu[None, :] * mu[0]
        if m == 1:
            plan = mu[:, None] * nu[0]
        yield plan[None, :, :]
        return
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([g.ravel() for g in mesh], axis=1)
    for lo in range(0, len(flat), chunk):
        G = flat[lo:lo + chunk].reshape(-1, n - 1, m - 1)
        P = np.zeros((len(G), n, m))
        P[:, : n - 1, : m - 1] = G
        P[:, : n - 1, m - 1] = mu[: n - 1] - G.sum(axis=2)
        P[:, n - 1, :] = nu - P[:, : n - 1, :].sum(axis=1)
        ok = P.min(axis=(1, 2)) >= -1e-9
        if ok.any():
            yield np.clip(P[ok], 0.0, None)


def _gw_solve_finite(X: MMField, Y: MMField, p: float, restarts: int, seed: int) -> GWResult:
    Xs, ix = _restrict_support(X)
    Ys, iy = _restrict_support(Y)
    n, m = Xs.n, Ys.n
    mu, nu = Xs.weights, Ys.weights
    Kt, s1, Dt, s2 = _scaled_terms(Xs, Ys, p)
    lower_relax = gw_lower_bound(X, Y, p)

    def batch_objective(plans: np.ndarray) -> np.ndarray:
        mt = np.einsum("ijkl,bij,bkl->b", Kt, plans, plans)
        dt = np.einsum("ij,bij->b", Dt, plans)
        mterm = s1 * np.clip(mt, 0.0, None) ** (1.0 / p)
        dterm = s2 * np.clip(dt, 0.0, None) ** (1.0 / p)
        return np.maximum(mterm / 2.0, dterm)

    starts = [np.outer(mu, nu)]
    dB = _value_cross(Xs, Ys)
    starts.append(_solve_transport_lp(dB, mu, nu))  # value-matching start
    rng_seeds = spawn_seeds(seed, restarts)
    for s in rng_seeds:
        rng = np.random.default_rng(s)
        starts.append(_ipf_coupling(rng.random((n, m)) + 1e-3, mu, nu))

    exact = n <= EXACT_GATE_FINITE and m <= EXACT_GATE_FINITE
    pool = []
    if exact:
        pool.extend(_vertex_couplings(mu, nu))
        if (n - 1) * (m - 1) <= 4:
            keep = []
            for chunk in _grid_couplings(mu, nu, step=1.0 / 16):
                vals = batch_objective(chunk)
                order = np.argsort(vals, kind="stable")[:40]
                keep.extend((float(vals[k]), chunk[k]) for k in order)
            keep.sort(key=lambda t: t[0])
            pool.extend(plan for _, plan in keep[:40])
    pool.extend(starts)

    scored = sorted(
        ((_objective_of(Kt, s1, Dt, s2, p, plan), k, plan) for k, plan in enumerate(pool)),
        key=lambda t: (t[0], t[1]),
    )
    heads = [plan for _, _, plan in scored[: (8 if exact else len(scored))]]

    results = parallel_map(
        lambda st: _fw_descent(Kt, s1, Dt, s2, p, mu, nu, st), heads
    )
    results.append(scored[0][:1] + (scored[0][2],))  # keep the raw pool best too
    best_val, best_plan = min(
        results, key=lambda t: (t[0], tuple(np.round(t[1].ravel(), 12)))
    )
    if exact:
        for _, plan in sorted(results, key=lambda t: t[0])[:3]:
            polished = _epigraph_polish(Kt, s1, Dt, s2, p, mu, nu, plan)
            if polished is not None and polished[0] < best_val - 1e-13:
                best_val, best_plan = polished
    full = Coupling(_expand_plan(best_plan, ix, iy, X.n, Y.n))
    if exact:
        return GWResult(value=best_val, coupling=full, status="exact",
                        lower=best_val, upper=best_val, p=p)
    return GWResult(value=best_val, coupling=full, status="local",
                    lower=min(lower_relax, best_val), upper=best_val, p=p)


def gw_solve(X: MMField, Y: MMField, p: float = 2.0, restarts: int = DEFAULT_RESTARTS,
             budget: int = DEFAULT_SEARCH_BUDGET, seed: int = 0) -> GWResult:
    """Gromov-Wasserstein distance between mm-fields.

    Finite p is globally solved when both supports have at most
    ``EXACT_GATE_FINITE`` points (dense lattice plus polish, cross-checked
    against extreme-point couplings), otherwise multistart descent with a
    sound relaxation lower bound.  ``p = inf`` is an exact binary search over
    critical thresholds gated at ``EXACT_GATE_INF`` points per side.
    Arguments are canonicalized so the distance is symmetric exactly.
    """
    if not _canonical_order(X, Y):
        res = gw_solve(Y, X, p=p, restarts=restarts, budget=budget, seed=seed)
        flipped = Coupling(res.coupling.matrix.T) if res.coupling is not None else None
        return GWResult(value=res.value, coupling=flipped, status=res.status,
                        lower=res.lower, upper=res.upper, p=res.p)
    if math.isinf(p):
        return _gw_solve_inf(X, Y, budget)
    if p < 1:
        raise ValueError("p must be >= 1")
    return _gw_solve_finite(X, Y, p, restarts, seed)


# ---------------------------------------------------------------------------
# Gromov-Prokhorov
# ---------------------------------------------------------------------------

def _gp_candidates(X: MMField, Y: MMField, grid: int) -> np.ndarray:
    gaps = _gap_tensor(X, Y).ravel()
    dB = 2.0 * _value_cross(X, Y).ravel()
    lattice = 2.0 * np.arange(0, grid + 1) / grid
    cand = dedupe_sorted(np.concatenate([[0.0], gaps, dB, lattice, [2.0]]), _TIE)
    return cand[cand <= 2.0 + _TIE]


def gp_distance(X: MMField, Y: MMField, budget: int = DEFAULT_SEARCH_BUDGET,
                grid: int = GP_GRID) -> GPResult:
    """Gromov-Prokhorov distance: half the least eps admitting a coupling
    with mass >= 1 - eps/2 on a pair set of distortion <= eps.

    Exact on the candidate lattice (critical thresholds plus a 1/grid mass
    lattice); branch and bound within ``budget``, else reported bounds.
    """
    if not _canonical_order(X, Y):
        res = gp_distance(Y, X, budget=budget, grid=grid)
        return GPResult(value=res.value,
                        coupling=Coupling(res.coupling.matrix.T) if res.coupling else None,
                        relation=res.relation.transpose() if res.relation else None,
                        status=res.status, lower=res.lower, upper=res.upper,
                        resolution=res.resolution)
    Xs, ix = _restrict_support(X)
    Ys, iy = _restrict_support(Y)
    dB = _value_cross(Xs, Ys)
    gaps = _gap_tensor(Xs, Ys)
    cand = _gp_candidates(Xs, Ys, grid)
    resolution = 1.0 / grid

    proven_infeasible = set()

    def feasible(eps: float, allow_search: bool):
        target = 1.0 - eps / 2.0
        adm = dB <= eps / 2.0 + _TIE
        comp = gaps <= eps + _TIE
        if target <= 1e-9:
            return np.zeros_like(adm, dtype=bool), None
        got = _greedy_clique(adm, comp, dB, Xs.weights, Ys.weights, target)
        if got is None and allow_search:
            got = _mass_clique_search(adm, comp, Xs.weights, Ys.weights, target, budget)
        return got

    def pack(eps: float, got) -> GPResult:
        mask, plan = got
        rel = None
        if mask is not None and mask.any():
            pairs = tuple((int(ix[i]), int(iy[j])) for i, j in np.argwhere(mask))
            rel = Relation(pairs)
        cpl = Coupling(_expand_plan(plan.matrix, ix, iy, X.n, Y.n)) if plan is not None else None
        return GPResult(value=eps / 2.0, coupling=cpl, relation=rel, status="exact",
                        lower=eps / 2.0, upper=eps / 2.0, resolution=resolution)

    try:
        lo, hi = 0, len(cand) - 1
        best = (float(cand[hi]), feasible(float(cand[hi]), True))
        while lo < hi:
            mid = (lo + hi) // 2
            got = feasible(float(cand[mid]), True)
            if got is not None:
                best = (float(cand[mid]), got)
                hi = mid
            else:
                proven_infeasible.add(mid)
                lo = mid + 1
        return pack(best[0], best[1])
    except BudgetExhausted:
        upper = None
        for k in range(len(cand)):
            got = feasible(float(cand[k]), False)
            if got is not None:
                upper = (float(cand[k]), got)
                break
        assert upper is not None  # eps = 2 is feasible with the empty pair set
        # relaxation: drop pairwise compatibility, keep the mass requirement
        relax_lo = 0.0
        lo, hi = 0, len(cand) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            eps = float(cand[mid])
            ok = (1.0 - eps / 2.0 <= 1e-9) or (
                transport.max_mass_on(Xs.weights, Ys.weights, dB <= eps / 2.0 + _TIE)
                >= 1.0 - eps / 2.0 - 1e-9
            )
            if ok:
                relax_lo = eps
                hi = mid - 1
            else:
                lo = mid + 1
        comb_lower = max((float(cand[k + 1]) for k in proven_infeasible
                          if k + 1 < len(cand)), default=0.0)
        lower = max(relax_lo, comb_lower) / 2.0
        res = pack(upper[0], upper[1])
        return GPResult(value=res.value, coupling=res.coupling, relation=res.relation,
                        status="bounds_only", lower=min(lower, res.value),
                        upper=res.value, resolution=resolution)


# ---------------------------------------------------------------------------
# sequence estimator and embedding upper bound
# ---------------------------------------------------------------------------

def gw_inf_from_sequences(X: MMField, Y: MMField, n_seq: int, seed: int = 0,
                          coupling: Optional[Coupling] = None,
                          budget: int = DEFAULT_SEARCH_BUDGET) -> float:
    """Sequence-based upper estimate of the inf-GW distance.

    Draws i.i.d. joint samples from the best available coupling and takes the
    suprema over the drawn pairs; converges to the exact value as the sample
    grows when driven by an optimal coupling.
    """
    if coupling is None:
        coupling = gw_solve(X, Y, p=math.inf, budget=budget).coupling
    plan = np.clip(np.asarray(coupling.matrix, dtype=float), 0.0, None)
    probs = (plan / plan.sum()).ravel()
    rng = np.random.default_rng(seed)
    cells = rng.choice(len(probs), size=n_seq, p=probs)
    xs, ys = np.unravel_index(cells, plan.shape)
    gap = 0.5 * float(np.abs(X.d[np.ix_(xs, xs)] - Y.d[np.ix_(ys, ys)]).max(initial=0.0))
    dB = X.space.pairwise(X.values[xs], Y.values[ys])
    val = float(np.diag(dB).max(initial=0.0))
    return max(gap, val)


def gw_embedding_upper(X: MMField, Y: MMField, Z, iota_X, iota_Y, p: float = 2.0) -> float:
    """Wasserstein distance of the pushforward measures inside a common field;
    an upper bound for the GW distance by the embedding inequality."""
    iota_X = np.asarray(iota_X, dtype=int)
    iota_Y = np.asarray(iota_Y, dtype=int)
    check_embedding(Z, X.base, iota_X)
    check_embedding(Z, Y.base, iota_Y)
    wx = np.zeros(Z.n)
    np.add.at(wx, iota_X, X.weights)
    wy = np.zeros(Z.n)
    np.add.at(wy, iota_Y, Y.weights)
    if math.isinf(p):
        value, _ = transport.wasserstein_inf(wx, wy, Z.d)
    else:
        value, _ = transport.wasserstein_p(wx, wy, Z.d, p)
    return value
