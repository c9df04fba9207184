"""Shared builders and independent brute-force oracles for the test suite.

The oracles here deliberately avoid the library's solver paths: they use
exhaustive enumeration, dense lattices and raw scipy calls so that agreement
with the package is meaningful.
"""

from __future__ import annotations

from itertools import permutations, product

import numpy as np
from scipy.optimize import linprog, minimize

from mmfield.core import MMField, MetricField, TargetSpace


# ---------------------------------------------------------------------------
# random instance builders (always valid fields by construction)
# ---------------------------------------------------------------------------

def random_metric_field(rng, n: int, dim_dom: int = 2, dim_b: int = 1,
                        scale: float = 2.0) -> MetricField:
    """Euclidean-domain field with a linear 1-Lipschitz value map."""
    z = rng.random((n, dim_dom)) * scale
    d = np.sqrt(((z[:, None] - z[None, :]) ** 2).sum(-1))
    proj = rng.standard_normal((dim_dom, dim_b))
    norm = np.linalg.norm(proj, ord=2)
    proj = proj / norm * rng.random()  # operator norm < 1 keeps it Lipschitz
    vals = z @ proj + rng.standard_normal(dim_b)
    return MetricField(space=TargetSpace.euclidean(dim_b), d=d, values=vals)


def random_mm_field(rng, n: int, dim_dom: int = 2, dim_b: int = 1,
                    scale: float = 2.0) -> MMField:
    base = random_metric_field(rng, n, dim_dom, dim_b, scale)
    w = rng.random(n) + 0.2
    return MMField(base=base, weights=w / w.sum())


def singleton_pair(delta: float = 0.7):
    B = TargetSpace.euclidean(1)
    X = MetricField(space=B, d=[[0.0]], values=[[0.0]])
    Y = MetricField(space=B, d=[[0.0]], values=[[delta]])
    return X, Y


def two_point_pair():
    """X: two points at distance 1; Y: at distance 2; all values equal."""
    B = TargetSpace.euclidean(1)
    X = MetricField(space=B, d=[[0, 1], [1, 0]], values=[[0.0], [0.0]])
    Y = MetricField(space=B, d=[[0, 2], [2, 0]], values=[[0.0], [0.0]])
    return X, Y


def as_mm(f, weights=None) -> MMField:
    w = np.full(f.n, 1.0 / f.n) if weights is None else np.asarray(weights, float)
    return MMField(base=f, weights=w)


# ---------------------------------------------------------------------------
# transport oracles
# ---------------------------------------------------------------------------

def perm_wasserstein(C: np.ndarray, p: float) -> float:
    """Uniform equal-size W_p by enumerating every permutation coupling."""
    n = C.shape[0]
    best = np.inf
    for perm in permutations(range(n)):
        cost = (sum(C[i, perm[i]] ** p for i in range(n)) / n) ** (1.0 / p)
        best = min(best, cost)
    return best


def perm_bottleneck(C: np.ndarray) -> float:
    n = C.shape[0]
    return min(max(C[i, perm[i]] for i in range(n)) for perm in permutations(range(n)))


def lp_max_mass(mu, nu, allowed) -> float:
    """Raw-LP maximum coupling mass on a mask (independent of the package)."""
    n, m = allowed.shape
    c = -(allowed.ravel().astype(float))
    A, b = [], []
    for i in range(n):
        row = np.zeros(n * m)
        row[i * m:(i + 1) * m] = 1
        A.append(row)
        b.append(mu[i])
    for j in range(m - 1):
        row = np.zeros(n * m)
        row[j::m] = 1
        A.append(row)
        b.append(nu[j])
    res = linprog(c, A_eq=np.array(A), b_eq=np.array(b), bounds=(0, None), method="highs")
    return -res.fun


# ---------------------------------------------------------------------------
# GH oracle: enumerate every correspondence on tiny instances
# ---------------------------------------------------------------------------

def _distortion_of_pairs(X, Y, S) -> float:
    gaps = np.abs(X.d[:, None, :, None] - Y.d[None, :, None, :])
    dB = X.space.pairwise(X.values, Y.values)
    metric = max(gaps[i, j, k, l] for (i, j) in S for (k, l) in S)
    value = 2.0 * max(dB[i, j] for (i, j) in S)
    return max(metric, value)


def gh_bruteforce(X, Y) -> float:
    n, m = X.n, Y.n
    cells = [(i, j) for i in range(n) for j in range(m)]
    best = np.inf
    for pat in product([0, 1], repeat=len(cells)):
        S = [cells[k] for k in range(len(cells)) if pat[k]]
        if not S:
            continue
        if len({i for i, _ in S}) < n or len({j for _, j in S}) < m:
            continue
        best = min(best, _distortion_of_pairs(X, Y, S) / 2.0)
    return best


# ---------------------------------------------------------------------------
# GW oracles
# ---------------------------------------------------------------------------

def gw2_grid_oracle(X: MMField, Y: MMField, step: float = 1.0 / 64) -> float:
    """Dense lattice over the coupling polytope plus one local polish, p = 2."""
    n, m = X.n, Y.n
    K2 = np.abs(X.d[:, None, :, None] - Y.d[None, :, None, :]) ** 2
    dB2 = X.space.pairwise(X.values, Y.values) ** 2
    mu, nu = X.weights, Y.weights

    def obj(P):
        M = float(np.einsum("ijkl,ij,kl->", K2, P, P))
        D = float((dB2 * P).sum())
        return max(0.5 * np.sqrt(max(M, 0.0)), np.sqrt(max(D, 0.0)))

    free = [(i, j) for i in range(n - 1) for j in range(m - 1)]
    best, best_plan = np.inf, None
    if free:
        axes = [np.arange(0, min(mu[i], nu[j]) + step / 2, step) for (i, j) in free]
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = np.stack([g.ravel() for g in mesh], axis=1)
        for lo in range(0, len(flat), 200_000):
            G = flat[lo:lo + 200_000].reshape(-1, n - 1, m - 1)
            P = np.zeros((len(G), n, m))
            P[:, : n - 1, : m - 1] = G
            P[:, : n - 1, m - 1] = mu[: n - 1] - G.sum(axis=2)
            P[:, n - 1, :] = nu - P[:, : n - 1, :].sum(axis=1)
            P = np.clip(P[P.min(axis=(1, 2)) >= -1e-9], 0, None)
            if not len(P):
                continue
            M = np.einsum("ijkl,bij,bkl->b", K2, P, P)
            D = np.einsum("ij,bij->b", dB2, P)
            v = np.maximum(0.5 * np.sqrt(np.clip(M, 0, None)),
                           np.sqrt(np.clip(D, 0, None)))
            k = int(np.argmin(v))
            if v[k] < best:
                best, best_plan = float(v[k]), P[k]
    else:
        best_plan = np.outer(mu, nu)
        best = obj(best_plan)

    cons = (
        [{"type": "eq", "fun": (lambda z, i=i: z.reshape(n, m)[i].sum() - mu[i])}
         for i in range(n)]
        + [{"type": "eq", "fun": (lambda z, j=j: z.reshape(n, m)[:, j].sum() - nu[j])}
           for j in range(m - 1)]
    )
    res = minimize(lambda z: obj(z.reshape(n, m)), best_plan.ravel(), method="SLSQP",
                   bounds=[(0, None)] * (n * m), constraints=cons,
                   options={"maxiter": 200, "ftol": 1e-14})
    if res.x is not None:
        P = np.clip(res.x.reshape(n, m), 0, None)
        if (np.abs(P.sum(0) - nu).max() < 1e-7 and np.abs(P.sum(1) - mu).max() < 1e-7):
            best = min(best, obj(P))
    return best


def gw_inf_support_oracle(X: MMField, Y: MMField) -> float:
    """Exhaustive search over full-mass-feasible support patterns."""
    n, m = X.n, Y.n
    gaps = np.abs(X.d[:, None, :, None] - Y.d[None, :, None, :])
    dB = X.space.pairwise(X.values, Y.values)
    cells = [(i, j) for i in range(n) for j in range(m)]
    best = np.inf
    for pat in product([0, 1], repeat=len(cells)):
        S = [cells[k] for k in range(len(cells)) if pat[k]]
        if not S:
            continue
        mask = np.zeros((n, m), bool)
        for i, j in S:
            mask[i, j] = True
        if lp_max_mass(X.weights, Y.weights, mask) < 1 - 1e-9:
            continue
        mterm = max(gaps[i, j, k, l] for (i, j) in S for (k, l) in S)
        dterm = max(dB[i, j] for (i, j) in S)
        best = min(best, max(0.5 * mterm, dterm))
    return best


def gp_subset_oracle(X: MMField, Y: MMField) -> float:
    """d_GP by direct minimization of max(dis(R), 2(1 - mass(R))) over all R."""
    n, m = X.n, Y.n
    cells = [(i, j) for i in range(n) for j in range(m)]
    best = 2.0
    for pat in product([0, 1], repeat=len(cells)):
        S = [cells[k] for k in range(len(cells)) if pat[k]]
        if not S:
            continue
        mask = np.zeros((n, m), bool)
        for i, j in S:
            mask[i, j] = True
        mass = lp_max_mass(X.weights, Y.weights, mask)
        best = min(best, max(_distortion_of_pairs(X.base, Y.base, S), 2 * (1 - mass)))
    return best / 2.0


# ---------------------------------------------------------------------------
# exact tuple-law oracle for two-point fields
# ---------------------------------------------------------------------------

def exact_adm_law(X: MMField, n: int):
    """All n-tuples over the support with their product weights."""
    supp = list(np.flatnonzero(X.weights > 0))
    atoms, probs = [], []
    for tup in product(supp, repeat=n):
        idx = list(tup)
        r = X.d[np.ix_(idx, idx)]
        b = np.asarray(X.values)[idx]
        atoms.append((r, b))
        probs.append(float(np.prod([X.weights[i] for i in idx])))
    return atoms, np.array(probs)


def exact_adm_w1(X: MMField, Y: MMField, n: int) -> float:
    """Exact 1-Wasserstein distance between the two exact tuple laws."""
    ax, px = exact_adm_law(X, n)
    ay, py = exact_adm_law(Y, n)
    cost = np.zeros((len(ax), len(ay)))
    for a, (ra, ba) in enumerate(ax):
        for b, (rb, bb) in enumerate(ay):
            entry = 0.5 * np.abs(ra - rb).max()
            value = max(X.space.dist(ba[i], bb[i]) for i in range(n))
            cost[a, b] = max(entry, value)
    k1, k2 = len(ax), len(ay)
    A, bq = [], []
    for i in range(k1):
        row = np.zeros(k1 * k2)
        row[i * k2:(i + 1) * k2] = 1
        A.append(row)
        bq.append(px[i])
    for j in range(k2 - 1):
        row = np.zeros(k1 * k2)
        row[j::k2] = 1
        A.append(row)
        bq.append(py[j])
    res = linprog(cost.ravel(), A_eq=np.array(A), b_eq=np.array(bq),
                  bounds=(0, None), method="highs")
    return float(res.fun)
