"""Gromov-Hausdorff distance between finite metric fields.

Computed through the distortion characterization: the distance is half the
least achievable distortion over correspondences.  The decision kernel
searches for a correspondence whose pairs are mutually compatible at a given
threshold; the optimum is attained on a finite candidate set of thresholds,
so a binary search over that set is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import MetricField, Relation, as_metric, distortion, hausdorff_in_target
from .util import BudgetExhausted

DEFAULT_NODE_BUDGET = 500_000  # sized for instances up to 8 points per side
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GHResult:
    value: float
    witness: Optional[Relation]
    status: str  # "exact" | "bounds_only"
    lower: float
    upper: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "status": self.status,
            "lower": self.lower,
            "upper": self.upper,
            "witness": list(self.witness.pairs) if self.witness else None,
        }


def _pair_structure(X: MetricField, Y: MetricField, eps: float):
    dB = X.space.pairwise(X.values, Y.values)
    adm = dB <= eps + _TIE_TOL
    gaps = np.abs(X.d[:, None, :, None] - Y.d[None, :, None, :])
    comp = gaps <= 2.0 * eps + _TIE_TOL
    return dB, adm, comp


def gh_feasible(X, Y, eps: float, budget: int = DEFAULT_NODE_BUDGET) -> Optional[Relation]:
    """A correspondence with distortion <= 2*eps, or None if none exists.

    Backtracking over admissible pairs with surjectivity pruning; candidate
    pairs are tried in ascending B-distance, so the result is deterministic.
    Raises :class:`BudgetExhausted` when the node budget runs out.
    """
    X, Y = as_metric(X), as_metric(Y)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n, m = X.n, Y.n
    dB, adm, comp = _pair_structure(X, Y, eps)
    if not adm.any(axis=1).all() or not adm.any(axis=0).all():
        return None

    nodes = [0]

    def search(allowed, row_cov, col_cov, chosen):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExhausted(f"gh_feasible exceeded {budget} nodes")
        if row_cov.all() and col_cov.all():
            return chosen
        # most-constrained uncovered line first
        best_line, best_opts = None, None
        for i in np.flatnonzero(~row_cov):
            k = int(allowed[i].sum())
            if k == 0:
                return None
            if best_opts is None or k < best_opts:
                best_line, best_opts = ("row", i), k
        for j in np.flatnonzero(~col_cov):
            k = int(allowed[:, j].sum())
            if k == 0:
                return None
            if best_opts is None or k < best_opts:
                best_line, best_opts = ("col", j), k
        kind, idx = best_line
        if kind == "row":
            cands = [(dB[idx, j], idx, j) for j in np.flatnonzero(allowed[idx])]
        else:
            cands = [(dB[i, idx], i, idx) for i in np.flatnonzero(allowed[:, idx])]
        cands.sort()
        for _, i, j in cands:
            new_allowed = allowed & comp[i, j]
            rc = row_cov.copy()
            rc[i] = True
            cc = col_cov.copy()
            cc[j] = True
            if not (new_allowed.any(axis=1) | rc).all():
                continue
            if not (new_allowed.any(axis=0) | cc).all():
                continue
            got = search(new_allowed, rc, cc, chosen + [(i, j)])
            if got is not None:
                return got
        return None

    found = search(adm.copy(), np.zeros(n, dtype=bool), np.zeros(m, dtype=bool), [])
    return Relation(tuple(found)) if found is not None else None


def _candidate_eps(X: MetricField, Y: MetricField) -> np.ndarray:
    halves = 0.5 * np.abs(X.d[:, :, None, None] - Y.d[None, None, :, :]).ravel()
    dB = X.space.pairwise(X.values, Y.values).ravel()
    cand = np.unique(np.concatenate([[0.0], halves, dB]))
    keep = [cand[0]]
    for v in cand[1:]:
        if v - keep[-1] > _TIE_TOL:
            keep.append(v)
    return np.array(keep)


def _heuristic_correspondence(X: MetricField, Y: MetricField) -> Relation:
    """Greedy value matching refined by local swaps; always a correspondence."""
    dB = X.space.pairwise(X.values, Y.values)
    ri, ci = linear_sum_assignment(dB)
    f = {int(i): int(j) for i, j in zip(ri, ci)}
    for i in range(X.n):
        if i not in f:
            f[i] = int(np.argmin(dB[i]))
    g = {j: int(np.argmin(dB[:, j])) for j in range(Y.n)}
    pairs = set((i, f[i]) for i in range(X.n)) | set((g[j], j) for j in range(Y.n))

    def dis(ps):
        return distortion(X, Y, Relation(tuple(ps)))

    best = dis(pairs)
    improved = True
    while improved:
        improved = False
        for i in range(X.n):
            cur = f[i]
            for j in range(Y.n):
                if j == cur:
                    continue
                trial = set(pairs)
                trial.discard((i, cur))
                trial.add((i, j))
                tr = Relation(tuple(trial))
                if tr.is_correspondence(X.n, Y.n):
                    v = dis(trial)
                    if v < best - _TIE_TOL:
                        best, pairs, improved = v, trial, True
                        f[i] = j
                        break
            if improved:
                break
    return Relation(tuple(pairs))


def gh_lower_bound(X: MetricField, Y: MetricField) -> float:
    diam_gap = 0.5 * abs(X.diameter() - Y.diameter())
    image_gap = hausdorff_in_target(X.space, X.values, Y.values)
    return max(diam_gap, image_gap)


def gh_distance(X, Y, budget: int = DEFAULT_NODE_BUDGET) -> GHResult:
    """Field Gromov-Hausdorff distance.

    Exact (binary search over the finite critical-threshold set) while the
    decision searches stay within ``budget`` nodes; afterwards falls back to
    reported lower/upper bounds.
    """
    X, Y = as_metric(X), as_metric(Y)
    cand = _candidate_eps(X, Y)
    lo, hi = 0, len(cand) - 1
    witness = None
    try:
        # the largest candidate is always feasible: every pair is admissible
        top = gh_feasible(X, Y, float(cand[hi]), budget=budget)
        assert top is not None
        witness = (float(cand[hi]), top)
        while lo < hi:
            mid = (lo + hi) // 2
            got = gh_feasible(X, Y, float(cand[mid]), budget=budget)
            if got is not None:
                witness = (float(cand[mid]), got)
                hi = mid
            else:
                lo = mid + 1
        value, rel = witness
        return GHResult(value=value, witness=rel, status="exact", lower=value, upper=value)
    except BudgetExhausted:
        lower = gh_lower_bound(X, Y)
        heur = _heuristic_correspondence(X, Y)
        upper = distortion(X, Y, heur) / 2.0
        if witness is not None:
            if witness[0] < upper:
                upper, heur = witness[0], witness[1]
        return GHResult(value=upper, witness=heur, status="bounds_only",
                        lower=min(lower, upper), upper=upper)
