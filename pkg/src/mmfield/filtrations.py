"""Neighborhood and Vietoris-Rips multifiltrations of finite fields.

Neighborhood filtrations live on an ambient field and are represented as
boolean membership masks over explicit parameter grids.  Vietoris-Rips
filtrations are graded complexes: each simplex (or chain of nested subsets)
stores the minimal parameter grade at which it appears.  All thresholds are
closed (<=).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import MMField, MetricField, TargetSpace, as_metric
from .minball import min_enclosing_ball

SUBSET_CAP = 8  # admissible-subset size cap for the trifiltration


def _weights_of(amb) -> Optional[np.ndarray]:
    return amb.weights if isinstance(amb, MMField) else None


@dataclass(frozen=True)
class GradedSubsetMask:
    """Membership of each ambient point per grid cell; monotone along axes."""

    axes: tuple          # ("r", "s") or ("r", "s", "t")
    grids: tuple         # matching tuple of 1-d arrays
    mask: np.ndarray     # bool, shape (n_points, len(grid_0), len(grid_1)[, ...])

    @property
    def n_points(self) -> int:
        return self.mask.shape[0]

    def members(self, *cell: int) -> np.ndarray:
        return np.flatnonzero(self.mask[(slice(None),) + tuple(cell)])

    def is_monotone(self) -> bool:
        m = self.mask
        for ax in range(1, m.ndim):
            sl_lo = [slice(None)] * m.ndim
            sl_hi = [slice(None)] * m.ndim
            sl_lo[ax] = slice(None, -1)
            sl_hi[ax] = slice(1, None)
            if np.any(m[tuple(sl_lo)] & ~m[tuple(sl_hi)]):
                return False
        return True

    def common_step(self) -> float:
        steps = []
        for g in self.grids:
            diffs = np.diff(np.asarray(g, dtype=float))
            if len(diffs) == 0:
                continue
            if np.ptp(diffs) > 1e-9:
                raise ValueError("grid is not uniform")
            steps.append(float(diffs[0]))
        if not steps:
            return 0.0
        if np.ptp(steps) > 1e-9:
            raise ValueError("axes do not share a common step")
        return steps[0]

    def to_dict(self) -> dict:
        runs = []
        flat = self.mask.reshape(self.n_points, -1)
        for row in flat.T:
            bits = np.ascontiguousarray(row).astype(np.int8)
            idx = np.flatnonzero(np.diff(np.concatenate([[0], bits, [0]])))
            runs.append([int(v) for v in idx])
        return {
            "axes": list(self.axes),
            "grids": [[float(v) for v in g] for g in self.grids],
            "n_points": self.n_points,
            "cells_rle": runs,
        }


def ball_rs(amb, y: int, r: float, s: float) -> np.ndarray:
    """Indices within metric distance r of y AND value distance s of y."""
    base = as_metric(amb)
    if r < 0 or s < 0:
        raise ValueError("radii must be nonnegative")
    dB = base.space.pairwise(base.values[y:y + 1], base.values)[0]
    return np.flatnonzero((base.d[y] <= r) & (dB <= s))


def nbhd_bifiltration(X: Sequence[int], amb, r_grid, s_grid) -> GradedSubsetMask:
    """Union of (r, s)-balls centered at a reference subset, per grid cell."""
    base = as_metric(amb)
    X = np.asarray(list(X), dtype=int)
    if X.size == 0:
        raise ValueError("reference set must be nonempty")
    r_grid = np.asarray(r_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    dE = base.d[X]                                   # (k, n)
    dB = base.space.pairwise(base.values[X], base.values)  # (k, n)
    mask = np.zeros((base.n, len(r_grid), len(s_grid)), dtype=bool)
    for ri, r in enumerate(r_grid):
        near = dE <= r
        best = np.where(near, dB, np.inf).min(axis=0)  # least value gap via an r-close reference
        mask[:, ri, :] = best[:, None] <= s_grid[None, :]
    return GradedSubsetMask(axes=("r", "s"), grids=(r_grid, s_grid), mask=mask)


def nbhd_trifiltration(amb: MMField, r_grid, s_grid, t_grid) -> GradedSubsetMask:
    """Points whose (r, s)-ball carries mass at least 1 - t, per grid cell."""
    if not isinstance(amb, MMField):
        raise ValueError("trifiltration needs weights on the ambient field")
    base = amb.base
    w = amb.weights
    r_grid = np.asarray(r_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    dB = base.space.pairwise(base.values, base.values)
    mask = np.zeros((base.n, len(r_grid), len(s_grid), len(t_grid)), dtype=bool)
    for ri, r in enumerate(r_grid):
        near_r = base.d <= r
        for si, s in enumerate(s_grid):
            ball = near_r & (dB <= s)
            mass = ball @ w
            mask[:, ri, si, :] = mass[:, None] >= 1.0 - t_grid[None, :] - 1e-12
    return GradedSubsetMask(axes=("r", "s", "t"), grids=(r_grid, s_grid, t_grid), mask=mask)


def ball_mass(amb: MMField, r: float, s: float) -> np.ndarray:
    """Mass of the (r, s)-ball around each point; drives figure shading."""
    base = amb.base
    dB = base.space.pairwise(base.values, base.values)
    ball = (base.d <= r) & (dB <= s)
    return ball @ amb.weights


def radius_in_B(space: TargetSpace, pts) -> float:
    """Enclosing radius of a value set, infimum over the whole target space."""
    if space.kind == "euclidean":
        arr = np.atleast_2d(np.asarray(pts, dtype=float))
        if arr.size == 0:
            raise ValueError("need at least one value")
        _, radius = min_enclosing_ball(arr)
        return radius
    idx = np.asarray(pts, dtype=int)
    if idx.size == 0:
        raise ValueError("need at least one value")
    return float(space.matrix[:, idx].max(axis=1).min())


@dataclass(frozen=True)
class GradedSimplex:
    cells: tuple   # vertex tuple (bifiltration) or chain of vertex tuples
    grade: tuple

    def to_dict(self) -> dict:
        if self.cells and isinstance(self.cells[0], tuple):
            body = {"chain": [list(c) for c in self.cells]}
        else:
            body = {"vertices": list(self.cells)}
        body["grade"] = list(self.grade)
        return body


@dataclass(frozen=True)
class GradedComplex:
    kind: str            # "bifiltration" | "trifiltration"
    simplices: tuple
    dim_cap: int
    truncated: bool = False

    def at(self, *grade) -> list:
        """Simplices present at a grade (componentwise closed thresholds)."""
        out = []
        for s in self.simplices:
            if all(g <= bound + 1e-12 for g, bound in zip(s.grade, grade)):
                out.append(s.cells)
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim_cap": self.dim_cap,
            "truncated": self.truncated,
            "simplices": [s.to_dict() for s in self.simplices],
        }


def _cliques_under_diameter(d: np.ndarray, r_max: float, max_size: int):
    """All index tuples of size <= max_size with pairwise distance <= r_max."""
    n = d.shape[0]
    adj = d <= r_max + 1e-12
    layers = [[(i,) for i in range(n)]]
    while len(layers) < max_size:
        nxt = []
        for simplex in layers[-1]:
            last = simplex[-1]
            for v in range(last + 1, n):
                if all(adj[u, v] for u in simplex):
                    nxt.append(simplex + (v,))
        if not nxt:
            break
        layers.append(nxt)
    return layers


def _value_radius(base: MetricField, verts: tuple) -> float:
    return radius_in_B(base.space, np.asarray(base.values)[list(verts)])


def vr_bifiltration(X, dim_cap: int, r_max: float,
                    s_max: Optional[float] = None) -> GradedComplex:
    """Simplices graded by (diameter, twice the value-set enclosing radius)."""
    base = as_metric(X)
    if dim_cap < 0:
        raise ValueError("dim_cap must be nonnegative")
    s_cap = math.inf if s_max is None else s_max
    out = []
    for layer in _cliques_under_diameter(base.d, r_max, dim_cap + 1):
        for verts in layer:
            diam = float(base.d[np.ix_(verts, verts)].max(initial=0.0)) if len(verts) > 1 else 0.0
            srad = 2.0 * _value_radius(base, verts)
            if srad <= s_cap + 1e-12:
                out.append(GradedSimplex(cells=verts, grade=(diam, srad)))
    out.sort(key=lambda s: (len(s.cells), s.cells))
    return GradedComplex(kind="bifiltration", simplices=tuple(out), dim_cap=dim_cap)


def vr_trifiltration(X: MMField, dim_cap: int, r_max: float, s_max: float,
                     t_max: float, subset_cap: int = SUBSET_CAP) -> GradedComplex:
    """Chains of nested admissible subsets graded by
    (max diameter, max twice-radius, 1 - min mass).

    With the mass plane at t = 1 this is the barycentric subdivision of the
    bifiltration complex at (r_max, s_max).  Admissible subsets larger than
    ``subset_cap`` are not enumerated; the truncated flag reports when the
    cap was hit.
    """
    base = X.base
    truncated = False
    admissible = []   # (verts, diam, srad, mass)
    layers = _cliques_under_diameter(base.d, r_max, subset_cap + 1)
    if len(layers) > subset_cap:
        truncated = True
        layers = layers[:subset_cap]
    for layer in layers:
        for verts in layer:
            diam = float(base.d[np.ix_(verts, verts)].max(initial=0.0)) if len(verts) > 1 else 0.0
            srad = 2.0 * _value_radius(base, verts)
            mass = float(X.weights[list(verts)].sum())
            if srad <= s_max + 1e-12 and 1.0 - mass <= t_max + 1e-12:
                admissible.append((verts, diam, srad, mass))
    admissible.sort(key=lambda a: (len(a[0]), a[0]))
    sets = [frozenset(a[0]) for a in admissible]
    out = []
    for k, (verts, diam, srad, mass) in enumerate(admissible):
        out.append(GradedSimplex(cells=(verts,), grade=(diam, srad, 1.0 - mass)))

    def extend(chain_idx, chain_cells):
        if len(chain_cells) > dim_cap:
            return
        top = chain_idx[-1]
        for j in range(len(admissible)):
            if j == top:
                continue
            if sets[top] < sets[j]:
                verts_j, diam_j, srad_j, _ = admissible[j]
                cells = chain_cells + (verts_j,)
                grade = (diam_j, srad_j, 1.0 - admissible[chain_idx[0]][3])
                out.append(GradedSimplex(cells=cells, grade=grade))
                extend(chain_idx + (j,), cells)

    if dim_cap >= 1:
        for k in range(len(admissible)):
            extend((k,), (admissible[k][0],))
    out.sort(key=lambda s: (len(s.cells), s.cells))
    return GradedComplex(kind="trifiltration", simplices=tuple(out),
                         dim_cap=dim_cap, truncated=truncated)


def inclusion_interleaving_shift(M1: GradedSubsetMask, M2: GradedSubsetMask) -> float:
    """Least uniform grid shift making the two masks mutually contained.

    The shift applies to every axis simultaneously; containment is required
    only where the shifted cell still lies inside the window.  Returns
    ``inf`` when no shift within the window works.  The answer is quantized
    to the shared grid step (half-step discretization error).
    """
    if M1.axes != M2.axes:
        raise ValueError("masks have different axes")
    for g1, g2 in zip(M1.grids, M2.grids):
        if len(g1) != len(g2) or np.abs(np.asarray(g1) - np.asarray(g2)).max() > 1e-9:
            raise ValueError("masks have different grids")
    if M1.mask.shape[0] != M2.mask.shape[0]:
        raise ValueError("masks live on different ambient sets")
    step = M1.common_step()
    max_j = max(len(g) - 1 for g in M1.grids)

    def contained(a: np.ndarray, b: np.ndarray, j: int) -> bool:
        nd = a.ndim
        src = tuple([slice(None)] + [slice(None, a.shape[ax] - j) for ax in range(1, nd)])
        dst = tuple([slice(None)] + [slice(j, None) for _ in range(1, nd)])
        return not np.any(a[src] & ~b[dst])

    for j in range(0, max_j + 1):
        if contained(M1.mask, M2.mask, j) and contained(M2.mask, M1.mask, j):
            return j * step
    return math.inf
