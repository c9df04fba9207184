"""Minimum enclosing ball in Euclidean space.

Randomized exact solver (Welzl's move-to-front scheme) for moderate
dimension, with an iterative core-set fallback above it.
"""

from __future__ import annotations

import numpy as np

WELZL_DIM_CAP = 16


def _circumsphere(S: np.ndarray):
    """Smallest ball with all of S on its boundary (S affinely independent)."""
    p0 = S[0]
    if len(S) == 1:
        return p0.copy(), 0.0
    Q = S[1:] - p0
    A = 2.0 * Q @ Q.T
    b = np.einsum("ij,ij->i", Q, Q)
    try:
        lam = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(A, b, rcond=None)[0]
    center = p0 + lam @ Q
    return center, float(np.linalg.norm(S[0] - center))


def _welzl(pts: list, boundary: list, dim: int):
    if not pts or len(boundary) == dim + 1:
        if not boundary:
            return None, 0.0
        return _circumsphere(np.asarray(boundary))
    p = pts[-1]
    center, radius = _welzl(pts[:-1], boundary, dim)
    if center is not None and np.linalg.norm(p - center) <= radius + 1e-12:
        return center, radius
    return _welzl(pts[:-1], boundary + [p], dim)


def _core_set(pts: np.ndarray, iters: int = 2000):
    center = pts.mean(axis=0)
    for k in range(1, iters + 1):
        far = pts[np.argmax(np.linalg.norm(pts - center, axis=1))]
        center = center + (far - center) / (k + 1)
    return center, float(np.linalg.norm(pts - center, axis=1).max())


def min_enclosing_ball(points, seed: int = 0):
    """(center, radius) of the smallest ball containing the points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("need at least one point")
    pts = np.unique(pts, axis=0)
    if len(pts) == 1:
        return pts[0].copy(), 0.0
    dim = pts.shape[1]
    if dim > WELZL_DIM_CAP:
        return _core_set(pts)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pts))
    center, radius = _welzl([pts[i] for i in order], [], dim)
    # tighten against round-off so the ball certainly covers every point
    radius = float(np.linalg.norm(pts - center, axis=1).max())
    return center, radius
