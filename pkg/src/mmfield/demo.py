"""Built-in demo scenarios: a two-circle sample on a grid ambient and a
weighted circle sample, with the parameter values used in the shipped
figures (r=0.8, s=0.1, t=0.99 and r=1.5, s=1, t=0.1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MMField, MetricField, TargetSpace

FIG1_PARAMS = {"r": 0.8, "s": 0.1, "t": 0.99}
FIG2_PARAMS = {"r": 1.5, "s": 1.0, "t": 0.1}


@dataclass(frozen=True)
class GridScenario:
    ambient: MMField          # grid field with snapped empirical weights
    coords: np.ndarray        # (n, 2) grid node positions
    ref: np.ndarray           # support of the empirical measure
    samples: np.ndarray       # raw sample positions (pre-snap)
    params: dict


@dataclass(frozen=True)
class CloudScenario:
    field: MMField            # the weighted sample itself
    coords: np.ndarray
    params: dict


def _grid_field(nx: int, ny: int, box) -> tuple:
    (x0, x1), (y0, y1) = box
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    coords = np.stack([gx.ravel(), gy.ravel()], axis=1)
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # scalar field: the height coordinate, 1-Lipschitz for the plane metric
    values = coords[:, 1:2]
    field = MetricField(space=TargetSpace.euclidean(1), d=d, values=values)
    return field, coords


def two_circle_scenario(seed: int = 0, n_samples: int = 200,
                        nx: int = 33, ny: int = 19) -> GridScenario:
    """Points sampled unevenly from two circles inside a rectangle; the
    ambient is a regular grid carrying the snapped empirical measure."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-1.5, 0.0], [1.5, 0.0]])
    pts = []
    for k in range(n_samples):
        c = centers[k % 2]
        # quadratic warp concentrates samples along part of each circle
        theta = 2.0 * np.pi * rng.random() ** 2
        rad = 1.0 + 0.05 * rng.standard_normal()
        pts.append(c + rad * np.array([np.cos(theta), np.sin(theta)]))
    samples = np.array(pts)
    field, coords = _grid_field(nx, ny, box=((-3.2, 3.2), (-1.8, 1.8)))
    d2 = ((samples[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argmin(d2, axis=1)
    w = np.bincount(nearest, minlength=len(coords)).astype(float)
    w /= w.sum()
    amb = MMField(base=field, weights=w)
    return GridScenario(ambient=amb, coords=coords, ref=np.flatnonzero(w > 0),
                        samples=samples, params=dict(FIG1_PARAMS))


def weighted_circle_scenario(seed: int = 0, n_points: int = 12) -> CloudScenario:
    """Circle sample with mass concentrated on a short arc near the top."""
    rng = np.random.default_rng(seed)
    theta = np.sort(np.linspace(0, 2 * np.pi, n_points, endpoint=False)
                    + 0.03 * rng.standard_normal(n_points))
    coords = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    values = coords[:, 1:2]
    base = MetricField(space=TargetSpace.euclidean(1), d=d, values=values)
    # the three points closest to the top carry almost all of the mass
    top = np.argsort(np.abs(((theta - np.pi / 2 + np.pi) % (2 * np.pi)) - np.pi))[:3]
    w = np.full(n_points, 0.08 / (n_points - 3))
    w[top] = 0.92 / 3
    w /= w.sum()
    return CloudScenario(field=MMField(base=base, weights=w), coords=coords,
                         params=dict(FIG2_PARAMS))
