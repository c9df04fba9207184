"""Figure and delimited-file emission for the CLI report paths.

Figures are rendered with matplotlib straight to SVG (fixed 800x800pt
viewport, grayscale encoding, shading intensity proportional to ball mass);
numeric outputs go to CSV next to the JSON document.
"""

from __future__ import annotations

import csv

import matplotlib
import numpy as np

matplotlib.use("svg")
matplotlib.rcParams["svg.hashsalt"] = "mmfield"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_VIEW = 800 / 72.0  # 800pt square viewport


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def embed_2d(d: np.ndarray) -> np.ndarray:
    """Deterministic classical 2-d scaling of a distance matrix (plot layout)."""
    n = d.shape[0]
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    G = -0.5 * J @ (d ** 2) @ J
    vals, vecs = np.linalg.eigh(G)
    order = np.argsort(vals)[::-1][:2]
    coords = vecs[:, order] * np.sqrt(np.clip(vals[order], 0.0, None))
    if coords.shape[1] < 2:
        coords = np.pad(coords, ((0, 0), (0, 2 - coords.shape[1])))
    for k in range(2):
        j = int(np.argmax(np.abs(coords[:, k])))
        if coords[j, k] < 0:
            coords[:, k] = -coords[:, k]
    return coords


def render_mask_panels(path, coords: np.ndarray, panels, samples=None) -> None:
    """One figure, one scatter panel per mask selection.

    ``panels`` holds (title, member_indices, intensity) triples; intensity in
    [0, 1] drives the gray level of member points.
    """
    k = len(panels)
    fig, axes = plt.subplots(1, k, figsize=(_VIEW, _VIEW), squeeze=False)
    for ax, (title, members, intensity) in zip(axes[0], panels):
        ax.scatter(coords[:, 0], coords[:, 1], s=6, c="0.92", linewidths=0)
        if len(members):
            shade = np.clip(np.asarray(intensity, dtype=float), 0.0, 1.0)
            grays = [str(0.75 * (1.0 - v)) for v in shade]
            ax.scatter(coords[members, 0], coords[members, 1], s=14, c=grays, linewidths=0)
        if samples is not None:
            ax.scatter(samples[:, 0], samples[:, 1], s=4, c="0.3", marker="x", linewidths=0.5)
        ax.set_title(title, fontsize=9)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    _save(fig, path)


def render_complex_panels(path, coords: np.ndarray, panels, sizes=None) -> None:
    """Edges and filled triangles of each complex snapshot, one panel each."""
    k = len(panels)
    fig, axes = plt.subplots(1, k, figsize=(_VIEW, _VIEW), squeeze=False)
    for ax, (title, simplices) in zip(axes[0], panels):
        for cells in simplices:
            verts = sorted(set(cells)) if not isinstance(cells[0], tuple) else sorted(
                {v for sub in cells for v in sub})
            if len(verts) == 3:
                tri = coords[verts]
                ax.fill(tri[:, 0], tri[:, 1], color="0.8", alpha=0.5, linewidth=0)
        for cells in simplices:
            verts = sorted(set(cells)) if not isinstance(cells[0], tuple) else sorted(
                {v for sub in cells for v in sub})
            if len(verts) == 2:
                seg = coords[verts]
                ax.plot(seg[:, 0], seg[:, 1], color="0.4", linewidth=0.8)
        pt_sizes = 20 if sizes is None else 10 + 400 * np.asarray(sizes)
        ax.scatter(coords[:, 0], coords[:, 1], s=pt_sizes, c="0.1", zorder=3, linewidths=0)
        ax.set_title(title, fontsize=9)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    _save(fig, path)


def render_convergence(path, curve) -> None:
    """Estimate vs tuple length with a reference band from the exact solver."""
    fig, ax = plt.subplots(figsize=(_VIEW, _VIEW))
    ns = [pt.n for pt in curve.points]
    est = [pt.estimate for pt in curve.points]
    err = [pt.stderr for pt in curve.points]
    ax.errorbar(ns, est, yerr=err, color="0.2", marker="o", capsize=3)
    ax.axhspan(curve.reference_lower, curve.reference_upper, color="0.85")
    ax.set_xlabel("tuple length n")
    ax.set_ylabel("matrix-cloud transport estimate")
    ax.set_title(f"m={curve.m}, p={'inf' if not np.isfinite(curve.p) else curve.p}")
    _save(fig, path)


def write_csv(path, records: list) -> None:
    if not records:
        return
    keys = list(records[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        writer.writerows(records)
