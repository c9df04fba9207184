"""Core domain types: target spaces, metric fields, relations, couplings.

A metric field is a finite metric space together with a 1-Lipschitz map into
a target metric space B (Euclidean or an explicit finite metric).  All types
are immutable after construction; semantic invariants are checked by
:func:`validate_field`, which reports violations instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

TOL_METRIC = 1e-9
TOL_MASS = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TargetSpace:
    """Codomain B: either Euclidean R^dim or an explicit finite metric.

    Points of a Euclidean target are float vectors of length ``dim``;
    points of an explicit target are integer indices into its matrix.
    """

    kind: str  # "euclidean" | "explicit"
    dim: Optional[int] = None
    matrix: Optional[np.ndarray] = None

    @staticmethod
    def euclidean(dim: int) -> "TargetSpace":
        if dim < 1:
            raise ValueError("euclidean target needs dim >= 1")
        return TargetSpace(kind="euclidean", dim=int(dim))

    @staticmethod
    def explicit(matrix) -> "TargetSpace":
        m = _frozen(np.asarray(matrix, dtype=float))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("explicit target matrix must be square")
        return TargetSpace(kind="explicit", matrix=m)

    @property
    def n_b(self) -> int:
        if self.kind != "explicit":
            raise ValueError("n_b only defined for explicit targets")
        return self.matrix.shape[0]

    def check_points(self, values: np.ndarray) -> np.ndarray:
        """Coerce and shape-check an array of B-points."""
        if self.kind == "euclidean":
            v = np.asarray(values, dtype=float)
            if v.ndim == 1:
                v = v[:, None]
            if v.ndim != 2 or v.shape[1] != self.dim:
                raise ValueError(f"expected points in R^{self.dim}, got shape {v.shape}")
            return _frozen(v)
        v = np.asarray(values)
        if v.ndim != 1 or not np.issubdtype(v.dtype, np.integer):
            v = np.asarray(values, dtype=int)
        if v.ndim != 1:
            raise ValueError("explicit-target points must be a flat index array")
        if v.size and (v.min() < 0 or v.max() >= self.n_b):
            raise ValueError("B-index out of range")
        return _frozen(v)

    def dist(self, a, b) -> float:
        """Distance between two B-points; deterministic."""
        if self.kind == "euclidean":
            return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
        return float(self.matrix[int(a), int(b)])

    def pairwise(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Cross matrix of B-distances between two point arrays."""
        if self.kind == "euclidean":
            A = np.atleast_2d(np.asarray(A, dtype=float))
            B = np.atleast_2d(np.asarray(B, dtype=float))
            diff = A[:, None, :] - B[None, :, :]
            return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return self.matrix[np.ix_(np.asarray(A, dtype=int), np.asarray(B, dtype=int))]

    def metric_violations(self, tol: float = TOL_METRIC) -> list:
        """Symmetry / zero-diagonal / triangle defects of an explicit matrix."""
        if self.kind != "explicit":
            return []
        return _matrix_metric_violations(self.matrix, tol, prefix="target")


def _matrix_metric_violations(d: np.ndarray, tol: float, prefix: str = "") -> list:
    out = []
    tag = (prefix + "_") if prefix else ""
    n = d.shape[0]
    if np.any(d < -tol):
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        out.append(Violation(tag + "negative", (int(i), int(j)), float(-d[i, j])))
    asym = np.abs(d - d.T)
    if asym.max(initial=0.0) > tol:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        out.append(Violation(tag + "asymmetric", (int(i), int(j)), float(asym[i, j])))
    diag = np.abs(np.diag(d))
    if diag.max(initial=0.0) > tol:
        i = int(np.argmax(diag))
        out.append(Violation(tag + "nonzero_diagonal", (i, i), float(diag[i])))
    # min-plus sweep: one pass per intermediate point
    for j in range(n):
        excess = d - (d[:, j][:, None] + d[j][None, :])
        m = excess.max(initial=0.0)
        if m > tol:
            i, k = np.unravel_index(int(np.argmax(excess)), excess.shape)
            out.append(Violation(tag + "triangle", (int(i), int(j), int(k)), float(m)))
    return out


@dataclass(frozen=True)
class MetricField:
    """Finite metric field: domain distances plus a B-value per point."""

    space: TargetSpace
    d: np.ndarray
    values: np.ndarray
    labels: Optional[tuple] = None
    pseudo_ok: bool = False

    def __post_init__(self):
        d = _frozen(np.asarray(self.d, dtype=float))
        object.__setattr__(self, "d", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        v = self.space.check_points(self.values)
        if len(v) != d.shape[0]:
            raise ValueError("values length must match point count")
        object.__setattr__(self, "values", v)
        if self.labels is not None and len(self.labels) != d.shape[0]:
            raise ValueError("labels length must match point count")

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def value_at(self, i: int):
        return self.values[i]

    def self_value_dists(self) -> np.ndarray:
        return self.space.pairwise(self.values, self.values)

    def diameter(self) -> float:
        return float(self.d.max(initial=0.0))

    def with_weights(self, weights) -> "MMField":
        return MMField(base=self, weights=weights)


@dataclass(frozen=True)
class MMField:
    """Metric field carrying a probability vector over its points."""

    base: MetricField
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or w.shape[0] != self.base.n:
            raise ValueError("weights length must match point count")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def d(self) -> np.ndarray:
        return self.base.d

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def space(self) -> TargetSpace:
        return self.base.space

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)


def as_metric(f) -> MetricField:
    """The MetricField underlying either field flavor."""
    return f.base if isinstance(f, MMField) else f


@dataclass(frozen=True)
class Relation:
    """Set of index pairs between two fields, kept in sorted order."""

    pairs: tuple

    def __post_init__(self):
        ps = tuple(sorted((int(i), int(j)) for i, j in self.pairs))
        if not ps:
            raise ValueError("relation must be nonempty")
        object.__setattr__(self, "pairs", ps)

    @staticmethod
    def identity(n: int) -> "Relation":
        return Relation(tuple((i, i) for i in range(n)))

    @staticmethod
    def full(n: int, m: int) -> "Relation":
        return Relation(tuple((i, j) for i in range(n) for j in range(m)))

    def transpose(self) -> "Relation":
        return Relation(tuple((j, i) for i, j in self.pairs))

    def left_indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.pairs], dtype=int)

    def right_indices(self) -> np.ndarray:
        return np.array([j for _, j in self.pairs], dtype=int)

    def left_surjective(self, n: int) -> bool:
        return len({i for i, _ in self.pairs}) == n

    def right_surjective(self, m: int) -> bool:
        return len({j for _, j in self.pairs}) == m

    def is_correspondence(self, n: int, m: int) -> bool:
        return self.left_surjective(n) and self.right_surjective(m)


@dataclass(frozen=True)
class Coupling:
    """Nonnegative matrix with prescribed marginals."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(np.asarray(self.matrix, dtype=float))
        if m.ndim != 2:
            raise ValueError("coupling must be a matrix")
        object.__setattr__(self, "matrix", m)

    def row_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def checks_against(self, mu, nu, tol: float = TOL_MASS) -> bool:
        return (
            self.matrix.min(initial=0.0) >= -tol
            and np.abs(self.row_marginal() - mu).max() <= tol
            and np.abs(self.col_marginal() - nu).max() <= tol
        )

    def support(self, tol: float = 0.0) -> Relation:
        idx = np.argwhere(self.matrix > tol)
        return Relation(tuple((int(i), int(j)) for i, j in idx))


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    magnitude: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def worst(self, kind: str) -> Optional[Violation]:
        sel = [v for v in self.violations if v.kind == kind]
        return max(sel, key=lambda v: v.magnitude) if sel else None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"kind": v.kind, "where": list(v.where), "magnitude": v.magnitude}
                for v in self.violations
            ],
        }


def validate_field(f, tol_metric: float = TOL_METRIC, tol_mass: float = TOL_MASS) -> ValidationReport:
    """Check every field invariant; never raises, reports instead.

    Covered: target-space metric axioms, domain metric axioms, the
    1-Lipschitz property of the value map, positivity off the diagonal
    unless ``pseudo_ok``, and weight-vector sanity for measured fields.
    """
    base = as_metric(f)
    out = list(base.space.metric_violations(tol_metric))
    out.extend(_matrix_metric_violations(base.d, tol_metric))

    db = base.self_value_dists()
    excess = db - base.d
    if excess.max(initial=0.0) > tol_metric:
        idx = np.argwhere(excess > tol_metric)
        for i, j in idx:
            if i < j:
                out.append(Violation("lipschitz", (int(i), int(j)), float(excess[i, j])))

    if not base.pseudo_ok:
        off = base.d + np.eye(base.n)
        zeros = np.argwhere(off <= 0)
        for i, j in zeros:
            if i < j:
                out.append(Violation("pseudo_pair", (int(i), int(j)), 0.0))

    if isinstance(f, MMField):
        w = f.weights
        if np.any(w < 0):
            i = int(np.argmin(w))
            out.append(Violation("negative_weight", (i,), float(-w[i])))
        gap = abs(float(w.sum()) - 1.0)
        if gap > tol_mass:
            out.append(Violation("mass_sum", (), gap))
        if not np.any(w > 0):
            out.append(Violation("empty_support", (), 1.0))

    return ValidationReport(tuple(out))


def lipschitz_rescale_factor(f) -> float:
    """Minimal uniform factor c so that scaling d by c restores 1-Lipschitzness.

    Returns 1.0 when the field is already Lipschitz and ``inf`` when distinct
    points at zero distance carry different values.  Reported only; never
    applied automatically.
    """
    base = as_metric(f)
    db = base.self_value_dists()
    d = base.d
    need = db > d
    if not np.any(need):
        return 1.0
    if np.any(need & (d <= 0)):
        return float("inf")
    return float(np.max(db[need] / d[need]))


def distortion(X, Y, R: Relation) -> float:
    """Metric field distortion of a relation.

    The larger of the worst pairwise-distance discrepancy over pairs of
    related pairs and twice the worst B-distance over related pairs.
    """
    X, Y = as_metric(X), as_metric(Y)
    I, J = R.left_indices(), R.right_indices()
    if I.max(initial=-1) >= X.n or J.max(initial=-1) >= Y.n:
        raise IndexError("relation index out of range")
    metric_part = float(np.abs(X.d[np.ix_(I, I)] - Y.d[np.ix_(J, J)]).max())
    value_part = 2.0 * float(
        np.max([X.space.dist(X.values[i], Y.values[j]) for i, j in R.pairs])
    )
    return max(metric_part, value_part)


def min_admissible_radius(X, Y, R: Relation) -> float:
    return distortion(X, Y, R) / 2.0


def coproduct(X, Y, R: Relation, r: float) -> MetricField:
    """Join two fields across a relation at separation ``r``.

    Cross distances are ``r`` plus the cheapest detour through the relation;
    both blocks keep their own metric and values.  Requires
    ``r >= distortion(X, Y, R) / 2`` (and ``r > 0``), otherwise the result
    would not be a metric field.
    """
    X, Y = as_metric(X), as_metric(Y)
    if X.space.kind != Y.space.kind:
        raise ValueError("fields must share a target space kind")
    dis2 = min_admissible_radius(X, Y, R)
    if r <= 0 or r < dis2 - 1e-12:
        raise ValueError(
            f"separation r={r} too small; minimal admissible r is {max(dis2, np.finfo(float).tiny)}"
        )
    I, J = R.left_indices(), R.right_indices()
    detour = X.d[:, I][:, :, None] + Y.d[J, :][None, :, :]  # (n, |R|, m)
    cross = r + detour.min(axis=1)
    n, m = X.n, Y.n
    d = np.zeros((n + m, n + m))
    d[:n, :n] = X.d
    d[n:, n:] = Y.d
    d[:n, n:] = cross
    d[n:, :n] = cross.T
    if X.space.kind == "euclidean":
        values = np.vstack([X.values, Y.values])
    else:
        values = np.concatenate([X.values, Y.values])
    labels = None
    if X.labels is not None and Y.labels is not None:
        labels = tuple(X.labels) + tuple(Y.labels)
    return MetricField(space=X.space, d=d, values=values, labels=labels,
                       pseudo_ok=X.pseudo_ok or Y.pseudo_ok)


def check_embedding(Z: MetricField, Y: MetricField, phi: np.ndarray, tol: float = TOL_METRIC) -> None:
    """Raise unless ``phi`` embeds Y into Z preserving distances and values."""
    phi = np.asarray(phi, dtype=int)
    if phi.shape != (Y.n,):
        raise ValueError("index map must assign one target index per source point")
    if phi.min(initial=0) < 0 or phi.max(initial=-1) >= Z.n:
        raise IndexError("index map out of range")
    gap = np.abs(Z.d[np.ix_(phi, phi)] - Y.d).max()
    if gap > tol:
        raise ValueError(f"map is not distance preserving (gap {gap})")
    vgap = max(Z.space.dist(Z.values[phi[i]], Y.values[i]) for i in range(Y.n))
    if vgap > tol:
        raise ValueError(f"map is not value preserving (gap {vgap})")


def amalgamate(Z1: MetricField, Z2: MetricField, Y: MetricField,
               phi, psi, tol: float = TOL_METRIC) -> MetricField:
    """Glue two fields along isometric copies of a common subfield.

    Points identified through the two embeddings are merged; distances
    between the remaining blocks run through the cheapest shared point.
    """
    phi = np.asarray(phi, dtype=int)
    psi = np.asarray(psi, dtype=int)
    check_embedding(Z1, Y, phi, tol)
    check_embedding(Z2, Y, psi, tol)
    keep2 = np.array([k for k in range(Z2.n) if k not in set(psi.tolist())], dtype=int)
    n1, n2 = Z1.n, len(keep2)
    d = np.zeros((n1 + n2, n1 + n2))
    d[:n1, :n1] = Z1.d
    d[n1:, n1:] = Z2.d[np.ix_(keep2, keep2)]
    if n1 and n2:
        # detour through Y: d1(z1, phi(y)) + d2(psi(y), z2)
        detour = Z1.d[:, phi][:, :, None] + Z2.d[np.ix_(psi, keep2)][None, :, :]
        cross = detour.min(axis=1)
        d[:n1, n1:] = cross
        d[n1:, :n1] = cross.T
    if Z1.space.kind == "euclidean":
        values = np.vstack([Z1.values, Z2.values[keep2]]) if n2 else Z1.values.copy()
    else:
        values = np.concatenate([Z1.values, Z2.values[keep2]]) if n2 else Z1.values.copy()
    return MetricField(space=Z1.space, d=d, values=values,
                       pseudo_ok=Z1.pseudo_ok or Z2.pseudo_ok)


def hausdorff(ambient: MetricField, A: Iterable[int], B_set: Iterable[int]) -> float:
    """Hausdorff distance between two index subsets of one field."""
    A = np.asarray(list(A), dtype=int)
    B = np.asarray(list(B_set), dtype=int)
    if A.size == 0 or B.size == 0:
        raise ValueError("hausdorff needs nonempty subsets")
    D = ambient.d[np.ix_(A, B)]
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def hausdorff_in_target(space: TargetSpace, A_vals: np.ndarray, B_vals: np.ndarray) -> float:
    """Hausdorff distance between two B-point sets."""
    D = space.pairwise(A_vals, B_vals)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
