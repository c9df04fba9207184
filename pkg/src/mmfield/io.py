"""Field file format: one JSON document per field.

Schema (exact key names, unknown keys rejected)::

    {
      "n": 3,
      "metric": {"type": "euclidean", "dim": 2}          # or {"type": "explicit", "matrix": [[...]]}
      "points": [[0.0, 1.0], ...],                        # B-point per domain point:
                                                          #   coordinates (euclidean) or B-indices (explicit)
      "d": [d10, d20, d21, ...],                          # strict lower triangle, row-major
      "values": [[0.0, 1.0], ...],                        # alias of "points"; must agree when both given
      "weights": [...],                                   # optional probability vector
      "labels": [...]                                     # optional strings
    }

``points`` and ``values`` carry the same payload (the value map); writers emit
both, readers accept either and require agreement when both are present.
"""

from __future__ import annotations

import json
from typing import Union

import numpy as np

from .core import MetricField, MMField, TargetSpace, as_metric

_ALLOWED_KEYS = {"n", "metric", "points", "d", "values", "weights", "labels"}
_ALLOWED_METRIC_KEYS = {"type", "dim", "matrix"}


class FieldFormatError(ValueError):
    pass


def _tri_to_square(tri, n: int) -> np.ndarray:
    tri = np.asarray(tri, dtype=float)
    want = n * (n - 1) // 2
    if tri.shape != (want,):
        raise FieldFormatError(f"d must hold the strict lower triangle ({want} entries), got {tri.shape}")
    d = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i):
            d[i, j] = d[j, i] = tri[k]
            k += 1
    return d


def _square_to_tri(d: np.ndarray) -> list:
    n = d.shape[0]
    return [float(d[i, j]) for i in range(n) for j in range(i)]


def field_from_dict(doc: dict, pseudo_ok: bool = False) -> Union[MetricField, MMField]:
    if not isinstance(doc, dict):
        raise FieldFormatError("field document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise FieldFormatError(f"unknown keys: {sorted(unknown)}")
    for key in ("n", "metric", "d"):
        if key not in doc:
            raise FieldFormatError(f"missing key: {key}")
    n = int(doc["n"])
    metric = doc["metric"]
    if not isinstance(metric, dict) or set(metric) - _ALLOWED_METRIC_KEYS:
        raise FieldFormatError("metric must be an object with keys type and dim|matrix")
    mtype = metric.get("type")
    if mtype == "euclidean":
        space = TargetSpace.euclidean(int(metric["dim"]))
    elif mtype == "explicit":
        space = TargetSpace.explicit(metric["matrix"])
    else:
        raise FieldFormatError(f"unknown metric type: {mtype!r}")

    pts = doc.get("points")
    vals = doc.get("values")
    if pts is None and vals is None:
        raise FieldFormatError("one of points/values is required")
    if pts is not None and vals is not None:
        if not np.array_equal(np.asarray(pts, dtype=float), np.asarray(vals, dtype=float)):
            raise FieldFormatError("points and values disagree")
    payload = pts if pts is not None else vals

    d = _tri_to_square(doc["d"], n)
    labels = tuple(doc["labels"]) if doc.get("labels") is not None else None
    base = MetricField(space=space, d=d, values=payload, labels=labels, pseudo_ok=pseudo_ok)
    if doc.get("weights") is not None:
        return MMField(base=base, weights=doc["weights"])
    return base


def field_to_dict(f: Union[MetricField, MMField]) -> dict:
    base = as_metric(f)
    if base.space.kind == "euclidean":
        metric = {"type": "euclidean", "dim": base.space.dim}
        payload = [[float(x) for x in row] for row in base.values]
    else:
        metric = {"type": "explicit", "matrix": [[float(x) for x in row] for row in base.space.matrix]}
        payload = [int(v) for v in base.values]
    doc = {
        "n": base.n,
        "metric": metric,
        "points": payload,
        "d": _square_to_tri(base.d),
        "values": payload,
    }
    if isinstance(f, MMField):
        doc["weights"] = [float(w) for w in f.weights]
    if base.labels is not None:
        doc["labels"] = list(base.labels)
    return doc


def load_field(path, pseudo_ok: bool = False) -> Union[MetricField, MMField]:
    with open(path, "r", encoding="utf-8") as fh:
        return field_from_dict(json.load(fh), pseudo_ok=pseudo_ok)


def save_field(f, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(field_to_dict(f), fh, sort_keys=True)
        fh.write("\n")
