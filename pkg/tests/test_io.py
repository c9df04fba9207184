import json

import numpy as np
import pytest

from conftest import random_mm_field
from mmfield.core import MetricField, TargetSpace
from mmfield.io import FieldFormatError, field_from_dict, field_to_dict, load_field, save_field


def test_roundtrip_euclidean(tmp_path):
    f = random_mm_field(np.random.default_rng(0), 5, dim_b=2)
    path = tmp_path / "f.json"
    save_field(f, path)
    g = load_field(path)
    np.testing.assert_allclose(g.d, f.d)
    np.testing.assert_allclose(np.asarray(g.values), np.asarray(f.values))
    np.testing.assert_allclose(g.weights, f.weights)


def test_roundtrip_explicit(tmp_path):
    space = TargetSpace.explicit([[0, 1], [1, 0]])
    f = MetricField(space=space, d=[[0, 2], [2, 0]], values=[0, 1], labels=("a", "b"))
    path = tmp_path / "f.json"
    save_field(f, path)
    g = load_field(path)
    assert g.space.kind == "explicit"
    assert list(g.values) == [0, 1]
    assert g.labels == ("a", "b")


def test_unknown_keys_rejected():
    f = random_mm_field(np.random.default_rng(1), 3)
    doc = field_to_dict(f)
    doc["extra"] = 1
    with pytest.raises(FieldFormatError, match="unknown keys"):
        field_from_dict(doc)


def test_points_values_must_agree():
    f = random_mm_field(np.random.default_rng(2), 3)
    doc = field_to_dict(f)
    doc["values"] = (np.asarray(doc["values"]) + 1.0).tolist()
    with pytest.raises(FieldFormatError, match="disagree"):
        field_from_dict(doc)


def test_either_alias_suffices():
    f = random_mm_field(np.random.default_rng(3), 3)
    doc = field_to_dict(f)
    only_points = {k: v for k, v in doc.items() if k != "values"}
    only_values = {k: v for k, v in doc.items() if k != "points"}
    for sub in (only_points, only_values):
        g = field_from_dict(sub)
        np.testing.assert_allclose(np.asarray(g.values), np.asarray(f.values))


def test_triangle_payload_length_checked():
    f = random_mm_field(np.random.default_rng(4), 3)
    doc = field_to_dict(f)
    doc["d"] = doc["d"][:-1]
    with pytest.raises(FieldFormatError, match="lower triangle"):
        field_from_dict(doc)


def test_missing_required_key():
    with pytest.raises(FieldFormatError, match="missing key"):
        field_from_dict({"n": 1})


def test_file_is_single_json_document(tmp_path):
    f = random_mm_field(np.random.default_rng(5), 4)
    path = tmp_path / "f.json"
    save_field(f, path)
    doc = json.loads(path.read_text())
    assert set(doc) <= {"n", "metric", "points", "d", "values", "weights", "labels"}
    assert len(doc["d"]) == 4 * 3 // 2
