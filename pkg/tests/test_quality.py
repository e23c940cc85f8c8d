import json

import pytest
from hypothesis import given, strategies as st

from behavior_mining import quality
from behavior_mining.errors import DanglingEndpoint, DuplicateComponentId, SchemaError

DOC = {
    "id": "m1",
    "components": [{"id": "a", "category": "biotic", "name": "grass"},
                   {"id": "b", "category": "biotic", "name": "rabbit"},
                   {"id": "c", "category": "abiotic", "name": "water"}],
    "relationships": [{"source": "b", "target": "a", "category": "consume"},
                      {"source": "a", "target": "c", "category": "consume"}],
    "parameters": {"a.initial_population": 40},
}


def test_metrics():
    m = quality.parse_model(DOC)
    assert quality.complexity(m) == 5
    assert quality.variety(m) == 3
    assert quality.variety(m, split=True) == (2, 1)
    assert quality.quality(m) == quality.QualityMetrics(5, 3)


def test_empty_model():
    m = quality.parse_model({"id": "e"})
    assert quality.complexity(m) == 0 and quality.variety(m) == 0


def test_schema_errors():
    with pytest.raises(DanglingEndpoint):
        quality.parse_model({**DOC, "relationships": [{"source": "a", "target": "zz", "category": "x"}]})
    with pytest.raises(DuplicateComponentId):
        quality.parse_model({**DOC, "components": DOC["components"] + [{"id": "a", "category": "x"}]})
    with pytest.raises(SchemaError):
        quality.parse_model({"components": []})
    with pytest.raises(SchemaError):
        quality.parse_model("{not json")


def test_load_models_file_and_directory(tmp_path):
    (tmp_path / "list.json").write_text(json.dumps([DOC, {**DOC, "id": "m2"}]))
    (tmp_path / "one.json").write_text(json.dumps({**DOC, "id": "m3"}))
    assert [m.model_id for m in quality.load_models(tmp_path)] == ["m1", "m2", "m3"]
    assert len(quality.load_models(tmp_path / "one.json")) == 1
    (tmp_path / "bad.json").write_text("[1]")
    with pytest.raises(SchemaError, match="bad.json"):
        quality.load_models(tmp_path)


def test_round_trip():
    m = quality.parse_model(DOC)
    assert quality.parse_model(quality.model_to_dict(m)) == m


@given(st.integers(0, 8), st.lists(st.sampled_from(["x", "y", "z"]), max_size=10))
def test_variety_bounded_by_complexity(n_comp, rel_cats):
    comps = [{"id": str(i), "category": "k" + str(i % 3)} for i in range(n_comp)]
    rels = [{"source": "0", "target": "0", "category": c} for c in rel_cats] if n_comp else []
    m = quality.parse_model({"id": "p", "components": comps, "relationships": rels})
    assert quality.variety(m) <= quality.complexity(m)
    assert quality.complexity(m) == n_comp + len(rels)
