"""Conceptual models and their two quality proxies.

Complexity counts components plus relationships; variety counts the
distinct category tokens used by either.  Parameters are carried through
parsing but not scored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DanglingEndpoint, DuplicateComponentId, SchemaError


@dataclass(frozen=True)
class Component:
    id: str
    category: str
    name: str = ""


@dataclass(frozen=True)
class Relationship:
    source: str
    target: str
    category: str


@dataclass(frozen=True)
class ConceptualModel:
    model_id: str
    components: tuple = ()
    relationships: tuple = ()
    parameters: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class QualityMetrics:
    complexity: int
    variety: int


def _require(obj, key, kind, where):
    if key not in obj:
        raise SchemaError(f"{where}: missing {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: {key!r} has wrong type")
    return value


def parse_model(document) -> ConceptualModel:
    """Validate one model given as a JSON string or an already-decoded dict."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(document, dict):
        raise SchemaError("model document must be an object")
    model_id = str(_require(document, "id", (str, int), "model"))
    where = f"model {model_id}"
    comps_raw = document.get("components", [])
    rels_raw = document.get("relationships", [])
    params = document.get("parameters", {})
    if not isinstance(comps_raw, list) or not isinstance(rels_raw, list):
        raise SchemaError(f"{where}: components and relationships must be lists")
    if not isinstance(params, dict):
        raise SchemaError(f"{where}: parameters must be an object")

    components, seen = [], set()
    for c in comps_raw:
        if not isinstance(c, dict):
            raise SchemaError(f"{where}: component entries must be objects")
        cid = str(_require(c, "id", (str, int), where))
        if cid in seen:
            raise DuplicateComponentId(f"{where}: duplicate component id {cid!r}")
        seen.add(cid)
        components.append(Component(cid, str(_require(c, "category", str, where)),
                                    str(c.get("name", ""))))
    relationships = []
    for r in rels_raw:
        if not isinstance(r, dict):
            raise SchemaError(f"{where}: relationship entries must be objects")
        src = str(_require(r, "source", (str, int), where))
        dst = str(_require(r, "target", (str, int), where))
        for end in (src, dst):
            if end not in seen:
                raise DanglingEndpoint(f"{where}: relationship endpoint {end!r} is not a component")
        relationships.append(Relationship(src, dst, str(_require(r, "category", str, where))))
    return ConceptualModel(model_id, tuple(components), tuple(relationships), params)


def load_models(path) -> list[ConceptualModel]:
    """Read models from a JSON file (one object or a list) or a directory of ``*.json`` files."""
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    models = []
    for f in files:
        try:
            doc = json.loads(f.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{f}: invalid JSON: {exc.msg}") from None
        for d in doc if isinstance(doc, list) else [doc]:
            try:
                models.append(parse_model(d))
            except SchemaError as exc:
                raise type(exc)(f"{f}: {exc}") from None
    return models


def model_to_dict(model: ConceptualModel) -> dict:
    return {
        "id": model.model_id,
        "components": [{"id": c.id, "category": c.category, "name": c.name} for c in model.components],
        "relationships": [{"source": r.source, "target": r.target, "category": r.category}
                          for r in model.relationships],
        "parameters": model.parameters,
    }


def complexity(model: ConceptualModel) -> int:
    return len(model.components) + len(model.relationships)


def variety(model: ConceptualModel, split=False):
    """Distinct category tokens over components and relationships.

    Pooled by default; ``split=True`` returns ``(component_categories,
    relationship_categories)`` instead.
    """
    comp = {c.category for c in model.components}
    rel = {r.category for r in model.relationships}
    if split:
        return len(comp), len(rel)
    return len(comp | rel)


def quality(model: ConceptualModel) -> QualityMetrics:
    return QualityMetrics(complexity(model), variety(model))
