"""AssemblyDocument (schema v1) reading and writing, plus report serialization."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import jsonschema

from mateforge.lines import canonicalize_line
from mateforge.model import Assembly, Feature, FeatureKind, Mate, Part, Provenance, TriangleMesh
from mateforge.transforms import RigidTransform

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """Base class for everything that can go wrong reading an assembly document."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MalformedDocumentError(DocumentError):
    """Not parseable as JSON at all."""


class SchemaError(DocumentError):
    """Valid JSON that violates the document schema or a model invariant."""


class NonFiniteError(DocumentError):
    """A NaN or infinite number somewhere in the document."""


_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_line = {
    "type": "object",
    "required": ["point", "direction"],
    "additionalProperties": False,
    "properties": {"point": _vec3, "direction": _vec3},
}

ASSEMBLY_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "id", "parts", "mates"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "id": {"type": "string", "minLength": 1},
        "metadata": {"type": "object"},
        "parts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "placement", "mesh"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "placement": {
                        "type": "object",
                        "required": ["quaternion", "translation"],
                        "additionalProperties": False,
                        "properties": {
                            "quaternion": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
                            "translation": _vec3,
                        },
                    },
                    "mesh": {
                        "type": "object",
                        "required": ["vertices", "triangles"],
                        "additionalProperties": False,
                        "properties": {
                            "vertices": {"type": "array", "items": _vec3},
                            "triangles": {
                                "type": "array",
                                "items": {
                                    "type": "array",
                                    "items": {"type": "integer", "minimum": 0},
                                    "minItems": 3,
                                    "maxItems": 3,
                                },
                            },
                        },
                    },
                    "features": {
                        "type": "array",
                        "items": {
                            "oneOf": [
                                {
                                    "type": "object",
                                    "required": ["kind", "centroid", "normal"],
                                    "additionalProperties": False,
                                    "properties": {
                                        "kind": {"const": FeatureKind.PLANAR_FACE.value},
                                        "centroid": _vec3,
                                        "normal": _vec3,
                                    },
                                },
                                {
                                    "type": "object",
                                    "required": ["kind", "axis", "radius", "extent"],
                                    "additionalProperties": False,
                                    "properties": {
                                        "kind": {"const": FeatureKind.CYLINDRICAL_FACE.value},
                                        "axis": _line,
                                        "radius": {"type": "number", "exclusiveMinimum": 0},
                                        "extent": {
                                            "type": "array",
                                            "items": {"type": "number"},
                                            "minItems": 2,
                                            "maxItems": 2,
                                        },
                                    },
                                },
                            ]
                        },
                    },
                },
            },
        },
        "mates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "part_a", "part_b", "type", "axis"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "part_a": {"type": "string"},
                    "part_b": {"type": "string"},
                    "type": {"type": "string", "minLength": 1},
                    "axis": _line,
                    "provenance": {"enum": [p.value for p in Provenance]},
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(ASSEMBLY_SCHEMA)


def format_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _find_non_finite(obj: Any, path: tuple = ()):
    if isinstance(obj, float) and not math.isfinite(obj):
        return path
    if isinstance(obj, dict):
        for k in sorted(obj):
            hit = _find_non_finite(obj[k], path + (k,))
            if hit is not None:
                return hit
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            hit = _find_non_finite(v, path + (i,))
            if hit is not None:
                return hit
    return None


def validate_document(doc: Any) -> None:
    """Raise NonFiniteError or SchemaError (with a path to the offending field)."""
    bad = _find_non_finite(doc)
    if bad is not None:
        raise NonFiniteError("number is not finite", format_path(bad))
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise SchemaError(err.message, format_path(err.absolute_path))


def _line_from(d: dict, path: str):
    try:
        return canonicalize_line(d["point"], d["direction"])
    except ValueError as exc:
        raise SchemaError(str(exc), path) from exc


def _feature_from(d: dict, path: str) -> Feature:
    try:
        if d["kind"] == FeatureKind.PLANAR_FACE.value:
            return Feature(FeatureKind.PLANAR_FACE, centroid=d["centroid"], normal=d["normal"])
        axis = _line_from(d["axis"], path + ".axis")
        return Feature(FeatureKind.CYLINDRICAL_FACE, axis=axis, radius=d["radius"], extent=tuple(d["extent"]))
    except ValueError as exc:
        if isinstance(exc, DocumentError):
            raise
        raise SchemaError(str(exc), path) from exc


def assembly_from_document(doc: Any) -> Assembly:
    validate_document(doc)
    parts = []
    for i, pd in enumerate(doc["parts"]):
        path = f"$.parts[{i}]"
        try:
            placement = RigidTransform(pd["placement"]["quaternion"], pd["placement"]["translation"])
        except ValueError as exc:
            raise SchemaError(str(exc), path + ".placement") from exc
        try:
            mesh = TriangleMesh(pd["mesh"]["vertices"], pd["mesh"]["triangles"])
        except ValueError as exc:
            raise SchemaError(str(exc), path + ".mesh") from exc
        feats = [_feature_from(f, f"{path}.features[{j}]") for j, f in enumerate(pd.get("features", []))]
        parts.append(Part(pd["id"], mesh, feats, placement))
    ids = [p.id for p in parts]
    seen = set()
    for i, pid in enumerate(ids):
        if pid in seen:
            raise SchemaError(f"duplicate part id {pid!r}", f"$.parts[{i}].id")
        seen.add(pid)
    mates = []
    mate_ids = set()
    for i, md in enumerate(doc["mates"]):
        path = f"$.mates[{i}]"
        if md["id"] in mate_ids:
            raise SchemaError(f"duplicate mate id {md['id']!r}", path + ".id")
        mate_ids.add(md["id"])
        for end in ("part_a", "part_b"):
            if md[end] not in seen:
                raise SchemaError(f"unknown part {md[end]!r}", f"{path}.{end}")
        axis = _line_from(md["axis"], path + ".axis")
        try:
            mates.append(
                Mate(md["id"], md["part_a"], md["part_b"], None, axis, md.get("provenance", "original"), md["type"])
            )
        except ValueError as exc:
            raise SchemaError(str(exc), path) from exc
    return Assembly(doc["id"], parts, mates, dict(doc.get("metadata", {})))


def _floats(a) -> list:
    return [float(x) for x in a]


def assembly_to_document(a: Assembly) -> dict:
    parts = []
    for p in a.parts:
        feats = []
        for f in p.features:
            if f.kind is FeatureKind.PLANAR_FACE:
                feats.append({"kind": f.kind.value, "centroid": _floats(f.centroid), "normal": _floats(f.normal)})
            else:
                feats.append(
                    {"kind": f.kind.value, "axis": f.axis.to_dict(), "radius": float(f.radius), "extent": _floats(f.extent)}
                )
        parts.append(
            {
                "id": p.id,
                "placement": {
                    "quaternion": _floats(p.placement.rotation),
                    "translation": _floats(p.placement.translation),
                },
                "mesh": {
                    "vertices": [_floats(v) for v in p.mesh.vertices],
                    "triangles": [[int(i) for i in t] for t in p.mesh.triangles],
                },
                "features": feats,
            }
        )
    mates = [
        {
            "id": m.id,
            "part_a": m.part_a,
            "part_b": m.part_b,
            "type": m.tag,
            "axis": m.axis.to_dict(),
            "provenance": m.provenance.value,
        }
        for m in a.mates
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "id": a.id,
        "parts": parts,
        "mates": mates,
        "metadata": a.metadata,
    }


def dumps_canonical(obj: Any) -> str:
    """Sorted keys, shortest round-trip floats, NaN refused, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False, ensure_ascii=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def loads_assembly(text: str) -> Assembly:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"invalid JSON: {exc}") from exc
    return assembly_from_document(doc)


def load_assembly(path) -> Assembly:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedDocumentError(f"not UTF-8 text: {exc}") from exc
    return loads_assembly(text)


def dumps_assembly(a: Assembly) -> str:
    return dumps_canonical(assembly_to_document(a))


def save_assembly(a: Assembly, path) -> None:
    write_atomic(path, dumps_assembly(a))


def save_report(obj, path) -> None:
    """Serialize a report (anything with ``to_dict`` or plain JSON data)."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    write_atomic(path, dumps_canonical(data))


ANNOTATION_SCHEMA: dict = {
    "type": "object",
    "required": ["annotations"],
    "properties": {
        "annotations": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        },
        "original": {"type": "object", "additionalProperties": {"type": "string"}},
    },
}


def load_annotations(path) -> tuple:
    """Expert annotation file: ``{"annotations": {mate_id: [type, ...]}, "original": {mate_id: type}}``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, ANNOTATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message, format_path(exc.absolute_path)) from exc
    return doc["annotations"], doc.get("original", {})


__all__ = [
    "ASSEMBLY_SCHEMA",
    "DocumentError",
    "MalformedDocumentError",
    "NonFiniteError",
    "SCHEMA_VERSION",
    "SchemaError",
    "assembly_from_document",
    "assembly_to_document",
    "dumps_assembly",
    "dumps_canonical",
    "load_annotations",
    "load_assembly",
    "loads_assembly",
    "save_assembly",
    "save_report",
    "validate_document",
    "write_atomic",
]
