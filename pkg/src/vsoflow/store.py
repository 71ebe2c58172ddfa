"""Canonical persistence for catalogs, environments, and vocabularies.

One self-contained JSON document per object, with a fixed field order, arrays
sorted by id, UTF-8 bytes, LF line endings, and a trailing newline. The encoding
is canonical: ``load(save(x))`` is structurally identical to ``x`` and
``save(load(b))`` reproduces canonical bytes exactly, independent of in-memory
insertion order. The loader accepts exactly schema_version 1 and reports the path
of the first offending field on malformed documents.

File extensions: ``.vso-catalog``, ``.vso-env``, ``.vso-vocab``.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Mapping

from .codegen import DslVocabulary
from .composer import Connection, Environment, Level, VsoInstance
from .errors import ParseError, SchemaVersionUnsupported, ValidationFailed
from .model import (
    Catalog,
    ImplementingPackage,
    InputParamIp,
    InputParamSp,
    Method,
    OutputParamIp,
    OutputParamSp,
    PerformanceModel,
    Property,
    SimulationModel,
    SoftwarePackage,
    ValidationReport,
    Violation,
    VsoImage,
    validate_catalog,
)

SCHEMA_VERSION = 1

KIND_CATALOG = "catalog"
KIND_ENVIRONMENT = "environment"
KIND_VOCABULARY = "vocabulary"


def _dump(document: dict[str, Any]) -> bytes:
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# --- encoding -------------------------------------------------------------------


def catalog_to_document(catalog: Catalog) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND_CATALOG,
        "software_packages": [
            {
                "id": sp.id,
                "inputs": [{"varname": p.varname, "value": p.value} for p in sp.inputs],
                "outputs": [{"varname": p.varname} for p in sp.outputs],
                "perf": None
                if sp.perf is None
                else {"fixed_cost": sp.perf.fixed_cost, "per_unit_cost": sp.perf.per_unit_cost},
            }
            for sp in catalog.software_packages
        ],
        "implementing_packages": [
            {
                "id": ip.id,
                "sp": ip.sp,
                "inputs": [
                    {"base": p.base, "uri": p.uri, "default_value": p.default_value}
                    for p in ip.inputs
                ],
                "outputs": [{"base": p.base, "uri": p.uri} for p in ip.outputs],
            }
            for ip in catalog.implementing_packages
        ],
        "methods": [{"id": m.id, "ip_sequence": list(m.ip_sequence)} for m in catalog.methods],
        "models": [
            {"id": m.id, "methods": list(m.methods), "selected_method": m.selected_method}
            for m in catalog.models
        ],
        "images": [
            {
                "id": img.id,
                "properties": [
                    {"name": p.name, "uri": p.uri, "value": p.value} for p in img.properties
                ],
                "models": list(img.models),
                "children": list(img.children),
            }
            for img in catalog.images
        ],
        "same_as": [list(pair) for pair in catalog.same_as],
    }


def save_catalog(catalog: Catalog) -> bytes:
    report = validate_catalog(catalog)
    if not report.ok:
        raise ValidationFailed("catalog fails validation", report=report)
    return _dump(catalog_to_document(catalog))


def catalog_version(catalog: Catalog) -> str:
    """Stable identity of a catalog's knowledge content (hash of canonical bytes)."""
    return hashlib.sha256(_dump(catalog_to_document(catalog))).hexdigest()


def environment_to_document(env: Environment) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND_ENVIRONMENT,
        "env_id": env.env_id,
        "catalog_version": env.catalog_version,
        "instances": [
            {
                "instance_id": inst.instance_id,
                "image": inst.image,
                "enabled_models": sorted(inst.enabled_models),
                "method_choice": {model: method for model, method in inst.method_choice},
            }
            for inst in env.instances
        ],
        "connections": [{"source": c.source, "target": c.target} for c in env.connections],
    }


def save_environment(env: Environment) -> bytes:
    return _dump(environment_to_document(env))


def vocabulary_to_document(vocab: DslVocabulary) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND_VOCABULARY,
        "name": vocab.name,
        "ref_syntax": vocab.ref_syntax,
        "header": vocab.header,
        "footer": vocab.footer,
        "statement_templates": {sp_id: tpl for sp_id, tpl in vocab.statement_templates},
    }


def save_vocabulary(vocab: DslVocabulary) -> bytes:
    return _dump(vocabulary_to_document(vocab))


def save(obj: Catalog | Environment | DslVocabulary) -> bytes:
    if isinstance(obj, Catalog):
        return save_catalog(obj)
    if isinstance(obj, Environment):
        return save_environment(obj)
    if isinstance(obj, DslVocabulary):
        return save_vocabulary(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --- decoding -------------------------------------------------------------------


def _schema_error(path: str, message: str) -> ValidationFailed:
    report = ValidationReport((Violation("SchemaViolation", path, message),))
    return ValidationFailed(f"{path}: {message}", report=report)


def _as_obj(value: Any, path: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise _schema_error(path, f"expected object, got {type(value).__name__}")
    return value


def _as_list(value: Any, path: str) -> list[Any]:
    if not isinstance(value, list):
        raise _schema_error(path, f"expected array, got {type(value).__name__}")
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise _schema_error(path, f"expected string, got {type(value).__name__}")
    return value


def _as_opt_str(value: Any, path: str) -> str | None:
    if value is None:
        return None
    return _as_str(value, path)


def _as_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _schema_error(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _get(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise _schema_error(f"{path}.{key}", "missing required field")
    return obj[key]


def _parse_document(data: bytes | str, expected_kind: str) -> dict[str, Any]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid document at offset {exc.pos}: {exc.msg}", position=exc.pos)
    document = _as_obj(document, "$")
    version = _get(document, "schema_version", "$")
    if not isinstance(version, int) or isinstance(version, bool):
        raise _schema_error("$.schema_version", "expected integer")
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(
            f"schema_version {version} unsupported (expected {SCHEMA_VERSION})", version=version
        )
    kind = _as_str(_get(document, "kind", "$"), "$.kind")
    if kind != expected_kind:
        raise _schema_error("$.kind", f"expected {expected_kind!r}, got {kind!r}")
    return document


def load_catalog(data: bytes | str, *, strict: bool = True) -> tuple[Catalog, ValidationReport]:
    """Parse and validate a catalog document.

    With ``strict`` (the default), a catalog violating model invariants raises
    ValidationFailed; otherwise the catalog is returned together with its report so
    callers can render every violation.
    """
    document = _parse_document(data, KIND_CATALOG)

    software_packages = []
    for k, raw in enumerate(_as_list(_get(document, "software_packages", "$"), "$.software_packages")):
        path = f"$.software_packages[{k}]"
        obj = _as_obj(raw, path)
        inputs = []
        for j, p_raw in enumerate(_as_list(_get(obj, "inputs", path), f"{path}.inputs")):
            p = _as_obj(p_raw, f"{path}.inputs[{j}]")
            inputs.append(
                InputParamSp(
                    varname=_as_str(_get(p, "varname", f"{path}.inputs[{j}]"), f"{path}.inputs[{j}].varname"),
                    value=_as_opt_str(p.get("value"), f"{path}.inputs[{j}].value"),
                )
            )
        outputs = []
        for j, p_raw in enumerate(_as_list(_get(obj, "outputs", path), f"{path}.outputs")):
            p = _as_obj(p_raw, f"{path}.outputs[{j}]")
            outputs.append(
                OutputParamSp(
                    varname=_as_str(_get(p, "varname", f"{path}.outputs[{j}]"), f"{path}.outputs[{j}].varname")
                )
            )
        perf_raw = obj.get("perf")
        perf = None
        if perf_raw is not None:
            perf_obj = _as_obj(perf_raw, f"{path}.perf")
            perf = PerformanceModel(
                fixed_cost=_as_number(_get(perf_obj, "fixed_cost", f"{path}.perf"), f"{path}.perf.fixed_cost"),
                per_unit_cost=_as_number(
                    _get(perf_obj, "per_unit_cost", f"{path}.perf"), f"{path}.perf.per_unit_cost"
                ),
            )
        software_packages.append(
            SoftwarePackage(
                id=_as_str(_get(obj, "id", path), f"{path}.id"),
                inputs=tuple(inputs),
                outputs=tuple(outputs),
                perf=perf,
            )
        )

    implementing_packages = []
    for k, raw in enumerate(
        _as_list(_get(document, "implementing_packages", "$"), "$.implementing_packages")
    ):
        path = f"$.implementing_packages[{k}]"
        obj = _as_obj(raw, path)
        inputs = []
        for j, p_raw in enumerate(_as_list(_get(obj, "inputs", path), f"{path}.inputs")):
            p = _as_obj(p_raw, f"{path}.inputs[{j}]")
            inputs.append(
                InputParamIp(
                    base=_as_str(_get(p, "base", f"{path}.inputs[{j}]"), f"{path}.inputs[{j}].base"),
                    uri=_as_str(_get(p, "uri", f"{path}.inputs[{j}]"), f"{path}.inputs[{j}].uri"),
                    default_value=_as_opt_str(p.get("default_value"), f"{path}.inputs[{j}].default_value"),
                )
            )
        outputs = []
        for j, p_raw in enumerate(_as_list(_get(obj, "outputs", path), f"{path}.outputs")):
            p = _as_obj(p_raw, f"{path}.outputs[{j}]")
            outputs.append(
                OutputParamIp(
                    base=_as_str(_get(p, "base", f"{path}.outputs[{j}]"), f"{path}.outputs[{j}].base"),
                    uri=_as_str(_get(p, "uri", f"{path}.outputs[{j}]"), f"{path}.outputs[{j}].uri"),
                )
            )
        implementing_packages.append(
            ImplementingPackage(
                id=_as_str(_get(obj, "id", path), f"{path}.id"),
                sp=_as_str(_get(obj, "sp", path), f"{path}.sp"),
                inputs=tuple(inputs),
                outputs=tuple(outputs),
            )
        )

    methods = []
    for k, raw in enumerate(_as_list(_get(document, "methods", "$"), "$.methods")):
        path = f"$.methods[{k}]"
        obj = _as_obj(raw, path)
        sequence = tuple(
            _as_str(x, f"{path}.ip_sequence[{j}]")
            for j, x in enumerate(_as_list(_get(obj, "ip_sequence", path), f"{path}.ip_sequence"))
        )
        methods.append(Method(id=_as_str(_get(obj, "id", path), f"{path}.id"), ip_sequence=sequence))

    models = []
    for k, raw in enumerate(_as_list(_get(document, "models", "$"), "$.models")):
        path = f"$.models[{k}]"
        obj = _as_obj(raw, path)
        models.append(
            SimulationModel(
                id=_as_str(_get(obj, "id", path), f"{path}.id"),
                methods=tuple(
                    _as_str(x, f"{path}.methods[{j}]")
                    for j, x in enumerate(_as_list(_get(obj, "methods", path), f"{path}.methods"))
                ),
                selected_method=_as_str(_get(obj, "selected_method", path), f"{path}.selected_method"),
            )
        )

    images = []
    for k, raw in enumerate(_as_list(_get(document, "images", "$"), "$.images")):
        path = f"$.images[{k}]"
        obj = _as_obj(raw, path)
        properties = []
        for j, p_raw in enumerate(_as_list(_get(obj, "properties", path), f"{path}.properties")):
            p = _as_obj(p_raw, f"{path}.properties[{j}]")
            properties.append(
                Property(
                    name=_as_str(_get(p, "name", f"{path}.properties[{j}]"), f"{path}.properties[{j}].name"),
                    uri=_as_str(_get(p, "uri", f"{path}.properties[{j}]"), f"{path}.properties[{j}].uri"),
                    value=_as_opt_str(p.get("value"), f"{path}.properties[{j}].value"),
                )
            )
        images.append(
            VsoImage(
                id=_as_str(_get(obj, "id", path), f"{path}.id"),
                properties=tuple(properties),
                models=tuple(
                    _as_str(x, f"{path}.models[{j}]")
                    for j, x in enumerate(_as_list(_get(obj, "models", path), f"{path}.models"))
                ),
                children=tuple(
                    _as_str(x, f"{path}.children[{j}]")
                    for j, x in enumerate(_as_list(_get(obj, "children", path), f"{path}.children"))
                ),
            )
        )

    same_as = []
    for k, raw in enumerate(_as_list(_get(document, "same_as", "$"), "$.same_as")):
        pair = _as_list(raw, f"$.same_as[{k}]")
        if len(pair) != 2:
            raise _schema_error(f"$.same_as[{k}]", "expected a pair of URIs")
        same_as.append(
            (
                _as_str(pair[0], f"$.same_as[{k}][0]"),
                _as_str(pair[1], f"$.same_as[{k}][1]"),
            )
        )

    catalog = Catalog(
        software_packages=tuple(software_packages),
        implementing_packages=tuple(implementing_packages),
        methods=tuple(methods),
        models=tuple(models),
        images=tuple(images),
        same_as=tuple(same_as),
    )
    report = validate_catalog(catalog)
    if strict and not report.ok:
        raise ValidationFailed(
            "catalog fails validation:\n" + report.render(), report=report
        )
    return catalog, report


def load_environment(data: bytes | str) -> Environment:
    document = _parse_document(data, KIND_ENVIRONMENT)
    instances = []
    for k, raw in enumerate(_as_list(_get(document, "instances", "$"), "$.instances")):
        path = f"$.instances[{k}]"
        obj = _as_obj(raw, path)
        choice_obj = _as_obj(_get(obj, "method_choice", path), f"{path}.method_choice")
        instances.append(
            VsoInstance(
                instance_id=_as_str(_get(obj, "instance_id", path), f"{path}.instance_id"),
                image=_as_str(_get(obj, "image", path), f"{path}.image"),
                enabled_models=frozenset(
                    _as_str(x, f"{path}.enabled_models[{j}]")
                    for j, x in enumerate(
                        _as_list(_get(obj, "enabled_models", path), f"{path}.enabled_models")
                    )
                ),
                method_choice=tuple(
                    (model, _as_str(method, f"{path}.method_choice.{model}"))
                    for model, method in choice_obj.items()
                ),
            )
        )
    connections = []
    for k, raw in enumerate(_as_list(_get(document, "connections", "$"), "$.connections")):
        path = f"$.connections[{k}]"
        obj = _as_obj(raw, path)
        connections.append(
            Connection(
                source=_as_str(_get(obj, "source", path), f"{path}.source"),
                target=_as_str(_get(obj, "target", path), f"{path}.target"),
                level=Level.IP,
            )
        )
    return Environment(
        env_id=_as_str(_get(document, "env_id", "$"), "$.env_id"),
        catalog_version=_as_str(_get(document, "catalog_version", "$"), "$.catalog_version"),
        instances=tuple(instances),
        connections=tuple(connections),
    )


def load_vocabulary(data: bytes | str) -> DslVocabulary:
    document = _parse_document(data, KIND_VOCABULARY)
    templates_obj = _as_obj(_get(document, "statement_templates", "$"), "$.statement_templates")
    templates = tuple(
        (sp_id, _as_str(tpl, f"$.statement_templates.{sp_id}"))
        for sp_id, tpl in templates_obj.items()
    )
    return DslVocabulary(
        name=_as_str(_get(document, "name", "$"), "$.name"),
        statement_templates=templates,
        ref_syntax=_as_str(_get(document, "ref_syntax", "$"), "$.ref_syntax"),
        header=_as_opt_str(document.get("header"), "$.header"),
        footer=_as_opt_str(document.get("footer"), "$.footer"),
    )


def load(data: bytes | str) -> Catalog | Environment | DslVocabulary:
    """Load any canonical document, dispatching on its ``kind`` field."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        kind = json.loads(text).get("kind")
    except (json.JSONDecodeError, AttributeError) as exc:
        position = getattr(exc, "pos", 0)
        raise ParseError(f"invalid document: {exc}", position=position)
    if kind == KIND_CATALOG:
        return load_catalog(data)[0]
    if kind == KIND_ENVIRONMENT:
        return load_environment(data)
    if kind == KIND_VOCABULARY:
        return load_vocabulary(data)
    raise _schema_error("$.kind", f"unknown document kind {kind!r}")
