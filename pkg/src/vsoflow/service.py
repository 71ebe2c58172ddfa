"""Session-based HTTP API over the composition engine.

Every endpoint lives under ``/v1``. Mutating calls carry the session revision they
were computed against; a stale revision is rejected with 409 so clients can poll
``GET .../revision`` and re-read before retrying (optimistic concurrency). Each
endpoint is a thin adapter: its effect equals the corresponding library call on
the same state, and library error codes pass through verbatim in the response
body's ``error.code`` field.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import codegen, composer, configurator, store
from .codegen import DslVocabulary
from .composer import Environment, Level
from .errors import (
    CatalogVersionMismatch,
    StaleRevision,
    UnknownImage,
    UnknownSession,
    UnknownVocabulary,
    ValidationFailed,
    VsoError,
)
from .model import Catalog
from .registry import EquivalenceRegistry

_STATUS_BY_CODE = {
    "UnknownImage": 404,
    "UnknownInstance": 404,
    "UnknownModel": 404,
    "UnknownMethod": 404,
    "UnknownEndpoint": 404,
    "UnknownConnection": 404,
    "UnknownSession": 404,
    "UnknownVocabulary": 404,
    "UnknownConfiguration": 404,
    "StaleRevision": 409,
    "InputOccupied": 409,
}
_DEFAULT_STATUS = 422


@dataclass
class Session:
    session_id: str
    env: Environment
    revision: int = 1
    lock: threading.Lock = field(default_factory=threading.Lock)


class CreateSessionBody(BaseModel):
    env_id: str | None = None
    environment: dict | None = None


class InstantiateBody(BaseModel):
    revision: int
    image_id: str


class ConnectBody(BaseModel):
    revision: int
    source: str
    target: str


class ObjectConnectBody(BaseModel):
    revision: int
    source_instance: str
    target_instance: str


class ApplySuggestionsBody(BaseModel):
    revision: int
    source: str | None = None
    target: str | None = None
    all: bool = False


class ToggleModelBody(BaseModel):
    revision: int
    instance_id: str
    model_id: str
    enabled: bool


class ChooseMethodBody(BaseModel):
    revision: int
    instance_id: str
    model_id: str
    method_id: str


class ScriptBody(BaseModel):
    vocabulary: str = "generic"
    config_key: str | None = None


def create_app(
    catalog: Catalog, vocabularies: dict[str, DslVocabulary] | None = None
) -> FastAPI:
    """Build the service over one immutable catalog snapshot."""
    app = FastAPI(title="vsoflow", version="1")
    # the composer UI is served from a different origin than the API
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    version = store.catalog_version(catalog)
    vocabs = {"generic": codegen.generic_vocabulary(catalog)}
    vocabs.update(vocabularies or {})

    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    counter = {"next": 1}

    @app.exception_handler(VsoError)
    async def _vso_error(request: Request, exc: VsoError):
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS),
            content={
                "error": {
                    "code": exc.code,
                    "message": exc.message,
                    "details": _plain(exc.details),
                }
            },
        )

    def get_session(session_id: str) -> Session:
        try:
            return sessions[session_id]
        except KeyError:
            raise UnknownSession(f"unknown session {session_id!r}", id=session_id) from None

    def mutate(session: Session, revision: int, op) -> dict:
        """Run op under the session lock iff the caller saw the latest revision."""
        with session.lock:
            if revision != session.revision:
                raise StaleRevision(
                    f"revision {revision} is stale (current {session.revision})",
                    expected=session.revision,
                    got=revision,
                )
            env, extra = op(session.env)
            session.env = env
            session.revision += 1
            return {"revision": session.revision, **extra}

    # --- catalog reads ---------------------------------------------------------

    @app.get("/v1/images")
    def list_images():
        return {"images": [_image_summary(catalog, image_id) for image_id in sorted(catalog.image_by_id)]}

    @app.get("/v1/images/{image_id}")
    def get_image(image_id: str):
        if image_id not in catalog.image_by_id:
            raise UnknownImage(f"unknown image {image_id!r}", id=image_id)
        return _image_summary(catalog, image_id)

    @app.get("/v1/vocabularies")
    def list_vocabularies():
        return {"vocabularies": sorted(vocabs)}

    # --- session lifecycle -------------------------------------------------------

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody | None = None):
        body = body or CreateSessionBody()
        with sessions_lock:
            session_id = f"session-{counter['next']}"
            counter["next"] += 1
        if body.environment is not None:
            env = store.load_environment(json.dumps(body.environment))
            if env.catalog_version != version:
                raise CatalogVersionMismatch(
                    "environment was composed against a different catalog",
                    expected=version,
                    got=env.catalog_version,
                )
        else:
            env = composer.new_environment(body.env_id or session_id, version)
        session = Session(session_id=session_id, env=env)
        with sessions_lock:
            sessions[session_id] = session
        return {"session_id": session_id, "revision": session.revision}

    @app.get("/v1/sessions/{session_id}")
    def get_session_state(session_id: str):
        session = get_session(session_id)
        return {
            "session_id": session.session_id,
            "revision": session.revision,
            "catalog_version": version,
            "environment": store.environment_to_document(session.env),
        }

    @app.get("/v1/sessions/{session_id}/revision")
    def get_revision(session_id: str):
        return {"revision": get_session(session_id).revision}

    @app.get("/v1/sessions/{session_id}/environment")
    def get_environment_document(session_id: str):
        session = get_session(session_id)
        return Response(content=store.save_environment(session.env), media_type="application/json")

    # --- composition mutations ---------------------------------------------------

    @app.post("/v1/sessions/{session_id}/instances")
    def instantiate(session_id: str, body: InstantiateBody):
        session = get_session(session_id)

        def op(env):
            env2, instance_id = composer.instantiate(catalog, env, body.image_id)
            return env2, {"instance_id": instance_id}

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/connections")
    def connect(session_id: str, body: ConnectBody):
        session = get_session(session_id)

        def op(env):
            return composer.connect(catalog, registry, env, body.source, body.target), {}

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/connections/delete")
    def disconnect(session_id: str, body: ConnectBody):
        session = get_session(session_id)

        def op(env):
            return composer.disconnect(env, body.source, body.target), {}

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/object-connect")
    def object_connect(session_id: str, body: ObjectConnectBody):
        session = get_session(session_id)

        def op(env):
            source, target = composer.resolve_object_connection(
                catalog, registry, env, body.source_instance, body.target_instance
            )
            env2 = composer.connect(catalog, registry, env, source, target)
            return env2, {"source": source, "target": target}

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/suggestions/apply")
    def apply_suggestions(session_id: str, body: ApplySuggestionsBody):
        session = get_session(session_id)

        def op(env):
            applied = []
            if body.all:
                for cand in composer.suggest_connections(catalog, registry, env):
                    try:
                        env = composer.connect(catalog, registry, env, cand.source, cand.target)
                    except VsoError:
                        continue  # invalidated by an earlier application
                    applied.append({"source": cand.source, "target": cand.target})
            else:
                env = composer.connect(catalog, registry, env, body.source, body.target)
                applied.append({"source": body.source, "target": body.target})
            return env, {"applied": applied}

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/models")
    def toggle_model(session_id: str, body: ToggleModelBody):
        session = get_session(session_id)

        def op(env):
            return (
                composer.toggle_model(catalog, env, body.instance_id, body.model_id, body.enabled),
                {},
            )

        return mutate(session, body.revision, op)

    @app.post("/v1/sessions/{session_id}/methods")
    def choose_method(session_id: str, body: ChooseMethodBody):
        session = get_session(session_id)

        def op(env):
            return (
                composer.choose_method(
                    catalog, env, body.instance_id, body.model_id, body.method_id
                ),
                {},
            )

        return mutate(session, body.revision, op)

    # --- session reads -----------------------------------------------------------

    @app.get("/v1/sessions/{session_id}/suggestions")
    def suggestions(session_id: str):
        session = get_session(session_id)
        return {
            "revision": session.revision,
            "suggestions": [
                {
                    "source": c.source,
                    "target": c.target,
                    "source_varname": c.source_varname,
                    "target_varname": c.target_varname,
                    "source_uri": c.source_uri,
                    "target_uri": c.target_uri,
                }
                for c in composer.suggest_connections(catalog, registry, session.env)
            ],
        }

    @app.get("/v1/sessions/{session_id}/instances/{instance_id}/params")
    def params(
        session_id: str,
        instance_id: str,
        level: Level = Query(default=Level.OBJECT),
        filtered: bool = Query(default=True),
    ):
        session = get_session(session_id)

        def row(address, varname, uri, value, owner=None):
            return {
                "address": address,
                "varname": varname,
                "uri": uri,
                "value": value,
                "owner": owner if owner is not None else composer.level_owner(address, level),
            }

        if filtered:
            ins, outs = composer.visible_params(catalog, session.env, instance_id, level)
            return {
                "revision": session.revision,
                "inputs": [row(p.address, p.varname, p.uri, p.value, p.owner) for p in ins],
                "outputs": [row(p.address, p.varname, p.uri, p.value, p.owner) for p in outs],
            }
        ins_raw, outs_raw = composer.instance_params(catalog, session.env, instance_id)
        return {
            "revision": session.revision,
            "inputs": [row(p.address, p.varname, p.uri, p.value) for p in ins_raw],
            "outputs": [row(p.address, p.varname, p.uri, None) for p in outs_raw],
        }

    @app.get("/v1/sessions/{session_id}/connections")
    def connections(session_id: str, level: str = Query(default="PARAM")):
        session = get_session(session_id)
        if level == "PARAM":
            rows = [
                {"source": c.source, "target": c.target, "level": "PARAM"}
                for c in session.env.connections
            ]
        else:
            if level not in Level.__members__:
                raise ValidationFailed(
                    f"unknown level {level!r}; expected PARAM, IP, METHOD, MODEL, or OBJECT"
                )
            rows = [
                {"source": c.source, "target": c.target, "level": c.level.value}
                for c in composer.lifted_view(session.env, Level(level))
            ]
        return {"revision": session.revision, "connections": rows}

    @app.get("/v1/sessions/{session_id}/configurations")
    def configurations(session_id: str, limit: int = Query(default=1000, ge=0)):
        session = get_session(session_id)
        configs = configurator.enumerate_configurations(catalog, session.env)
        return {
            "revision": session.revision,
            "count": configurator.count_configurations(catalog, session.env),
            "configurations": [
                {"key": c.key, "choices": {f"{i}:{m}": s for (i, m), s in c.choices}}
                for c in configs[:limit]
            ],
        }

    @app.get("/v1/sessions/{session_id}/configurations/compare")
    def compare(session_id: str, criterion: str = Query(default="total")):
        session = get_session(session_id)
        reports = configurator.compare_configurations(
            catalog, session.env, criterion=criterion
        )
        return {
            "revision": session.revision,
            "criterion": criterion,
            "reports": [
                {
                    "key": r.config.key,
                    "total_time": r.total_time,
                    "critical_path_time": r.critical_path_time,
                    "package_count": r.package_count,
                    "missing_perf": list(r.missing_perf),
                }
                for r in reports
            ],
        }

    @app.post("/v1/sessions/{session_id}/script")
    def script(session_id: str, body: ScriptBody):
        session = get_session(session_id)
        vocab = vocabs.get(body.vocabulary)
        if vocab is None:
            raise UnknownVocabulary(
                f"unknown vocabulary {body.vocabulary!r}", name=body.vocabulary
            )
        config = None
        if body.config_key is not None:
            config = configurator.configuration_by_key(catalog, session.env, body.config_key)
        result = codegen.generate_script(catalog, session.env, vocab, config)
        return {
            "revision": session.revision,
            "vocabulary": vocab.name,
            "text": result.text,
            "steps": [{"label": label, "address": address} for label, address in result.step_index],
        }

    return app


def _image_summary(catalog: Catalog, image_id: str) -> dict:
    image = catalog.image(image_id)
    return {
        "id": image.id,
        "properties": [
            {"name": p.name, "uri": p.uri, "value": p.value} for p in image.properties
        ],
        "models": [
            {
                "id": model_id,
                "methods": list(catalog.model(model_id).methods),
                "selected_method": catalog.model(model_id).selected_method,
            }
            for model_id in image.models
        ],
        "children": list(image.children),
    }


def _plain(value):
    """Coerce error details into JSON-serializable primitives."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [_plain(v) for v in sorted(value, key=str)]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)
