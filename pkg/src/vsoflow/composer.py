"""Design-time environment: instances, connections, visibility, and lifted views.

An environment holds object instances plus dataflow connections. Connections are
stored at exactly one level, the package-parameter level; the method, model and
object views are derived on demand by lifting through membership maps and are
never persisted. The reverse direction is deliberately unsupported: an
object-level gesture is resolved down to a single package-level pair before
anything is stored.

Parameter addresses are strings of slash-joined occurrence segments, e.g.
``o1#1/model:m1/method:s2/ip:0:ip4/in:x``. The first segment is the instance id;
property pseudo-parameters use ``o1#1/prop:region/in:region``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Hashable, Iterable, Mapping, TypeVar

from .errors import (
    AmbiguousConnection,
    InputOccupied,
    SemanticMismatch,
    UnknownConnection,
    UnknownEndpoint,
    UnknownImage,
    UnknownInstance,
    UnknownMethod,
    UnknownModel,
    UnmappedElement,
)
from .model import IN, OUT, Catalog, DerivedParam, derive_vso_io, image_model_ids
from .registry import EquivalenceRegistry


class Level(str, Enum):
    IP = "IP"
    METHOD = "METHOD"
    MODEL = "MODEL"
    OBJECT = "OBJECT"


@dataclass(frozen=True)
class VsoInstance:
    """One dropped image: which models are turned on and which methods they use."""

    instance_id: str
    image: str
    enabled_models: frozenset[str]
    method_choice: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "enabled_models", frozenset(self.enabled_models))
        object.__setattr__(self, "method_choice", tuple(sorted(dict(self.method_choice).items())))

    @cached_property
    def choice_map(self) -> dict[str, str]:
        return dict(self.method_choice)

    def method_for(self, model_id: str) -> str | None:
        return self.choice_map.get(model_id)


@dataclass(frozen=True)
class Connection:
    source: str
    target: str
    level: Level = Level.IP


@dataclass(frozen=True)
class CandidateConnection:
    """A proposed connection between a free output and a free, unset input."""

    source: str
    target: str
    source_varname: str
    target_varname: str
    source_uri: str
    target_uri: str


@dataclass(frozen=True)
class VisibleParam:
    """One parameter surviving filtration, annotated with its owner at the view level."""

    address: str
    varname: str
    uri: str
    value: str | None
    owner: str


@dataclass(frozen=True)
class Environment:
    """The composed virtual system: instances plus package-level connections."""

    env_id: str
    catalog_version: str
    instances: tuple[VsoInstance, ...] = ()
    connections: tuple[Connection, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "instances", tuple(sorted(self.instances, key=lambda i: i.instance_id))
        )
        object.__setattr__(
            self, "connections", tuple(sorted(self.connections, key=lambda c: (c.source, c.target)))
        )

    @cached_property
    def instance_by_id(self) -> dict[str, VsoInstance]:
        return {inst.instance_id: inst for inst in self.instances}

    def instance(self, instance_id: str) -> VsoInstance:
        try:
            return self.instance_by_id[instance_id]
        except KeyError:
            raise UnknownInstance(f"unknown instance {instance_id!r}", id=instance_id) from None

    def connection_sources(self) -> frozenset[str]:
        return frozenset(c.source for c in self.connections)

    def connection_targets(self) -> frozenset[str]:
        return frozenset(c.target for c in self.connections)


def new_environment(env_id: str, catalog_version: str) -> Environment:
    return Environment(env_id=env_id, catalog_version=catalog_version)


def instantiate(catalog: Catalog, env: Environment, image_id: str) -> tuple[Environment, str]:
    """Drop an image into the environment.

    The new instance gets the deterministic id ``<image_id>#<ordinal>``, all models
    in the image tree enabled, and every model's default method chosen.
    """
    if image_id not in catalog.image_by_id:
        raise UnknownImage(f"unknown image {image_id!r}", id=image_id)
    image = catalog.image(image_id)
    ordinal = sum(1 for inst in env.instances if inst.image == image_id) + 1
    instance_id = f"{image_id}#{ordinal}"
    model_ids = image_model_ids(image, catalog)
    choices = tuple((mid, catalog.model(mid).selected_method) for mid in model_ids)
    instance = VsoInstance(
        instance_id=instance_id,
        image=image_id,
        enabled_models=frozenset(model_ids),
        method_choice=choices,
    )
    return replace(env, instances=(*env.instances, instance)), instance_id


def instance_params(
    catalog: Catalog, env: Environment, instance_id: str
) -> tuple[tuple[DerivedParam, ...], tuple[DerivedParam, ...]]:
    """Unfiltered generalized IO of one instance, addresses rooted at the instance id."""
    inst = env.instance(instance_id)
    inputs, outputs = derive_vso_io(
        catalog.image(inst.image), inst.enabled_models, catalog, inst.choice_map
    )
    return (
        tuple(p.prefixed(instance_id) for p in inputs),
        tuple(p.prefixed(instance_id) for p in outputs),
    )


def find_param(
    catalog: Catalog, env: Environment, address: str, direction: str | None = None
) -> DerivedParam:
    """Resolve an address against the current derived parameters of its instance."""
    instance_id = address.split("/", 1)[0]
    if instance_id not in env.instance_by_id:
        raise UnknownEndpoint(f"no instance for endpoint {address!r}", address=address)
    inputs, outputs = instance_params(catalog, env, instance_id)
    pool = inputs + outputs if direction is None else (inputs if direction == IN else outputs)
    for param in pool:
        if param.address == address:
            return param
    raise UnknownEndpoint(f"no such parameter {address!r}", address=address)


def toggle_model(
    catalog: Catalog, env: Environment, instance_id: str, model_id: str, enabled: bool
) -> Environment:
    """Turn a model on or off; turning off also forgets its method override."""
    inst = env.instance(instance_id)
    tree = image_model_ids(catalog.image(inst.image), catalog)
    if model_id not in tree:
        raise UnknownModel(
            f"model {model_id!r} is not part of instance {instance_id!r}",
            instance=instance_id,
            model=model_id,
        )
    if enabled:
        enabled_models = inst.enabled_models | {model_id}
        choices = dict(inst.choice_map)
        choices.setdefault(model_id, catalog.model(model_id).selected_method)
    else:
        enabled_models = inst.enabled_models - {model_id}
        choices = {k: v for k, v in inst.choice_map.items() if k != model_id}
    updated = replace(
        inst, enabled_models=frozenset(enabled_models), method_choice=tuple(choices.items())
    )
    return _swap_instance(env, updated)


def choose_method(
    catalog: Catalog, env: Environment, instance_id: str, model_id: str, method_id: str
) -> Environment:
    inst = env.instance(instance_id)
    if model_id not in inst.enabled_models:
        raise UnknownModel(
            f"model {model_id!r} is not enabled on {instance_id!r}",
            instance=instance_id,
            model=model_id,
        )
    model = catalog.model(model_id)
    if method_id not in model.methods:
        raise UnknownMethod(
            f"method {method_id!r} is not offered by model {model_id!r}",
            model=model_id,
            method=method_id,
        )
    choices = dict(inst.choice_map)
    choices[model_id] = method_id
    updated = replace(inst, method_choice=tuple(choices.items()))
    return _swap_instance(env, updated)


def _swap_instance(env: Environment, updated: VsoInstance) -> Environment:
    others = tuple(i for i in env.instances if i.instance_id != updated.instance_id)
    return replace(env, instances=(*others, updated))


def connect(
    catalog: Catalog, registry: EquivalenceRegistry, env: Environment, source: str, target: str
) -> Environment:
    """Store a package-level connection from an output to a semantically equal input.

    Fan-in is one: a target input may have at most one incoming connection in the
    whole environment.
    """
    src = find_param(catalog, env, source, OUT)
    tgt = find_param(catalog, env, target, IN)
    if not registry.equal(src.uri, tgt.uri):
        raise SemanticMismatch(
            f"{source} and {target} are not semantically equal",
            source=source,
            target=target,
            source_uri=src.uri,
            target_uri=tgt.uri,
        )
    if target in env.connection_targets():
        raise InputOccupied(f"input {target!r} already has an incoming connection", target=target)
    conn = Connection(source=source, target=target, level=Level.IP)
    return replace(env, connections=(*env.connections, conn))


def disconnect(env: Environment, source: str, target: str) -> Environment:
    remaining = tuple(
        c for c in env.connections if not (c.source == source and c.target == target)
    )
    if len(remaining) == len(env.connections):
        raise UnknownConnection(
            f"no connection {source!r} → {target!r}", source=source, target=target
        )
    return replace(env, connections=remaining)


def visible_params(
    catalog: Catalog, env: Environment, instance_id: str, level: Level = Level.OBJECT
) -> tuple[tuple[VisibleParam, ...], tuple[VisibleParam, ...]]:
    """Filtered IO of an instance: what is worth showing at an abstraction level.

    An input survives only when its effective value is unset and nothing feeds it;
    an output survives only when no connection leaves it. The filtered sets are a
    subset of the unfiltered derivation at every level; the level changes only the
    owner each parameter is grouped under.
    """
    inputs, outputs = instance_params(catalog, env, instance_id)
    fed = env.connection_targets()
    tapped = env.connection_sources()
    vis_in = tuple(
        VisibleParam(p.address, p.varname, p.uri, p.value, level_owner(p.address, level))
        for p in inputs
        if p.value is None and p.address not in fed
    )
    vis_out = tuple(
        VisibleParam(p.address, p.varname, p.uri, None, level_owner(p.address, level))
        for p in outputs
        if p.address not in tapped
    )
    return vis_in, vis_out


def suggest_connections(
    catalog: Catalog, registry: EquivalenceRegistry, env: Environment
) -> tuple[CandidateConnection, ...]:
    """Propose connections between free outputs and free inputs of distinct instances.

    Candidates are deterministic: ordered by source instance, source varname, target
    instance, target varname, with full addresses as the final tie-break. Applying
    any single candidate through ``connect`` succeeds on the current environment.
    """
    per_instance = {
        inst.instance_id: visible_params(catalog, env, inst.instance_id) for inst in env.instances
    }
    candidates = []
    for src_id, (_, outs) in per_instance.items():
        for tgt_id, (ins, _) in per_instance.items():
            if src_id == tgt_id:
                continue
            for out in outs:
                for inp in ins:
                    if registry.equal(out.uri, inp.uri):
                        candidates.append(
                            CandidateConnection(
                                source=out.address,
                                target=inp.address,
                                source_varname=out.varname,
                                target_varname=inp.varname,
                                source_uri=out.uri,
                                target_uri=inp.uri,
                            )
                        )
    candidates.sort(
        key=lambda c: (
            c.source.split("/", 1)[0],
            c.source_varname,
            c.target.split("/", 1)[0],
            c.target_varname,
            c.source,
            c.target,
        )
    )
    return tuple(candidates)


def resolve_object_connection(
    catalog: Catalog,
    registry: EquivalenceRegistry,
    env: Environment,
    source_instance: str,
    target_instance: str,
) -> tuple[str, str]:
    """Resolve an object-level connect gesture to its unique package-level pair."""
    env.instance(source_instance)
    env.instance(target_instance)
    matches = [
        c
        for c in suggest_connections(catalog, registry, env)
        if c.source.split("/", 1)[0] == source_instance
        and c.target.split("/", 1)[0] == target_instance
    ]
    if not matches:
        raise SemanticMismatch(
            f"no semantically matching free parameters between {source_instance!r} "
            f"and {target_instance!r}",
            source=source_instance,
            target=target_instance,
        )
    if len(matches) > 1:
        raise AmbiguousConnection(
            f"{len(matches)} parameter pairs match between {source_instance!r} "
            f"and {target_instance!r}; connect explicit parameters instead",
            candidates=[(m.source, m.target) for m in matches],
        )
    return matches[0].source, matches[0].target


# --- connection lifting --------------------------------------------------------

H = TypeVar("H", bound=Hashable)


def lift_connections(
    conn_set: Iterable[tuple[H, H]], membership_map: Mapping[H, H]
) -> frozenset[tuple[H, H]]:
    """Lift connections one level up through a membership (element -> parent) map.

    Each pair maps to the pair of its endpoints' parents; pairs whose endpoints
    share a parent disappear. Lifting never invents downward connections.
    """
    lifted = set()
    for a, b in conn_set:
        if a not in membership_map:
            raise UnmappedElement(f"element {a!r} has no parent in the membership map", element=a)
        if b not in membership_map:
            raise UnmappedElement(f"element {b!r} has no parent in the membership map", element=b)
        pa, pb = membership_map[a], membership_map[b]
        if pa != pb:
            lifted.add((pa, pb))
    return frozenset(lifted)


_LEVEL_SEGMENT = {Level.IP: "ip:", Level.METHOD: "method:", Level.MODEL: "model:"}


def level_owner(address: str, level: Level) -> str:
    """Owner of a parameter address at an abstraction level.

    The owner is the address prefix ending at the level's segment. Property
    pseudo-parameters and coarser levels fall back to the owning object occurrence;
    at OBJECT level the owner is always the instance itself.
    """
    segments = address.split("/")
    if level is Level.OBJECT:
        return segments[0]
    marker = _LEVEL_SEGMENT[level]
    owner = [segments[0]]
    for seg in segments[1:]:
        if seg.startswith("child:"):
            owner.append(seg)
            continue
        if seg.startswith("model:"):
            if marker == "model:":
                owner.append(seg)
                break
            owner.append(seg)
            continue
        if seg.startswith("method:"):
            if marker == "method:":
                owner.append(seg)
                break
            if marker == "model:":
                break
            owner.append(seg)
            continue
        if seg.startswith("ip:"):
            if marker == "ip:":
                owner.append(seg)
            break
        break  # prop:/in:/out: segments: owner is the object occurrence
    return "/".join(owner)


def lifted_view(env: Environment, level: Level) -> tuple[Connection, ...]:
    """Derive the connection set at an abstraction level from stored connections.

    The package-level view maps parameter pairs onto their owning occurrences; each
    coarser view is produced by one more lift through the owner maps, so the object
    view equals three successive lifts.
    """
    current = {(c.source, c.target) for c in env.connections}
    for lvl in (Level.IP, Level.METHOD, Level.MODEL, Level.OBJECT):
        endpoints = {e for pair in current for e in pair}
        current = lift_connections(current, {e: level_owner(e, lvl) for e in endpoints})
        if lvl is level:
            break
    return tuple(Connection(source=a, target=b, level=level) for a, b in sorted(current))
