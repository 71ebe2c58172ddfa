"""Workflow-script generation by deterministic traversal of the package DAG.

The DAG's nodes are the implementing-package occurrences selected by a
configuration (one method per enabled model, over every instance and nested
child). Edges come from two sources: adjacency inside a method sequence wherever
an output of one package is semantically equal to an input of the next, and the
environment's stored package-level connections whose endpoints are both selected.

Scripts are rendered from a vocabulary of per-package statement templates.
Placeholders: ``{step}`` for the statement's own label, ``{in:<varname>}`` for an
input (a back-reference when fed, the literal effective value otherwise), and
``{out:<varname>}`` for how consumers would reference that output. Generation is a
pure function of its inputs; regenerating yields byte-identical text.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .composer import Environment, instance_params
from .errors import (
    CycleDetected,
    DisconnectedRequiredInput,
    MissingTemplate,
    UnknownConfiguration,
    UnknownMethod,
    UnresolvedPlaceholder,
)
from .model import (
    IN,
    Catalog,
    DerivedParam,
    child_segment,
    method_segment,
    model_segment,
    package_segment,
)
from .registry import EquivalenceRegistry

_PLACEHOLDER = re.compile(r"\{([^{}]*)\}")


@dataclass(frozen=True)
class DslVocabulary:
    """Per-package statement templates plus the back-reference syntax."""

    name: str
    statement_templates: tuple[tuple[str, str], ...]
    ref_syntax: str = "{step}.{out}"
    header: str | None = None
    footer: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "statement_templates", tuple(sorted(self.statement_templates)))

    @cached_property
    def template_map(self) -> dict[str, str]:
        return dict(self.statement_templates)

    def template_for(self, sp_id: str) -> str | None:
        return self.template_map.get(sp_id)


def generic_vocabulary(catalog: Catalog) -> DslVocabulary:
    """Neutral assignment-call vocabulary covering every package in the catalog."""
    templates = []
    for sp in catalog.software_packages:
        args = ", ".join(f"{p.varname}={{in:{p.varname}}}" for p in sp.inputs)
        templates.append((sp.id, f"{{step}} = {sp.id}({args})"))
    return DslVocabulary(name="generic", statement_templates=tuple(templates))


@dataclass(frozen=True)
class PackageNode:
    """One implementing-package occurrence selected by the configuration."""

    address: str
    instance_id: str
    model_id: str
    method_id: str
    position: int
    ip_id: str
    sp_id: str

    @property
    def sort_key(self) -> tuple[str, str, int, str]:
        return (self.instance_id, self.method_id, self.position, self.address)


@dataclass(frozen=True)
class Feed:
    """Producer of a fed input: a prior step's output, or a property's value."""

    source_address: str
    node_address: str | None
    out_varname: str
    literal: str | None = None


@dataclass(frozen=True)
class PackageDag:
    nodes: tuple[PackageNode, ...]
    edges: frozenset[tuple[str, str]]
    feeds: tuple[tuple[str, Feed], ...]
    inputs: tuple[DerivedParam, ...]

    @cached_property
    def node_by_address(self) -> dict[str, PackageNode]:
        return {n.address: n for n in self.nodes}

    @cached_property
    def feed_map(self) -> dict[str, Feed]:
        return dict(self.feeds)


@dataclass(frozen=True)
class WorkflowScript:
    text: str
    step_index: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class TraversalStep:
    label: str
    address: str
    package: str
    inputs: tuple[tuple[str, str], ...]
    outputs: tuple[tuple[str, str], ...]


def _resolve_choices(
    catalog: Catalog, env: Environment, config: object
) -> dict[tuple[str, str], str]:
    """Normalize a configuration to a full (instance, model) -> method map."""
    if config is None:
        chosen = {
            (inst.instance_id, mid): inst.choice_map[mid]
            for inst in env.instances
            for mid in inst.enabled_models
        }
    else:
        raw = getattr(config, "choice_map", config)
        if not isinstance(raw, Mapping):
            raise UnknownConfiguration("configuration must provide a choice map")
        chosen = dict(raw)
    axes = {
        (inst.instance_id, mid) for inst in env.instances for mid in inst.enabled_models
    }
    missing = axes - set(chosen)
    if missing:
        raise UnknownConfiguration(
            f"configuration misses choices for {sorted(missing)}", missing=sorted(missing)
        )
    extra = set(chosen) - axes
    if extra:
        raise UnknownConfiguration(
            f"configuration chooses methods for non-enabled models {sorted(extra)}",
            extra=sorted(extra),
        )
    for (inst_id, model_id), method_id in chosen.items():
        if method_id not in catalog.model(model_id).methods:
            raise UnknownMethod(
                f"method {method_id!r} is not offered by model {model_id!r}",
                model=model_id,
                method=method_id,
            )
    return chosen


def _selected_nodes(
    catalog: Catalog, env: Environment, chosen: Mapping[tuple[str, str], str]
) -> list[PackageNode]:
    nodes: list[PackageNode] = []

    def walk(instance_id: str, image_id: str, prefix: tuple[str, ...]) -> None:
        image = catalog.image(image_id)
        for model_id in image.models:
            method_id = chosen.get((instance_id, model_id))
            if method_id is None:
                continue
            method = catalog.method(method_id)
            for position, ip_id in enumerate(method.ip_sequence):
                ip = catalog.implementing_package(ip_id)
                address = "/".join(
                    (
                        instance_id,
                        *prefix,
                        model_segment(model_id),
                        method_segment(method_id),
                        package_segment(position, ip_id),
                    )
                )
                nodes.append(
                    PackageNode(
                        address=address,
                        instance_id=instance_id,
                        model_id=model_id,
                        method_id=method_id,
                        position=position,
                        ip_id=ip_id,
                        sp_id=ip.sp,
                    )
                )
        for child_id in image.children:
            walk(instance_id, child_id, (*prefix, child_segment(child_id)))

    for inst in env.instances:
        walk(inst.instance_id, inst.image, ())
    nodes.sort(key=lambda n: n.address)
    return nodes


def build_package_dag(
    catalog: Catalog,
    env: Environment,
    config: object = None,
    *,
    require_fed_inputs: bool = True,
) -> PackageDag:
    """Induce the package-occurrence DAG for one configuration.

    With ``require_fed_inputs`` every input must either be fed (by a stored
    connection, an adjacent package in its method, or a valued property) or carry
    an effective value; the configurator relaxes this to rank configurations that
    are not fully wired yet.
    """
    chosen = _resolve_choices(catalog, env, config)
    nodes = _selected_nodes(catalog, env, chosen)
    node_addresses = {n.address for n in nodes}

    # Index the selected occurrences' parameters and the property pseudo-params.
    inputs_by_address: dict[str, DerivedParam] = {}
    outputs_by_address: dict[str, DerivedParam] = {}
    properties_by_address: dict[str, DerivedParam] = {}
    for inst in env.instances:
        ins, outs = instance_params(catalog, env, inst.instance_id)
        for p in ins:
            owner = "/".join((*p.path,))
            if owner in node_addresses:
                inputs_by_address[p.address] = p
        for p in outs:
            owner = "/".join((*p.path,))
            if owner in node_addresses:
                outputs_by_address[p.address] = p
            elif p.path and p.path[-1].startswith("prop:"):
                properties_by_address[p.address] = p

    edges: set[tuple[str, str]] = set()
    feeds: dict[str, Feed] = {}

    def occurrence_of(address: str) -> str:
        return address.rsplit("/", 1)[0]

    # Stored connections take precedence over adjacency-implied dataflow.
    for conn in env.connections:
        tgt = inputs_by_address.get(conn.target)
        if tgt is None:
            continue  # endpoint not selected by this configuration
        src = outputs_by_address.get(conn.source)
        if src is not None:
            src_node = occurrence_of(conn.source)
            tgt_node = occurrence_of(conn.target)
            edges.add((src_node, tgt_node))
            feeds[conn.target] = Feed(conn.source, src_node, src.varname)
            continue
        prop = properties_by_address.get(conn.source)
        if prop is not None:
            # Property-fed inputs take the property's value as a literal.
            inst = env.instance(conn.source.split("/", 1)[0])
            value = _property_value(catalog, inst.image, prop)
            feeds[conn.target] = Feed(conn.source, None, prop.varname, literal=value)

    # Adjacency inside each method: link semantically equal out -> in of neighbors.
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    by_method: dict[str, list[PackageNode]] = {}
    for node in nodes:
        method_occurrence = node.address.rsplit("/", 1)[0]
        by_method.setdefault(method_occurrence, []).append(node)
    for group_nodes in by_method.values():
        group_nodes.sort(key=lambda n: n.position)
        for prev, nxt in zip(group_nodes, group_nodes[1:]):
            prev_outs = [
                p for a, p in outputs_by_address.items() if occurrence_of(a) == prev.address
            ]
            nxt_ins = [p for a, p in inputs_by_address.items() if occurrence_of(a) == nxt.address]
            prev_outs.sort(key=lambda p: p.varname)
            nxt_ins.sort(key=lambda p: p.varname)
            for inp in nxt_ins:
                if inp.address in feeds:
                    continue
                for out in prev_outs:
                    if registry.equal(out.uri, inp.uri):
                        edges.add((prev.address, nxt.address))
                        feeds[inp.address] = Feed(out.address, prev.address, out.varname)
                        break

    dag = PackageDag(
        nodes=tuple(nodes),
        edges=frozenset(edges),
        feeds=tuple(sorted(feeds.items())),
        inputs=tuple(sorted(inputs_by_address.values(), key=lambda p: p.address)),
    )
    topological_order(dag)  # raises CycleDetected on cyclic wiring
    if require_fed_inputs:
        for param in dag.inputs:
            feed = dag.feed_map.get(param.address)
            if feed is None and param.value is None:
                raise DisconnectedRequiredInput(
                    f"input {param.address!r} has no value and nothing feeds it",
                    address=param.address,
                )
            if feed is not None and feed.node_address is None and feed.literal is None:
                raise DisconnectedRequiredInput(
                    f"input {param.address!r} is fed by a property without a value",
                    address=param.address,
                )
    return dag


def _property_value(catalog: Catalog, image_id: str, prop_param: DerivedParam) -> str | None:
    """Value of the property behind a pseudo-output, following child segments."""
    image = catalog.image(image_id)
    for seg in prop_param.path[1:]:  # path[0] is the instance id
        if seg.startswith("child:"):
            image = catalog.image(seg.split(":", 1)[1])
    for prop in image.properties:
        if prop.name == prop_param.varname:
            return prop.value
    return None


def topological_order(dag: PackageDag) -> tuple[PackageNode, ...]:
    """Kahn's algorithm with a deterministic (instance, method, position) tie-break."""
    indegree = {n.address: 0 for n in dag.nodes}
    succs: dict[str, list[str]] = {n.address: [] for n in dag.nodes}
    for a, b in dag.edges:
        indegree[b] += 1
        succs[a].append(b)
    ready = [n.sort_key for n in dag.nodes if indegree[n.address] == 0]
    heapq.heapify(ready)
    order: list[PackageNode] = []
    while ready:
        key = heapq.heappop(ready)
        node = dag.node_by_address[key[3]]
        order.append(node)
        for succ in sorted(succs[node.address]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, dag.node_by_address[succ].sort_key)
    if len(order) < len(dag.nodes):
        cycle = _find_cycle(dag, {n.address for n in dag.nodes} - {n.address for n in order})
        raise CycleDetected(
            "connection cycle: " + " → ".join(cycle), cycle=list(cycle)
        )
    return tuple(order)


def _find_cycle(dag: PackageDag, remaining: set[str]) -> tuple[str, ...]:
    # Every leftover node keeps at least one leftover predecessor, so walking
    # predecessors from any start must revisit a node; that loop is a cycle.
    preds: dict[str, list[str]] = {a: [] for a in remaining}
    for a, b in sorted(dag.edges):
        if a in remaining and b in remaining:
            preds[b].append(a)
    path: list[str] = []
    seen: dict[str, int] = {}
    node = min(remaining)
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = preds[node][0]
    loop = [*path[seen[node]:], node]
    loop.reverse()  # report in edge direction
    return tuple(loop)


def _render_template(
    template: str,
    *,
    label: str,
    sp_id: str,
    ref_syntax: str,
    in_values: Mapping[str, str],
    out_names: frozenset[str],
) -> str:
    def substitute(match: re.Match[str]) -> str:
        token = match.group(1)
        if token == "step":
            return label
        if token.startswith("in:"):
            varname = token[3:]
            if varname not in in_values:
                raise UnresolvedPlaceholder(
                    f"template for {sp_id!r} references unknown input {varname!r}",
                    package=sp_id,
                    placeholder=token,
                )
            return in_values[varname]
        if token.startswith("out:"):
            varname = token[4:]
            if varname not in out_names:
                raise UnresolvedPlaceholder(
                    f"template for {sp_id!r} references unknown output {varname!r}",
                    package=sp_id,
                    placeholder=token,
                )
            return _render_ref(ref_syntax, label, varname, sp_id)
        raise UnresolvedPlaceholder(
            f"template for {sp_id!r} contains unsupported placeholder {{{token}}}",
            package=sp_id,
            placeholder=token,
        )

    return _PLACEHOLDER.sub(substitute, template)


def _render_ref(ref_syntax: str, step_label: str, out_varname: str, sp_id: str) -> str:
    def substitute(match: re.Match[str]) -> str:
        token = match.group(1)
        if token == "step":
            return step_label
        if token == "out":
            return out_varname
        raise UnresolvedPlaceholder(
            f"reference syntax contains unsupported placeholder {{{token}}}",
            package=sp_id,
            placeholder=token,
        )

    return _PLACEHOLDER.sub(substitute, ref_syntax)


def _emit(
    catalog: Catalog,
    env: Environment,
    vocab: DslVocabulary,
    config: object,
) -> tuple[list[TraversalStep], list[str]]:
    dag = build_package_dag(catalog, env, config, require_fed_inputs=True)
    order = topological_order(dag)
    labels = {node.address: f"step_{k}" for k, node in enumerate(order, start=1)}
    params_by_address = {p.address: p for p in dag.inputs}
    steps: list[TraversalStep] = []
    lines: list[str] = []
    for node in order:
        template = vocab.template_for(node.sp_id)
        if template is None:
            raise MissingTemplate(
                f"vocabulary {vocab.name!r} has no template for package {node.sp_id!r}",
                package=node.sp_id,
            )
        label = labels[node.address]
        sp = catalog.software_package(node.sp_id)
        in_values: dict[str, str] = {}
        for p in sp.inputs:
            address = f"{node.address}/{IN}:{p.varname}"
            feed = dag.feed_map.get(address)
            if feed is None:
                value = params_by_address[address].value
                in_values[p.varname] = value if value is not None else ""
            elif feed.node_address is None:
                in_values[p.varname] = feed.literal if feed.literal is not None else ""
            else:
                in_values[p.varname] = _render_ref(
                    vocab.ref_syntax, labels[feed.node_address], feed.out_varname, node.sp_id
                )
        out_names = frozenset(p.varname for p in sp.outputs)
        line = _render_template(
            template,
            label=label,
            sp_id=node.sp_id,
            ref_syntax=vocab.ref_syntax,
            in_values=in_values,
            out_names=out_names,
        )
        lines.append(line)
        steps.append(
            TraversalStep(
                label=label,
                address=node.address,
                package=node.sp_id,
                inputs=tuple(sorted(in_values.items())),
                outputs=tuple(
                    sorted(
                        (v, _render_ref(vocab.ref_syntax, label, v, node.sp_id))
                        for v in out_names
                    )
                ),
            )
        )
    return steps, lines


def generate_script(
    catalog: Catalog,
    env: Environment,
    vocab: DslVocabulary,
    config: object = None,
) -> WorkflowScript:
    """Emit the workflow script: one statement per package occurrence, topologically.

    Output is UTF-8 text with LF line endings, no trailing whitespace, and a single
    final newline; identical inputs always yield byte-identical text.
    """
    steps, lines = _emit(catalog, env, vocab, config)
    blocks: list[str] = []
    if vocab.header is not None:
        blocks.append(vocab.header)
    blocks.extend(lines)
    if vocab.footer is not None:
        blocks.append(vocab.footer)
    physical = [line.rstrip() for block in blocks for line in block.split("\n")]
    return WorkflowScript(
        text="\n".join(physical) + "\n",
        step_index=tuple((s.label, s.address) for s in steps),
    )


def explain_traversal(
    catalog: Catalog,
    env: Environment,
    config: object = None,
    vocab: DslVocabulary | None = None,
) -> tuple[TraversalStep, ...]:
    """The script's structural mirror: emission-ordered rows of resolved bindings."""
    if vocab is None:
        vocab = generic_vocabulary(catalog)
    steps, _ = _emit(catalog, env, vocab, config)
    return tuple(steps)
