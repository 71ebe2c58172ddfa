"""Structural model of the simulation-object hierarchy and its IO derivation rules.

The hierarchy has five levels. A *software package* is the really-executable unit
with named input/output parameters. An *implementing package* wraps one software
package, binding every parameter to a semantic URI and optionally overriding input
values. A *method* is an ordered sequence of implementing packages. A *simulation
model* offers alternative methods, one of which is selected. A *VSO image* owns
properties, simulation models and, for composites, nested child images.

IO sets generalize bottom-up by union: a method's IO is the union over its package
sequence, a model's IO is exactly its selected method's IO, and an image's IO is
the union of its enabled models' IO, its children's IO (recursively), and its
properties (each property acts as one settable pseudo-input and one readable
pseudo-output). Union elements are keyed by occurrence path plus varname, never by
varname alone, so two packages sharing a varname do not merge.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, TypeAlias

from .errors import CyclicContainment, DanglingReference, NoMethodSelected, UnknownMethod

SemanticUri: TypeAlias = str

IN = "in"
OUT = "out"


def child_segment(image_id: str) -> str:
    return f"child:{image_id}"


def model_segment(model_id: str) -> str:
    return f"model:{model_id}"


def method_segment(method_id: str) -> str:
    return f"method:{method_id}"


def package_segment(position: int, ip_id: str) -> str:
    return f"ip:{position}:{ip_id}"


def property_segment(name: str) -> str:
    return f"prop:{name}"


@dataclass(frozen=True)
class InputParamSp:
    """Named input of a software package; ``value=None`` means unset."""

    varname: str
    value: str | None = None


@dataclass(frozen=True)
class OutputParamSp:
    varname: str


@dataclass(frozen=True)
class PerformanceModel:
    """Affine execution-time estimate: fixed seconds plus seconds per data unit."""

    fixed_cost: float
    per_unit_cost: float = 0.0


@dataclass(frozen=True)
class SoftwarePackage:
    id: str
    inputs: tuple[InputParamSp, ...]
    outputs: tuple[OutputParamSp, ...]
    perf: PerformanceModel | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(sorted(self.inputs, key=lambda p: p.varname)))
        object.__setattr__(self, "outputs", tuple(sorted(self.outputs, key=lambda p: p.varname)))


@dataclass(frozen=True)
class InputParamIp:
    """Wrapper over one software-package input: semantic URI plus optional default.

    The effective value is ``default_value`` when present, else the wrapped input's
    own value.
    """

    base: str
    uri: SemanticUri
    default_value: str | None = None


@dataclass(frozen=True)
class OutputParamIp:
    base: str
    uri: SemanticUri


@dataclass(frozen=True)
class ImplementingPackage:
    """Platform-independent wrapper that inherits a software package's parameters.

    Inheritance is total: every input and output of the wrapped package is wrapped
    exactly once.
    """

    id: str
    sp: str
    inputs: tuple[InputParamIp, ...]
    outputs: tuple[OutputParamIp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(sorted(self.inputs, key=lambda p: p.base)))
        object.__setattr__(self, "outputs", tuple(sorted(self.outputs, key=lambda p: p.base)))


@dataclass(frozen=True)
class Method:
    """Ordered sequence of implementing packages realizing one simulation algorithm."""

    id: str
    ip_sequence: tuple[str, ...]


@dataclass(frozen=True)
class SimulationModel:
    """One virtual representation of an object, implemented by alternative methods."""

    id: str
    methods: tuple[str, ...]
    selected_method: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(sorted(set(self.methods))))


@dataclass(frozen=True)
class Property:
    name: str
    uri: SemanticUri
    value: str | None = None


@dataclass(frozen=True)
class VsoImage:
    """Configurable object image: properties, simulation models, optional children.

    A basic image has no children; a composite nests other images on the same
    logical level as its models.
    """

    id: str
    properties: tuple[Property, ...] = ()
    models: tuple[str, ...] = ()
    children: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "properties", tuple(sorted(self.properties, key=lambda p: p.name)))
        object.__setattr__(self, "models", tuple(sorted(set(self.models))))
        object.__setattr__(self, "children", tuple(sorted(set(self.children))))


def _normalize_same_as(pairs: Iterable[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    normalized = {(min(a, b), max(a, b)) for a, b in pairs}
    return tuple(sorted(normalized))


@dataclass(frozen=True)
class Catalog:
    """Immutable snapshot of all authored knowledge: the hierarchy plus sameAs facts."""

    software_packages: tuple[SoftwarePackage, ...] = ()
    implementing_packages: tuple[ImplementingPackage, ...] = ()
    methods: tuple[Method, ...] = ()
    models: tuple[SimulationModel, ...] = ()
    images: tuple[VsoImage, ...] = ()
    same_as: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        for name in ("software_packages", "implementing_packages", "methods", "models", "images"):
            object.__setattr__(self, name, tuple(sorted(getattr(self, name), key=lambda r: r.id)))
        object.__setattr__(self, "same_as", _normalize_same_as(self.same_as))

    @cached_property
    def sp_by_id(self) -> dict[str, SoftwarePackage]:
        return {sp.id: sp for sp in self.software_packages}

    @cached_property
    def ip_by_id(self) -> dict[str, ImplementingPackage]:
        return {ip.id: ip for ip in self.implementing_packages}

    @cached_property
    def method_by_id(self) -> dict[str, Method]:
        return {m.id: m for m in self.methods}

    @cached_property
    def model_by_id(self) -> dict[str, SimulationModel]:
        return {m.id: m for m in self.models}

    @cached_property
    def image_by_id(self) -> dict[str, VsoImage]:
        return {img.id: img for img in self.images}

    def software_package(self, sp_id: str) -> SoftwarePackage:
        try:
            return self.sp_by_id[sp_id]
        except KeyError:
            raise DanglingReference(f"unknown software package {sp_id!r}", id=sp_id) from None

    def implementing_package(self, ip_id: str) -> ImplementingPackage:
        try:
            return self.ip_by_id[ip_id]
        except KeyError:
            raise DanglingReference(f"unknown implementing package {ip_id!r}", id=ip_id) from None

    def method(self, method_id: str) -> Method:
        try:
            return self.method_by_id[method_id]
        except KeyError:
            raise DanglingReference(f"unknown method {method_id!r}", id=method_id) from None

    def model(self, model_id: str) -> SimulationModel:
        try:
            return self.model_by_id[model_id]
        except KeyError:
            raise DanglingReference(f"unknown model {model_id!r}", id=model_id) from None

    def image(self, image_id: str) -> VsoImage:
        try:
            return self.image_by_id[image_id]
        except KeyError:
            raise DanglingReference(f"unknown image {image_id!r}", id=image_id) from None


@dataclass(frozen=True)
class DerivedParam:
    """One generalized IO parameter, identified by its occurrence path.

    ``path`` contains the segments from the derivation root down to the owning
    occurrence (child images, model, method, package position) but not the final
    direction segment; ``address`` joins everything into the canonical string form.
    For inputs ``value`` holds the effective value (None when unset); outputs carry
    no value.
    """

    path: tuple[str, ...]
    direction: str
    varname: str
    uri: SemanticUri
    value: str | None = None

    @property
    def address(self) -> str:
        return "/".join((*self.path, f"{self.direction}:{self.varname}"))

    def prefixed(self, *segments: str) -> "DerivedParam":
        return replace(self, path=(*segments, *self.path))


IoSets: TypeAlias = tuple[tuple[DerivedParam, ...], tuple[DerivedParam, ...]]


def _sorted_params(params: Iterable[DerivedParam]) -> tuple[DerivedParam, ...]:
    return tuple(sorted(params, key=lambda p: p.address))


def effective_value(ip_input: InputParamIp, sp_input: InputParamSp) -> str | None:
    return ip_input.default_value if ip_input.default_value is not None else sp_input.value


def derive_ip_io(ip: ImplementingPackage, catalog: Catalog) -> IoSets:
    """IO parameters of a single implementing package, paths rooted at the package."""
    sp = catalog.software_package(ip.sp)
    sp_inputs = {p.varname: p for p in sp.inputs}
    inputs = []
    for p in ip.inputs:
        base = sp_inputs.get(p.base)
        if base is None:
            raise DanglingReference(
                f"input {p.base!r} of {ip.id!r} does not exist on {sp.id!r}", id=p.base
            )
        inputs.append(DerivedParam((), IN, p.base, p.uri, effective_value(p, base)))
    sp_outputs = {p.varname for p in sp.outputs}
    outputs = []
    for p in ip.outputs:
        if p.base not in sp_outputs:
            raise DanglingReference(
                f"output {p.base!r} of {ip.id!r} does not exist on {sp.id!r}", id=p.base
            )
        outputs.append(DerivedParam((), OUT, p.base, p.uri))
    return _sorted_params(inputs), _sorted_params(outputs)


def derive_method_io(method: Method, catalog: Catalog) -> IoSets:
    """Union of package IO over the sequence, keyed by (position, package, varname).

    The same package appearing twice in a sequence contributes distinct occurrences.
    """
    inputs: list[DerivedParam] = []
    outputs: list[DerivedParam] = []
    for position, ip_id in enumerate(method.ip_sequence):
        ip = catalog.implementing_package(ip_id)
        seg = package_segment(position, ip_id)
        ip_inputs, ip_outputs = derive_ip_io(ip, catalog)
        inputs.extend(p.prefixed(seg) for p in ip_inputs)
        outputs.extend(p.prefixed(seg) for p in ip_outputs)
    return _sorted_params(inputs), _sorted_params(outputs)


def derive_model_io(
    model: SimulationModel,
    catalog: Catalog,
    method_choice: Mapping[str, str] | None = None,
) -> IoSets:
    """IO of a simulation model: exactly the IO of its (possibly overridden) method."""
    chosen = model.selected_method
    if method_choice and model.id in method_choice:
        chosen = method_choice[model.id]
    if not chosen:
        raise NoMethodSelected(f"model {model.id!r} has no selected method", model=model.id)
    if chosen not in model.methods:
        raise UnknownMethod(
            f"method {chosen!r} is not offered by model {model.id!r}",
            model=model.id,
            method=chosen,
        )
    return derive_method_io(catalog.method(chosen), catalog)


def image_model_ids(image: VsoImage, catalog: Catalog) -> tuple[str, ...]:
    """All model ids reachable in the image's containment tree (root included)."""
    seen: list[str] = []
    stack: list[str] = []

    def walk(img: VsoImage) -> None:
        if img.id in stack:
            raise CyclicContainment(
                f"image containment cycle through {img.id!r}", cycle=[*stack, img.id]
            )
        stack.append(img.id)
        seen.extend(img.models)
        for child_id in img.children:
            walk(catalog.image(child_id))
        stack.pop()

    walk(image)
    return tuple(sorted(set(seen)))


def derive_vso_io(
    image: VsoImage,
    enabled_models: Iterable[str],
    catalog: Catalog,
    method_choice: Mapping[str, str] | None = None,
) -> IoSets:
    """Generalized IO of an object image.

    Inputs are the union of every enabled model's inputs, every child's inputs
    (recursively) and one pseudo-input per property; outputs mirror that with the
    models' and children's outputs plus one pseudo-output per property. The
    ``enabled_models`` set ranges over the whole containment tree; a model id that
    is nowhere in the tree is a dangling reference.
    """
    enabled = set(enabled_models)
    known = set(image_model_ids(image, catalog))  # also rejects containment cycles
    unknown = enabled - known
    if unknown:
        raise DanglingReference(
            f"enabled models {sorted(unknown)} are not part of image {image.id!r}",
            image=image.id,
            models=sorted(unknown),
        )
    return _derive_vso_io(image, enabled, catalog, method_choice or {}, ())


def _derive_vso_io(
    image: VsoImage,
    enabled: set[str],
    catalog: Catalog,
    method_choice: Mapping[str, str],
    stack: tuple[str, ...],
) -> IoSets:
    if image.id in stack:
        raise CyclicContainment(
            f"image containment cycle through {image.id!r}", cycle=[*stack, image.id]
        )
    inputs: list[DerivedParam] = []
    outputs: list[DerivedParam] = []
    for prop in image.properties:
        seg = property_segment(prop.name)
        inputs.append(DerivedParam((seg,), IN, prop.name, prop.uri, prop.value))
        outputs.append(DerivedParam((seg,), OUT, prop.name, prop.uri))
    for model_id in image.models:
        if model_id not in enabled:
            continue
        model = catalog.model(model_id)
        chosen = method_choice.get(model_id, model.selected_method)
        if chosen not in model.methods:
            raise UnknownMethod(
                f"method {chosen!r} is not offered by model {model_id!r}",
                model=model_id,
                method=chosen,
            )
        m_inputs, m_outputs = derive_method_io(catalog.method(chosen), catalog)
        prefix = (model_segment(model_id), method_segment(chosen))
        inputs.extend(p.prefixed(*prefix) for p in m_inputs)
        outputs.extend(p.prefixed(*prefix) for p in m_outputs)
    for child_id in image.children:
        child = catalog.image(child_id)
        c_inputs, c_outputs = _derive_vso_io(
            child, enabled, catalog, method_choice, (*stack, image.id)
        )
        seg = child_segment(child_id)
        inputs.extend(p.prefixed(seg) for p in c_inputs)
        outputs.extend(p.prefixed(seg) for p in c_outputs)
    return _sorted_params(inputs), _sorted_params(outputs)


# --- catalog validation -------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str

    def render(self) -> str:
        return f"{self.code}: {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        return "\n".join(v.render() for v in self.violations)

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)


def validate_catalog(catalog: Catalog) -> ValidationReport:
    """Check every structural invariant; the report lists all violations found.

    An empty report means the catalog is well-formed. The check is pure and
    idempotent; it never raises for content problems.
    """
    out: list[Violation] = []

    def bad(code: str, path: str, message: str) -> None:
        out.append(Violation(code, path, message))

    def check_unique_ids(records: Iterable[object], kind: str) -> None:
        seen: set[str] = set()
        for record in records:
            rid = record.id  # type: ignore[attr-defined]
            if rid in seen:
                bad("DuplicateId", f"{kind}[{rid}]", f"id {rid!r} appears more than once")
            seen.add(rid)
            if not rid:
                bad("DuplicateId", kind, "record with empty id")

    check_unique_ids(catalog.software_packages, "software_packages")
    check_unique_ids(catalog.implementing_packages, "implementing_packages")
    check_unique_ids(catalog.methods, "methods")
    check_unique_ids(catalog.models, "models")
    check_unique_ids(catalog.images, "images")

    for sp in catalog.software_packages:
        path = f"software_packages[{sp.id}]"
        if not sp.inputs:
            bad("MissingIO", path, "package declares no inputs; one input is mandatory")
        if not sp.outputs:
            bad("MissingIO", path, "package declares no outputs; one output is mandatory")
        for label, params in (("inputs", sp.inputs), ("outputs", sp.outputs)):
            names = [p.varname for p in params]
            for name in sorted({n for n in names if names.count(n) > 1}):
                bad("DuplicateVarname", f"{path}.{label}", f"varname {name!r} is not unique")
            if any(not n for n in names):
                bad("DuplicateVarname", f"{path}.{label}", "empty varname")
        if sp.perf is not None:
            finite = all(
                isinstance(c, (int, float)) and c == c and abs(c) != float("inf")
                for c in (sp.perf.fixed_cost, sp.perf.per_unit_cost)
            )
            if not finite or sp.perf.fixed_cost < 0 or sp.perf.per_unit_cost < 0:
                bad("InvalidPerformanceModel", f"{path}.perf", "costs must be finite and >= 0")

    for ip in catalog.implementing_packages:
        path = f"implementing_packages[{ip.id}]"
        sp = catalog.sp_by_id.get(ip.sp)
        if sp is None:
            bad("DanglingReference", path, f"{ip.id}→{ip.sp}: unknown software package")
            continue
        for label, wrapped, declared in (
            ("inputs", [p.base for p in ip.inputs], [p.varname for p in sp.inputs]),
            ("outputs", [p.base for p in ip.outputs], [p.varname for p in sp.outputs]),
        ):
            for base in wrapped:
                if base not in declared:
                    bad(
                        "DanglingReference",
                        f"{path}.{label}",
                        f"{ip.id}→{base}: no such parameter on {sp.id}",
                    )
            for name in declared:
                count = wrapped.count(name)
                if count != 1:
                    bad(
                        "PartialInheritance",
                        f"{path}.{label}",
                        f"parameter {name!r} of {sp.id} wrapped {count} times (must be exactly 1)",
                    )
        for p in ip.inputs:
            if not p.uri:
                bad("MissingUri", f"{path}.inputs[{p.base}]", "input lacks a semantic URI")
        for p in ip.outputs:
            if not p.uri:
                bad("MissingUri", f"{path}.outputs[{p.base}]", "output lacks a semantic URI")

    for method in catalog.methods:
        path = f"methods[{method.id}]"
        if not method.ip_sequence:
            bad("EmptySequence", path, "method has an empty package sequence")
        for ip_id in method.ip_sequence:
            if ip_id not in catalog.ip_by_id:
                bad(
                    "DanglingReference",
                    f"{path}.ip_sequence",
                    f"{method.id}→{ip_id}: unknown implementing package",
                )

    for model in catalog.models:
        path = f"models[{model.id}]"
        if not model.methods:
            bad("EmptyMethods", path, "model offers no methods")
        for method_id in model.methods:
            if method_id not in catalog.method_by_id:
                bad(
                    "DanglingReference",
                    f"{path}.methods",
                    f"{model.id}→{method_id}: unknown method",
                )
        if model.selected_method not in model.methods:
            bad(
                "SelectedMethodNotInModel",
                f"{path}.selected_method",
                f"selected method {model.selected_method!r} is not one of the model's methods",
            )

    for image in catalog.images:
        path = f"images[{image.id}]"
        names = [p.name for p in image.properties]
        for name in sorted({n for n in names if names.count(n) > 1}):
            bad("DuplicateProperty", f"{path}.properties", f"property {name!r} is not unique")
        for prop in image.properties:
            if not prop.uri:
                bad("MissingUri", f"{path}.properties[{prop.name}]", "property lacks a URI")
        for model_id in image.models:
            if model_id not in catalog.model_by_id:
                bad(
                    "DanglingReference", f"{path}.models", f"{image.id}→{model_id}: unknown model"
                )
        for child_id in image.children:
            if child_id not in catalog.image_by_id:
                bad(
                    "DanglingReference",
                    f"{path}.children",
                    f"{image.id}→{child_id}: unknown child image",
                )

    for cycle in _containment_cycles(catalog):
        bad(
            "CyclicContainment",
            f"images[{cycle[0]}]",
            "containment cycle: " + " → ".join(cycle),
        )

    for pair in catalog.same_as:
        if not pair[0] or not pair[1]:
            bad("MissingUri", "same_as", f"assertion {pair!r} contains an empty URI")

    return ValidationReport(tuple(out))


def _containment_cycles(catalog: Catalog) -> list[list[str]]:
    """Find one representative cycle per strongly-connected knot in the child graph."""
    cycles: list[list[str]] = []
    colors: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[str] = []

    def visit(image_id: str) -> None:
        state = colors.get(image_id)
        if state == 1:
            start = stack.index(image_id)
            cycles.append([*stack[start:], image_id])
            return
        if state == 2:
            return
        colors[image_id] = 1
        stack.append(image_id)
        image = catalog.image_by_id.get(image_id)
        if image is not None:
            for child_id in image.children:
                if child_id in catalog.image_by_id:
                    visit(child_id)
        stack.pop()
        colors[image_id] = 2

    for image in catalog.images:
        visit(image.id)
    # Deduplicate cycles reported from multiple entry points.
    unique: list[list[str]] = []
    seen_sets: set[frozenset[str]] = set()
    for cycle in cycles:
        key = frozenset(cycle)
        if key not in seen_sets:
            seen_sets.add(key)
            unique.append(cycle)
    return unique


