"""Enumeration and comparison of alternative environment configurations.

A configuration fixes one method per enabled model of every instance; the set of
enabled models itself belongs to the environment and is not enumerated. The number
of configurations is therefore the product of method counts across all (instance,
enabled model) axes. Configurations are compared by estimated execution time over
the package DAG each one induces: either the plain sum of package costs or the
critical path under unlimited parallelism.

A package's cost is its fixed cost plus its per-unit cost times the number of
declared inputs (input cardinality stands in for data volume; the environment does
not model data sizes). Packages without a performance model cost zero and are
flagged in the report.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from . import codegen
from .composer import Environment
from .errors import UnknownConfiguration
from .model import Catalog

CRITERIA = ("total", "critical-path")


@dataclass(frozen=True)
class Configuration:
    """One resolved choice of method per (instance, enabled model) axis."""

    choices: tuple[tuple[tuple[str, str], str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(sorted(self.choices)))

    @cached_property
    def choice_map(self) -> dict[tuple[str, str], str]:
        return dict(self.choices)

    def method_for(self, instance_id: str, model_id: str) -> str | None:
        return self.choice_map.get((instance_id, model_id))

    @property
    def key(self) -> str:
        return ";".join(f"{inst}:{model}={method}" for (inst, model), method in self.choices)


@dataclass(frozen=True)
class ConfigurationReport:
    config: Configuration
    total_time: float
    critical_path_time: float
    package_count: int
    missing_perf: tuple[str, ...] = ()


Axis = tuple[tuple[str, str], tuple[str, ...]]


def configuration_axes(catalog: Catalog, env: Environment) -> tuple[Axis, ...]:
    """The ordered choice axes: ((instance, model), methods) sorted lexicographically."""
    axes = []
    for inst in env.instances:
        for model_id in sorted(inst.enabled_models):
            model = catalog.model(model_id)
            axes.append(((inst.instance_id, model_id), tuple(model.methods)))
    axes.sort(key=lambda a: a[0])
    return tuple(axes)


def enumerate_configurations(catalog: Catalog, env: Environment) -> tuple[Configuration, ...]:
    """Every configuration, in lexicographic order of its method-choice vector.

    An environment with no choice axes yields the single empty configuration.
    """
    axes = configuration_axes(catalog, env)
    keys = [axis[0] for axis in axes]
    return tuple(
        Configuration(tuple(zip(keys, combo)))
        for combo in itertools.product(*(axis[1] for axis in axes))
    )


def count_configurations(catalog: Catalog, env: Environment) -> int:
    """Number of configurations, computed without materializing them."""
    count = 1
    for _, methods in configuration_axes(catalog, env):
        count *= len(methods)
    return count


def current_configuration(env: Environment) -> Configuration:
    """The configuration the instances currently hold via their method choices."""
    choices = []
    for inst in env.instances:
        for model_id in sorted(inst.enabled_models):
            choices.append(((inst.instance_id, model_id), inst.choice_map[model_id]))
    return Configuration(tuple(choices))


def configuration_by_key(catalog: Catalog, env: Environment, key: str) -> Configuration:
    """Look a configuration up by its canonical key or 1-based enumeration index."""
    configs = enumerate_configurations(catalog, env)
    if key.isdigit():
        index = int(key)
        if not 1 <= index <= len(configs):
            raise UnknownConfiguration(
                f"configuration index {index} out of range 1..{len(configs)}", key=key
            )
        return configs[index - 1]
    for config in configs:
        if config.key == key:
            return config
    raise UnknownConfiguration(f"no configuration with key {key!r}", key=key)


def package_cost(catalog: Catalog, sp_id: str) -> tuple[float, bool]:
    """Estimated seconds for one package occurrence; False flags missing perf data."""
    sp = catalog.software_package(sp_id)
    if sp.perf is None:
        return 0.0, False
    return sp.perf.fixed_cost + sp.perf.per_unit_cost * len(sp.inputs), True


def estimate(catalog: Catalog, env: Environment, config: Configuration) -> ConfigurationReport:
    """Time estimates over the package DAG induced by one configuration."""
    dag = codegen.build_package_dag(catalog, env, config, require_fed_inputs=False)
    costs: dict[str, float] = {}
    missing: set[str] = set()
    for node in dag.nodes:
        cost, known = package_cost(catalog, node.sp_id)
        costs[node.address] = cost
        if not known:
            missing.add(node.sp_id)
    total = sum(costs.values())
    finish: dict[str, float] = {}
    preds: dict[str, list[str]] = {node.address: [] for node in dag.nodes}
    for a, b in dag.edges:
        preds[b].append(a)
    for node in codegen.topological_order(dag):
        addr = node.address
        finish[addr] = costs[addr] + max((finish[p] for p in preds[addr]), default=0.0)
    critical = max(finish.values(), default=0.0)
    return ConfigurationReport(
        config=config,
        total_time=total,
        critical_path_time=critical,
        package_count=len(dag.nodes),
        missing_perf=tuple(sorted(missing)),
    )


def compare_configurations(
    catalog: Catalog,
    env: Environment,
    configs: Sequence[Configuration] | None = None,
    criterion: str = "total",
) -> tuple[ConfigurationReport, ...]:
    """Reports for the given (default: all) configurations, best first.

    Sorted ascending by the chosen criterion with the configuration key as the
    tie-break, so the result is a deterministic permutation of the input.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    if configs is None:
        configs = enumerate_configurations(catalog, env)
    reports = [estimate(catalog, env, config) for config in configs]
    value = (
        (lambda r: r.total_time) if criterion == "total" else (lambda r: r.critical_path_time)
    )
    reports.sort(key=lambda r: (value(r), r.config.key))
    return tuple(reports)
