"""Configuration enumeration, counting, and time comparison."""

from __future__ import annotations

import random

import pytest

import oracles
from randgen import random_catalog, random_environment
from vsoflow import composer, configurator
from vsoflow.configurator import (
    Configuration,
    compare_configurations,
    configuration_axes,
    configuration_by_key,
    count_configurations,
    current_configuration,
    enumerate_configurations,
)
from vsoflow.errors import UnknownConfiguration
from vsoflow.model import (
    Catalog,
    ImplementingPackage,
    InputParamIp,
    InputParamSp,
    Method,
    OutputParamIp,
    OutputParamSp,
    PerformanceModel,
    SimulationModel,
    SoftwarePackage,
    VsoImage,
)
from vsoflow.registry import EquivalenceRegistry
from vsoflow.store import catalog_version


def single_model_catalog(n_methods: int) -> Catalog:
    return Catalog(
        software_packages=(
            SoftwarePackage("sp", (InputParamSp("x", "0"),), (OutputParamSp("y"),)),
        ),
        implementing_packages=(
            ImplementingPackage(
                "ip", "sp", (InputParamIp("x", "urn:u"),), (OutputParamIp("y", "urn:v"),)
            ),
        ),
        methods=tuple(Method(f"s{i}", ("ip",)) for i in range(n_methods)),
        models=(
            SimulationModel("m", tuple(f"s{i}" for i in range(n_methods)), "s0"),
        ),
        images=(VsoImage(id="o", models=("m",)),),
    )


def test_single_model_three_methods_three_configs():
    catalog = single_model_catalog(3)
    env = composer.new_environment("e", catalog_version(catalog))
    env, _ = composer.instantiate(catalog, env, "o")
    configs = enumerate_configurations(catalog, env)
    assert len(configs) == 3
    assert [c.key for c in configs] == ["o#1:m=s0", "o#1:m=s1", "o#1:m=s2"]


def test_demo_environment_has_twelve_configurations(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, _ = composer.instantiate(demo_catalog, env, "o1")
    env, _ = composer.instantiate(demo_catalog, env, "o2")
    # m1 offers 2 methods, m2 1, m3 2, m4 3: 2*1*2*3
    assert count_configurations(demo_catalog, env) == 12
    assert len(enumerate_configurations(demo_catalog, env)) == 12


def test_empty_environment_single_empty_configuration(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    configs = enumerate_configurations(demo_catalog, env)
    assert configs == (Configuration(()),)
    assert count_configurations(demo_catalog, env) == 1


def test_disabling_model_divides_count(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, o2 = composer.instantiate(demo_catalog, env, "o2")
    before = count_configurations(demo_catalog, env)
    env = composer.toggle_model(demo_catalog, env, o2, "m4", False)
    after = count_configurations(demo_catalog, env)
    assert before == after * len(demo_catalog.model("m4").methods)


def test_count_matches_bruteforce_on_random_environments():
    rng = random.Random(424)
    for _ in range(30):
        catalog = random_catalog(rng)
        env = random_environment(rng, catalog, max_connections=0)
        axes = [(key, list(methods)) for key, methods in configuration_axes(catalog, env)]
        vectors = oracles.enumerate_choice_vectors(axes)
        configs = enumerate_configurations(catalog, env)
        assert count_configurations(catalog, env) == len(vectors)
        assert len(configs) == len(vectors)
        assert [c.choices for c in configs] == [tuple(v) for v in vectors]


def test_enumeration_is_lexicographic_and_deterministic(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, _ = composer.instantiate(demo_catalog, env, "o1")
    configs = enumerate_configurations(demo_catalog, env)
    keys = [c.key for c in configs]
    assert keys == sorted(keys)
    assert keys == [c.key for c in enumerate_configurations(demo_catalog, env)]


def test_configuration_by_key_and_index(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, _ = composer.instantiate(demo_catalog, env, "o2")
    configs = enumerate_configurations(demo_catalog, env)
    assert configuration_by_key(demo_catalog, env, configs[1].key) == configs[1]
    assert configuration_by_key(demo_catalog, env, "2") == configs[1]
    with pytest.raises(UnknownConfiguration):
        configuration_by_key(demo_catalog, env, "99")
    with pytest.raises(UnknownConfiguration):
        configuration_by_key(demo_catalog, env, "o2#1:m4=nope")


def chain_cost_catalog():
    """Three chained packages with fixed costs 2, 3, 5."""
    sps, ips = [], []
    for i, cost in enumerate((2.0, 3.0, 5.0)):
        sps.append(
            SoftwarePackage(
                f"sp{i}",
                (InputParamSp("x", "0" if i == 0 else None),),
                (OutputParamSp("y"),),
                perf=PerformanceModel(fixed_cost=cost),
            )
        )
        ips.append(
            ImplementingPackage(
                f"ip{i}",
                f"sp{i}",
                (InputParamIp("x", f"urn:c:{i}"),),
                (OutputParamIp("y", f"urn:c:{i + 1}"),),
            )
        )
    return Catalog(
        software_packages=tuple(sps),
        implementing_packages=tuple(ips),
        methods=(Method("s", ("ip0", "ip1", "ip2")),),
        models=(SimulationModel("m", ("s",), "s"),),
        images=(VsoImage(id="o", models=("m",)),),
    )


def test_linear_chain_total_equals_critical_path():
    catalog = chain_cost_catalog()
    env = composer.new_environment("e", catalog_version(catalog))
    env, _ = composer.instantiate(catalog, env, "o")
    reports = compare_configurations(catalog, env)
    assert len(reports) == 1
    report = reports[0]
    assert report.total_time == pytest.approx(10.0)
    assert report.critical_path_time == pytest.approx(10.0)
    assert report.package_count == 3
    assert report.missing_perf == ()


def branch_join_catalog():
    """Two parallel 3s sources joining into a 1s sink with two inputs."""
    sps = (
        SoftwarePackage(
            "a", (InputParamSp("x", "1"),), (OutputParamSp("y"),), perf=PerformanceModel(3.0)
        ),
        SoftwarePackage(
            "b", (InputParamSp("x", "1"),), (OutputParamSp("y"),), perf=PerformanceModel(3.0)
        ),
        SoftwarePackage(
            "c",
            (InputParamSp("p"), InputParamSp("q")),
            (OutputParamSp("r"),),
            perf=PerformanceModel(1.0),
        ),
    )
    ips = (
        ImplementingPackage(
            "ipa", "a", (InputParamIp("x", "urn:j:xa"),), (OutputParamIp("y", "urn:j:qa"),)
        ),
        ImplementingPackage(
            "ipb", "b", (InputParamIp("x", "urn:j:xb"),), (OutputParamIp("y", "urn:j:qb"),)
        ),
        ImplementingPackage(
            "ipc",
            "c",
            (InputParamIp("p", "urn:j:qa"), InputParamIp("q", "urn:j:qb")),
            (OutputParamIp("r", "urn:j:r"),),
        ),
    )
    return Catalog(
        software_packages=sps,
        implementing_packages=ips,
        methods=(Method("s", ("ipa", "ipb", "ipc")),),
        models=(SimulationModel("m", ("s",), "s"),),
        images=(VsoImage(id="o", models=("m",)),),
    )


def test_parallel_branches_critical_path():
    catalog = branch_join_catalog()
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = composer.new_environment("e", catalog_version(catalog))
    env, o = composer.instantiate(catalog, env, "o")
    base = f"{o}/model:m/method:s"
    # b -> c comes from adjacency (qb); a -> c needs the stored connection (qa)
    env = composer.connect(
        catalog, registry, env, f"{base}/ip:0:ipa/out:y", f"{base}/ip:2:ipc/in:p"
    )
    report = compare_configurations(catalog, env)[0]
    assert report.total_time == pytest.approx(7.0)
    assert report.critical_path_time == pytest.approx(4.0)


def test_per_unit_cost_scales_with_input_count():
    catalog = branch_join_catalog()
    sink = catalog.software_package("c")
    boosted = Catalog(
        software_packages=(
            catalog.software_package("a"),
            catalog.software_package("b"),
            SoftwarePackage(
                "c", sink.inputs, sink.outputs, perf=PerformanceModel(1.0, per_unit_cost=0.5)
            ),
        ),
        implementing_packages=catalog.implementing_packages,
        methods=catalog.methods,
        models=catalog.models,
        images=catalog.images,
    )
    env = composer.new_environment("e", catalog_version(boosted))
    env, _ = composer.instantiate(boosted, env, "o")
    report = compare_configurations(boosted, env)[0]
    # sink has two inputs: 1.0 + 0.5 * 2
    assert report.total_time == pytest.approx(3.0 + 3.0 + 2.0)


def test_missing_perf_flagged_and_costed_zero(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, o1 = composer.instantiate(demo_catalog, env, "o1")
    env = composer.toggle_model(demo_catalog, env, o1, "m2", False)
    env = composer.toggle_model(demo_catalog, env, o1, "m3", False)
    env = composer.choose_method(demo_catalog, env, o1, "m1", "s1")
    config = current_configuration(env)
    report = configurator.estimate(demo_catalog, env, config)
    assert report.missing_perf == ("sp1", "sp2", "sp3")
    assert report.total_time == 0.0


def test_compare_sorts_ascending_with_key_tiebreak(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, _ = composer.instantiate(demo_catalog, env, "o1")
    env, _ = composer.instantiate(demo_catalog, env, "o2")
    for criterion in ("total", "critical-path"):
        reports = compare_configurations(demo_catalog, env, criterion=criterion)
        assert len(reports) == 12
        values = [
            r.total_time if criterion == "total" else r.critical_path_time for r in reports
        ]
        assert values == sorted(values)
        pairs = [(v, r.config.key) for v, r in zip(values, reports)]
        assert pairs == sorted(pairs)
        # a permutation of the full enumeration
        assert sorted(r.config.key for r in reports) == sorted(
            c.key for c in enumerate_configurations(demo_catalog, env)
        )


def test_all_zero_costs_order_by_key():
    catalog = single_model_catalog(3)
    env = composer.new_environment("e", catalog_version(catalog))
    env, _ = composer.instantiate(catalog, env, "o")
    reports = compare_configurations(catalog, env)
    assert [r.config.key for r in reports] == sorted(r.config.key for r in reports)
    assert all(r.total_time == 0.0 for r in reports)


def test_critical_path_never_exceeds_total():
    rng = random.Random(9199)
    for _ in range(20):
        catalog = random_catalog(rng, with_perf=True)
        env = random_environment(rng, catalog, acyclic_only=True)
        for report in compare_configurations(catalog, env):
            assert report.critical_path_time <= report.total_time + 1e-9
            assert report.total_time >= 0.0


def test_unknown_criterion_rejected(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    with pytest.raises(ValueError):
        compare_configurations(demo_catalog, env, criterion="latency")
