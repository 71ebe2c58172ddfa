"""Package-DAG construction and deterministic script generation."""

from __future__ import annotations

import random
import re

import pytest

from conftest import GOLDEN_CHAIN_SCRIPT
from randgen import random_catalog, random_environment
from vsoflow import codegen, composer
from vsoflow.codegen import (
    DslVocabulary,
    build_package_dag,
    explain_traversal,
    generate_script,
    generic_vocabulary,
    topological_order,
)
from vsoflow.errors import (
    CycleDetected,
    DisconnectedRequiredInput,
    MissingTemplate,
    UnknownConfiguration,
    UnresolvedPlaceholder,
)
from vsoflow.model import (
    Catalog,
    ImplementingPackage,
    InputParamIp,
    InputParamSp,
    Method,
    OutputParamIp,
    OutputParamSp,
    SimulationModel,
    SoftwarePackage,
    VsoImage,
)
from vsoflow.registry import EquivalenceRegistry
from vsoflow.store import catalog_version


def test_single_package_dag(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, o1 = composer.instantiate(demo_catalog, env, "o1")
    env = composer.toggle_model(demo_catalog, env, o1, "m1", False)
    env = composer.toggle_model(demo_catalog, env, o1, "m2", False)
    dag = build_package_dag(demo_catalog, env, require_fed_inputs=False)
    assert len(dag.nodes) == 1
    assert dag.nodes[0].ip_id == "ip10"
    assert dag.edges == frozenset()


def test_chain_fixture_is_a_five_node_chain(demo_catalog, chain_env, addresses):
    dag = build_package_dag(demo_catalog, chain_env)
    occ = {n.ip_id: n.address for n in dag.nodes}
    assert sorted(occ) == ["ip10", "ip14", "ip15", "ip4", "ip5"]
    assert dag.edges == frozenset(
        {
            (occ["ip4"], occ["ip5"]),
            (occ["ip5"], occ["ip10"]),
            (occ["ip10"], occ["ip14"]),
            (occ["ip14"], occ["ip15"]),
        }
    )


def test_back_edge_raises_cycle_detected():
    catalog = Catalog(
        software_packages=(
            SoftwarePackage("f", (InputParamSp("x", "0"),), (OutputParamSp("y"),)),
            SoftwarePackage("g", (InputParamSp("x"),), (OutputParamSp("y"),)),
        ),
        implementing_packages=(
            ImplementingPackage(
                "ipf", "f", (InputParamIp("x", "urn:cy:b"),), (OutputParamIp("y", "urn:cy:a"),)
            ),
            ImplementingPackage(
                "ipg", "g", (InputParamIp("x", "urn:cy:a"),), (OutputParamIp("y", "urn:cy:b"),)
            ),
        ),
        methods=(Method("s", ("ipf", "ipg")),),
        models=(SimulationModel("m", ("s",), "s"),),
        images=(VsoImage(id="o", models=("m",)),),
    )
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = composer.new_environment("e", catalog_version(catalog))
    env, o = composer.instantiate(catalog, env, "o")
    base = f"{o}/model:m/method:s"
    # adjacency already gives ipf -> ipg (urn:cy:a); feed ipg's output back into ipf
    env = composer.connect(
        catalog, registry, env, f"{base}/ip:1:ipg/out:y", f"{base}/ip:0:ipf/in:x"
    )
    with pytest.raises(CycleDetected) as exc:
        build_package_dag(catalog, env, require_fed_inputs=False)
    assert len(exc.value.details["cycle"]) >= 2


def test_generated_chain_script_matches_golden(demo_catalog, chain_env):
    vocab = generic_vocabulary(demo_catalog)
    script = generate_script(demo_catalog, chain_env, vocab)
    assert script.text == GOLDEN_CHAIN_SCRIPT
    assert [label for label, _ in script.step_index] == [
        "step_1",
        "step_2",
        "step_3",
        "step_4",
        "step_5",
    ]


def test_regeneration_is_byte_identical(demo_catalog, chain_env):
    vocab = generic_vocabulary(demo_catalog)
    first = generate_script(demo_catalog, chain_env, vocab).text.encode()
    for _ in range(3):
        assert generate_script(demo_catalog, chain_env, vocab).text.encode() == first


def test_single_statement_with_header_and_footer():
    catalog = Catalog(
        software_packages=(
            SoftwarePackage("pkg", (InputParamSp("x"),), (OutputParamSp("y"),)),
        ),
        implementing_packages=(
            ImplementingPackage(
                "ipk",
                "pkg",
                (InputParamIp("x", "urn:one", default_value="42"),),
                (OutputParamIp("y", "urn:two"),),
            ),
        ),
        methods=(Method("s", ("ipk",)),),
        models=(SimulationModel("m", ("s",), "s"),),
        images=(VsoImage(id="o", models=("m",)),),
    )
    vocab = DslVocabulary(
        name="demo",
        statement_templates=(("pkg", "{step} = pkg(x={in:x})"),),
        header="# begin",
        footer="# end",
    )
    env = composer.new_environment("e", catalog_version(catalog))
    env, _ = composer.instantiate(catalog, env, "o")
    script = generate_script(catalog, env, vocab)
    assert script.text == "# begin\nstep_1 = pkg(x=42)\n# end\n"


def test_chain_references_previous_step(demo_catalog, chain_env):
    script = generate_script(demo_catalog, chain_env, generic_vocabulary(demo_catalog))
    lines = script.text.splitlines()
    for k, line in enumerate(lines[1:], start=2):
        assert f"(x=step_{k - 1}.y)" in line


def test_explain_traversal_mirrors_script(demo_catalog, chain_env):
    rows = explain_traversal(demo_catalog, chain_env)
    script = generate_script(demo_catalog, chain_env, generic_vocabulary(demo_catalog))
    assert [(r.label, r.address) for r in rows] == list(script.step_index)
    assert rows[0].inputs == (("x", "42"),)
    assert rows[1].inputs == (("x", "step_1.y"),)
    assert rows[0].outputs == (("y", "step_1.y"),)


def test_explain_traversal_empty_configuration(demo_catalog):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, o2 = composer.instantiate(demo_catalog, env, "o2")
    env = composer.toggle_model(demo_catalog, env, o2, "m4", False)
    assert explain_traversal(demo_catalog, env) == ()


def test_branch_heads_precede_join():
    from test_configurator import branch_join_catalog

    catalog = branch_join_catalog()
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = composer.new_environment("e", catalog_version(catalog))
    env, o = composer.instantiate(catalog, env, "o")
    base = f"{o}/model:m/method:s"
    env = composer.connect(
        catalog, registry, env, f"{base}/ip:0:ipa/out:y", f"{base}/ip:2:ipc/in:p"
    )
    rows = explain_traversal(catalog, env)
    packages = [r.package for r in rows]
    assert packages.index("a") < packages.index("c")
    assert packages.index("b") < packages.index("c")


def test_missing_template(demo_catalog, chain_env):
    vocab = DslVocabulary(name="sparse", statement_templates=(("sp4", "{step} = sp4({in:x})"),))
    with pytest.raises(MissingTemplate) as exc:
        generate_script(demo_catalog, chain_env, vocab)
    assert exc.value.details["package"]


def test_unresolved_placeholder(demo_catalog, chain_env):
    templates = tuple(
        (sp.id, f"{{step}} = {sp.id}(x={{in:nope}})") for sp in demo_catalog.software_packages
    )
    vocab = DslVocabulary(name="bad", statement_templates=templates)
    with pytest.raises(UnresolvedPlaceholder):
        generate_script(demo_catalog, chain_env, vocab)


def test_unknown_placeholder_token(demo_catalog, chain_env):
    templates = tuple(
        (sp.id, f"{{step}} = {sp.id}({{weird}})") for sp in demo_catalog.software_packages
    )
    with pytest.raises(UnresolvedPlaceholder):
        generate_script(demo_catalog, chain_env, DslVocabulary("bad", templates))


def test_disconnected_required_input(demo_catalog, demo_registry, addresses):
    env = composer.new_environment("e", catalog_version(demo_catalog))
    env, o1 = composer.instantiate(demo_catalog, env, "o1")
    env = composer.toggle_model(demo_catalog, env, o1, "m2", False)
    # ip10.in (w2) has no value and nothing feeds it without the chain connection
    with pytest.raises(DisconnectedRequiredInput):
        generate_script(demo_catalog, env, generic_vocabulary(demo_catalog))
    # the configurator's relaxed DAG build still works
    dag = build_package_dag(demo_catalog, env, require_fed_inputs=False)
    assert len(dag.nodes) == 3


def test_config_must_cover_enabled_models(demo_catalog, chain_env):
    with pytest.raises(UnknownConfiguration):
        build_package_dag(demo_catalog, chain_env, {("o1#1", "m1"): "s2"})


def test_stored_connection_to_unselected_occurrence_is_dropped(
    demo_catalog, chain_env
):
    # choosing s4 for m3 drops both chain connections that touch ip10
    env = composer.choose_method(demo_catalog, chain_env, "o1#1", "m3", "s4")
    dag = build_package_dag(demo_catalog, env, require_fed_inputs=False)
    ip_ids = {n.ip_id for n in dag.nodes}
    assert ip_ids == {"ip4", "ip5", "ip8", "ip9", "ip14", "ip15"}
    touched = {a for edge in dag.edges for a in edge}
    assert not any("ip10" in a for a in touched)


def test_property_fed_input_renders_literal():
    from vsoflow.model import Property

    catalog = Catalog(
        software_packages=(
            SoftwarePackage("sink", (InputParamSp("x"),), (OutputParamSp("y"),)),
        ),
        implementing_packages=(
            ImplementingPackage(
                "ips", "sink", (InputParamIp("x", "urn:pp"),), (OutputParamIp("y", "urn:out"),)
            ),
        ),
        methods=(Method("s", ("ips",)),),
        models=(SimulationModel("m", ("s",), "s"),),
        images=(
            VsoImage(id="cfg", properties=(Property("depth", "urn:pp", "12"),)),
            VsoImage(id="run", models=("m",)),
        ),
    )
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = composer.new_environment("e", catalog_version(catalog))
    env, cfg = composer.instantiate(catalog, env, "cfg")
    env, run = composer.instantiate(catalog, env, "run")
    env = composer.connect(
        catalog, registry, env, f"{cfg}/prop:depth/out:depth", f"{run}/model:m/method:s/ip:0:ips/in:x"
    )
    script = generate_script(catalog, env, generic_vocabulary(catalog))
    assert script.text == "step_1 = sink(x=12)\n"


def ref_pattern(text):
    return re.findall(r"step_(\d+)\.(\w+)", text)


def test_random_environments_topological_and_deterministic():
    rng = random.Random(31337)
    checked = 0
    for _ in range(40):
        catalog = random_catalog(rng, value_prob=1.0)
        env = random_environment(rng, catalog, acyclic_only=True)
        vocab = generic_vocabulary(catalog)
        script = generate_script(catalog, env, vocab)
        assert generate_script(catalog, env, vocab).text == script.text
        dag = build_package_dag(catalog, env)
        position = {address: k for k, (_, address) in enumerate(script.step_index)}
        assert len(script.step_index) == len(dag.nodes)
        for a, b in dag.edges:
            assert position[a] < position[b]
        checked += 1
    assert checked == 40
