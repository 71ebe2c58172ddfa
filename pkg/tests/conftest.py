"""Shared fixtures: the two-object demo catalog and environments composed on it.

The demo catalog models two connectable objects. Object o1 owns models m1 (methods
s1, s2), m2 (method s3) and m3 (methods s4, s5); object o2 owns m4 (methods s6,
s7, s8). The fifteen implementing packages ip1..ip15 are distributed so that
s2=[ip4,ip5], s5=[ip10] and s7=[ip14,ip15]; with the default method selections the
environment wires into the five-package chain ip4 -> ip5 -> ip10 -> ip14 -> ip15.
The hand-off between objects (ip10's output into ip14's input) crosses a sameAs
pair rather than one shared URI, so the suggestion engine must consult the
equivalence registry.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from vsoflow import composer
from vsoflow.model import (
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
    VsoImage,
)
from vsoflow.registry import EquivalenceRegistry
from vsoflow.store import catalog_version

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

URI = "urn:demo:data:{}".format

# (package, input uri, input value at sp level, output uri, fixed cost or None)
_CHAIN_SPEC = [
    ("1", "a0", "1", "a1", None),
    ("2", "a1", None, "a2", None),
    ("3", "a2", None, "a3", None),
    ("4", "w0", None, "w1", 2.0),
    ("5", "w1", None, "w2", 3.0),
    ("6", "b0", "7", "b1", 1.0),
    ("7", "b1", None, "b2", 2.5),
    ("8", "c0", None, "c1", 2.0),
    ("9", "c1", None, "w3", 6.0),
    ("10", "w2", None, "w3", 5.0),
    ("11", "w3", None, "d1", 1.5),
    ("12", "d1", None, "w5", 2.0),
    ("13", "w3", None, "w5", 7.0),
    ("14", "w3a", None, "w4", 4.0),
    ("15", "w4", None, "w5", 1.0),
]

# ip-level default values override the wrapped package's own value
_IP_DEFAULTS = {"ip4": "42", "ip8": "3"}

_METHODS = {
    "s1": ("ip1", "ip2", "ip3"),
    "s2": ("ip4", "ip5"),
    "s3": ("ip6", "ip7"),
    "s4": ("ip8", "ip9"),
    "s5": ("ip10",),
    "s6": ("ip11", "ip12"),
    "s7": ("ip14", "ip15"),
    "s8": ("ip13",),
}

_MODELS = {
    "m1": (("s1", "s2"), "s2"),
    "m2": (("s3",), "s3"),
    "m3": (("s4", "s5"), "s5"),
    "m4": (("s6", "s7", "s8"), "s7"),
}


def build_demo_catalog() -> Catalog:
    software_packages = []
    implementing_packages = []
    for n, in_uri, in_value, out_uri, cost in _CHAIN_SPEC:
        perf = None if cost is None else PerformanceModel(fixed_cost=cost, per_unit_cost=0.0)
        software_packages.append(
            SoftwarePackage(
                id=f"sp{n}",
                inputs=(InputParamSp(varname="x", value=in_value),),
                outputs=(OutputParamSp(varname="y"),),
                perf=perf,
            )
        )
        implementing_packages.append(
            ImplementingPackage(
                id=f"ip{n}",
                sp=f"sp{n}",
                inputs=(
                    InputParamIp(base="x", uri=URI(in_uri), default_value=_IP_DEFAULTS.get(f"ip{n}")),
                ),
                outputs=(OutputParamIp(base="y", uri=URI(out_uri)),),
            )
        )
    methods = tuple(Method(id=mid, ip_sequence=seq) for mid, seq in _METHODS.items())
    models = tuple(
        SimulationModel(id=mid, methods=offered, selected_method=selected)
        for mid, (offered, selected) in _MODELS.items()
    )
    images = (
        VsoImage(
            id="o1",
            properties=(Property(name="region", uri="urn:demo:prop:region", value="baltic"),),
            models=("m1", "m2", "m3"),
        ),
        VsoImage(
            id="o2",
            properties=(Property(name="scale", uri="urn:demo:prop:scale", value=None),),
            models=("m4",),
        ),
    )
    return Catalog(
        software_packages=tuple(software_packages),
        implementing_packages=tuple(implementing_packages),
        methods=methods,
        models=models,
        images=images,
        same_as=((URI("w3"), URI("w3a")),),
    )


def chain_addresses() -> dict[str, str]:
    """Parameter addresses of the five-package chain in the composed environment."""
    s2 = "o1#1/model:m1/method:s2"
    s5 = "o1#1/model:m3/method:s5"
    s7 = "o2#1/model:m4/method:s7"
    return {
        "ip4.in": f"{s2}/ip:0:ip4/in:x",
        "ip4.out": f"{s2}/ip:0:ip4/out:y",
        "ip5.in": f"{s2}/ip:1:ip5/in:x",
        "ip5.out": f"{s2}/ip:1:ip5/out:y",
        "ip10.in": f"{s5}/ip:0:ip10/in:x",
        "ip10.out": f"{s5}/ip:0:ip10/out:y",
        "ip14.in": f"{s7}/ip:0:ip14/in:x",
        "ip14.out": f"{s7}/ip:0:ip14/out:y",
        "ip15.in": f"{s7}/ip:1:ip15/in:x",
        "ip15.out": f"{s7}/ip:1:ip15/out:y",
    }


def build_chain_environment(catalog: Catalog, env_id: str = "chain") -> composer.Environment:
    """o1 + o2 wired into the five-package chain, with o1's middle model disabled."""
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = composer.new_environment(env_id, catalog_version(catalog))
    env, o1 = composer.instantiate(catalog, env, "o1")
    env, o2 = composer.instantiate(catalog, env, "o2")
    env = composer.toggle_model(catalog, env, o1, "m2", False)
    addr = chain_addresses()
    env = composer.connect(catalog, registry, env, addr["ip4.out"], addr["ip5.in"])
    env = composer.connect(catalog, registry, env, addr["ip5.out"], addr["ip10.in"])
    env = composer.connect(catalog, registry, env, addr["ip10.out"], addr["ip14.in"])
    return env


GOLDEN_CHAIN_SCRIPT = (
    "step_1 = sp4(x=42)\n"
    "step_2 = sp5(x=step_1.y)\n"
    "step_3 = sp10(x=step_2.y)\n"
    "step_4 = sp14(x=step_3.y)\n"
    "step_5 = sp15(x=step_4.y)\n"
)


@pytest.fixture(scope="session")
def demo_catalog() -> Catalog:
    return build_demo_catalog()


@pytest.fixture(scope="session")
def demo_registry(demo_catalog) -> EquivalenceRegistry:
    return EquivalenceRegistry.from_assertions(demo_catalog.same_as)


@pytest.fixture()
def chain_env(demo_catalog) -> composer.Environment:
    return build_chain_environment(demo_catalog)


@pytest.fixture(scope="session")
def addresses() -> dict[str, str]:
    return chain_addresses()
