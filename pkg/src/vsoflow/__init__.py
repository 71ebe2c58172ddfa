"""Workflow composition over hierarchical simulation objects.

Submodules: ``model`` (structural types and IO derivation), ``registry`` (sameAs
equivalence), ``composer`` (environments, visibility, lifting), ``configurator``
(enumeration and comparison), ``codegen`` (script generation), ``store``
(canonical persistence), ``service`` (HTTP API), ``cli`` (batch front-end).
"""

from .codegen import DslVocabulary, WorkflowScript, generate_script, generic_vocabulary
from .composer import (
    CandidateConnection,
    Connection,
    Environment,
    Level,
    VsoInstance,
    connect,
    instantiate,
    lift_connections,
    lifted_view,
    new_environment,
    suggest_connections,
    visible_params,
)
from .configurator import (
    Configuration,
    ConfigurationReport,
    compare_configurations,
    count_configurations,
    enumerate_configurations,
)
from .errors import VsoError
from .model import (
    Catalog,
    ImplementingPackage,
    Method,
    Property,
    SimulationModel,
    SoftwarePackage,
    ValidationReport,
    VsoImage,
    derive_method_io,
    derive_model_io,
    derive_vso_io,
    validate_catalog,
)
from .registry import EquivalenceRegistry, semantically_equal

__version__ = "0.1.0"

__all__ = [
    "CandidateConnection",
    "Catalog",
    "Configuration",
    "ConfigurationReport",
    "Connection",
    "DslVocabulary",
    "Environment",
    "EquivalenceRegistry",
    "ImplementingPackage",
    "Level",
    "Method",
    "Property",
    "SimulationModel",
    "SoftwarePackage",
    "ValidationReport",
    "VsoError",
    "VsoImage",
    "VsoInstance",
    "WorkflowScript",
    "compare_configurations",
    "connect",
    "count_configurations",
    "derive_method_io",
    "derive_model_io",
    "derive_vso_io",
    "enumerate_configurations",
    "generate_script",
    "generic_vocabulary",
    "instantiate",
    "lift_connections",
    "lifted_view",
    "new_environment",
    "semantically_equal",
    "suggest_connections",
    "validate_catalog",
    "visible_params",
]
