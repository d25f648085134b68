"""depinfer: infer the system and Python packages a snippet needs, from an
offline knowledge base of package metadata, observed dependencies and mined
association rules, and emit a Dockerfile that installs them in a safe order.
"""

from .acquisition import (
    DynamicDependencyRecord,
    Transaction,
    WheelMetadataRecord,
    extract_dockerfile_packages,
    extract_requirements_packages,
    ingest,
    parse_dependency_log,
    parse_wheel_toplevel,
    run_probe,
)
from .emitter import DockerfileSpec, render
from .imports import ImportedResource, StdlibManifest, extract_imports, filter_stdlib, load_manifest
from .inference import (
    InferenceConfig,
    InstallPlan,
    PlanEntry,
    infer,
    map_resources_to_packages,
    recover_transitive,
)
from .kb import (
    AssociationRule,
    KnowledgeGraph,
    PackageKey,
    load_snapshot,
    normalize_name,
    save_snapshot,
)
from .mining import MinedRule, MiningConfig, install_rules, mine_rules
from .registry import RegistryAnswer, RegistryClient

__version__ = "0.1.0"

__all__ = [
    "AssociationRule",
    "DockerfileSpec",
    "DynamicDependencyRecord",
    "ImportedResource",
    "InferenceConfig",
    "InstallPlan",
    "KnowledgeGraph",
    "MinedRule",
    "MiningConfig",
    "PackageKey",
    "PlanEntry",
    "RegistryAnswer",
    "RegistryClient",
    "StdlibManifest",
    "Transaction",
    "WheelMetadataRecord",
    "extract_dockerfile_packages",
    "extract_imports",
    "extract_requirements_packages",
    "filter_stdlib",
    "infer",
    "ingest",
    "install_rules",
    "load_manifest",
    "load_snapshot",
    "map_resources_to_packages",
    "mine_rules",
    "normalize_name",
    "parse_dependency_log",
    "parse_wheel_toplevel",
    "recover_transitive",
    "render",
    "run_probe",
    "save_snapshot",
]
