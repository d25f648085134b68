"""Resource-to-package mapping and transitive install-order recovery.

Given the resources a snippet imports, find candidate packages in the
knowledge graph (falling back to the registry), then walk dependency and
association edges depth-first so that prerequisites come out before the
packages that need them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .imports import ImportedResource, StdlibManifest, extract_imports, filter_stdlib
from .kb import SYSTEMS, KnowledgeGraph, PackageKey, ValidationError, normalize_name
from .registry import RegistryClient, RegistryUnavailableError

DIRECT_EXACT_RESOURCE = "direct_exact_resource"
DIRECT_PARTIAL_RESOURCE = "direct_partial_resource"
DIRECT_PACKAGE_NAME = "direct_package_name"
DIRECT_REGISTRY = "direct_registry"
TRANSITIVE_DEPENDENCY = "transitive_dependency"
TRANSITIVE_ASSOCIATION = "transitive_association"

PROVENANCE_PRIORITY = {
    DIRECT_EXACT_RESOURCE: 0,
    DIRECT_PARTIAL_RESOURCE: 1,
    DIRECT_PACKAGE_NAME: 2,
    DIRECT_REGISTRY: 3,
    TRANSITIVE_DEPENDENCY: 4,
    TRANSITIVE_ASSOCIATION: 5,
}


@dataclass(frozen=True)
class PlanEntry:
    key: PackageKey
    provenance: str
    display_name: str

    def __post_init__(self):
        if self.provenance not in PROVENANCE_PRIORITY:
            raise ValidationError(f"unknown provenance: {self.provenance!r}")


@dataclass
class InstallPlan:
    entries: List[PlanEntry] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        keys = [entry.key for entry in self.entries]
        if len(keys) != len(set(keys)):
            raise ValidationError("install plan repeats a package")

    def keys(self) -> List[PackageKey]:
        return [entry.key for entry in self.entries]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {
                    "system": entry.key.system,
                    "name": entry.key.name,
                    "provenance": entry.provenance,
                }
                for entry in self.entries
            ],
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class InferenceConfig:
    manifest: StdlibManifest
    min_association_confidence: float = 0.0


def _resource_name(resource: Union[ImportedResource, str]) -> str:
    return resource.name if isinstance(resource, ImportedResource) else resource


def map_resources_to_packages(
    resources: Sequence[Union[ImportedResource, str]],
    graph: KnowledgeGraph,
    registry: RegistryClient,
) -> Tuple[List[Tuple[PackageKey, str]], List[str]]:
    """Candidate packages for each resource, in resource order.

    Per resource: graph packages matching the resource name exactly or by
    dotted-segment prefix, then packages whose name matches the resource
    name (or its first segment), then a registry fallback that only fires
    while no accumulated candidate is named like the resource itself.
    A package the registry knows to have no installable version is dropped.

    Returns ordered (package, provenance) pairs plus warnings; provenance is
    the strongest route that produced each package.
    """
    candidates: Dict[PackageKey, str] = {}
    warnings: List[str] = []

    def add(key: PackageKey, provenance: str) -> None:
        current = candidates.get(key)
        if current is None or PROVENANCE_PRIORITY[provenance] < PROVENANCE_PRIORITY[current]:
            candidates[key] = provenance

    for resource in resources:
        name = _resource_name(resource)
        first_segment = name.split(".", 1)[0]

        exact = graph.packages_owning_resource(name)
        for key in exact:
            add(key, DIRECT_EXACT_RESOURCE)
        for key in graph.find_packages_by_resource_prefix(name):
            if key not in exact:
                add(key, DIRECT_PARTIAL_RESOURCE)

        for system in SYSTEMS:
            for queried in (name, first_segment):
                key = graph.find_package_by_name(system, queried)
                if key is not None:
                    add(key, DIRECT_PACKAGE_NAME)

        named_like_resource = any(
            key.name == normalize_name(key.system, name) for key in candidates
        )
        if not named_like_resource:
            queried = []
            for raw in (name, first_segment):
                normalized = normalize_name("pip", raw)
                if normalized in queried:
                    continue
                queried.append(normalized)
                try:
                    answer = registry.query("pip", raw)
                except RegistryUnavailableError as exc:
                    warnings.append(f"registry unavailable for pip {raw}: {exc}")
                    continue
                if answer.exists and answer.has_installable_version:
                    add(PackageKey("pip", answer.canonical_name), DIRECT_REGISTRY)

    kept: List[Tuple[PackageKey, str]] = []
    for key, provenance in candidates.items():
        try:
            answer = registry.query(key.system, key.name)
        except RegistryUnavailableError as exc:
            warnings.append(f"registry unavailable for {key}: {exc}")
            kept.append((key, provenance))
            continue
        if answer.exists and not answer.has_installable_version:
            warnings.append(f"excluded {key}: no installable version")
            continue
        kept.append((key, provenance))
    return kept, warnings


def recover_transitive(
    roots: Iterable[PackageKey],
    graph: KnowledgeGraph,
    root_provenance: Optional[Mapping[PackageKey, str]] = None,
    min_association_confidence: float = 0.0,
) -> InstallPlan:
    """Depth-first walk from the roots, in the order given, emitting each
    package after everything it depends on. A global visited set makes the
    walk cycle-tolerant: every reachable package appears exactly once, and
    on acyclic graphs the result is a reverse topological order.

    Neighbors are visited in (system, name) order. Packages absent from the
    graph are kept as leaves.
    """
    direct: Dict[PackageKey, str] = dict(root_provenance or {})
    ordered_roots: List[PackageKey] = []
    for root in roots:
        if root not in ordered_roots:
            ordered_roots.append(root)
        direct.setdefault(root, DIRECT_EXACT_RESOURCE)

    def neighbors(key: PackageKey) -> List[Tuple[PackageKey, str]]:
        if not graph.has_package(key):
            return []
        return graph.dependency_neighbors_with_origin(key, min_association_confidence)

    def display(key: PackageKey) -> str:
        return graph.display_name(key) if graph.has_package(key) else key.name

    entries: List[PlanEntry] = []
    visited = set()
    for root in ordered_roots:
        if root in visited:
            continue
        visited.add(root)
        stack: List[Tuple[PackageKey, str, Iterable]] = [
            (root, direct[root], iter(neighbors(root)))
        ]
        while stack:
            key, provenance, pending = stack[-1]
            descended = False
            for child, origin in pending:
                if child in visited:
                    continue
                visited.add(child)
                child_provenance = direct.get(
                    child,
                    TRANSITIVE_DEPENDENCY if origin == "dependency" else TRANSITIVE_ASSOCIATION,
                )
                stack.append((child, child_provenance, iter(neighbors(child))))
                descended = True
                break
            if not descended:
                stack.pop()
                entries.append(PlanEntry(key=key, provenance=provenance, display_name=display(key)))
    return InstallPlan(entries=entries)


def infer(
    source: str,
    graph: KnowledgeGraph,
    registry: RegistryClient,
    config: InferenceConfig,
) -> InstallPlan:
    """End to end: extract imports, drop stdlib modules, map the rest to
    packages, and recover a transitive install order."""
    imported = extract_imports(source)
    remaining = filter_stdlib(imported, config.manifest)
    candidates, warnings = map_resources_to_packages(remaining, graph, registry)
    plan = recover_transitive(
        [key for key, _ in candidates],
        graph,
        root_provenance=dict(candidates),
        min_association_confidence=config.min_association_confidence,
    )
    plan.warnings = warnings
    return plan
