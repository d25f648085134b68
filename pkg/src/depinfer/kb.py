"""Typed package knowledge graph and its JSONL snapshot format.

The graph relates packages (apt or pip), their versions, the importable
resources each version provides, resource-level dependencies observed at
runtime, and mined association rules between packages.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set, Tuple

SYSTEMS = ("apt", "pip")

_PIP_COLLAPSE = re.compile(r"[-_.]+")


class ValidationError(ValueError):
    """A value violates a schema or argument contract."""


class SnapshotError(ValueError):
    """A snapshot file is missing, unreadable, or schema-invalid."""


class UnknownPackageError(KeyError):
    """A query named a package that is not in the graph."""


def normalize_name(system: str, name: str) -> str:
    """Canonical package name: pip names lowercase with runs of ``-_.``
    collapsed to a single dash, apt names lowercase."""
    if system == "pip":
        return _PIP_COLLAPSE.sub("-", name).lower()
    if system == "apt":
        return name.lower()
    raise ValidationError(f"unknown package system: {system!r}")


def version_sort_key(version: str) -> Tuple:
    # numeric segments compare numerically; a non-numeric segment sorts
    # above any numeric one at the same position
    parts = []
    for seg in version.split("."):
        if seg.isdigit():
            parts.append((0, int(seg), ""))
        else:
            parts.append((1, 0, seg))
    return tuple(parts)


@dataclass(frozen=True, order=True)
class PackageKey:
    system: str
    name: str

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValidationError(f"unknown package system: {self.system!r}")
        if not self.name:
            raise ValidationError("package name must be non-empty")
        if any(ch.isspace() for ch in self.name):
            raise ValidationError(f"package name contains whitespace: {self.name!r}")
        if self.name != normalize_name(self.system, self.name):
            raise ValidationError(f"package name is not normalized: {self.name!r}")

    def __str__(self):
        return f"{self.system}:{self.name}"


@dataclass(frozen=True)
class AssociationRule:
    """Mined co-occurrence rule: installing antecedent implies consequent."""

    antecedent: PackageKey
    consequent: PackageKey
    support: float
    confidence: float
    lift: float
    count: int

    def __post_init__(self):
        if self.antecedent == self.consequent:
            raise ValidationError("rule antecedent equals consequent")
        if not 0.0 < self.support <= 1.0:
            raise ValidationError(f"support out of range: {self.support}")
        if not 0.0 < self.confidence <= 1.0:
            raise ValidationError(f"confidence out of range: {self.confidence}")
        if self.lift < 0.0:
            raise ValidationError(f"lift out of range: {self.lift}")
        if self.count < 1:
            raise ValidationError(f"count must be >= 1: {self.count}")


class KnowledgeGraph:
    """In-memory package/version/resource graph with secondary indexes.

    Mutable while being built by ingestion; treated as a fixed value once
    inference starts (no query mutates it).
    """

    def __init__(self):
        self._display: Dict[PackageKey, str] = {}
        self._versions: Dict[PackageKey, Set[str]] = {}
        self._resources: Dict[Tuple[PackageKey, str], Set[str]] = {}
        self._resource_owners: Dict[str, Set[PackageKey]] = {}
        self._deps: Dict[Tuple[PackageKey, str], Set[str]] = {}
        self._rules: Dict[Tuple[PackageKey, PackageKey], AssociationRule] = {}
        self._rules_by_ant: Dict[PackageKey, Set[PackageKey]] = {}

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self._display == other._display
            and self._versions == other._versions
            and self._resources == other._resources
            and self._deps == other._deps
            and self._rules == other._rules
        )

    # -- construction ------------------------------------------------------

    def upsert_package(self, key: PackageKey, display_name: Optional[str] = None) -> PackageKey:
        """Add a package node if absent. The first display name seen wins."""
        if key not in self._display:
            self._display[key] = display_name if display_name else key.name
            self._versions[key] = set()
        return key

    def add_version(self, key: PackageKey, version: str) -> None:
        if key not in self._display:
            raise UnknownPackageError(str(key))
        if not version:
            raise ValidationError("version must be non-empty")
        self._versions[key].add(version)
        self._resources.setdefault((key, version), set())
        self._deps.setdefault((key, version), set())

    def add_resource(self, key: PackageKey, version: str, resource: str) -> None:
        self._require_version(key, version)
        if not resource or any(ch.isspace() for ch in resource):
            raise ValidationError(f"bad resource name: {resource!r}")
        self._resources[(key, version)].add(resource)
        self._resource_owners.setdefault(resource, set()).add(key)

    def add_dependency(self, key: PackageKey, version: str, requires_resource: str) -> None:
        """Record that (key, version) needs some package providing the resource."""
        self._require_version(key, version)
        if not requires_resource or any(ch.isspace() for ch in requires_resource):
            raise ValidationError(f"bad resource name: {requires_resource!r}")
        self._deps[(key, version)].add(requires_resource)

    def upsert_rule(self, rule: AssociationRule) -> None:
        """Install or replace the rule for (antecedent, consequent)."""
        for end in (rule.antecedent, rule.consequent):
            if end not in self._display:
                raise UnknownPackageError(str(end))
        self._rules[(rule.antecedent, rule.consequent)] = rule
        self._rules_by_ant.setdefault(rule.antecedent, set()).add(rule.consequent)

    def _require_version(self, key: PackageKey, version: str) -> None:
        if key not in self._display:
            raise UnknownPackageError(str(key))
        if version not in self._versions[key]:
            raise ValidationError(f"unknown version {version!r} of {key}")

    # -- queries -----------------------------------------------------------

    def has_package(self, key: PackageKey) -> bool:
        return key in self._display

    def display_name(self, key: PackageKey) -> str:
        if key not in self._display:
            raise UnknownPackageError(str(key))
        return self._display[key]

    def packages(self) -> List[PackageKey]:
        return sorted(self._display)

    def versions(self, key: PackageKey) -> List[str]:
        if key not in self._display:
            raise UnknownPackageError(str(key))
        return sorted(self._versions[key], key=version_sort_key)

    def latest_version(self, key: PackageKey) -> Optional[str]:
        versions = self.versions(key)
        return versions[-1] if versions else None

    def resources_of(self, key: PackageKey, version: str) -> List[str]:
        self._require_version(key, version)
        return sorted(self._resources[(key, version)])

    def dependencies_of(self, key: PackageKey, version: str) -> List[str]:
        self._require_version(key, version)
        return sorted(self._deps[(key, version)])

    def rules(self) -> List[AssociationRule]:
        return [self._rules[k] for k in sorted(self._rules)]

    def find_package_by_name(self, system: str, name: str) -> Optional[PackageKey]:
        """Exact lookup after normalizing the queried name."""
        key = PackageKey(system, normalize_name(system, name))
        return key if key in self._display else None

    def packages_owning_resource(self, resource: str) -> List[PackageKey]:
        """Packages providing a resource with exactly this name, sorted."""
        return sorted(self._resource_owners.get(resource, ()))

    def find_packages_by_resource_prefix(self, resource: str) -> List[PackageKey]:
        """Packages owning a resource equal to `resource` or to one of its
        dotted-segment prefixes, deduplicated and sorted.

        "zope" matches a query for "zope.interface"; "zopeX" does not.
        """
        found: Set[PackageKey] = set()
        segments = resource.split(".")
        for i in range(1, len(segments) + 1):
            prefix = ".".join(segments[:i])
            found.update(self._resource_owners.get(prefix, ()))
        return sorted(found)

    def dependency_neighbors(self, key: PackageKey) -> List[PackageKey]:
        """Packages this one needs: owners of the latest version's required
        resources (exact name match) plus association consequents. Sorted,
        deduplicated, never includes the package itself."""
        return [k for k, _ in self.dependency_neighbors_with_origin(key)]

    def dependency_neighbors_with_origin(
        self, key: PackageKey, min_association_confidence: float = 0.0
    ) -> List[Tuple[PackageKey, str]]:
        """Like dependency_neighbors, but each entry carries how it was
        reached: "dependency" or "association". Dependency wins when both
        relations name the same package."""
        if key not in self._display:
            raise UnknownPackageError(str(key))
        origins: Dict[PackageKey, str] = {}
        for cons in self._rules_by_ant.get(key, ()):
            rule = self._rules[(key, cons)]
            if rule.confidence >= min_association_confidence:
                origins[cons] = "association"
        latest = self.latest_version(key)
        if latest is not None:
            for resource in self._deps[(key, latest)]:
                for owner in self._resource_owners.get(resource, ()):
                    origins[owner] = "dependency"
        origins.pop(key, None)
        return [(k, origins[k]) for k in sorted(origins)]

    def counts(self) -> Dict[str, int]:
        """Node and edge counts keyed by snapshot record kind."""
        return {
            "package": len(self._display),
            "version": sum(len(v) for v in self._versions.values()),
            "resource": sum(len(r) for r in self._resources.values()),
            "association": len(self._rules),
            "resource_dependency": sum(len(d) for d in self._deps.values()),
        }

    # -- snapshot records --------------------------------------------------

    def node_records(self) -> Iterator[dict]:
        for key in sorted(self._display):
            yield {
                "kind": "package",
                "system": key.system,
                "name": key.name,
                "display_name": self._display[key],
            }
        for key in sorted(self._display):
            for version in sorted(self._versions[key], key=version_sort_key):
                yield {
                    "kind": "version",
                    "system": key.system,
                    "package": key.name,
                    "version": version,
                }
        for key in sorted(self._display):
            for version in sorted(self._versions[key], key=version_sort_key):
                for resource in sorted(self._resources.get((key, version), ())):
                    yield {
                        "kind": "resource",
                        "system": key.system,
                        "package": key.name,
                        "version": version,
                        "resource": resource,
                    }
        for ant, cons in sorted(self._rules):
            rule = self._rules[(ant, cons)]
            yield {
                "kind": "association",
                "ant_system": ant.system,
                "ant": ant.name,
                "cons_system": cons.system,
                "cons": cons.name,
                "support": rule.support,
                "confidence": rule.confidence,
                "lift": rule.lift,
                "count": rule.count,
            }

    def edge_records(self) -> Iterator[dict]:
        for key in sorted(self._display):
            for version in sorted(self._versions[key], key=version_sort_key):
                for resource in sorted(self._deps.get((key, version), ())):
                    yield {
                        "kind": "resource_dependency",
                        "system": key.system,
                        "package": key.name,
                        "version": version,
                        "requires_resource": resource,
                    }


# -- snapshot persistence ----------------------------------------------------

NODES_FILE = "nodes.jsonl"
EDGES_FILE = "edges.jsonl"


def save_snapshot(graph: KnowledgeGraph, directory: str) -> None:
    """Write nodes.jsonl and edges.jsonl under `directory`, atomically
    (temp file then rename). Record order is deterministic."""
    os.makedirs(directory, exist_ok=True)
    for file_name, records in (
        (NODES_FILE, graph.node_records()),
        (EDGES_FILE, graph.edge_records()),
    ):
        path = os.path.join(directory, file_name)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(json.dumps(record, ensure_ascii=False))
                fh.write("\n")
        os.replace(tmp, path)


def _record_error(path: str, lineno: int, message: str) -> SnapshotError:
    return SnapshotError(f"{path}:{lineno}: {message}")


def _read_jsonl(path: str) -> List[Tuple[int, dict]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot file: {exc}") from exc
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _record_error(path, lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise _record_error(path, lineno, "record is not an object")
        records.append((lineno, obj))
    return records


def _field(path: str, lineno: int, obj: dict, name: str, cls=str):
    value = obj.get(name)
    if not isinstance(value, cls) or (cls is int and isinstance(value, bool)):
        raise _record_error(path, lineno, f"missing or invalid field {name!r}")
    return value


def _key_of(path: str, lineno: int, obj: dict, system_field: str, name_field: str) -> PackageKey:
    system = _field(path, lineno, obj, system_field)
    name = _field(path, lineno, obj, name_field)
    try:
        return PackageKey(system, name)
    except ValidationError as exc:
        raise _record_error(path, lineno, str(exc)) from exc


def load_snapshot(directory: str) -> KnowledgeGraph:
    """Load a snapshot directory. Schema violations (duplicate nodes,
    dangling references, bad values) raise SnapshotError naming the
    offending file and line."""
    nodes_path = os.path.join(directory, NODES_FILE)
    edges_path = os.path.join(directory, EDGES_FILE)
    node_records = _read_jsonl(nodes_path)
    edge_records = _read_jsonl(edges_path)

    graph = KnowledgeGraph()
    by_kind: Dict[str, List[Tuple[int, dict]]] = {}
    for lineno, obj in node_records:
        kind = obj.get("kind")
        if kind not in ("package", "version", "resource", "association"):
            raise _record_error(nodes_path, lineno, f"unknown node kind: {kind!r}")
        by_kind.setdefault(kind, []).append((lineno, obj))

    for lineno, obj in by_kind.get("package", ()):
        key = _key_of(nodes_path, lineno, obj, "system", "name")
        if graph.has_package(key):
            raise _record_error(nodes_path, lineno, f"duplicate package {key}")
        display = _field(nodes_path, lineno, obj, "display_name")
        graph.upsert_package(key, display)

    for lineno, obj in by_kind.get("version", ()):
        key = _key_of(nodes_path, lineno, obj, "system", "package")
        version = _field(nodes_path, lineno, obj, "version")
        if not graph.has_package(key):
            raise _record_error(nodes_path, lineno, f"version of unknown package {key}")
        if version in graph._versions[key]:
            raise _record_error(nodes_path, lineno, f"duplicate version {key} {version}")
        try:
            graph.add_version(key, version)
        except ValidationError as exc:
            raise _record_error(nodes_path, lineno, str(exc)) from exc

    for lineno, obj in by_kind.get("resource", ()):
        key = _key_of(nodes_path, lineno, obj, "system", "package")
        version = _field(nodes_path, lineno, obj, "version")
        resource = _field(nodes_path, lineno, obj, "resource")
        if not graph.has_package(key) or version not in graph._versions[key]:
            raise _record_error(
                nodes_path, lineno, f"resource of unknown version {key} {version!r}"
            )
        if resource in graph._resources[(key, version)]:
            raise _record_error(
                nodes_path, lineno, f"duplicate resource {resource!r} of {key} {version}"
            )
        try:
            graph.add_resource(key, version, resource)
        except ValidationError as exc:
            raise _record_error(nodes_path, lineno, str(exc)) from exc

    for lineno, obj in by_kind.get("association", ()):
        ant = _key_of(nodes_path, lineno, obj, "ant_system", "ant")
        cons = _key_of(nodes_path, lineno, obj, "cons_system", "cons")
        for end in (ant, cons):
            if not graph.has_package(end):
                raise _record_error(nodes_path, lineno, f"rule names unknown package {end}")
        if (ant, cons) in graph._rules:
            raise _record_error(nodes_path, lineno, f"duplicate rule {ant} -> {cons}")
        try:
            rule = AssociationRule(
                antecedent=ant,
                consequent=cons,
                support=float(_field(nodes_path, lineno, obj, "support", (int, float))),
                confidence=float(_field(nodes_path, lineno, obj, "confidence", (int, float))),
                lift=float(_field(nodes_path, lineno, obj, "lift", (int, float))),
                count=_field(nodes_path, lineno, obj, "count", int),
            )
        except ValidationError as exc:
            raise _record_error(nodes_path, lineno, str(exc)) from exc
        graph.upsert_rule(rule)

    for lineno, obj in edge_records:
        kind = obj.get("kind")
        if kind != "resource_dependency":
            raise _record_error(edges_path, lineno, f"unknown edge kind: {kind!r}")
        key = _key_of(edges_path, lineno, obj, "system", "package")
        version = _field(edges_path, lineno, obj, "version")
        resource = _field(edges_path, lineno, obj, "requires_resource")
        if not graph.has_package(key) or version not in graph._versions[key]:
            raise _record_error(
                edges_path, lineno, f"dependency from unknown version {key} {version!r}"
            )
        if resource in graph._deps[(key, version)]:
            raise _record_error(
                edges_path, lineno, f"duplicate dependency {key} {version} -> {resource!r}"
            )
        try:
            graph.add_dependency(key, version, resource)
        except ValidationError as exc:
            raise _record_error(edges_path, lineno, str(exc)) from exc

    return graph
