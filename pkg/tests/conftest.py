"""Shared helpers: scenario locations and random graph generators."""
import random
from pathlib import Path

import pytest

from depinfer.kb import AssociationRule, KnowledgeGraph, PackageKey

SCENARIO_ROOT = Path(__file__).parent / "fixtures" / "scenarios"


@pytest.fixture
def scenario_root():
    return SCENARIO_ROOT


def build_package(graph, system, name, version=None, resources=(), display=None):
    key = PackageKey(system, name)
    graph.upsert_package(key, display or name)
    if version is not None:
        graph.add_version(key, version)
        for resource in resources:
            graph.add_resource(key, version, resource)
    return key


_PIP_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


def _pip_name(rng):
    segments = [
        "".join(rng.choice(_PIP_ALPHABET) for _ in range(rng.randint(1, 6)))
        for _ in range(rng.randint(1, 3))
    ]
    return "-".join(segments)


def _resource_name(rng):
    first = rng.choice("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
    rest = "".join(
        rng.choice(_PIP_ALPHABET + "_") for _ in range(rng.randint(0, 7))
    )
    name = first + rest
    if rng.random() < 0.3:
        name += "." + rng.choice("abcdefghijklmnopqrstuvwxyz") * rng.randint(1, 4)
    return name


def _version(rng):
    parts = [str(rng.randint(0, 20)) for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.15:
        parts.append(rng.choice(["rc1", "post1", "dev2", "b3"]))
    return ".".join(parts)


def random_valid_graph(rng: random.Random) -> KnowledgeGraph:
    """An arbitrary schema-valid graph for round-trip testing."""
    graph = KnowledgeGraph()
    keys = []
    for _ in range(rng.randint(1, 12)):
        system = rng.choice(("pip", "pip", "pip", "apt"))
        name = _pip_name(rng) if system == "pip" else "lib" + _pip_name(rng)
        key = PackageKey(system, name)
        if key in keys:
            continue
        keys.append(key)
        graph.upsert_package(key, name.upper() if rng.random() < 0.3 else name)
        for _ in range(rng.randint(0, 3)):
            version = _version(rng)
            graph.add_version(key, version)
            for _ in range(rng.randint(0, 3)):
                graph.add_resource(key, version, _resource_name(rng))
            for _ in range(rng.randint(0, 2)):
                graph.add_dependency(key, version, _resource_name(rng))
    for _ in range(rng.randint(0, 6)):
        if len(keys) < 2:
            break
        ant, cons = rng.sample(keys, 2)
        graph.upsert_rule(
            AssociationRule(
                antecedent=ant,
                consequent=cons,
                support=rng.randint(1, 1000) / 1000,
                confidence=rng.randint(1, 1000) / 1000,
                lift=rng.randint(0, 5000) / 100,
                count=rng.randint(1, 50),
            )
        )
    return graph


def random_dag(rng: random.Random, max_packages=50):
    """Graph whose dependency and association edges always point from a
    lower index to a higher one, hence acyclic. Returns (graph, keys)."""
    n = rng.randint(2, max_packages)
    keys = [PackageKey("pip", f"pkg-{i:03d}") for i in range(n)]
    graph = KnowledgeGraph()
    for i, key in enumerate(keys):
        graph.upsert_package(key, key.name)
        graph.add_version(key, "1.0")
        graph.add_resource(key, "1.0", f"mod{i:03d}")
    for _ in range(rng.randint(0, 3 * n)):
        i = rng.randrange(0, n - 1)
        j = rng.randrange(i + 1, n)
        if rng.random() < 0.5:
            graph.add_dependency(keys[i], "1.0", f"mod{j:03d}")
        else:
            graph.upsert_rule(
                AssociationRule(
                    antecedent=keys[i],
                    consequent=keys[j],
                    support=0.1,
                    confidence=0.9,
                    lift=2.0,
                    count=3,
                )
            )
    return graph, keys


def random_cyclic_graph(rng: random.Random, max_packages=30):
    """Graph with arbitrary edge directions and at least one forced cycle."""
    n = rng.randint(2, max_packages)
    keys = [PackageKey("pip", f"pkg-{i:03d}") for i in range(n)]
    graph = KnowledgeGraph()
    for i, key in enumerate(keys):
        graph.upsert_package(key, key.name)
        graph.add_version(key, "1.0")
        graph.add_resource(key, "1.0", f"mod{i:03d}")
    for _ in range(rng.randint(1, 3 * n)):
        i, j = rng.sample(range(n), 2)
        graph.add_dependency(keys[i], "1.0", f"mod{j:03d}")
    a, b = rng.sample(range(n), 2)
    graph.add_dependency(keys[a], "1.0", f"mod{b:03d}")
    graph.add_dependency(keys[b], "1.0", f"mod{a:03d}")
    return graph, keys


def reachable_from(graph: KnowledgeGraph, roots):
    seen = set(roots)
    frontier = list(roots)
    while frontier:
        node = frontier.pop()
        if not graph.has_package(node):
            continue
        for neighbor in graph.dependency_neighbors(node):
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    return seen


def plan_edges(graph: KnowledgeGraph, plan_keys):
    """(dependent, prerequisite) pairs among planned packages."""
    edges = []
    for key in plan_keys:
        if not graph.has_package(key):
            continue
        for neighbor in graph.dependency_neighbors(key):
            edges.append((key, neighbor))
    return edges
