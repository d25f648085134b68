"""Golden scenario fixtures: a snippet, a small knowledge base, optional
registry fixtures, the expected install plan and the expected Dockerfile.

A scenario is a directory:

    snippet.py
    kb/nodes.jsonl
    kb/edges.jsonl
    registry-pip.json     (optional)
    registry-apt.txt      (optional)
    expected_plan.json
    expected.Dockerfile
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from ..kb import KnowledgeGraph, load_snapshot
from ..registry import RegistryClient


@dataclass(frozen=True)
class ScenarioFixture:
    name: str
    directory: str
    snippet: str
    expected_plan: dict
    expected_dockerfile: str

    @property
    def snippet_path(self) -> str:
        return os.path.join(self.directory, "snippet.py")

    @property
    def kb_dir(self) -> str:
        return os.path.join(self.directory, "kb")

    @property
    def pip_fixture_path(self) -> Optional[str]:
        path = os.path.join(self.directory, "registry-pip.json")
        return path if os.path.exists(path) else None

    @property
    def apt_names_path(self) -> Optional[str]:
        path = os.path.join(self.directory, "registry-apt.txt")
        return path if os.path.exists(path) else None

    def load_graph(self) -> KnowledgeGraph:
        return load_snapshot(self.kb_dir)

    def registry(self) -> RegistryClient:
        return RegistryClient.offline(
            pip_fixture_path=self.pip_fixture_path,
            apt_names_path=self.apt_names_path,
        )


def load_scenario(directory: str) -> ScenarioFixture:
    base = Path(directory)
    return ScenarioFixture(
        name=base.name,
        directory=str(base),
        snippet=(base / "snippet.py").read_text(encoding="utf-8"),
        expected_plan=json.loads((base / "expected_plan.json").read_text(encoding="utf-8")),
        expected_dockerfile=(base / "expected.Dockerfile").read_text(encoding="utf-8"),
    )


def list_scenarios(root: str) -> List[ScenarioFixture]:
    scenarios = []
    for entry in sorted(Path(root).iterdir()):
        if entry.is_dir() and (entry / "snippet.py").exists():
            scenarios.append(load_scenario(str(entry)))
    return scenarios
