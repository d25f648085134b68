"""Byte-exact Dockerfile rendering from an install plan.

Every install step is an exec-form RUN instruction, one per plan entry, in
plan order. A single apt-get update precedes the first apt install. The
output uses LF line endings, no trailing whitespace, and ends with exactly
one newline.
"""
from __future__ import annotations

import json
import posixpath
from dataclasses import dataclass

from .inference import InstallPlan
from .kb import ValidationError

DEFAULT_BASE_IMAGE = "python:2.7.14"


@dataclass(frozen=True)
class DockerfileSpec:
    plan: InstallPlan
    snippet_name: str = "snippet.py"
    base_image: str = DEFAULT_BASE_IMAGE

    def __post_init__(self):
        if not self.base_image or any(ch.isspace() for ch in self.base_image):
            raise ValidationError(f"bad base image: {self.base_image!r}")
        sanitized = posixpath.basename(self.snippet_name.replace("\\", "/"))
        if not sanitized:
            raise ValidationError(f"bad snippet file name: {self.snippet_name!r}")
        object.__setattr__(self, "snippet_name", sanitized)


def _exec_form(tokens) -> str:
    return json.dumps(list(tokens), separators=(",", ":"))


def render(spec: DockerfileSpec) -> str:
    """Render the Dockerfile text for a spec. Pure: equal specs render to
    identical bytes."""
    lines = [
        f"FROM {spec.base_image}",
        f"COPY {spec.snippet_name} /snippet.py",
    ]
    apt_update_emitted = False
    for entry in spec.plan.entries:
        name = entry.display_name or entry.key.name
        if entry.key.system == "apt":
            if not apt_update_emitted:
                lines.append("RUN " + _exec_form(["apt-get", "update"]))
                apt_update_emitted = True
            lines.append("RUN " + _exec_form(["apt-get", "install", "-y", name]))
        else:
            lines.append("RUN " + _exec_form(["pip", "install", name]))
    lines.append("CMD " + _exec_form(["python", "/snippet.py"]))
    return "\n".join(lines) + "\n"
