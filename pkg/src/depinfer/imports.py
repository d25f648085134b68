"""Import extraction from Python snippets, without a full parse.

A dedicated scanner assembles logical lines (continuations, parenthesized
lists, semicolons, strings, comments) and recognizes just the import
statement grammar, so Python 2 only sources are handled the same as
Python 3 ones. Standard library imports are filtered against a versioned
manifest shipped as package data.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path
from typing import FrozenSet, Iterator, List, Optional, Sequence

from .kb import ValidationError

PLAIN_IMPORT = "plain_import"
FROM_IMPORT = "from_import"

_MODULE_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ALIAS_RE = re.compile(r"^(.*?)(?:\s+as\s+[A-Za-z_][A-Za-z0-9_]*)?$", re.DOTALL)


@dataclass(frozen=True)
class ImportedResource:
    name: str
    origin: str

    def __post_init__(self):
        if not self.name or self.name.startswith(".") or self.name.endswith("."):
            raise ValidationError(f"bad resource name: {self.name!r}")
        if self.origin not in (PLAIN_IMPORT, FROM_IMPORT):
            raise ValidationError(f"bad origin: {self.origin!r}")


def _strip_strings_and_comment(line: str, state: Optional[str]):
    """Return the line's code with string contents and comments removed,
    plus the multi-line string delimiter still open afterwards (or None)."""
    out = []
    i = 0
    n = len(line)
    while i < n:
        if state is not None:
            end = line.find(state, i)
            if end == -1:
                return "".join(out), state
            i = end + 3
            state = None
            continue
        ch = line[i]
        if ch == "#":
            break
        if ch in "'\"":
            if line[i : i + 3] == ch * 3:
                state = ch * 3
                i += 3
                continue
            j = i + 1
            while j < n:
                if line[j] == "\\":
                    j += 2
                elif line[j] == ch:
                    break
                else:
                    j += 1
            if j >= n:
                break
            i = j + 1
            continue
        out.append(ch)
        i += 1
    return "".join(out), state


def _logical_lines(source: str) -> Iterator[str]:
    state: Optional[str] = None
    buf: List[str] = []
    depth = 0
    for raw in source.splitlines():
        code, state = _strip_strings_and_comment(raw, state)
        depth += code.count("(") + code.count("[") + code.count("{")
        depth -= code.count(")") + code.count("]") + code.count("}")
        stripped = code.rstrip()
        if stripped.endswith("\\"):
            buf.append(stripped[:-1])
            continue
        buf.append(code)
        if depth > 0 or state is not None:
            continue
        logical = " ".join(buf)
        buf = []
        depth = max(depth, 0)
        for piece in logical.split(";"):
            piece = piece.strip()
            if piece:
                yield piece
    leftover = " ".join(buf)
    for piece in leftover.split(";"):
        piece = piece.strip()
        if piece:
            yield piece


def _clean_module(text: str) -> str:
    return re.sub(r"\s+", "", text)


def _plain_import_names(payload: str) -> Iterator[str]:
    for item in payload.split(","):
        item = item.strip()
        if not item:
            continue
        match = _ALIAS_RE.match(item)
        module = _clean_module(match.group(1)) if match else ""
        if _MODULE_RE.match(module):
            yield module


def _from_import_names(statement: str) -> Iterator[str]:
    match = re.match(r"^from\s+(.+?)\s+import\s+(.*)$", statement, re.DOTALL)
    if not match:
        return
    module = _clean_module(match.group(1))
    if module.startswith("."):
        return
    if not _MODULE_RE.match(module):
        return
    payload = match.group(2).replace("(", " ").replace(")", " ")
    for item in payload.split(","):
        item = item.strip()
        if not item:
            continue
        if item == "*":
            yield module
            continue
        name = item.split()[0]
        if _IDENT_RE.match(name):
            yield f"{module}.{name}"


def extract_imports(source: str) -> List[ImportedResource]:
    """Imported resource names in first-occurrence order, deduplicated.

    `import a.b, c` yields a.b and c; `from m import x, y` yields m.x and
    m.y; `from m import *` yields m alone. Relative imports yield nothing.
    Imports are collected from any nesting depth; lines that are not import
    statements are ignored.
    """
    found: List[ImportedResource] = []
    seen = set()
    for statement in _logical_lines(source):
        if re.match(r"^import\s", statement):
            names = _plain_import_names(statement[len("import") :])
            origin = PLAIN_IMPORT
        elif re.match(r"^from\s", statement):
            names = _from_import_names(statement)
            origin = FROM_IMPORT
        else:
            continue
        for name in names:
            if name not in seen:
                seen.add(name)
                found.append(ImportedResource(name=name, origin=origin))
    return found


# -- standard library filtering ------------------------------------------------

@dataclass(frozen=True)
class StdlibManifest:
    python_version_tag: str
    modules: FrozenSet[str]

    def __post_init__(self):
        if not self.python_version_tag:
            raise ValidationError("manifest needs a version tag")
        if not self.modules:
            raise ValidationError("manifest module list is empty")
        for required in ("os", "sys", "re"):
            if required not in self.modules:
                raise ValidationError(f"manifest is missing {required!r}")


def load_manifest(version_tag: str, data_dir: Optional[str] = None) -> StdlibManifest:
    """Load stdlib-<version_tag>.json from `data_dir` or the bundled data."""
    file_name = f"stdlib-{version_tag}.json"
    if data_dir is not None:
        path = Path(data_dir) / file_name
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read manifest {path}: {exc}") from exc
    else:
        resource = importlib_resources.files("depinfer").joinpath("data", file_name)
        try:
            text = resource.read_text(encoding="utf-8")
        except (OSError, FileNotFoundError) as exc:
            raise ValidationError(f"no bundled manifest for {version_tag!r}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"manifest {file_name} is not valid JSON: {exc.msg}") from exc
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("version"), str)
        or not isinstance(obj.get("modules"), list)
        or any(not isinstance(m, str) for m in obj["modules"])
    ):
        raise ValidationError(f"manifest {file_name} has a bad shape")
    return StdlibManifest(
        python_version_tag=obj["version"], modules=frozenset(obj["modules"])
    )


def filter_stdlib(
    resources: Sequence[ImportedResource], manifest: StdlibManifest
) -> List[ImportedResource]:
    """Drop resources whose first dotted segment is a stdlib module."""
    return [r for r in resources if r.name.split(".", 1)[0] not in manifest.modules]
