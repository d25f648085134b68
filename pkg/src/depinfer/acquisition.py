"""Knowledge sources: wheel metadata, dynamic probe logs, Dockerfiles and
requirements files. Each parser turns raw input into records or transactions
that feed the knowledge graph and the rule miner.
"""
from __future__ import annotations

import io
import json
import re
import shlex
import subprocess
import zipfile
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .kb import KnowledgeGraph, PackageKey, ValidationError, normalize_name


class WheelFormatError(ValueError):
    """The archive is not a usable wheel."""


class ProbeError(RuntimeError):
    """The probe command could not be spawned."""


@dataclass(frozen=True)
class WheelMetadataRecord:
    name: str
    version: str
    resources: Tuple[str, ...]

    def __post_init__(self):
        if not self.name or not self.version:
            raise ValidationError("wheel record needs a name and a version")


@dataclass(frozen=True)
class DynamicDependencyRecord:
    """One runtime observation: `package` failed without `required_resource`."""

    package: PackageKey
    required_resource: str

    def __post_init__(self):
        if not self.required_resource:
            raise ValidationError("required resource must be non-empty")


@dataclass(frozen=True)
class Transaction:
    """One project's validated install items, each prefixed apt_ or pip_."""

    items: frozenset

    def __post_init__(self):
        for item in self.items:
            split_item(item)

    def __iter__(self):
        return iter(sorted(self.items))

    def __len__(self):
        return len(self.items)


def make_item(system: str, name: str) -> str:
    return f"{system}_{normalize_name(system, name)}"


def split_item(item: str) -> Tuple[str, str]:
    """Split a prefixed transaction item into (system, name)."""
    system, _, name = item.partition("_")
    if system not in ("apt", "pip") or not name:
        raise ValidationError(f"bad transaction item: {item!r}")
    return system, name


# -- wheel archives -----------------------------------------------------------

_VERSION_SEGMENT = re.compile(r"^\d[\w.!+]*$")


def parse_wheel_toplevel(data: bytes) -> WheelMetadataRecord:
    """Read name, version and top-level resources from wheel archive bytes.

    The resources come from top_level.txt inside the single *.dist-info/
    directory; a wheel without that file provides no resources. An archive
    with no (or several) dist-info directories is rejected.
    """
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise WheelFormatError(f"not a zip archive: {exc}") from exc
    with archive:
        dist_infos = {
            member.split("/", 1)[0]
            for member in archive.namelist()
            if member.split("/", 1)[0].endswith(".dist-info") and "/" in member
        }
        if len(dist_infos) != 1:
            raise WheelFormatError(
                f"expected exactly one .dist-info directory, found {len(dist_infos)}"
            )
        dist_info = dist_infos.pop()
        name, version = _split_dist_info(dist_info)
        resources: List[str] = []
        top_level = f"{dist_info}/top_level.txt"
        if top_level in archive.namelist():
            text = archive.read(top_level).decode("utf-8")
            for line in text.splitlines():
                line = line.strip()
                if line:
                    resources.append(line)
    return WheelMetadataRecord(name=name, version=version, resources=tuple(resources))


def _split_dist_info(dist_info: str) -> Tuple[str, str]:
    base = dist_info[: -len(".dist-info")]
    segments = base.split("-")
    for i in range(len(segments) - 1, 0, -1):
        if _VERSION_SEGMENT.match(segments[i]):
            return "-".join(segments[:i]), segments[i]
    raise WheelFormatError(f"cannot split name and version in {dist_info!r}")


def wheel_record_from_json(obj: dict) -> WheelMetadataRecord:
    """Build a record from a pre-extracted JSON row
    {"name": ..., "version": ..., "top_level": [...]}."""
    name = obj.get("name")
    version = obj.get("version")
    top_level = obj.get("top_level", [])
    if not isinstance(name, str) or not isinstance(version, str):
        raise ValidationError("wheel row needs string name and version")
    if not isinstance(top_level, list) or any(not isinstance(r, str) for r in top_level):
        raise ValidationError("wheel row top_level must be a list of strings")
    return WheelMetadataRecord(name=name, version=version, resources=tuple(top_level))


# -- dynamic probe logs -------------------------------------------------------

_NAME_TOKEN = r"[A-Za-z0-9_.\-]+"
_LOG_PATTERNS = [
    re.compile(r"no module named\s+['\"]?(" + _NAME_TOKEN + ")", re.IGNORECASE),
    re.compile(r"pip install\s+['\"]?(" + _NAME_TOKEN + ")", re.IGNORECASE),
    re.compile(r"cannot find\s+['\"]?(" + _NAME_TOKEN + ")", re.IGNORECASE),
    re.compile(r"cannot import name\s+['\"]?(" + _NAME_TOKEN + ")", re.IGNORECASE),
]


def parse_dependency_log(log: str, subject: PackageKey) -> List[DynamicDependencyRecord]:
    """Scan installer or interpreter output for missing-dependency hints.

    Matching is case-insensitive but the captured name keeps its original
    case. One record per distinct name, in order of first occurrence.
    """
    hits: List[Tuple[int, str]] = []
    for pattern in _LOG_PATTERNS:
        for match in pattern.finditer(log):
            name = match.group(1).rstrip(".,")
            if name:
                hits.append((match.start(), name))
    hits.sort()
    records = []
    seen = set()
    for _, name in hits:
        if name not in seen:
            seen.add(name)
            records.append(DynamicDependencyRecord(package=subject, required_resource=name))
    return records


def run_probe(command_template: str, package: PackageKey) -> str:
    """Run the probe command for a package and return its combined output.

    `{package}` in the template is replaced with the package name. A failing
    exit status is normal (that is the signal being probed for); only an
    unspawnable command is an error.
    """
    argv = [
        arg.replace("{package}", package.name) for arg in shlex.split(command_template)
    ]
    if not argv:
        raise ProbeError("empty probe command")
    try:
        proc = subprocess.run(
            argv, stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True
        )
    except OSError as exc:
        raise ProbeError(f"cannot spawn probe command {' '.join(argv)!r}: {exc}") from exc
    return proc.stdout


# -- Dockerfiles --------------------------------------------------------------

_SEPARATORS = re.compile(r"&&|\|\||;")


def _run_commands(text: str) -> List[str]:
    """Collect the command string of each RUN instruction.

    Line continuations are collapsed, comment lines dropped, and exec-form
    argument arrays joined into a single command string.
    """
    commands = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        parts = []
        while i < len(lines):
            line = lines[i].strip()
            i += 1
            if line.startswith("#"):
                continue
            if line.endswith("\\"):
                parts.append(line[:-1].strip())
                continue
            parts.append(line)
            break
        instruction = " ".join(p for p in parts if p)
        fields = instruction.split(None, 1)
        if len(fields) == 2 and fields[0].upper() == "RUN":
            arg = fields[1].strip()
            if arg.startswith("["):
                try:
                    tokens = json.loads(arg)
                except json.JSONDecodeError:
                    tokens = None
                if isinstance(tokens, list) and all(isinstance(t, str) for t in tokens):
                    arg = " ".join(tokens)
            commands.append(arg)
    return commands


def extract_dockerfile_packages(
    text: str,
    known_apt: Callable[[str], bool],
    known_pip: Callable[[str], bool],
) -> Transaction:
    """Pull installed package names out of a Dockerfile's RUN instructions.

    Each command is split on &&, || and ;. Option tokens (leading dash) are
    dropped, then commands starting with `apt-get install` or `pip install`
    contribute their remaining tokens as candidates. Only names accepted by
    the matching known-package predicate become transaction items.
    """
    items = set()
    for command in _run_commands(text):
        for part in _SEPARATORS.split(command):
            tokens = [t for t in part.split() if not t.startswith("-")]
            if tokens[:2] == ["apt-get", "install"]:
                system, candidates, known = "apt", tokens[2:], known_apt
            elif tokens[:2] == ["pip", "install"]:
                system, candidates, known = "pip", tokens[2:], known_pip
            else:
                continue
            for name in candidates:
                if known(name):
                    items.add(make_item(system, name))
    return Transaction(items=frozenset(items))


# -- requirements files -------------------------------------------------------

_REQUIREMENTS_NAME = re.compile(r"requirements(-[A-Za-z0-9_.]+)?\.txt")
_REQ_LINE = re.compile(r"^([A-Za-z0-9][A-Za-z0-9._\-]*)\s*(\[[^\]]*\])?\s*(.*)$")


def is_requirements_filename(file_name: str) -> bool:
    return bool(_REQUIREMENTS_NAME.fullmatch(file_name))


def extract_requirements_packages(
    file_name: str,
    contents: str,
    known_pip: Callable[[str], bool],
) -> set:
    """Validated pip_ transaction items from one requirements file.

    Comments, blank lines, pip option lines (leading dash) and URL
    requirements are skipped, as is any line the name grammar cannot parse.
    """
    items = set()
    for line in contents.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("-"):
            continue
        if "://" in line:
            continue
        match = _REQ_LINE.match(line)
        if not match:
            continue
        name, _, rest = match.groups()
        rest = rest.strip()
        if rest and rest[0] not in "<>=!~;,#(":
            continue
        if rest.startswith("@"):
            continue
        if known_pip(name):
            items.add(make_item("pip", name))
    return items


# -- transactions file --------------------------------------------------------

def append_transactions(transactions: Iterable[Transaction], path: str) -> int:
    """Append one line per non-empty transaction; returns lines written."""
    written = 0
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        for transaction in transactions:
            if len(transaction) == 0:
                continue
            fh.write(" ".join(transaction))
            fh.write("\n")
            written += 1
    return written


def read_transactions(path: str) -> List[Transaction]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    transactions = []
    for line in text.splitlines():
        items = line.split()
        if items:
            transactions.append(Transaction(items=frozenset(items)))
    return transactions


# -- graph ingestion ----------------------------------------------------------

def ingest(records, graph: KnowledgeGraph) -> KnowledgeGraph:
    """Apply wheel metadata or dynamic dependency records to the graph.

    Accepts a single record or an iterable. Ingesting the same record twice
    leaves the graph unchanged.
    """
    if isinstance(records, (WheelMetadataRecord, DynamicDependencyRecord)):
        records = [records]
    for record in records:
        if isinstance(record, WheelMetadataRecord):
            key = PackageKey("pip", normalize_name("pip", record.name))
            graph.upsert_package(key, record.name)
            graph.add_version(key, record.version)
            for resource in record.resources:
                graph.add_resource(key, record.version, resource)
        elif isinstance(record, DynamicDependencyRecord):
            latest = graph.latest_version(record.package)
            if latest is None:
                raise ValidationError(
                    f"no known version of {record.package} to attach a dependency to"
                )
            graph.add_dependency(record.package, latest, record.required_resource)
        else:
            raise ValidationError(f"cannot ingest {type(record).__name__}")
    return graph
