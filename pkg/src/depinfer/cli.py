"""Command line front end.

Subcommands: infer (snippet to Dockerfile or plan JSON), ingest (feed wheels,
probe logs, Dockerfiles or requirements files into the knowledge base), mine
(association rules from transactions), stats (knowledge base counts).

stdout carries only the command's artifact; diagnostics go to stderr.
Exit codes: 0 success, 1 input error, 2 knowledge base error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, List, Optional

from . import acquisition, emitter, inference, mining
from .acquisition import ProbeError, Transaction, WheelFormatError
from .imports import load_manifest
from .kb import (
    KnowledgeGraph,
    PackageKey,
    SnapshotError,
    ValidationError,
    load_snapshot,
    normalize_name,
    save_snapshot,
)
from .registry import RegistryClient, RegistryConfigError

INDEX_URL_ENV = "DEPINFER_INDEX_URL"


class CliInputError(ValueError):
    pass


def _plural(count: int, noun: str) -> str:
    return f"+{count} {noun}" + ("" if count == 1 else "s")


def _load_kb(directory: str) -> KnowledgeGraph:
    return load_snapshot(directory)


def _load_or_new_kb(directory: str) -> KnowledgeGraph:
    if os.path.exists(os.path.join(directory, "nodes.jsonl")):
        return load_snapshot(directory)
    return KnowledgeGraph()


def _save_kb(graph: KnowledgeGraph, directory: str) -> None:
    try:
        save_snapshot(graph, directory)
    except OSError as exc:
        raise SnapshotError(f"cannot write snapshot to {directory}: {exc}") from exc


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc


def _registry_from_args(args) -> RegistryClient:
    index_url = getattr(args, "index_url", None) or os.environ.get(INDEX_URL_ENV)
    if index_url and not args.offline:
        return RegistryClient.live(
            index_url, apt_names_path=args.apt_names, timeout=args.timeout
        )
    return RegistryClient.offline(
        pip_fixture_path=args.pip_fixture, apt_names_path=args.apt_names
    )


def _known_predicate(args, graph: KnowledgeGraph, system: str) -> Callable[[str], bool]:
    """Validation predicate for transaction candidates: a registry fixture
    when one was given, the knowledge base otherwise."""
    fixture = args.pip_fixture if system == "pip" else getattr(args, "apt_names", None)
    if fixture:
        registry = RegistryClient.offline(
            pip_fixture_path=args.pip_fixture, apt_names_path=getattr(args, "apt_names", None)
        )
        return lambda name: registry.query(system, name).exists
    return lambda name: graph.find_package_by_name(system, name) is not None


def _transactions_path(args) -> str:
    return args.transactions or os.path.join(args.kb, "transactions.txt")


# -- infer ---------------------------------------------------------------------

def cmd_infer(args) -> int:
    source = _read_text(args.snippet)
    graph = _load_kb(args.kb)
    manifest = load_manifest(args.stdlib_version, data_dir=args.stdlib_data)
    registry = _registry_from_args(args)
    config = inference.InferenceConfig(
        manifest=manifest,
        min_association_confidence=args.min_association_confidence,
    )
    plan = inference.infer(source, graph, registry, config)
    for warning in plan.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.format == "json":
        output = json.dumps(plan.to_dict(), separators=(",", ":")) + "\n"
    else:
        spec = emitter.DockerfileSpec(
            plan=plan,
            snippet_name=os.path.basename(args.snippet),
            base_image=args.base_image,
        )
        output = emitter.render(spec)
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


# -- ingest --------------------------------------------------------------------

def _iter_jsonl(path: str):
    text = _read_text(path)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CliInputError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise CliInputError(f"{path}:{lineno}: row is not an object")
        yield lineno, obj


def _wheel_paths(paths: List[str]) -> List[str]:
    found = []
    for path in paths:
        if os.path.isdir(path):
            found.extend(str(p) for p in sorted(Path(path).rglob("*.whl")))
        else:
            found.append(path)
    return found


def cmd_ingest_wheels(args) -> int:
    graph = _load_or_new_kb(args.kb)
    before = graph.counts()
    for path in _wheel_paths(args.paths):
        if path.endswith((".jsonl", ".json")):
            for lineno, obj in _iter_jsonl(path):
                try:
                    record = acquisition.wheel_record_from_json(obj)
                except ValidationError as exc:
                    raise CliInputError(f"{path}:{lineno}: {exc}") from exc
                acquisition.ingest(record, graph)
        else:
            try:
                data = Path(path).read_bytes()
            except OSError as exc:
                raise CliInputError(f"cannot read {path}: {exc}") from exc
            try:
                record = acquisition.parse_wheel_toplevel(data)
            except WheelFormatError as exc:
                raise CliInputError(f"{path}: {exc}") from exc
            acquisition.ingest(record, graph)
    _save_kb(graph, args.kb)
    after = graph.counts()
    print(
        ", ".join(
            [
                _plural(after["package"] - before["package"], "package"),
                _plural(after["version"] - before["version"], "version"),
                _plural(after["resource"] - before["resource"], "resource"),
            ]
        )
    )
    return 0


def cmd_ingest_probe_logs(args) -> int:
    graph = _load_or_new_kb(args.kb)
    before = graph.counts()
    for lineno, obj in _iter_jsonl(args.path):
        package = obj.get("package")
        version = obj.get("version")
        log = obj.get("log")
        system = obj.get("system", "pip")
        if (
            not isinstance(package, str)
            or not package
            or not isinstance(version, str)
            or not version
            or not isinstance(log, str)
        ):
            raise CliInputError(
                f"{args.path}:{lineno}: row needs string package, version and log"
            )
        try:
            key = PackageKey(system, normalize_name(system, package))
            graph.upsert_package(key, package)
            graph.add_version(key, version)
            records = acquisition.parse_dependency_log(log, key)
            acquisition.ingest(records, graph)
        except ValidationError as exc:
            raise CliInputError(f"{args.path}:{lineno}: {exc}") from exc
    _save_kb(graph, args.kb)
    after = graph.counts()
    print(
        ", ".join(
            [
                _plural(after["package"] - before["package"], "package"),
                _plural(after["version"] - before["version"], "version"),
                _plural(
                    after["resource_dependency"] - before["resource_dependency"],
                    "dependency edge",
                ),
            ]
        )
    )
    return 0


def _dockerfile_paths(paths: List[str]) -> List[str]:
    found = []
    for path in paths:
        if os.path.isdir(path):
            found.extend(
                str(p)
                for p in sorted(Path(path).rglob("Dockerfile*"))
                if p.is_file()
            )
        else:
            found.append(path)
    return found


def cmd_ingest_dockerfiles(args) -> int:
    graph = _load_or_new_kb(args.kb)
    known_apt = _known_predicate(args, graph, "apt")
    known_pip = _known_predicate(args, graph, "pip")
    transactions = []
    for path in _dockerfile_paths(args.paths):
        text = _read_text(path)
        transactions.append(
            acquisition.extract_dockerfile_packages(text, known_apt, known_pip)
        )
    written = acquisition.append_transactions(transactions, _transactions_path(args))
    print(_plural(written, "transaction"))
    return 0


def cmd_ingest_requirements(args) -> int:
    graph = _load_or_new_kb(args.kb)
    known_pip = _known_predicate(args, graph, "pip")
    transactions = []
    for path in args.paths:
        if os.path.isdir(path):
            items = set()
            for file_path in sorted(Path(path).rglob("requirements*.txt")):
                if not acquisition.is_requirements_filename(file_path.name):
                    continue
                items |= acquisition.extract_requirements_packages(
                    file_path.name, _read_text(str(file_path)), known_pip
                )
            transactions.append(Transaction(items=frozenset(items)))
        else:
            name = os.path.basename(path)
            if not acquisition.is_requirements_filename(name):
                print(f"warning: skipping {path}: not a requirements file name", file=sys.stderr)
                continue
            items = acquisition.extract_requirements_packages(
                name, _read_text(path), known_pip
            )
            transactions.append(Transaction(items=frozenset(items)))
    written = acquisition.append_transactions(transactions, _transactions_path(args))
    print(_plural(written, "transaction"))
    return 0


# -- mine ----------------------------------------------------------------------

def cmd_mine(args) -> int:
    graph = _load_or_new_kb(args.kb)
    path = _transactions_path(args)
    try:
        transactions = acquisition.read_transactions(path)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    if not transactions:
        raise CliInputError(f"no transactions in {path}")
    config = mining.MiningConfig(
        min_confidence=args.min_confidence,
        min_support_count=args.min_support_count,
    )
    rules = mining.mine_rules(transactions, config)
    mining.install_rules(rules, graph)
    _save_kb(graph, args.kb)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            for rule in rules:
                ant, (ant_system, _), cons, (cons_system, _) = mining.rule_endpoints(rule)
                fh.write(
                    json.dumps(
                        {
                            "kind": "association",
                            "ant_system": ant_system,
                            "ant": ant.name,
                            "cons_system": cons_system,
                            "cons": cons.name,
                            "support": rule.support,
                            "confidence": rule.confidence,
                            "lift": rule.lift,
                            "count": rule.count,
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
    count = len(rules)
    print(f"{count} rule" + ("" if count == 1 else "s"))
    return 0


# -- stats ---------------------------------------------------------------------

def cmd_stats(args) -> int:
    graph = _load_kb(args.kb)
    for kind, count in graph.counts().items():
        print(f"{kind}: {count}")
    return 0


# -- parser --------------------------------------------------------------------

def _add_registry_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--offline", action="store_true", default=False,
                        help="force fixture-backed registry lookups (the default "
                             "unless an index URL is configured)")
    parser.add_argument("--pip-fixture", default=None, metavar="FILE",
                        help="JSON map of pip name -> {releases: int}")
    parser.add_argument("--apt-names", default=None, metavar="FILE",
                        help="newline-delimited list of known apt package names")
    parser.add_argument("--index-url", default=None,
                        help=f"pip index base URL for live lookups (or ${INDEX_URL_ENV})")
    parser.add_argument("--timeout", type=float, default=30.0,
                        help="live lookup timeout in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depinfer",
        description="Infer the packages a Python snippet needs and emit a Dockerfile.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_infer = sub.add_parser("infer", help="infer dependencies for a snippet")
    p_infer.add_argument("snippet", help="path to the Python snippet")
    p_infer.add_argument("--kb", required=True, help="knowledge base snapshot directory")
    p_infer.add_argument("--stdlib-version", default="2.7",
                         help="stdlib manifest version tag (default 2.7)")
    p_infer.add_argument("--stdlib-data", default=None,
                         help="directory holding stdlib-<version>.json manifests")
    p_infer.add_argument("--base-image", default=emitter.DEFAULT_BASE_IMAGE)
    p_infer.add_argument("--format", choices=("dockerfile", "json"), default="dockerfile")
    p_infer.add_argument("--out", default=None, help="write the artifact here instead of stdout")
    p_infer.add_argument("--min-association-confidence", type=float, default=0.0,
                         help="ignore association edges below this confidence")
    _add_registry_flags(p_infer)
    p_infer.set_defaults(func=cmd_infer)

    p_ingest = sub.add_parser("ingest", help="feed a knowledge source into the KB")
    ingest_sub = p_ingest.add_subparsers(dest="source", required=True)

    p_wheels = ingest_sub.add_parser("wheels", help=".whl files, directories of them, "
                                                    "or JSONL rows of {name, version, top_level}")
    p_wheels.add_argument("paths", nargs="+")
    p_wheels.add_argument("--kb", required=True)
    p_wheels.set_defaults(func=cmd_ingest_wheels)

    p_probe = ingest_sub.add_parser("probe-logs",
                                    help="JSONL rows of {package, version, log}")
    p_probe.add_argument("path")
    p_probe.add_argument("--kb", required=True)
    p_probe.set_defaults(func=cmd_ingest_probe_logs)

    p_docker = ingest_sub.add_parser("dockerfiles",
                                     help="Dockerfiles or directories of them; each file "
                                          "becomes one transaction")
    p_docker.add_argument("paths", nargs="+")
    p_docker.add_argument("--kb", required=True)
    p_docker.add_argument("--transactions", default=None,
                          help="transactions file (default <kb>/transactions.txt)")
    p_docker.add_argument("--pip-fixture", default=None)
    p_docker.add_argument("--apt-names", default=None)
    p_docker.set_defaults(func=cmd_ingest_dockerfiles)

    p_reqs = ingest_sub.add_parser("requirements",
                                   help="requirements files; each directory argument "
                                        "becomes one transaction")
    p_reqs.add_argument("paths", nargs="+")
    p_reqs.add_argument("--kb", required=True)
    p_reqs.add_argument("--transactions", default=None)
    p_reqs.add_argument("--pip-fixture", default=None)
    p_reqs.set_defaults(func=cmd_ingest_requirements)

    p_mine = sub.add_parser("mine", help="mine association rules from transactions")
    p_mine.add_argument("--kb", required=True)
    p_mine.add_argument("--transactions", default=None,
                        help="transactions file (default <kb>/transactions.txt)")
    p_mine.add_argument("--min-confidence", type=float, default=0.8)
    p_mine.add_argument("--min-support-count", type=int, default=3)
    p_mine.add_argument("--out", default=None, help="also write mined rules as JSONL")
    p_mine.set_defaults(func=cmd_mine)

    p_stats = sub.add_parser("stats", help="print node and edge counts")
    p_stats.add_argument("--kb", required=True)
    p_stats.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SnapshotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        CliInputError,
        ValidationError,
        WheelFormatError,
        ProbeError,
        RegistryConfigError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
