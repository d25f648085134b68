"""Package registry lookups: does a name exist, and can it be installed.

Offline fixture backends are the default; a live index lookup for pip is
available when an index URL is configured. Answers are memoized per client,
transient failures never are.
"""
from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from .kb import ValidationError, normalize_name


class RegistryConfigError(ValueError):
    """A fixture file or client configuration is unusable."""


class RegistryUnavailableError(RuntimeError):
    """A transient lookup failure; the answer is unknown, not negative."""


@dataclass(frozen=True)
class RegistryAnswer:
    exists: bool
    has_installable_version: bool
    canonical_name: str

    def __post_init__(self):
        if self.has_installable_version and not self.exists:
            raise ValidationError("installable implies exists")


def _absent(name: str) -> RegistryAnswer:
    return RegistryAnswer(exists=False, has_installable_version=False, canonical_name=name)


class PipFixtureBackend:
    """Offline pip answers from a JSON map of name -> {"releases": int}."""

    def __init__(self, path: Optional[str] = None):
        self._releases: Dict[str, int] = {}
        if path is None:
            return
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise RegistryConfigError(f"cannot read pip fixture {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise RegistryConfigError(f"pip fixture {path} is not valid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise RegistryConfigError(f"pip fixture {path} must be a JSON object")
        for name, entry in obj.items():
            releases = entry.get("releases") if isinstance(entry, dict) else None
            if not isinstance(releases, int) or isinstance(releases, bool) or releases < 0:
                raise RegistryConfigError(
                    f"pip fixture {path}: entry {name!r} needs a non-negative releases count"
                )
            self._releases[normalize_name("pip", name)] = releases

    def lookup(self, name: str) -> RegistryAnswer:
        releases = self._releases.get(name)
        if releases is None:
            return _absent(name)
        return RegistryAnswer(
            exists=True, has_installable_version=releases > 0, canonical_name=name
        )


class AptNameListBackend:
    """Offline apt answers from a newline-delimited name list. A name that
    exists in apt is considered installable."""

    def __init__(self, path: Optional[str] = None):
        self._names = set()
        if path is None:
            return
        try:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    name = line.strip()
                    if name:
                        self._names.add(normalize_name("apt", name))
        except OSError as exc:
            raise RegistryConfigError(f"cannot read apt name list {path}: {exc}") from exc

    def lookup(self, name: str) -> RegistryAnswer:
        if name in self._names:
            return RegistryAnswer(exists=True, has_installable_version=True, canonical_name=name)
        return _absent(name)


def _default_fetch(url: str, timeout: float) -> Tuple[int, bytes]:
    request = urllib.request.Request(url, headers={"Accept": "application/json"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, response.read()
    except urllib.error.HTTPError as exc:
        return exc.code, b""
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise RegistryUnavailableError(f"lookup failed for {url}: {exc}") from exc


class PipLiveBackend:
    """Query a pip index over HTTP: GET <index-url>/pypi/<name>/json."""

    def __init__(
        self,
        index_url: str,
        timeout: float = 30.0,
        fetch: Optional[Callable[[str, float], Tuple[int, bytes]]] = None,
    ):
        if not index_url:
            raise RegistryConfigError("index URL must be non-empty")
        self._index_url = index_url.rstrip("/")
        self._timeout = timeout
        self._fetch = fetch or _default_fetch

    def lookup(self, name: str) -> RegistryAnswer:
        url = f"{self._index_url}/pypi/{name}/json"
        status, body = self._fetch(url, self._timeout)
        if status == 404:
            return _absent(name)
        if status != 200:
            raise RegistryUnavailableError(f"unexpected status {status} for {url}")
        try:
            obj = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise RegistryUnavailableError(f"unreadable response from {url}") from exc
        releases = obj.get("releases") if isinstance(obj, dict) else None
        installable = bool(releases)
        return RegistryAnswer(
            exists=True, has_installable_version=installable, canonical_name=name
        )


class RegistryClient:
    """Front door for registry questions, with per-run memoization."""

    def __init__(self, pip_backend, apt_backend):
        self._backends = {"pip": pip_backend, "apt": apt_backend}
        self._cache: Dict[Tuple[str, str], RegistryAnswer] = {}
        self._lock = threading.Lock()

    @classmethod
    def offline(
        cls,
        pip_fixture_path: Optional[str] = None,
        apt_names_path: Optional[str] = None,
    ) -> "RegistryClient":
        return cls(PipFixtureBackend(pip_fixture_path), AptNameListBackend(apt_names_path))

    @classmethod
    def live(
        cls,
        index_url: str,
        apt_names_path: Optional[str] = None,
        timeout: float = 30.0,
    ) -> "RegistryClient":
        return cls(PipLiveBackend(index_url, timeout=timeout), AptNameListBackend(apt_names_path))

    def query(self, system: str, name: str) -> RegistryAnswer:
        """Answer for a package name; the name is normalized first, so
        query(system, n) == query(system, normalize(n))."""
        normalized = normalize_name(system, name)
        cache_key = (system, normalized)
        with self._lock:
            cached = self._cache.get(cache_key)
        if cached is not None:
            return cached
        backend = self._backends[system]
        try:
            answer = backend.lookup(normalized)
        except RegistryUnavailableError:
            # one retry; a second failure propagates and is not memoized
            answer = backend.lookup(normalized)
        with self._lock:
            self._cache[cache_key] = answer
        return answer
