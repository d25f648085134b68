import json

import pytest

from depinfer.kb import ValidationError
from depinfer.registry import (
    AptNameListBackend,
    PipFixtureBackend,
    PipLiveBackend,
    RegistryAnswer,
    RegistryClient,
    RegistryConfigError,
    RegistryUnavailableError,
)


def write_pip_fixture(tmp_path, mapping):
    path = tmp_path / "registry-pip.json"
    path.write_text(json.dumps(mapping))
    return str(path)


def write_apt_names(tmp_path, names):
    path = tmp_path / "registry-apt.txt"
    path.write_text("\n".join(names) + "\n")
    return str(path)


class TestRegistryAnswer:
    def test_installable_implies_exists(self):
        with pytest.raises(ValidationError):
            RegistryAnswer(exists=False, has_installable_version=True, canonical_name="x")


class TestPipFixtureBackend:
    def test_releases_drive_installability(self, tmp_path):
        path = write_pip_fixture(tmp_path, {"Pillow": {"releases": 50}, "PIL": {"releases": 0}})
        backend = PipFixtureBackend(path)
        pillow = backend.lookup("pillow")
        assert pillow.exists and pillow.has_installable_version
        pil = backend.lookup("pil")
        assert pil.exists and not pil.has_installable_version
        assert not backend.lookup("ghost").exists

    def test_keys_normalized_at_load(self, tmp_path):
        path = write_pip_fixture(tmp_path, {"Typing_Extensions": {"releases": 3}})
        backend = PipFixtureBackend(path)
        assert backend.lookup("typing-extensions").exists

    def test_empty_backend_answers_absent(self):
        assert not PipFixtureBackend().lookup("anything").exists

    def test_bad_fixture_shapes(self, tmp_path):
        bad_values = [
            '["not", "a", "map"]',
            '{"x": {"releases": -1}}',
            '{"x": {"releases": true}}',
            '{"x": {}}',
            '{"x": 5}',
            "{broken",
        ]
        for text in bad_values:
            path = tmp_path / "registry-pip.json"
            path.write_text(text)
            with pytest.raises(RegistryConfigError):
                PipFixtureBackend(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(RegistryConfigError):
            PipFixtureBackend(str(tmp_path / "nope.json"))


class TestAptNameListBackend:
    def test_existing_name_is_installable(self, tmp_path):
        path = write_apt_names(tmp_path, ["libpcap-dev", "Libmemcached-DEV"])
        backend = AptNameListBackend(path)
        answer = backend.lookup("libpcap-dev")
        assert answer.exists and answer.has_installable_version
        assert backend.lookup("libmemcached-dev").exists
        assert not backend.lookup("ghost").exists

    def test_missing_file(self, tmp_path):
        with pytest.raises(RegistryConfigError):
            AptNameListBackend(str(tmp_path / "nope.txt"))


class FetchScript:
    """Scripted (status, body) responses; raises entries propagate."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, url, timeout):
        self.calls.append(url)
        result = self.responses.pop(0)
        if isinstance(result, Exception):
            raise result
        return result


def body_with_releases(releases):
    return json.dumps({"releases": releases}).encode("utf-8")


class TestPipLiveBackend:
    def test_url_shape_and_success(self):
        fetch = FetchScript([(200, body_with_releases({"1.0": [{}]}))])
        backend = PipLiveBackend("https://pypi.invalid/", fetch=fetch)
        answer = backend.lookup("pcapy")
        assert fetch.calls == ["https://pypi.invalid/pypi/pcapy/json"]
        assert answer.exists and answer.has_installable_version

    def test_empty_releases_mean_not_installable(self):
        fetch = FetchScript([(200, body_with_releases({}))])
        backend = PipLiveBackend("https://pypi.invalid", fetch=fetch)
        answer = backend.lookup("pil")
        assert answer.exists and not answer.has_installable_version

    def test_404_is_absent(self):
        fetch = FetchScript([(404, b"")])
        backend = PipLiveBackend("https://pypi.invalid", fetch=fetch)
        assert not backend.lookup("ghost").exists

    def test_other_status_is_transient(self):
        fetch = FetchScript([(503, b"")])
        backend = PipLiveBackend("https://pypi.invalid", fetch=fetch)
        with pytest.raises(RegistryUnavailableError):
            backend.lookup("pcapy")

    def test_unparseable_body_is_transient(self):
        fetch = FetchScript([(200, b"<html>")])
        backend = PipLiveBackend("https://pypi.invalid", fetch=fetch)
        with pytest.raises(RegistryUnavailableError):
            backend.lookup("pcapy")

    def test_empty_index_url_rejected(self):
        with pytest.raises(RegistryConfigError):
            PipLiveBackend("")


class TestRegistryClient:
    def test_query_normalizes(self, tmp_path):
        client = RegistryClient.offline(
            pip_fixture_path=write_pip_fixture(tmp_path, {"flask": {"releases": 3}})
        )
        assert client.query("pip", "Flask") == client.query("pip", "flask")
        assert client.query("pip", "FLASK").exists

    def test_answers_memoized(self):
        fetch = FetchScript([(200, body_with_releases({"1.0": [{}]}))])
        client = RegistryClient(PipLiveBackend("https://pypi.invalid", fetch=fetch), AptNameListBackend())
        client.query("pip", "pcapy")
        client.query("pip", "pcapy")
        client.query("pip", "PCAPY")
        assert len(fetch.calls) == 1

    def test_transient_failures_not_memoized(self):
        fetch = FetchScript(
            [
                RegistryUnavailableError("down"),
                RegistryUnavailableError("still down"),
                RegistryUnavailableError("down again"),
                (200, body_with_releases({"1.0": [{}]})),
            ]
        )
        client = RegistryClient(PipLiveBackend("https://pypi.invalid", fetch=fetch), AptNameListBackend())
        with pytest.raises(RegistryUnavailableError):
            client.query("pip", "pcapy")
        answer = client.query("pip", "pcapy")
        assert answer.exists
        assert len(fetch.calls) == 4

    def test_single_retry_hides_one_failure(self):
        fetch = FetchScript(
            [RegistryUnavailableError("blip"), (200, body_with_releases({"1.0": [{}]}))]
        )
        client = RegistryClient(PipLiveBackend("https://pypi.invalid", fetch=fetch), AptNameListBackend())
        assert client.query("pip", "pcapy").exists
        assert len(fetch.calls) == 2

    def test_negative_answers_are_memoized(self):
        fetch = FetchScript([(404, b"")])
        client = RegistryClient(PipLiveBackend("https://pypi.invalid", fetch=fetch), AptNameListBackend())
        assert not client.query("pip", "ghost").exists
        assert not client.query("pip", "ghost").exists
        assert len(fetch.calls) == 1

    def test_offline_defaults_answer_absent(self):
        client = RegistryClient.offline()
        answer = client.query("pip", "anything")
        assert not answer.exists and not answer.has_installable_version
        assert not client.query("apt", "anything").exists
