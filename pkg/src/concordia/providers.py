"""Remote link providers: who answers "which identity links does this URI assert?".

The contract: given a URI, return its outgoing exact-match links and, when the
record is deprecated, its replacement. The default implementation is an
offline fixture directory (one JSON file per URI) so every pipeline run is
reproducible; the HTTP provider fronts live authorities through an on-disk
cache in the same file format.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional, Protocol

import httpx

from concordia.model import ConcordiaError, EntityUri, LinkKind
from concordia.nquads import DEFAULT_RETRIEVED_AT

logger = logging.getLogger(__name__)


class ProviderFailure(ConcordiaError):
    """The provider could not answer for a URI (network error, bad payload)."""


class ProviderAnswer:
    """Outgoing links of one authority record."""

    __slots__ = ("uri", "links", "replaced_by", "fetched_at")

    def __init__(
        self,
        uri: EntityUri,
        links: tuple[tuple[EntityUri, LinkKind], ...] = (),
        replaced_by: Optional[EntityUri] = None,
        fetched_at: str = DEFAULT_RETRIEVED_AT,
    ):
        self.uri = uri
        self.links = links
        self.replaced_by = replaced_by
        self.fetched_at = fetched_at

    def to_json(self) -> dict:
        data = {
            "uri": self.uri.value,
            "fetched_at": self.fetched_at,
            "links": [
                {"to": target.value, "kind": kind.value} for target, kind in self.links
            ],
        }
        if self.replaced_by is not None:
            data["replaced_by"] = self.replaced_by.value
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ProviderAnswer":
        return cls(
            uri=EntityUri(data["uri"]),
            links=tuple(
                (EntityUri(link["to"]), LinkKind(link.get("kind", "exact_match")))
                for link in data.get("links", [])
            ),
            replaced_by=(
                EntityUri(data["replaced_by"]) if data.get("replaced_by") else None
            ),
            fetched_at=data.get("fetched_at", DEFAULT_RETRIEVED_AT),
        )


class LinkProvider(Protocol):
    def lookup(self, uri: EntityUri) -> ProviderAnswer:
        """Answer for one URI; empty answer when nothing is known.
        Raises ProviderFailure when the source cannot be consulted."""
        ...


def uri_cache_name(uri: EntityUri) -> str:
    """Filesystem-safe cache file name keyed by the canonical URI."""
    return hashlib.sha256(uri.value.encode("utf-8")).hexdigest()[:24] + ".json"


class FixtureProvider:
    """Offline provider reading one JSON file per URI from a directory.

    A file containing {"fail": true} simulates an unreachable source, which
    tests use to exercise the unverifiable path. Missing files mean "nothing
    known", not failure (open world)."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    def lookup(self, uri: EntityUri) -> ProviderAnswer:
        path = self.directory / uri_cache_name(uri)
        if not path.exists():
            return ProviderAnswer(uri=uri)
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("fail"):
            raise ProviderFailure(f"fixture marks {uri.value} as unreachable")
        return ProviderAnswer.from_json(data)

    def store(self, answer: ProviderAnswer) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / uri_cache_name(answer.uri)
        path.write_text(
            json.dumps(answer.to_json(), sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )
        return path

    def store_failure(self, uri: EntityUri) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / uri_cache_name(uri)
        path.write_text(
            json.dumps({"uri": uri.value, "fail": True}, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path


class CachingHttpProvider:
    """HTTP client for live authorities, with an on-disk cache.

    The endpoint template receives the canonical URI and must return the same
    JSON document shape the fixture provider reads. Cache entries are reused
    until the operator clears them; re-crawl scheduling is deliberately out of
    scope."""

    def __init__(
        self,
        endpoint_template: str,
        cache_dir: Path | str,
        client: Optional[httpx.Client] = None,
        timeout: float = 10.0,
    ):
        self.endpoint_template = endpoint_template
        self.cache = FixtureProvider(cache_dir)
        self._client = client or httpx.Client(timeout=timeout)

    def lookup(self, uri: EntityUri) -> ProviderAnswer:
        cache_path = self.cache.directory / uri_cache_name(uri)
        if cache_path.exists():
            return self.cache.lookup(uri)
        url = self.endpoint_template.format(uri=uri.value)
        try:
            response = self._client.get(url)
            response.raise_for_status()
            data = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ProviderFailure(f"lookup failed for {uri.value}: {exc}") from exc
        answer = ProviderAnswer.from_json(data)
        self.cache.store(answer)
        return answer


class MappingProvider:
    """In-memory provider for tests and synthetic corpora."""

    def __init__(self, answers: dict[EntityUri, ProviderAnswer] | None = None,
                 failures: set[EntityUri] | None = None):
        self.answers = dict(answers or {})
        self.failures = set(failures or ())

    def add(self, answer: ProviderAnswer) -> None:
        self.answers[answer.uri] = answer

    def lookup(self, uri: EntityUri) -> ProviderAnswer:
        if uri in self.failures:
            raise ProviderFailure(f"{uri.value} marked unreachable")
        return self.answers.get(uri, ProviderAnswer(uri=uri))
