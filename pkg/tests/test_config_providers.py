import json

import httpx
import pytest

from concordia.config import InstitutionEntry, RunConfig
from concordia.model import ConfigError, EntityUri, LinkKind
from concordia.providers import (
    CachingHttpProvider,
    FixtureProvider,
    ProviderAnswer,
    ProviderFailure,
    uri_cache_name,
)


def test_config_defaults_validate():
    config = RunConfig()
    assert config.fixture_dir == config.data_dir / "provider"
    assert config.priority().excluded == frozenset({"viaf"})


def test_config_rejects_bad_thresholds():
    with pytest.raises(ConfigError):
        RunConfig(threshold_confident=0.5, threshold_review=0.7)


def test_config_rejects_online_without_endpoint():
    with pytest.raises(ConfigError):
        RunConfig(offline=False)


def test_config_hash_is_stable_and_sensitive(tmp_path):
    a = RunConfig(data_dir=tmp_path)
    b = RunConfig(data_dir=tmp_path)
    assert a.config_hash() == b.config_hash()
    c = RunConfig(data_dir=tmp_path, threshold_confident=0.95)
    assert c.config_hash() != a.config_hash()


def test_config_round_trip(tmp_path):
    config = RunConfig(
        data_dir=tmp_path / "d",
        institutions=[InstitutionEntry(id="zeri", token="t1")],
        priority_spec="loc,wikidata;exclude=viaf",
    )
    config.save(tmp_path / "config.json")
    again = RunConfig.load(tmp_path / "config.json")
    assert again.priority_spec == config.priority_spec
    assert again.token_table() == {"t1": "zeri"}
    assert again.priority().institutions == frozenset({"local:zeri"})


def test_config_custom_authority_table(tmp_path):
    table = tmp_path / "authorities.tsv"
    table.write_text(
        "mydb\thttps://mydb.example.org/id/\t1\n"
        "wikidata\thttp://www.wikidata.org/entity/\t2\n"
        "viaf\thttp://viaf.org/viaf/\texcluded\n",
        encoding="utf-8",
    )
    config = RunConfig(data_dir=tmp_path, authority_table=table)
    registry = config.registry()
    assert registry.resolve(EntityUri("https://mydb.example.org/id/7")) == "mydb"
    priority = config.priority()
    assert priority.ranked == ("mydb", "wikidata")
    assert priority.excluded == frozenset({"viaf"})
    # an explicit priority flag still overrides the table ranks
    config.priority_spec = "wikidata,mydb;exclude=viaf"
    assert config.priority().ranked == ("wikidata", "mydb")


def test_config_missing_authority_table_is_config_error(tmp_path):
    config = RunConfig(data_dir=tmp_path, authority_table=tmp_path / "nope.tsv")
    with pytest.raises(ConfigError):
        config.registry()


def test_fixture_provider_round_trip(tmp_path):
    provider = FixtureProvider(tmp_path)
    uri = EntityUri("http://vocab.getty.edu/ulan/123")
    answer = ProviderAnswer(
        uri=uri,
        links=((EntityUri("http://www.wikidata.org/entity/Q1"), LinkKind.EXACT_MATCH),),
        fetched_at="2020-01-01T00:00:00Z",
    )
    provider.store(answer)
    loaded = provider.lookup(uri)
    assert loaded.links == answer.links
    assert loaded.fetched_at == answer.fetched_at


def test_fixture_provider_missing_file_is_empty_answer(tmp_path):
    provider = FixtureProvider(tmp_path)
    assert provider.lookup(EntityUri("http://example.org/none")).links == ()


def test_fixture_provider_failure_marker(tmp_path):
    provider = FixtureProvider(tmp_path)
    uri = EntityUri("http://example.org/dead")
    provider.store_failure(uri)
    with pytest.raises(ProviderFailure):
        provider.lookup(uri)


def test_http_provider_caches_on_disk(tmp_path):
    uri = EntityUri("http://vocab.getty.edu/ulan/42")
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        return httpx.Response(
            200,
            json={
                "uri": uri.value,
                "fetched_at": "2022-02-02T00:00:00Z",
                "links": [{"to": "http://www.wikidata.org/entity/Q42", "kind": "exact_match"}],
            },
        )

    client = httpx.Client(transport=httpx.MockTransport(handler))
    provider = CachingHttpProvider("https://resolver.test/links?uri={uri}", tmp_path, client)
    first = provider.lookup(uri)
    second = provider.lookup(uri)
    assert calls["n"] == 1  # second hit came from the cache
    assert (tmp_path / uri_cache_name(uri)).exists()
    assert first.links == second.links


def test_http_provider_failure_raises(tmp_path):
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500)

    client = httpx.Client(transport=httpx.MockTransport(handler))
    provider = CachingHttpProvider("https://resolver.test/links?uri={uri}", tmp_path, client)
    with pytest.raises(ProviderFailure):
        provider.lookup(EntityUri("http://vocab.getty.edu/ulan/500"))
