import json

import pytest
from fastapi.testclient import TestClient

from concordia.config import InstitutionEntry, RunConfig
from concordia.service import create_app


@pytest.fixture()
def client(pipeline_config) -> TestClient:
    return TestClient(create_app(pipeline_config))


def test_queue_returns_assigned_candidates_with_views(client):
    response = client.get("/v1/queue", params={"institution": "zeri"})
    assert response.status_code == 200
    body = response.json()
    assert body["institution"] == "zeri"
    assert body["candidates"], "zeri should have assigned candidates"
    card = body["candidates"][0]
    assert {"id", "left", "right", "score", "left_view", "right_view"} <= set(card)
    left = card["left_view"]
    assert left["kind"] == "record"
    # every displayed field carries its institution badge
    assert left["fields"]
    assert all("institution" in f for f in left["fields"])


def test_queue_unknown_institution_is_404(client):
    assert client.get("/v1/queue", params={"institution": "nobody"}).status_code == 404


def test_fair_allocation_across_institutions(client):
    counts = {}
    for institution in ("zeri", "frick", "hertziana", "marburg", "khi"):
        body = client.get("/v1/queue", params={"institution": institution}).json()
        counts[institution] = len(body["candidates"])
    assert max(counts.values()) - min(counts.values()) <= 1


def test_match_detail(client):
    queue = client.get("/v1/queue", params={"institution": "zeri"}).json()
    cid = queue["candidates"][0]["id"]
    detail = client.get(f"/v1/matches/{cid}")
    assert detail.status_code == 200
    assert detail.json()["status"] == "pending"
    assert client.get("/v1/matches/mc-nope").status_code == 404


def test_post_decision_and_supersession(client):
    queue = client.get("/v1/queue", params={"institution": "zeri"}).json()
    cid = queue["candidates"][0]["id"]
    reject = client.post(
        "/v1/decisions",
        json={
            "candidate_id": cid,
            "reviewer": "a.reviewer",
            "institution": "zeri",
            "verdict": "reject",
        },
    )
    assert reject.status_code == 200
    assert reject.json()["status"] == "rejected"
    accept = client.post(
        "/v1/decisions",
        json={
            "candidate_id": cid,
            "reviewer": "a.reviewer",
            "institution": "zeri",
            "verdict": "accept_equivalent",
            "preferred_title": {"create": "An agreed title"},
        },
    )
    assert accept.status_code == 200
    assert accept.json()["sequence"] > reject.json()["sequence"]
    assert accept.json()["status"] == "accepted"
    # the decided candidate leaves every queue
    for institution in ("zeri", "frick"):
        body = client.get("/v1/queue", params={"institution": institution}).json()
        assert cid not in [c["id"] for c in body["candidates"]]


def test_idempotency_key_deduplicates(client):
    queue = client.get("/v1/queue", params={"institution": "frick"}).json()
    cid = queue["candidates"][0]["id"]
    payload = {
        "candidate_id": cid,
        "reviewer": "b.reviewer",
        "institution": "frick",
        "verdict": "defer",
    }
    first = client.post("/v1/decisions", json=payload, headers={"Idempotency-Key": "k1"})
    second = client.post("/v1/decisions", json=payload, headers={"Idempotency-Key": "k1"})
    assert first.json()["sequence"] == second.json()["sequence"]


def test_decision_validation(client):
    queue = client.get("/v1/queue", params={"institution": "khi"}).json()
    cid = queue["candidates"][0]["id"] if queue["candidates"] else None
    assert (
        client.post(
            "/v1/decisions",
            json={
                "candidate_id": "mc-ghost",
                "reviewer": "x",
                "institution": "zeri",
                "verdict": "reject",
            },
        ).status_code
        == 404
    )
    if cid:
        response = client.post(
            "/v1/decisions",
            json={
                "candidate_id": cid,
                "reviewer": "x",
                "institution": "khi",
                "verdict": "accept_associative",
            },
        )
        assert response.status_code == 400  # associative without a kind


def test_stats_reports_counts_and_rate(client):
    stats = client.get("/v1/stats").json()
    assert stats["header"]["tool"] == "concordia"
    assert "config_hash" in stats["header"]
    assert stats["inconsistency"]["eligible"] == 20
    assert stats["inconsistency"]["conflicted"] == 5
    assert stats["candidates"]["by_status"]
    assert "preferred_titles" in stats["decisions"]


def test_facets_expose_umbrella_roots(client):
    tree = client.get("/v1/facets").json()
    labels = {root["label"]: root for root in tree["roots"]}
    assert "Böhm" in labels
    bohm = labels["Böhm"]
    assert len(bohm["children"]) == 3
    child_certainties = {c["certainty"] for c in bohm["children"]}
    assert "uncertain" in child_certainties
    # count equals the union of the children's artwork sets
    assert bohm["artwork_count"] == sum(c["artwork_count"] for c in bohm["children"])


def test_token_auth_paths(pipeline_config, tmp_path):
    config = pipeline_config
    config.institutions = [
        InstitutionEntry(id="zeri", token="tok-zeri"),
        InstitutionEntry(id="frick", token="tok-frick"),
        InstitutionEntry(id="hertziana", token="tok-h"),
        InstitutionEntry(id="marburg", token="tok-m"),
        InstitutionEntry(id="khi", token="tok-k"),
    ]
    client = TestClient(create_app(config))
    assert client.get("/v1/queue", params={"institution": "zeri"}).status_code == 401
    assert (
        client.get(
            "/v1/queue",
            params={"institution": "zeri"},
            headers={"X-Auth-Token": "tok-frick"},
        ).status_code
        == 403
    )
    assert (
        client.get(
            "/v1/queue",
            params={"institution": "zeri"},
            headers={"X-Auth-Token": "tok-zeri"},
        ).status_code
        == 200
    )
