"""HTTP review service: queue, decisions, stats, facets.

State is a pure function of (ingested data, decision log): every request
replays the log over the loaded clusters, so a restart never loses or invents
state. Decision writes go through the append-only log (fsync before the
acknowledgment); the Idempotency-Key header makes client retries safe.

Authentication is a static institution token table from the run config; when
no tokens are configured the service is open (fixture mode).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Header, HTTPException, Query
from pydantic import BaseModel, Field

from concordia.config import RunConfig
from concordia.harmonizer import Cluster, inconsistency_rate
from concordia.matcher import CandidateStatus, Confidence, MatchCandidate
from concordia.merge import (
    FacetEntity,
    build_facet_tree,
    merge_cluster_records,
)
from concordia.model import DataError, EntityUri, LinkKind, Literal, Statement
from concordia.modeling import UmbrellaTerm
from concordia.nquads import parse_statements
from concordia.records import (
    ActorRecord,
    ArtworkRecord,
    actor_from_json,
    artwork_from_json,
    prop_uri,
)
from concordia.review import (
    AssociativeKind,
    DecisionLog,
    ReviewDecision,
    Verdict,
    allocate_fairly,
    apply_decisions,
)

logger = logging.getLogger(__name__)


def read_jsonl(path: Path) -> list[dict]:
    """JSON Lines reader; a leading {"_header": ...} line is metadata, not data."""
    if not path.exists():
        return []
    rows = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "_header" in data:
                continue
            rows.append(data)
    return rows


def write_jsonl(path: Path, rows: list[dict], header: Optional[dict] = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        if header is not None:
            handle.write(json.dumps({"_header": header}, sort_keys=True) + "\n")
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")


class ReviewService:
    """Loads the data directory once and answers queue/decision/stat queries."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.namespace = config.namespace
        self.registry = config.registry()
        self.priority = config.priority()
        data = config.data_dir
        self.actors: dict[str, ActorRecord] = {}
        for row in self._load_json(data / "store" / "actors.json", []):
            record = actor_from_json(row)
            self.actors[f"{record.institution}:{record.local_id}"] = record
        self.artworks: dict[str, ArtworkRecord] = {}
        for row in self._load_json(data / "store" / "artworks.json", []):
            record = artwork_from_json(row)
            self.artworks[f"{record.institution}:{record.local_id}"] = record
        self.candidates: dict[str, MatchCandidate] = {}
        for row in read_jsonl(data / "matches" / "candidates.jsonl"):
            candidate = MatchCandidate.from_json_line(json.dumps(row))
            self.candidates[candidate.id] = candidate
        clusters_doc = self._load_json(data / "clusters" / "clusters.json", {})
        self.base_clusters = [
            Cluster.from_json(c) for c in clusters_doc.get("clusters", [])
        ]
        self.log = DecisionLog(data / "decisions" / "decisions.jsonl")
        self.modeling_statements: list[Statement] = []
        modeling_path = data / "modeling.nq"
        if modeling_path.exists():
            self.modeling_statements = parse_statements(
                modeling_path.read_text(encoding="utf-8")
            )
        self.tokens = config.token_table()
        self.institutions = sorted(config.institution_ids()) or sorted(
            {r.institution for r in self.actors.values()}
            | {r.institution for r in self.artworks.values()}
        )

    @staticmethod
    def _load_json(path: Path, default):
        if not path.exists():
            return default
        return json.loads(path.read_text(encoding="utf-8"))

    # -- state derived from (data, log)

    def replay(self):
        return apply_decisions(
            self.base_clusters,
            self.log.load(),
            self.candidates,
            self.priority,
            self.registry,
            self.namespace,
        )

    def candidate_statuses(self) -> dict[str, CandidateStatus]:
        statuses = {cid: c.status for cid, c in self.candidates.items()}
        statuses.update(self.replay().candidate_status)
        return statuses

    def pending_candidates(self) -> list[MatchCandidate]:
        statuses = self.candidate_statuses()
        return [
            c
            for cid, c in sorted(self.candidates.items())
            if statuses[cid] is CandidateStatus.PENDING
            and c.confidence is not Confidence.REJECTED
        ]

    def assignment(self):
        return allocate_fairly(self.pending_candidates(), self.institutions)

    # -- auth

    def authenticate(self, token: Optional[str], institution: Optional[str]) -> None:
        if not self.tokens:
            return
        if token is None or token not in self.tokens:
            raise HTTPException(status_code=401, detail="missing or unknown token")
        if institution is not None and self.tokens[token] != institution:
            raise HTTPException(
                status_code=403, detail="token does not belong to this institution"
            )

    # -- rendering

    def record_for_ref(self, ref: str) -> Optional[Union[ActorRecord, ArtworkRecord]]:
        if ref.startswith("work:"):
            return self.artworks.get(ref.split(":", 1)[1])
        if ref.startswith("actor:"):
            return self.actors.get(ref.split(":", 1)[1])
        return None

    def render_side(self, ref: str) -> dict:
        record = self.record_for_ref(ref)
        if record is None:
            uri = EntityUri(ref) if "://" in ref or ref.startswith("urn:") else None
            return {
                "kind": "entity",
                "ref": ref,
                "authority": self.registry.resolve(uri) if uri else "unknown",
            }
        cluster = Cluster(seed=record.uri(self.namespace))
        merged = merge_cluster_records(cluster, [record], self.namespace)
        view = merged.to_json()
        view["kind"] = "record"
        view["ref"] = ref
        view["institution"] = record.institution
        # per-field provenance badges for the side-by-side card
        fields = [
            {
                "name": "title",
                "value": t["text"],
                "institution": t["institution"],
                "role": t["role"],
            }
            for t in view["all_titles"]
        ]
        if isinstance(record, ArtworkRecord):
            from concordia.matcher import date_spec_to_text

            if not record.date.is_unknown():
                fields.append(
                    {
                        "name": "date",
                        "value": date_spec_to_text(record.date),
                        "institution": record.institution,
                    }
                )
            for creator in record.creators:
                fields.append(
                    {
                        "name": "creator",
                        "value": creator.local_id,
                        "institution": record.institution,
                        "qualifier": creator.qualifier.value,
                    }
                )
            for keeper in record.keeper_chain:
                fields.append(
                    {"name": "keeper", "value": keeper, "institution": record.institution}
                )
        else:
            fields.append(
                {
                    "name": "dates",
                    "value": json.dumps(
                        [d.form.value for d in record.dates], sort_keys=True
                    ),
                    "institution": record.institution,
                }
            )
        view["fields"] = fields
        return view

    def render_candidate(self, candidate: MatchCandidate) -> dict:
        return {
            "id": candidate.id,
            "left": candidate.left,
            "right": candidate.right,
            "score": candidate.score,
            "signals": {
                "name_score": candidate.name_score,
                "date_verdict": candidate.date_verdict.value,
                "class_verdict": candidate.class_verdict.value,
            },
            "confidence": candidate.confidence.value,
            "left_view": self.render_side(candidate.left),
            "right_view": self.render_side(candidate.right),
        }

    # -- facets

    def facet_tree(self):
        statements = self.modeling_statements
        labels: dict[EntityUri, str] = {}
        kinds: dict[EntityUri, str] = {}
        members: dict[EntityUri, set[EntityUri]] = {}
        artworks: dict[EntityUri, set[str]] = {}
        for stmt in statements:
            if stmt.predicate == prop_uri("label") and isinstance(stmt.object, Literal):
                labels.setdefault(stmt.subject, stmt.object.text)
            elif stmt.predicate == prop_uri("entity_kind") and isinstance(
                stmt.object, Literal
            ):
                kinds[stmt.subject] = stmt.object.text
            elif stmt.predicate is LinkKind.MEMBER_OF_UMBRELLA and isinstance(
                stmt.object, EntityUri
            ):
                members.setdefault(stmt.object, set()).add(stmt.subject)
            elif stmt.predicate == prop_uri("creator") and isinstance(
                stmt.object, EntityUri
            ):
                artworks.setdefault(stmt.object, set()).add(stmt.subject.value)
        umbrellas = [
            UmbrellaTerm(
                uri=uri,
                label=labels.get(uri, uri.value),
                members=frozenset(member_set),
            )
            for uri, member_set in sorted(members.items())
            if kinds.get(uri) == "umbrella_term"
        ]
        entity_uris = {m for u in umbrellas for m in u.members} | set(artworks)
        entities = [
            FacetEntity(
                uri=uri,
                label=labels.get(uri, uri.value),
                artworks=frozenset(artworks.get(uri, set())),
                certainty=(
                    "uncertain"
                    if kinds.get(uri) in ("collective_name", "anonymous_group")
                    else "certain"
                ),
            )
            for uri in sorted(entity_uris)
        ]
        return build_facet_tree(entities, umbrellas)

    # -- stats

    def stats(self) -> dict:
        statuses = self.candidate_statuses()
        by_status: dict[str, int] = {}
        for status in statuses.values():
            by_status[status.value] = by_status.get(status.value, 0) + 1
        by_confidence: dict[str, int] = {}
        for candidate in self.candidates.values():
            by_confidence[candidate.confidence.value] = (
                by_confidence.get(candidate.confidence.value, 0) + 1
            )
        decisions = self.log.load()
        by_verdict: dict[str, int] = {}
        titles = {"marked": 0, "created": 0}
        for decision in decisions:
            by_verdict[decision.verdict.value] = by_verdict.get(decision.verdict.value, 0) + 1
            if decision.preferred_title:
                if decision.preferred_title.get("mark"):
                    titles["marked"] += 1
                if decision.preferred_title.get("create"):
                    titles["created"] += 1
        return {
            "header": self.config.header_json(),
            "candidates": {"by_status": by_status, "by_confidence": by_confidence},
            "decisions": {
                "count": len(decisions),
                "by_verdict": by_verdict,
                "preferred_titles": titles,
            },
            "inconsistency": inconsistency_rate(self.base_clusters).to_json(),
        }


class DecisionBody(BaseModel):
    candidate_id: str
    reviewer: str
    institution: str
    verdict: str
    associative_kind: Optional[str] = None
    preferred_title: Optional[dict] = Field(default=None)


def create_app(config: RunConfig) -> FastAPI:
    app = FastAPI(title="concordia review service", version="1")
    service = ReviewService(config)
    app.state.service = service

    @app.get("/v1/queue")
    def queue(
        institution: str = Query(...),
        x_auth_token: Optional[str] = Header(default=None),
    ):
        service.authenticate(x_auth_token, institution)
        if institution not in service.institutions:
            raise HTTPException(status_code=404, detail=f"unknown institution {institution!r}")
        assigned = service.assignment().by_institution.get(institution, [])
        return {
            "institution": institution,
            "candidates": [
                service.render_candidate(service.candidates[cid])
                for cid in assigned
                if cid in service.candidates
            ],
        }

    @app.get("/v1/matches/{candidate_id}")
    def match_detail(
        candidate_id: str, x_auth_token: Optional[str] = Header(default=None)
    ):
        service.authenticate(x_auth_token, None)
        candidate = service.candidates.get(candidate_id)
        if candidate is None:
            raise HTTPException(status_code=404, detail="unknown candidate")
        view = service.render_candidate(candidate)
        view["status"] = service.candidate_statuses()[candidate_id].value
        return view

    @app.post("/v1/decisions")
    def post_decision(
        body: DecisionBody,
        idempotency_key: Optional[str] = Header(default=None),
        x_auth_token: Optional[str] = Header(default=None),
    ):
        service.authenticate(x_auth_token, body.institution)
        if body.candidate_id not in service.candidates:
            raise HTTPException(status_code=404, detail="unknown candidate")
        if body.institution not in service.institutions:
            raise HTTPException(status_code=403, detail="unregistered institution")
        try:
            verdict = Verdict(body.verdict)
            kind = AssociativeKind(body.associative_kind) if body.associative_kind else None
            decision = ReviewDecision(
                candidate_id=body.candidate_id,
                reviewer=body.reviewer,
                institution=body.institution,
                verdict=verdict,
                associative_kind=kind,
                preferred_title=body.preferred_title,
                timestamp=body_timestamp(),
                idempotency_key=idempotency_key,
            )
        except (ValueError, DataError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        stored = service.log.append(decision)
        status = service.candidate_statuses()[body.candidate_id]
        return {
            "sequence": stored.sequence,
            "candidate_id": body.candidate_id,
            "status": status.value,
        }

    @app.get("/v1/stats")
    def stats(x_auth_token: Optional[str] = Header(default=None)):
        service.authenticate(x_auth_token, None)
        return service.stats()

    @app.get("/v1/facets")
    def facets(x_auth_token: Optional[str] = Header(default=None)):
        service.authenticate(x_auth_token, None)
        return service.facet_tree().to_json()

    return app


def body_timestamp() -> str:
    from datetime import datetime, timezone

    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
