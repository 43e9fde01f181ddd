"""Curator decisions: fair allocation, an append-only log, and replay.

The log is JSON Lines, one decision per line, fsynced before any
acknowledgment; state is always reconstructible as a pure function of
(ingested data, decision log). Later decisions supersede earlier ones by
sequence number, but nothing is ever rewritten. Rejections become negative
constraints that keep a pair out of every future match run.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from concordia.harmonizer import (
    Cluster,
    Conflict,
    ConflictKind,
    ProvenancedLink,
    _score_candidates,
)
from concordia.matcher import CandidateStatus, MatchCandidate
from concordia.model import (
    AuthorityRegistry,
    CanonicalKey,
    DataError,
    Diagnostic,
    EntityUri,
    LinkKind,
    PriorityOrder,
    Provenance,
    ProvenanceMethod,
    Statement,
    mint_deterministic_uri,
)
from concordia.nquads import DEFAULT_RETRIEVED_AT


class Verdict(str, Enum):
    ACCEPT_EQUIVALENT = "accept_equivalent"
    ACCEPT_ASSOCIATIVE = "accept_associative"
    REJECT = "reject"
    DEFER = "defer"


class AssociativeKind(str, Enum):
    COPY_OF = "copy_of"
    PREPARATORY_FOR = "preparatory_for"
    PART_OF = "part_of"
    RELATED = "related"


ASSOCIATIVE_PREDICATES = {
    AssociativeKind.COPY_OF: "urn:concordia:rel:copy_of",
    AssociativeKind.PREPARATORY_FOR: "urn:concordia:rel:preparatory_for",
    AssociativeKind.PART_OF: LinkKind.PART_OF,
    AssociativeKind.RELATED: "urn:concordia:rel:related",
}

VERDICT_TO_STATUS = {
    Verdict.ACCEPT_EQUIVALENT: CandidateStatus.ACCEPTED,
    Verdict.ACCEPT_ASSOCIATIVE: CandidateStatus.ACCEPTED,
    Verdict.REJECT: CandidateStatus.REJECTED,
    Verdict.DEFER: CandidateStatus.DEFERRED,
}


@dataclass(frozen=True)
class ReviewDecision:
    """One curator verdict on one candidate. Append-only; the highest sequence
    number wins per candidate."""

    candidate_id: str
    reviewer: str
    institution: str
    verdict: Verdict
    associative_kind: Optional[AssociativeKind] = None
    preferred_title: Optional[dict] = None
    timestamp: str = DEFAULT_RETRIEVED_AT
    sequence: int = 0
    idempotency_key: Optional[str] = None

    def __post_init__(self) -> None:
        if self.verdict is Verdict.ACCEPT_ASSOCIATIVE and self.associative_kind is None:
            raise DataError("accept_associative requires an associative kind")

    def to_json_line(self) -> str:
        data = {
            "candidate_id": self.candidate_id,
            "reviewer": self.reviewer,
            "institution": self.institution,
            "verdict": self.verdict.value,
            "timestamp": self.timestamp,
            "sequence": self.sequence,
        }
        if self.associative_kind is not None:
            data["associative_kind"] = self.associative_kind.value
        if self.preferred_title:
            data["preferred_title"] = self.preferred_title
        if self.idempotency_key:
            data["idempotency_key"] = self.idempotency_key
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json_line(cls, line: str) -> "ReviewDecision":
        data = json.loads(line)
        return cls(
            candidate_id=data["candidate_id"],
            reviewer=data["reviewer"],
            institution=data["institution"],
            verdict=Verdict(data["verdict"]),
            associative_kind=(
                AssociativeKind(data["associative_kind"])
                if data.get("associative_kind")
                else None
            ),
            preferred_title=data.get("preferred_title"),
            timestamp=data.get("timestamp", DEFAULT_RETRIEVED_AT),
            sequence=int(data.get("sequence", 0)),
            idempotency_key=data.get("idempotency_key"),
        )


class DecisionLog:
    """Append-only JSON Lines log; the append is durable (flush + fsync)
    before the acknowledgment leaves this process."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._next_sequence = 1
        self._by_idempotency_key: dict[str, ReviewDecision] = {}
        if self.path.exists():
            for decision in self.load():
                self._next_sequence = max(self._next_sequence, decision.sequence + 1)
                if decision.idempotency_key:
                    self._by_idempotency_key[decision.idempotency_key] = decision

    def load(self) -> list[ReviewDecision]:
        if not self.path.exists():
            return []
        decisions = []
        with self.path.open(encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    decisions.append(ReviewDecision.from_json_line(line))
        return decisions

    def append(self, decision: ReviewDecision) -> ReviewDecision:
        """Assign the next sequence number and persist. A decision carrying an
        already-seen idempotency key replays the previous acknowledgment."""
        if decision.idempotency_key:
            previous = self._by_idempotency_key.get(decision.idempotency_key)
            if previous is not None:
                return previous
        stamped = replace(decision, sequence=self._next_sequence)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(stamped.to_json_line() + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        self._next_sequence += 1
        if stamped.idempotency_key:
            self._by_idempotency_key[stamped.idempotency_key] = stamped
        return stamped


# --- allocation -------------------------------------------------------------------


@dataclass
class Assignment:
    """Pending candidates dealt out to institutions; max - min counts <= 1."""

    by_institution: dict[str, list[str]] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {inst: len(ids) for inst, ids in self.by_institution.items()}

    def institution_of(self, candidate_id: str) -> Optional[str]:
        for inst, ids in self.by_institution.items():
            if candidate_id in ids:
                return inst
        return None

    def is_balanced(self) -> bool:
        counts = list(self.counts().values())
        return not counts or max(counts) - min(counts) <= 1

    def to_json(self) -> dict:
        return {inst: list(ids) for inst, ids in sorted(self.by_institution.items())}


def allocate_fairly(
    pending: Sequence[MatchCandidate],
    institutions: Sequence[str],
    existing: Optional[Assignment] = None,
) -> Assignment:
    """Deal pending candidates to institutions an equal number each,
    regardless of the candidates' origin.

    Deterministic: candidates are processed in candidate-id order and ties in
    load go to the institution that sorts first. Already-claimed candidates
    never move; new ones fill toward balance."""
    if not institutions:
        raise DataError("at least one institution is required")
    ordered_institutions = sorted(set(institutions))
    pending_ids = sorted({c.id for c in pending})
    assignment = Assignment(by_institution={inst: [] for inst in ordered_institutions})
    claimed = set()
    if existing is not None:
        for inst, ids in existing.by_institution.items():
            if inst not in assignment.by_institution:
                continue
            for candidate_id in ids:
                if candidate_id in pending_ids and candidate_id not in claimed:
                    assignment.by_institution[inst].append(candidate_id)
                    claimed.add(candidate_id)
    for candidate_id in pending_ids:
        if candidate_id in claimed:
            continue
        target = min(
            ordered_institutions,
            key=lambda inst: (len(assignment.by_institution[inst]), inst),
        )
        assignment.by_institution[target].append(candidate_id)
    return assignment


# --- replay -------------------------------------------------------------------------


def load_rejected_pairs(
    decisions: Iterable[ReviewDecision], candidates: Mapping[str, MatchCandidate]
) -> frozenset[frozenset[str]]:
    """Pairs whose latest verdict is reject; these never re-enter the queue."""
    latest: dict[str, ReviewDecision] = {}
    for decision in decisions:
        current = latest.get(decision.candidate_id)
        if current is None or decision.sequence > current.sequence:
            latest[decision.candidate_id] = decision
    pairs = set()
    for decision in latest.values():
        if decision.verdict is Verdict.REJECT and decision.candidate_id in candidates:
            pairs.add(candidates[decision.candidate_id].pair_key())
    return frozenset(pairs)


def ref_to_uri(ref: str, namespace: str) -> EntityUri:
    """Resolve a candidate side to an entity URI. Record refs look like
    ``actor:institution:local_id`` / ``work:institution:local_id``; anything
    else must already be a URI."""
    if ref.startswith("actor:") or ref.startswith("work:"):
        class_tag, institution, local_id = ref.split(":", 2)
        return mint_deterministic_uri(
            namespace, class_tag, CanonicalKey.from_raw(institution, local_id)
        )
    return EntityUri(ref)


def merge_clusters(
    a: Cluster, b: Cluster, priority: PriorityOrder, registry: AuthorityRegistry
) -> Cluster:
    """Union two clusters' resolved maps. A per-authority collision re-enters
    priority filtering over the combined support links; an unresolvable tie
    drops the slot and keeps the conflict."""
    seed = min(a.seed, b.seed)
    links = tuple(
        sorted(set(a.support) | set(b.support), key=ProvenancedLink.sort_key)
    )
    resolved: dict[str, EntityUri] = {}
    discarded = list(a.discarded) + list(b.discarded)
    unresolved = list(a.unresolved_conflicts) + list(b.unresolved_conflicts)
    for authority in sorted(set(a.resolved) | set(b.resolved)):
        ours = a.resolved.get(authority)
        theirs = b.resolved.get(authority)
        candidates = sorted({u for u in (ours, theirs) if u is not None}, key=lambda u: u.value)
        if len(candidates) == 1:
            resolved[authority] = candidates[0]
            continue
        scores = _score_candidates(candidates, links, priority)
        best = min(scores.values())
        winners = [u for u, s in scores.items() if s == best]
        if len(winners) == 1:
            resolved[authority] = winners[0]
        else:
            unresolved.append(
                Conflict(
                    authority=authority,
                    candidates=frozenset(candidates),
                    kind=ConflictKind.DUPLICATE,
                )
            )
    merged_seeds = tuple(sorted(set(a.merged_seeds) | set(b.merged_seeds)))
    return Cluster(
        seed=seed,
        resolved=resolved,
        support=links,
        discarded=tuple(discarded),
        unresolved_conflicts=tuple(unresolved),
        conflicts_detected=tuple(
            sorted(
                set(a.conflicts_detected) | set(b.conflicts_detected),
                key=lambda c: (c.authority, c.kind),
            )
        ),
        see_also=a.see_also | b.see_also,
        pre_filter_authority_count=max(
            a.pre_filter_authority_count, b.pre_filter_authority_count
        ),
        merged_seeds=merged_seeds,
    )


@dataclass
class ApplyResult:
    clusters: list[Cluster]
    statements: list[Statement]
    rejected_pairs: frozenset[frozenset[str]]
    candidate_status: dict[str, CandidateStatus]
    diagnostics: list[Diagnostic]


def apply_decisions(
    clusters: Sequence[Cluster],
    decisions: Sequence[ReviewDecision],
    candidates: Mapping[str, MatchCandidate],
    priority: PriorityOrder,
    registry: AuthorityRegistry,
    namespace: str,
) -> ApplyResult:
    """Replay a decision log into the cluster set.

    accept_equivalent merges the two sides' clusters; accept_associative emits
    a typed statement with reviewed provenance and keeps the clusters
    distinct; reject records a negative constraint. Applying the same log
    twice equals applying it once."""
    ordered = sorted(decisions, key=lambda d: d.sequence)
    latest: dict[str, ReviewDecision] = {}
    for decision in ordered:
        latest[decision.candidate_id] = decision

    cluster_list = list(clusters)
    diagnostics: list[Diagnostic] = []
    statements: list[Statement] = []
    status: dict[str, CandidateStatus] = {}
    rejected: set[frozenset[str]] = set()

    def find_cluster(uri: EntityUri) -> Optional[int]:
        for pos, cluster in enumerate(cluster_list):
            if uri in cluster.member_uris():
                return pos
        return None

    for candidate_id in sorted(latest):
        decision = latest[candidate_id]
        candidate = candidates.get(candidate_id)
        if candidate is None:
            diagnostics.append(
                Diagnostic(f"decision {decision.sequence} references unknown candidate "
                           f"{candidate_id!r}; skipped")
            )
            continue
        status[candidate_id] = VERDICT_TO_STATUS[decision.verdict]
        if decision.verdict is Verdict.DEFER:
            continue
        if decision.verdict is Verdict.REJECT:
            rejected.add(candidate.pair_key())
            continue
        left_uri = ref_to_uri(candidate.left, namespace)
        right_uri = ref_to_uri(candidate.right, namespace)
        if decision.verdict is Verdict.ACCEPT_ASSOCIATIVE:
            assert decision.associative_kind is not None
            graph = mint_deterministic_uri(
                namespace, "graph", CanonicalKey.from_raw("review", candidate_id)
            )
            statements.append(
                Statement(
                    subject=left_uri,
                    predicate=ASSOCIATIVE_PREDICATES[decision.associative_kind],
                    object=right_uri,
                    graph=graph,
                    provenance=Provenance(
                        source=f"local:{decision.institution}",
                        retrieved_at=decision.timestamp,
                        method=ProvenanceMethod.REVIEWED,
                        reviewer=decision.reviewer,
                    ),
                )
            )
            continue
        # accept_equivalent
        left_pos = find_cluster(left_uri)
        right_pos = find_cluster(right_uri)
        if left_pos is None or right_pos is None:
            missing = candidate.left if left_pos is None else candidate.right
            diagnostics.append(
                Diagnostic(f"decision {decision.sequence}: no cluster for {missing!r}; skipped")
            )
            continue
        if left_pos == right_pos:
            continue  # already merged; replay is a no-op
        merged = merge_clusters(
            cluster_list[left_pos], cluster_list[right_pos], priority, registry
        )
        for pos in sorted((left_pos, right_pos), reverse=True):
            del cluster_list[pos]
        cluster_list.append(merged)

    cluster_list.sort(key=lambda c: c.seed.value)
    return ApplyResult(
        clusters=cluster_list,
        statements=statements,
        rejected_pairs=frozenset(rejected),
        candidate_status=status,
        diagnostics=diagnostics,
    )
