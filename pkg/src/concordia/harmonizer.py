"""Cross-authority reconciliation pipeline.

Four stages: resolve deprecated URIs, expand the identity linkset breadth-first
through a link provider (with reverse checks), detect per-authority
inconsistencies, and filter conflicts by source priority into a Cluster that
holds at most one URI per authority. Links that lose are discarded with a
reason, never silently dropped, and ties drop the authority entirely:
storing only the consistent links is the policy.

Every stage is pure given a provider snapshot, so results are independent of
link order and provider response order, and re-harmonizing a cluster's own
output is a fixpoint.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from concordia.model import (
    AuthorityRegistry,
    DataError,
    Diagnostic,
    EntityUri,
    LinkKind,
    PriorityOrder,
    Provenance,
    ProvenanceMethod,
)
from concordia.nquads import DEFAULT_RETRIEVED_AT
from concordia.providers import LinkProvider, ProviderAnswer, ProviderFailure
from concordia.records import ActorRecord


class DeprecationCycleError(DataError):
    def __init__(self, members: Iterable[EntityUri]):
        self.members = tuple(sorted(members))
        super().__init__(
            "deprecation cycle: " + " -> ".join(m.value for m in self.members)
        )


MAX_DEPRECATION_CHAIN = 32


@dataclass(frozen=True)
class ProvenancedLink:
    """One identity/association assertion between two URIs."""

    origin: EntityUri
    target: EntityUri
    kind: LinkKind
    provenance: Provenance

    def sort_key(self) -> tuple:
        return (
            self.origin.value,
            self.target.value,
            self.kind.value,
            self.provenance.source,
            self.provenance.method.value,
            self.provenance.retrieved_at,
        )

    def to_json(self) -> dict:
        return {
            "origin": self.origin.value,
            "target": self.target.value,
            "kind": self.kind.value,
            "source": self.provenance.source,
            "method": self.provenance.method.value,
            "retrieved_at": self.provenance.retrieved_at,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProvenancedLink":
        return cls(
            origin=EntityUri(data["origin"]),
            target=EntityUri(data["target"]),
            kind=LinkKind(data["kind"]),
            provenance=Provenance(
                source=data["source"],
                retrieved_at=data.get("retrieved_at", DEFAULT_RETRIEVED_AT),
                method=ProvenanceMethod(data.get("method", "asserted")),
            ),
        )


@dataclass(frozen=True)
class RoundTripBreak:
    """A remote record's back-link targets a different URI of the expected authority."""

    authority: str
    expected: EntityUri
    found: tuple[EntityUri, ...]
    via: EntityUri


@dataclass(frozen=True)
class Linkset:
    """The connected identity neighbourhood of one seed entity, pre-filtering."""

    seed: EntityUri
    links: frozenset[ProvenancedLink]
    confirmations: frozenset[tuple[EntityUri, EntityUri]] = frozenset()
    breaks: tuple[RoundTripBreak, ...] = ()
    unverifiable: frozenset[EntityUri] = frozenset()
    truncated_at: frozenset[EntityUri] = frozenset()
    deprecations: tuple[tuple[EntityUri, EntityUri], ...] = ()  # (original, final)

    def sorted_links(self) -> list[ProvenancedLink]:
        return sorted(self.links, key=ProvenancedLink.sort_key)


class ConflictKind(str):
    DUPLICATE = "duplicate_in_authority"
    BROKEN_ROUND_TRIP = "broken_round_trip"


@dataclass(frozen=True)
class Conflict:
    """Two or more URIs of one authority claimed coreferent with the seed."""

    authority: str
    candidates: frozenset[EntityUri]
    kind: str  # duplicate_in_authority | broken_round_trip
    evidence: tuple[ProvenancedLink, ...] = ()

    def to_json(self) -> dict:
        return {
            "authority": self.authority,
            "candidates": sorted(c.value for c in self.candidates),
            "kind": self.kind,
            "evidence": [link.to_json() for link in self.evidence],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Conflict":
        return cls(
            authority=data["authority"],
            candidates=frozenset(EntityUri(c) for c in data["candidates"]),
            kind=data["kind"],
            evidence=tuple(ProvenancedLink.from_json(l) for l in data.get("evidence", [])),
        )


@dataclass(frozen=True)
class DiscardedLink:
    link: ProvenancedLink
    reason: str  # excluded_authority | conflict_loser | unresolved_tie


@dataclass
class Cluster:
    """Harmonized identity links for one entity: at most one URI per authority."""

    seed: EntityUri
    resolved: dict[str, EntityUri] = field(default_factory=dict)
    support: tuple[ProvenancedLink, ...] = ()
    discarded: tuple[DiscardedLink, ...] = ()
    unresolved_conflicts: tuple[Conflict, ...] = ()
    conflicts_detected: tuple[Conflict, ...] = ()
    see_also: frozenset[EntityUri] = frozenset()
    pre_filter_authority_count: int = 0
    merged_seeds: tuple[EntityUri, ...] = ()

    def __post_init__(self) -> None:
        if not self.merged_seeds:
            self.merged_seeds = (self.seed,)

    def member_uris(self) -> frozenset[EntityUri]:
        return frozenset(self.merged_seeds) | frozenset(self.resolved.values())

    def resolved_map(self) -> dict[str, str]:
        return {auth: uri.value for auth, uri in sorted(self.resolved.items())}

    def to_json(self) -> dict:
        return {
            "seed": self.seed.value,
            "resolved": self.resolved_map(),
            "support": [l.to_json() for l in self.support],
            "discarded": [
                {"link": d.link.to_json(), "reason": d.reason} for d in self.discarded
            ],
            "unresolved_conflicts": [c.to_json() for c in self.unresolved_conflicts],
            "conflicts_detected": [c.to_json() for c in self.conflicts_detected],
            "see_also": sorted(u.value for u in self.see_also),
            "pre_filter_authority_count": self.pre_filter_authority_count,
            "merged_seeds": [s.value for s in self.merged_seeds],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Cluster":
        return cls(
            seed=EntityUri(data["seed"]),
            resolved={a: EntityUri(u) for a, u in data.get("resolved", {}).items()},
            support=tuple(ProvenancedLink.from_json(l) for l in data.get("support", [])),
            discarded=tuple(
                DiscardedLink(ProvenancedLink.from_json(d["link"]), d["reason"])
                for d in data.get("discarded", [])
            ),
            unresolved_conflicts=tuple(
                Conflict.from_json(c) for c in data.get("unresolved_conflicts", [])
            ),
            conflicts_detected=tuple(
                Conflict.from_json(c) for c in data.get("conflicts_detected", [])
            ),
            see_also=frozenset(EntityUri(u) for u in data.get("see_also", [])),
            pre_filter_authority_count=data.get("pre_filter_authority_count", 0),
            merged_seeds=tuple(EntityUri(s) for s in data.get("merged_seeds", [])),
        )


# --- stage 1: deprecations ----------------------------------------------------


def resolve_deprecations(
    uri: EntityUri, deprecation_links: Mapping[EntityUri, EntityUri]
) -> tuple[EntityUri, list[EntityUri]]:
    """Follow the replacement chain to its fixpoint.

    Returns the final URI plus the trail of superseded URIs. Cycles and
    suspiciously long chains (corrupt data) raise."""
    trail: list[EntityUri] = []
    visited = {uri}
    current = uri
    while current in deprecation_links:
        nxt = deprecation_links[current]
        if nxt in visited:
            cycle_start = trail.index(nxt) if nxt in trail else len(trail)
            raise DeprecationCycleError([*trail[cycle_start:], current, nxt])
        trail.append(current)
        if len(trail) > MAX_DEPRECATION_CHAIN:
            raise DataError(
                f"deprecation chain from {uri.value} exceeds {MAX_DEPRECATION_CHAIN} steps"
            )
        visited.add(nxt)
        current = nxt
    return current, trail


class _AnswerCache:
    """Memoizes provider lookups for one pipeline run; remembers failures."""

    def __init__(self, provider: LinkProvider):
        self.provider = provider
        self.answers: dict[EntityUri, ProviderAnswer] = {}
        self.failed: set[EntityUri] = set()

    def get(self, uri: EntityUri) -> Optional[ProviderAnswer]:
        if uri in self.failed:
            return None
        if uri not in self.answers:
            try:
                self.answers[uri] = self.provider.lookup(uri)
            except ProviderFailure:
                self.failed.add(uri)
                return None
        return self.answers[uri]


def _follow_deprecations(
    uri: EntityUri, cache: _AnswerCache
) -> tuple[EntityUri, list[EntityUri]]:
    """Provider-driven variant of resolve_deprecations: the replacement map is
    discovered by lookup as the chain is walked."""
    mapping: dict[EntityUri, EntityUri] = {}
    current = uri
    for _ in range(MAX_DEPRECATION_CHAIN + 2):
        answer = cache.get(current)
        if answer is None or answer.replaced_by is None:
            break
        if current in mapping:
            break  # cycle; resolve_deprecations raises with the members
        mapping[current] = answer.replaced_by
        current = answer.replaced_by
    return resolve_deprecations(uri, mapping)


# --- stage 2: expansion ---------------------------------------------------------


def expand_linkset(
    seed: EntityUri,
    seed_links: Iterable[ProvenancedLink],
    provider: LinkProvider,
    depth_limit: int = 3,
    registry: Optional[AuthorityRegistry] = None,
    no_expand_authorities: frozenset[str] = frozenset(),
) -> Linkset:
    """Breadth-first expansion along exact_match links up to depth_limit hops.

    Every fetched link is recorded with method=expanded provenance; each hop is
    reverse-checked (does the far record link back to the URI we came from?).
    Provider failures mark a URI unverifiable and expansion continues. URIs of
    no_expand_authorities (typically the priority order's excluded set) are
    recorded but never expanded through, so an excluded aggregator cannot pull
    foreign links into the component. The result is a set, so provider
    response order never matters.
    """
    if depth_limit < 1:
        raise DataError("depth_limit must be >= 1")
    from concordia.model import default_registry

    registry = registry or default_registry()
    cache = _AnswerCache(provider)
    deprecations: dict[EntityUri, EntityUri] = {}

    def resolved(uri: EntityUri) -> EntityUri:
        final, trail = _follow_deprecations(uri, cache)
        if trail:
            deprecations[uri] = final
        return final

    links: set[ProvenancedLink] = set()
    depth = {seed: 0}
    queue: deque[EntityUri] = deque([seed])
    for link in sorted(seed_links, key=ProvenancedLink.sort_key):
        target = resolved(link.target)
        links.add(replace(link, target=target))
        if link.kind is LinkKind.EXACT_MATCH and target not in depth:
            depth[target] = 1
            queue.append(target)

    truncated: set[EntityUri] = set()
    expanded: set[EntityUri] = set()
    while queue:
        uri = queue.popleft()
        if registry.resolve(uri) in no_expand_authorities:
            continue
        if depth[uri] >= depth_limit:
            truncated.add(uri)
            continue
        answer = cache.get(uri)
        if answer is None:
            continue  # recorded as unverifiable below
        expanded.add(uri)
        source = registry.resolve(uri)
        for raw_target, kind in answer.links:
            target = resolved(raw_target)
            if target == uri:
                continue
            links.add(
                ProvenancedLink(
                    origin=uri,
                    target=target,
                    kind=kind,
                    provenance=Provenance(
                        source=source,
                        retrieved_at=answer.fetched_at,
                        method=ProvenanceMethod.EXPANDED,
                    ),
                )
            )
            if kind is LinkKind.EXACT_MATCH and target not in depth:
                depth[target] = depth[uri] + 1
                queue.append(target)

    # reverse checks: for every traversed exact_match hop origin -> via, does
    # the record at `via` link back to `origin` (or to a different URI of
    # origin's authority)?
    confirmations: set[tuple[EntityUri, EntityUri]] = set()
    breaks: dict[tuple[str, EntityUri, EntityUri], RoundTripBreak] = {}
    for link in links:
        if link.kind is not LinkKind.EXACT_MATCH:
            continue
        via = link.target
        origin = link.origin
        if via not in expanded:
            continue  # unverifiable or beyond depth: silence is not contradiction
        answer = cache.answers[via]
        origin_auth = registry.resolve(origin)
        back_targets = {
            resolved(t)
            for t, kind in answer.links
            if kind is LinkKind.EXACT_MATCH and registry.resolve(resolved(t)) == origin_auth
        }
        if not back_targets:
            continue  # open world: silence is not contradiction
        if origin in back_targets:
            confirmations.add((via, origin))
        else:
            key = (origin_auth, origin, via)
            breaks[key] = RoundTripBreak(
                authority=origin_auth,
                expected=origin,
                found=tuple(sorted(back_targets)),
                via=via,
            )

    return Linkset(
        seed=seed,
        links=frozenset(links),
        confirmations=frozenset(confirmations),
        breaks=tuple(sorted(breaks.values(), key=lambda b: (b.authority, b.expected.value, b.via.value))),
        unverifiable=frozenset(cache.failed),
        truncated_at=frozenset(truncated),
        deprecations=tuple(sorted(deprecations.items())),
    )


# --- stage 3: consistency -------------------------------------------------------


def _component(linkset: Linkset) -> set[EntityUri]:
    """Nodes connected to the seed through exact_match links (undirected)."""
    adjacency: dict[EntityUri, set[EntityUri]] = {}
    for link in linkset.links:
        if link.kind is not LinkKind.EXACT_MATCH:
            continue
        adjacency.setdefault(link.origin, set()).add(link.target)
        adjacency.setdefault(link.target, set()).add(link.origin)
    component = {linkset.seed}
    queue = deque([linkset.seed])
    while queue:
        node = queue.popleft()
        for neighbour in adjacency.get(node, ()):
            if neighbour not in component:
                component.add(neighbour)
                queue.append(neighbour)
    return component


def check_consistency(
    linkset: Linkset, registry: Optional[AuthorityRegistry] = None
) -> list[Conflict]:
    """One Conflict per authority holding two or more URIs in the seed's
    exact_match component. Authorities implicated in a failed reverse check
    report as broken_round_trip, the rest as duplicate_in_authority."""
    from concordia.model import default_registry

    registry = registry or default_registry()
    component = _component(linkset)
    by_authority: dict[str, set[EntityUri]] = {}
    for uri in component:
        by_authority.setdefault(registry.resolve(uri), set()).add(uri)
    broken_authorities = {b.authority for b in linkset.breaks}
    conflicts = []
    for authority in sorted(by_authority):
        candidates = by_authority[authority]
        if len(candidates) < 2:
            continue
        evidence = tuple(
            sorted(
                (
                    l
                    for l in linkset.links
                    if l.target in candidates or l.origin in candidates
                ),
                key=ProvenancedLink.sort_key,
            )
        )
        conflicts.append(
            Conflict(
                authority=authority,
                candidates=frozenset(candidates),
                kind=(
                    ConflictKind.BROKEN_ROUND_TRIP
                    if authority in broken_authorities
                    else ConflictKind.DUPLICATE
                ),
                evidence=evidence,
            )
        )
    return conflicts


# --- stage 4: priority filtering -------------------------------------------------


def _endorsement_rank(link: ProvenancedLink, priority: PriorityOrder) -> Optional[int]:
    """Rank of the source endorsing a link's target; None when it may not vote."""
    if link.provenance.method is ProvenanceMethod.ASSERTED:
        return PriorityOrder.INSTITUTION_RANK
    return priority.rank_of(link.provenance.source)


def _score_candidates(
    candidates: Iterable[EntityUri],
    links: Iterable[ProvenancedLink],
    priority: PriorityOrder,
) -> dict[EntityUri, int]:
    """Best (lowest) endorsement rank per candidate; unendorsed candidates get
    a sentinel rank below every real source."""
    sentinel = len(priority.ranked) + 1
    scores = {uri: sentinel for uri in candidates}
    for link in links:
        if link.kind is not LinkKind.EXACT_MATCH or link.target not in scores:
            continue
        rank = _endorsement_rank(link, priority)
        if rank is not None and rank < scores[link.target]:
            scores[link.target] = rank
    return scores


def filter_conflicts(
    linkset: Linkset,
    conflicts: list[Conflict],
    priority: PriorityOrder,
    registry: Optional[AuthorityRegistry] = None,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> Cluster:
    """Resolve each conflicted authority by source priority.

    Excluded authorities are dropped outright; otherwise the candidate endorsed
    by the best-ranked non-excluded source wins (the institution outranks every
    authority), and ties drop the authority with the conflict kept unresolved.
    Every input link ends up supporting the cluster, discarded with a reason,
    or attached to an unresolved conflict.
    """
    from concordia.model import default_registry

    registry = registry or default_registry()
    if diagnostics is None:
        diagnostics = []
    component = _component(linkset)
    by_authority: dict[str, list[EntityUri]] = {}
    for uri in sorted(component, key=lambda u: u.value):
        if uri == linkset.seed:
            continue
        by_authority.setdefault(registry.resolve(uri), []).append(uri)

    known = set(priority.ranked) | set(priority.excluded) | set(priority.institutions)
    conflict_by_authority = {c.authority: c for c in conflicts}
    resolved: dict[str, EntityUri] = {}
    discarded_reason: dict[EntityUri, str] = {}
    unresolved: list[Conflict] = []

    for authority, candidates in sorted(by_authority.items()):
        if authority not in known and authority != "other" and not authority.startswith("local:"):
            diagnostics.append(
                Diagnostic(
                    f"authority {authority!r} missing from priority order; ranked last"
                )
            )
        if authority in priority.excluded:
            for uri in candidates:
                discarded_reason[uri] = "excluded_authority"
            continue
        if len(candidates) == 1:
            resolved[authority] = candidates[0]
            continue
        scores = _score_candidates(candidates, linkset.links, priority)
        best = min(scores.values())
        winners = sorted((u for u, s in scores.items() if s == best), key=lambda u: u.value)
        if len(winners) == 1:
            resolved[authority] = winners[0]
            for uri in candidates:
                if uri != winners[0]:
                    discarded_reason[uri] = "conflict_loser"
        else:
            conflict = conflict_by_authority.get(authority)
            if conflict is None:
                conflict = Conflict(
                    authority=authority,
                    candidates=frozenset(candidates),
                    kind=ConflictKind.DUPLICATE,
                )
            unresolved.append(conflict)
            for uri in candidates:
                discarded_reason[uri] = "unresolved_tie"

    support: list[ProvenancedLink] = []
    discarded: list[DiscardedLink] = []
    see_also: set[EntityUri] = set()
    for link in linkset.sorted_links():
        if link.kind is LinkKind.SEE_ALSO:
            see_also.add(link.target)
        reason = discarded_reason.get(link.target) or discarded_reason.get(link.origin)
        if reason is not None:
            discarded.append(DiscardedLink(link=link, reason=reason))
        else:
            support.append(link)

    return Cluster(
        seed=linkset.seed,
        resolved=resolved,
        support=tuple(support),
        discarded=tuple(discarded),
        unresolved_conflicts=tuple(unresolved),
        conflicts_detected=tuple(conflicts),
        see_also=frozenset(see_also),
        pre_filter_authority_count=len(by_authority),
    )


# --- composition -----------------------------------------------------------------


def harmonize_links(
    seed: EntityUri,
    seed_links: Iterable[ProvenancedLink],
    provider: LinkProvider,
    priority: PriorityOrder,
    registry: Optional[AuthorityRegistry] = None,
    depth_limit: int = 3,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> Cluster:
    """expand -> check -> filter for a seed with explicit input links."""
    linkset = expand_linkset(
        seed,
        seed_links,
        provider,
        depth_limit,
        registry,
        no_expand_authorities=priority.excluded,
    )
    conflicts = check_consistency(linkset, registry)
    return filter_conflicts(linkset, conflicts, priority, registry, diagnostics)


def asserted_links(
    record: ActorRecord, namespace: str, retrieved_at: str = DEFAULT_RETRIEVED_AT
) -> list[ProvenancedLink]:
    seed = record.uri(namespace)
    prov = Provenance(
        source=f"local:{record.institution}",
        retrieved_at=retrieved_at,
        method=ProvenanceMethod.ASSERTED,
    )
    return [
        ProvenancedLink(origin=seed, target=link.target, kind=link.kind, provenance=prov)
        for link in record.asserted_links
    ]


def harmonize_cluster(
    record: ActorRecord,
    provider: LinkProvider,
    priority: PriorityOrder,
    namespace: str,
    registry: Optional[AuthorityRegistry] = None,
    depth_limit: int = 3,
    retrieved_at: str = DEFAULT_RETRIEVED_AT,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> Cluster:
    """Full pipeline for one institutional record. A record with zero links
    yields an empty cluster, which is the matcher's cue to propose candidates."""
    seed = record.uri(namespace)
    return harmonize_links(
        seed,
        asserted_links(record, namespace, retrieved_at),
        provider,
        priority,
        registry,
        depth_limit,
        diagnostics,
    )


def reharmonize(
    cluster: Cluster,
    provider: LinkProvider,
    priority: PriorityOrder,
    registry: Optional[AuthorityRegistry] = None,
    depth_limit: int = 3,
    retrieved_at: str = DEFAULT_RETRIEVED_AT,
) -> Cluster:
    """Feed a cluster's resolved links back through the pipeline (fixpoint check)."""
    prov = Provenance(
        source="harmonizer", retrieved_at=retrieved_at, method=ProvenanceMethod.ASSERTED
    )
    links = [
        ProvenancedLink(origin=cluster.seed, target=uri, kind=LinkKind.EXACT_MATCH, provenance=prov)
        for _auth, uri in sorted(cluster.resolved.items())
    ]
    return harmonize_links(cluster.seed, links, provider, priority, registry, depth_limit)


@dataclass(frozen=True)
class InconsistencyReport:
    """The share of multi-authority clusters that hit at least one conflict."""

    conflicted: int
    eligible: int

    @property
    def rate(self) -> Optional[float]:
        if self.eligible == 0:
            return None
        return self.conflicted / self.eligible

    def to_json(self) -> dict:
        return {
            "conflicted": self.conflicted,
            "eligible": self.eligible,
            "rate": self.rate,
        }


def inconsistency_rate(clusters: Iterable[Cluster]) -> InconsistencyReport:
    """conflicted / eligible where eligible = clusters reaching two or more
    authorities before filtering. An empty denominator reports rate None
    (not-applicable), never a division failure."""
    conflicted = 0
    eligible = 0
    for cluster in clusters:
        if cluster.pre_filter_authority_count >= 2:
            eligible += 1
            if cluster.conflicts_detected:
                conflicted += 1
    return InconsistencyReport(conflicted=conflicted, eligible=eligible)
