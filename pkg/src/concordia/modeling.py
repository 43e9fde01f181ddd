"""Encoding irreducible ambiguity instead of erasing it.

Minted entities stand in for what cannot be identified: anonymous groups keyed
by a space-time frame, qualified attributions ("school of ..."), umbrella
terms that reify a shared label, and diverging identities linked by see_also
only. None of these operations ever asserts exact_match between a minted
ambiguous entity and an identified one; where scholarship disagrees, the graph
stays non-committal.

A Modeler owns a batch buffer of emitted statements (single writer); replaying
a batch yields a byte-identical statement set because every mint is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence, Set

from concordia.model import (
    CanonicalKey,
    DataError,
    DateSpec,
    Diagnostic,
    EntityUri,
    LinkKind,
    Literal,
    Provenance,
    ProvenanceMethod,
    Statement,
    UncertaintyQualifier,
    mint_deterministic_uri,
)
from concordia.nquads import DEFAULT_RETRIEVED_AT
from concordia.records import prop_uri

DEFAULT_QUALIFIER_LEXICON = (
    "school",
    "follower of",
    "circle of",
    "workshop",
    "attributed",
)

# conservative cue-word lexicon for layered keeper labels; unknown beats wrong
DEFAULT_KEEPER_CUES: dict[str, str] = {
    "museum": "agent",
    "museums": "agent",
    "museo": "agent",
    "musee": "agent",
    "gallery": "agent",
    "galleries": "agent",
    "galleria": "agent",
    "library": "agent",
    "biblioteca": "agent",
    "archive": "agent",
    "archivio": "agent",
    "auction": "agent",
    "antiques": "agent",
    "antiquarian": "agent",
    "dealer": "agent",
    "collection": "collection",
    "coll": "collection",
    "basilica": "building",
    "castle": "building",
    "hotel": "building",
    "church": "building",
    "cathedral": "building",
    "palazzo": "building",
    "manor": "place",
    "house": "place",
}

MOVABLE_CLASSES = {"agent", "collection"}
IMMOVABLE_CLASSES = {"building", "place"}


@dataclass(frozen=True)
class UmbrellaTerm:
    """A reified label grouping entities that share a name; not a real-world
    agent, so it never carries agent-class statements and its members are
    never related to each other."""

    uri: EntityUri
    label: str
    members: frozenset[EntityUri]


@dataclass(frozen=True)
class AnonymousEntity:
    uri: EntityUri
    key: CanonicalKey
    kind: str  # anonymous_group | collective_name | anonymous_owner


def _normalize_label(label: str) -> str:
    return " ".join(label.split()).casefold()


class Modeler:
    """Mints ambiguity-bearing entities and appends their statements to a batch."""

    def __init__(
        self,
        namespace: str,
        source: str = "modeling",
        retrieved_at: str = DEFAULT_RETRIEVED_AT,
        qualifier_lexicon: Sequence[str] = DEFAULT_QUALIFIER_LEXICON,
    ):
        self.namespace = namespace
        self.qualifier_lexicon = tuple(qualifier_lexicon)
        self.provenance = Provenance(
            source=source, retrieved_at=retrieved_at, method=ProvenanceMethod.MINTED
        )
        self.graph = mint_deterministic_uri(
            namespace, "graph", CanonicalKey.from_raw(source, "modeling")
        )
        self.statements: list[Statement] = []
        self.diagnostics: list[Diagnostic] = []
        self._umbrella_members: dict[EntityUri, set[EntityUri]] = {}
        self._umbrella_labels: dict[EntityUri, str] = {}

    # -- plumbing

    def _emit(
        self,
        subject: EntityUri,
        predicate,
        obj,
        graph: Optional[EntityUri] = None,
        qualifier: UncertaintyQualifier = UncertaintyQualifier.CERTAIN,
    ) -> Statement:
        stmt = Statement(
            subject=subject,
            predicate=predicate,
            object=obj,
            graph=graph or self.graph,
            provenance=self.provenance,
            qualifier=qualifier,
        )
        self.statements.append(stmt)
        return stmt

    def _mint(self, class_tag: str, *key_parts: str) -> EntityUri:
        return mint_deterministic_uri(
            self.namespace, class_tag, CanonicalKey.from_raw(*key_parts)
        )

    def _describe(self, uri: EntityUri, kind: str, label: str) -> None:
        self._emit(uri, prop_uri("entity_kind"), Literal(kind))
        if label:
            self._emit(uri, prop_uri("label"), Literal(label))

    # -- operations

    def mint_anonymous_group(
        self,
        school_or_region: str,
        period: DateSpec,
        kind: str = "anonymous_group",
    ) -> AnonymousEntity:
        """One entity per (region, period) frame: institutions that record the
        same frame converge on the same URI."""
        from concordia.matcher import date_spec_to_text

        region = _normalize_label(school_or_region)
        period_text = date_spec_to_text(period) if period is not None else "unknown"
        if not region and (period is None or period.is_unknown()):
            raise DataError("anonymous group needs a region or a period to key on")
        key = CanonicalKey.from_raw("anon", region, period_text)
        uri = mint_deterministic_uri(self.namespace, "anon", key)
        entity = AnonymousEntity(uri=uri, key=key, kind=kind)
        label = " ".join(p for p in ("Anonymous", school_or_region.strip(), period_text) if p)
        self._describe(uri, kind, label)
        return entity

    def mint_collective_name(self, surname: str) -> AnonymousEntity:
        """Family or studio name used without identification ("Bellini",
        "Böhm (collective name)"): a distinct entity with no relation to any
        identified individual."""
        label = surname.strip()
        if not label:
            raise DataError("collective name must be non-empty")
        key = CanonicalKey.from_raw("collective", _normalize_label(label))
        uri = mint_deterministic_uri(self.namespace, "anon", key)
        self._describe(uri, "collective_name", f"{label} (collective name)")
        return AnonymousEntity(uri=uri, key=key, kind="collective_name")

    def mint_anonymous_owner(self, context: str) -> AnonymousEntity:
        key = CanonicalKey.from_raw("owner", _normalize_label(context))
        uri = mint_deterministic_uri(self.namespace, "anon", key)
        self._describe(uri, "anonymous_owner", f"Anonymous owner ({context.strip()})")
        return AnonymousEntity(uri=uri, key=key, kind="anonymous_owner")

    def mint_qualified_attribution(
        self, base_artist: EntityUri, qualifier: str
    ) -> tuple[AnonymousEntity, Statement]:
        """Anonymous entity for "<artist>, <qualifier>" plus the relation back
        to the identified artist. Never an identity claim."""
        qualifier_text = qualifier.strip()
        if _normalize_label(qualifier_text) not in {
            _normalize_label(q) for q in self.qualifier_lexicon
        }:
            self.diagnostics.append(
                Diagnostic(f"qualifier {qualifier_text!r} not in lexicon; kept verbatim")
            )
        key = CanonicalKey.from_raw("qualified", base_artist.value, qualifier_text)
        uri = mint_deterministic_uri(self.namespace, "anon", key)
        entity = AnonymousEntity(uri=uri, key=key, kind="anonymous_group")
        self._describe(uri, "anonymous_group", "")
        self._emit(uri, prop_uri("attribution_qualifier"), Literal(qualifier_text))
        relation = self._emit(uri, LinkKind.QUALIFIED_RELATION_TO, base_artist)
        return entity, relation

    def mint_umbrella(self, label: str, members: Iterable[EntityUri]) -> UmbrellaTerm:
        """Reify a shared label over its bearers. Membership links run
        member -> umbrella only; members are never linked to each other, and
        re-minting with more members extends the same umbrella URI."""
        label_text = label.strip()
        if not label_text:
            raise DataError("umbrella label must be non-empty")
        member_set = set(members)
        if not member_set:
            raise DataError("umbrella needs at least one member")
        uri = self._mint("umbrella", "umbrella", _normalize_label(label_text))
        known = self._umbrella_members.setdefault(uri, set())
        if uri not in self._umbrella_labels:
            self._umbrella_labels[uri] = label_text
            self._describe(uri, "umbrella_term", label_text)
        for member in sorted(member_set, key=lambda u: u.value):
            if member not in known:
                known.add(member)
                self._emit(member, LinkKind.MEMBER_OF_UMBRELLA, uri)
        return UmbrellaTerm(uri=uri, label=self._umbrella_labels[uri], members=frozenset(known))

    def link_diverging_identity(
        self, label: str, candidates: Iterable[EntityUri]
    ) -> tuple[EntityUri, list[Statement]]:
        """New URI for a pseudonym or disputed identity, linked to every
        scholarly candidate with see_also (never exact_match), each link
        qualified as an alternative."""
        label_text = label.strip()
        candidate_set = sorted(set(candidates), key=lambda u: u.value)
        if not candidate_set:
            raise DataError("diverging identity needs at least one candidate")
        uri = self._mint("identity", "identity", _normalize_label(label_text))
        self._describe(uri, "identity_label", label_text)
        emitted = [
            self._emit(
                uri, LinkKind.SEE_ALSO, candidate, qualifier=UncertaintyQualifier.ALTERNATIVE
            )
            for candidate in candidate_set
        ]
        return uri, emitted

    def assert_material_levels(
        self, term: str, level_uris: Mapping[str, EntityUri]
    ) -> list[Statement]:
        """One statement per conceptual level (material, process, object_type)
        a term denotes; the term itself becomes a reusable node keyed by its
        normalized text."""
        if not level_uris:
            raise DataError("at least one conceptual level is required")
        unknown = set(level_uris) - {"material", "process", "object_type"}
        if unknown:
            raise DataError(f"unknown conceptual levels: {sorted(unknown)}")
        term_node = self._mint("term", "term", _normalize_label(term))
        self._emit(term_node, prop_uri("source_label"), Literal(term))
        return [
            self._emit(term_node, prop_uri(level), level_uris[level])
            for level in sorted(level_uris)
        ]

    def assert_alternative_attribution(
        self, work: EntityUri, candidates: Sequence[EntityUri], source: Provenance
    ) -> list[Statement]:
        """Mutually exclusive creator statements, one per candidate in its own
        named graph, with pairwise alternative_of meta-statements. No candidate
        is preferred; graph ids are minted from deterministic keys so
        re-assertion is idempotent at the statement-set level."""
        ordered = sorted(set(candidates), key=lambda u: u.value)
        if len(ordered) < 2:
            raise DataError("alternative attribution needs at least two candidates")
        graphs = []
        emitted = []
        for candidate in ordered:
            graph = self._mint("graph", "alt", work.value, candidate.value)
            graphs.append(graph)
            emitted.append(
                Statement(
                    subject=work,
                    predicate=prop_uri("creator"),
                    object=candidate,
                    graph=graph,
                    provenance=source,
                    qualifier=UncertaintyQualifier.ALTERNATIVE,
                )
            )
        meta_graph = self._mint("graph", "alt-meta", work.value)
        for i in range(len(graphs)):
            for j in range(i + 1, len(graphs)):
                emitted.append(
                    Statement(
                        subject=graphs[i],
                        predicate=LinkKind.ALTERNATIVE_OF,
                        object=graphs[j],
                        graph=meta_graph,
                        provenance=source,
                        qualifier=UncertaintyQualifier.ALTERNATIVE,
                    )
                )
        self.statements.extend(emitted)
        return emitted

    def record_name_form(
        self, obj: EntityUri, literal_form: str, person: EntityUri
    ) -> tuple[EntityUri, list[Statement]]:
        """Preserve an inscribed name form byte-for-byte: object -> name-form
        node -> person. Identical literals share one node."""
        node = self._mint("nameform", "nameform", _normalize_label(literal_form))
        emitted = [
            self._emit(node, prop_uri("label"), Literal(literal_form)),
            self._emit(obj, prop_uri("inscribed_name_form"), node),
            self._emit(node, prop_uri("names"), person),
        ]
        return node, emitted


def attach_uncertainty(statement: Statement, qualifier: UncertaintyQualifier) -> Statement:
    """Statement with the qualifier set. Stores are append-only: the original
    statement stays put and the latest qualifier wins at read time by
    provenance timestamp."""
    return replace(statement, qualifier=qualifier)


def effective_qualifier(statements: Sequence[Statement]) -> UncertaintyQualifier:
    """Read-time resolution over append-only re-assertions of one statement."""
    if not statements:
        return UncertaintyQualifier.CERTAIN
    latest = max(statements, key=lambda s: s.provenance.retrieved_at)
    return latest.qualifier


# --- keepers and places ---------------------------------------------------------


@dataclass(frozen=True)
class KeeperComponent:
    label: str
    guess: str  # agent | building | collection | place | unknown


@dataclass(frozen=True)
class KeeperAnalysis:
    components: tuple[KeeperComponent, ...]
    candidate_links: tuple[tuple[str, LinkKind, str], ...]
    needs_review: bool


def _classify_component(label: str, cues: Mapping[str, str]) -> str:
    tokens = [t for t in "".join(c if c.isalnum() else " " for c in label.lower()).split()]
    for token in tokens:
        if token in cues:
            return cues[token]
    return "unknown"


def classify_keeper(
    layered_label: str,
    cues: Mapping[str, str] = DEFAULT_KEEPER_CUES,
    delimiter: str = ",",
) -> KeeperAnalysis:
    """Split a layered keeper label and guess each component's semantic class
    from cue words. Movable components (agents, collections) are bound to
    immovable ones (buildings, places) as candidate links for curator review;
    a label with no recognized component is flagged for review."""
    components = tuple(
        KeeperComponent(label=part.strip(), guess=_classify_component(part, cues))
        for part in layered_label.split(delimiter)
        if part.strip()
    )
    links: list[tuple[str, LinkKind, str]] = []
    movable = [c for c in components if c.guess in MOVABLE_CLASSES]
    immovable = [c for c in components if c.guess in IMMOVABLE_CLASSES]
    for m in movable:
        for im in immovable:
            links.append((m.label, LinkKind.LOCATED_IN, im.label))
    agents = [c for c in components if c.guess == "agent"]
    collections = [c for c in components if c.guess == "collection"]
    for agent in agents:
        for collection in collections:
            links.append((agent.label, LinkKind.KEEPER_OF, collection.label))
    needs_review = bool(components) and all(c.guess == "unknown" for c in components)
    return KeeperAnalysis(
        components=components, candidate_links=tuple(links), needs_review=needs_review
    )


def normalize_place(
    place: EntityUri,
    parents: Mapping[EntityUri, EntityUri],
    cities: Set[EntityUri],
    diagnostics: Optional[list[Diagnostic]] = None,
) -> EntityUri:
    """Project a place upward to city level; a city maps to itself. When no
    city ancestor exists the input is returned with a diagnostic (missing
    hierarchy data is not an error)."""
    current = place
    seen = [place]
    while current not in cities:
        parent = parents.get(current)
        if parent is None:
            if diagnostics is not None:
                diagnostics.append(
                    Diagnostic(f"no city ancestor for {place.value}; left unchanged")
                )
            return place
        if parent in seen:
            cycle = seen[seen.index(parent):]
            raise DataError(
                "place hierarchy cycle: " + " -> ".join(u.value for u in cycle + [parent])
            )
        seen.append(parent)
        current = parent
    return current
