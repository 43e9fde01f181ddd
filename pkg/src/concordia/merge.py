"""Provenance-preserving merged views and the hierarchies shown to users.

Merging never collapses variant values: every contributing statement keeps its
institution provenance, and the displayed title is either a reviewer's choice
or an explicitly labeled rule default. Facet trees expand umbrella terms into
their members; artwork counts are set unions, so nothing is double-counted
under a root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from concordia.harmonizer import Cluster
from concordia.model import DataError, Diagnostic, EntityUri, Statement
from concordia.modeling import UmbrellaTerm
from concordia.nquads import DEFAULT_RETRIEVED_AT, serialize_quad
from concordia.records import ActorRecord, ArtworkRecord, record_statements


class MergeError(DataError):
    pass


@dataclass(frozen=True)
class TitleEntry:
    text: str
    institution: str
    role: str = ""


TITLE_ORIGINS = ("reviewer_marked", "reviewer_created", "rule_default")


def select_preferred_title(
    titles: Sequence[TitleEntry], preferred: Optional[dict] = None
) -> tuple[str, str]:
    """The display title and how it was chosen.

    A reviewer decision wins: {"mark": text} picks an existing title,
    {"create": text} supplies a new one. Without a decision the rule default
    is the title shared verbatim by the most institutions, ties broken by
    shortest then byte order, so the fallback is a pure function of the
    title multiset."""
    if not titles:
        raise MergeError("cannot choose a title from an empty list")
    if preferred:
        if preferred.get("create"):
            return preferred["create"], "reviewer_created"
        if preferred.get("mark"):
            marked = preferred["mark"]
            if any(t.text == marked for t in titles):
                return marked, "reviewer_marked"
            raise MergeError(f"marked title {marked!r} is not among the variants")
    institutions_per_text: dict[str, set[str]] = {}
    for title in titles:
        institutions_per_text.setdefault(title.text, set()).add(title.institution)
    best = min(
        institutions_per_text.items(),
        key=lambda item: (-len(item[1]), len(item[0]), item[0]),
    )
    return best[0], "rule_default"


@dataclass
class MergedRecord:
    """Union of the contributing records for one reconciled entity."""

    cluster: Cluster
    display_title: str
    display_title_origin: str
    all_titles: tuple[TitleEntry, ...]
    statements: tuple[Statement, ...]
    parts: tuple["MergedRecord", ...] = ()
    subject_paths: tuple[tuple[str, ...], ...] = ()

    def to_json(self) -> dict:
        by_graph: dict[str, list[str]] = {}
        for stmt in self.statements:
            by_graph.setdefault(stmt.graph.value, []).append(serialize_quad(stmt))
        return {
            "seed": self.cluster.seed.value,
            "resolved": self.cluster.resolved_map(),
            "display_title": {
                "text": self.display_title,
                "origin": self.display_title_origin,
            },
            "all_titles": [
                {"text": t.text, "institution": t.institution, "role": t.role}
                for t in self.all_titles
            ],
            "statements_by_graph": {g: sorted(lines) for g, lines in by_graph.items()},
            "parts": [p.to_json() for p in self.parts],
            "subject_paths": [list(path) for path in self.subject_paths],
        }


def merge_cluster_records(
    cluster: Cluster,
    records: Sequence[Union[ActorRecord, ArtworkRecord]],
    namespace: str,
    *,
    preferred_title: Optional[dict] = None,
    retrieved_at: str = DEFAULT_RETRIEVED_AT,
) -> MergedRecord:
    """Union the statements of all records belonging to a cluster.

    Variant values are grouped, never collapsed; conflicting values coexist
    with their qualifiers and provenance. A record outside the cluster is an
    error, not a silent skip."""
    if not records:
        raise MergeError("no records to merge")
    members = cluster.member_uris()
    titles: list[TitleEntry] = []
    statements: list[Statement] = []
    subject_paths: list[tuple[str, ...]] = []
    for record in records:
        uri = record.uri(namespace)
        if uri not in members:
            raise MergeError(
                f"record {record.institution}:{record.local_id} is not in cluster "
                f"{cluster.seed.value}"
            )
        statements.extend(record_statements(record, namespace, retrieved_at=retrieved_at))
        if isinstance(record, ArtworkRecord):
            for title in record.titles:
                titles.append(TitleEntry(title.text, record.institution, title.role))
            diags: list[Diagnostic] = []
            for chain in subject_hierarchy(record.subjects, diags):
                if chain not in subject_paths:
                    subject_paths.append(chain)
        else:
            for form in record.name_forms:
                titles.append(TitleEntry(form.text, record.institution, form.role))
    display, origin = select_preferred_title(titles, preferred_title)
    return MergedRecord(
        cluster=cluster,
        display_title=display,
        display_title_origin=origin,
        all_titles=tuple(titles),
        statements=tuple(statements),
        subject_paths=tuple(subject_paths),
    )


# --- facets ---------------------------------------------------------------------


@dataclass
class FacetNode:
    uri: EntityUri
    label: str
    artwork_count: int
    children: tuple["FacetNode", ...] = ()
    certainty: str = "certain"  # umbrella members carry their entity kind

    def to_json(self) -> dict:
        return {
            "uri": self.uri.value,
            "label": self.label,
            "artwork_count": self.artwork_count,
            "certainty": self.certainty,
            "children": [c.to_json() for c in self.children],
        }


@dataclass
class FacetTree:
    roots: tuple[FacetNode, ...]

    def to_json(self) -> dict:
        return {"roots": [r.to_json() for r in self.roots]}


@dataclass(frozen=True)
class FacetEntity:
    """An actor entity as the facet builder sees it."""

    uri: EntityUri
    label: str
    artworks: frozenset[str] = frozenset()
    certainty: str = "certain"


def build_facet_tree(
    entities: Iterable[FacetEntity], umbrellas: Iterable[UmbrellaTerm]
) -> FacetTree:
    """Umbrella terms become roots whose children are exactly their members
    (certain and uncertain side by side); everything else is a standalone
    root. A root's count is the size of the union of its children's artwork
    sets: an artwork shared by two members is counted once."""
    by_uri = {e.uri: e for e in entities}
    in_umbrella: set[EntityUri] = set()
    roots: list[FacetNode] = []
    for umbrella in sorted(umbrellas, key=lambda u: (u.label, u.uri.value)):
        children = []
        union: set[str] = set()
        for member in sorted(umbrella.members, key=lambda u: u.value):
            in_umbrella.add(member)
            entity = by_uri.get(member)
            label = entity.label if entity else member.value
            artworks = entity.artworks if entity else frozenset()
            certainty = entity.certainty if entity else "uncertain"
            union |= artworks
            children.append(
                FacetNode(
                    uri=member,
                    label=label,
                    artwork_count=len(artworks),
                    certainty=certainty,
                )
            )
        roots.append(
            FacetNode(
                uri=umbrella.uri,
                label=umbrella.label,
                artwork_count=len(union),
                children=tuple(children),
                certainty="umbrella",
            )
        )
    for entity in sorted(by_uri.values(), key=lambda e: (e.label, e.uri.value)):
        if entity.uri in in_umbrella:
            continue
        roots.append(
            FacetNode(
                uri=entity.uri,
                label=entity.label,
                artwork_count=len(entity.artworks),
                certainty=entity.certainty,
            )
        )
    roots.sort(key=lambda n: (n.label, n.uri.value))
    return FacetTree(roots=tuple(roots))


# --- part-whole -------------------------------------------------------------------


@dataclass
class PartNode:
    record: ArtworkRecord
    children: tuple["PartNode", ...] = ()

    def to_json(self) -> dict:
        return {
            "ref": f"{self.record.institution}:{self.record.local_id}",
            "label": self.record.display_label(),
            "children": [c.to_json() for c in self.children],
        }


def build_part_whole(
    records: Sequence[ArtworkRecord],
    diagnostics: Optional[list[Diagnostic]] = None,
) -> list[PartNode]:
    """Attach part records under their parents; parts stay independently
    addressable. Dangling parent refs leave the child standalone with a
    diagnostic; reference cycles are an error naming the members."""
    if diagnostics is None:
        diagnostics = []
    by_key = {(r.institution, r.local_id): r for r in records}
    children_of: dict[tuple[str, str], list[ArtworkRecord]] = {}
    roots: list[ArtworkRecord] = []
    for record in records:
        if record.parent_work:
            parent_key = (record.institution, record.parent_work)
            if parent_key not in by_key:
                diagnostics.append(
                    Diagnostic(
                        f"parent {record.parent_work!r} of {record.local_id!r} not found; "
                        "kept standalone"
                    )
                )
                roots.append(record)
            else:
                children_of.setdefault(parent_key, []).append(record)
        else:
            roots.append(record)

    # cycle check: walk parent refs from every record
    for record in records:
        seen = []
        current = record
        while current.parent_work:
            key = (current.institution, current.parent_work)
            if key not in by_key:
                break
            if key in seen:
                cycle = seen[seen.index(key):]
                raise DataError(
                    "part-whole cycle: "
                    + " -> ".join(f"{inst}:{lid}" for inst, lid in cycle + [key])
                )
            seen.append((current.institution, current.local_id))
            current = by_key[key]

    def build(record: ArtworkRecord) -> PartNode:
        kids = children_of.get((record.institution, record.local_id), [])
        return PartNode(
            record=record,
            children=tuple(build(k) for k in sorted(kids, key=lambda r: r.local_id)),
        )

    return [build(r) for r in sorted(roots, key=lambda r: (r.institution, r.local_id))]


# --- subjects ----------------------------------------------------------------------


def _notation_steps(notation: str) -> list[str]:
    """Split an iconographic notation into its hierarchy steps: one character
    per step, with parenthesized qualifiers kept atomic."""
    steps = []
    i = 0
    while i < len(notation):
        if notation[i] == "(":
            close = notation.find(")", i)
            if close < 0:
                steps.append(notation[i:])  # unbalanced: keep the rest atomic
                break
            steps.append(notation[i : close + 1])
            i = close + 1
        else:
            steps.append(notation[i])
            i += 1
    return steps


def subject_hierarchy(
    notations: Sequence[str],
    diagnostics: Optional[list[Diagnostic]] = None,
) -> list[tuple[str, ...]]:
    """Expand each notation to its prefix-ancestor chain, preserving the
    taxonomy's levels ("73D" -> ["7", "73", "73D"]). Empty notations are
    skipped with a diagnostic."""
    if diagnostics is None:
        diagnostics = []
    chains = []
    for notation in notations:
        text = notation.strip()
        if not text:
            diagnostics.append(Diagnostic("empty subject notation skipped"))
            continue
        chain = []
        prefix = ""
        for step in _notation_steps(text):
            prefix += step
            chain.append(prefix)
        chains.append(tuple(chain))
    return chains
