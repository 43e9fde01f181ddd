"""Institutional record model and CSV ingestion.

Source systems differ (library, museum and photo-archive standards), so the
ingestion contract is a plain CSV plus a column mapping naming which columns
carry ids, names, dates, classes and links. Unmapped columns are preserved as
opaque descriptive pairs rather than dropped.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

from concordia.matcher import parse_date_spec, date_spec_to_text
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

ENTITY_CLASSES = frozenset(
    {"person", "group", "organisation", "building", "collection", "place", "unknown"}
)

NAME_ROLES = frozenset({"preferred", "variant", "inscription"})

PROP_NS = "urn:concordia:prop:"


def prop_uri(name: str) -> str:
    return PROP_NS + name


@dataclass(frozen=True)
class NameForm:
    text: str
    role: str = "preferred"


@dataclass(frozen=True)
class AssertedLink:
    target: EntityUri
    kind: LinkKind = LinkKind.EXACT_MATCH
    qualifier: UncertaintyQualifier = UncertaintyQualifier.CERTAIN


@dataclass(frozen=True)
class ActorRecord:
    """An institution's description of an artist, photographer or keeper."""

    local_id: str
    institution: str
    name_forms: tuple[NameForm, ...]
    dates: tuple[DateSpec, DateSpec] = (DateSpec.unknown(), DateSpec.unknown())
    entity_class: str = "unknown"
    asserted_links: tuple[AssertedLink, ...] = ()
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.local_id:
            raise DataError("actor record requires a local id")
        if not self.name_forms:
            raise DataError(f"actor record {self.local_id!r} has no name form")
        if self.entity_class not in ENTITY_CLASSES:
            raise DataError(f"unknown entity class {self.entity_class!r}")

    def display_label(self) -> str:
        return self.name_forms[0].text

    def date_interval(self) -> DateSpec:
        """Single interval spanning the birth/death (or activity) pair."""
        first, second = self.dates
        ia, ib = first.interval(), second.interval()
        if ia is None and ib is None:
            return DateSpec.unknown()
        if ia is None:
            return second
        if ib is None:
            return first
        return DateSpec.year_range(min(ia[0], ib[0]), max(ia[1], ib[1]))

    def uri(self, namespace: str) -> EntityUri:
        return mint_deterministic_uri(
            namespace, "actor", CanonicalKey.from_raw(self.institution, self.local_id)
        )


@dataclass(frozen=True)
class Title:
    text: str
    lang: str = ""
    role: str = ""


@dataclass(frozen=True)
class CreatorRef:
    local_id: str
    qualifier: UncertaintyQualifier = UncertaintyQualifier.CERTAIN


@dataclass(frozen=True)
class ArtworkRecord:
    """An institution's description of an artwork or photograph of one."""

    local_id: str
    institution: str
    titles: tuple[Title, ...] = ()
    creators: tuple[CreatorRef, ...] = ()
    date: DateSpec = field(default_factory=DateSpec.unknown)
    materials: tuple[str, ...] = ()
    subjects: tuple[str, ...] = ()
    keeper_chain: tuple[str, ...] = ()
    parent_work: Optional[str] = None
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.local_id:
            raise DataError("artwork record requires a local id")

    def display_label(self) -> str:
        return self.titles[0].text if self.titles else self.local_id

    def uri(self, namespace: str) -> EntityUri:
        return mint_deterministic_uri(
            namespace, "work", CanonicalKey.from_raw(self.institution, self.local_id)
        )


MULTI_SEP = ";"
FIELD_SEP = "|"


def _split_multi(cell: str) -> list[str]:
    return [part.strip() for part in cell.split(MULTI_SEP) if part.strip()]


def _parse_name_cell(cell: str) -> list[NameForm]:
    forms = []
    for pos, part in enumerate(_split_multi(cell)):
        text, _, role = part.partition(FIELD_SEP)
        role = role.strip() or ("preferred" if pos == 0 else "variant")
        if role not in NAME_ROLES:
            role = "variant"
        forms.append(NameForm(text=text.strip(), role=role))
    return forms


def _parse_link_cell(
    cell: str, diagnostics: list[Diagnostic], line: int, filename: Optional[str]
) -> list[AssertedLink]:
    links = []
    for part in _split_multi(cell):
        fields = [f.strip() for f in part.split(FIELD_SEP)]
        try:
            target = EntityUri(fields[0])
        except DataError as exc:
            diagnostics.append(Diagnostic(f"bad link target: {exc}", filename, line))
            continue
        kind = LinkKind.EXACT_MATCH
        qualifier = UncertaintyQualifier.CERTAIN
        if len(fields) > 1 and fields[1]:
            try:
                kind = LinkKind(fields[1])
            except ValueError:
                diagnostics.append(
                    Diagnostic(f"unknown link kind {fields[1]!r}", filename, line)
                )
                continue
        if len(fields) > 2 and fields[2]:
            try:
                qualifier = UncertaintyQualifier(fields[2])
            except ValueError:
                diagnostics.append(
                    Diagnostic(f"unknown qualifier {fields[2]!r}", filename, line)
                )
        links.append(AssertedLink(target=target, kind=kind, qualifier=qualifier))
    return links


def _parse_dates(
    row: dict[str, str],
    mapping: dict,
    diagnostics: list[Diagnostic],
) -> tuple[DateSpec, DateSpec]:
    dates_col = mapping.get("dates")
    if isinstance(dates_col, dict):
        birth = parse_date_spec(row.get(dates_col.get("birth", ""), ""), diagnostics)
        death = parse_date_spec(row.get(dates_col.get("death", ""), ""), diagnostics)
        return (birth, death)
    if dates_col:
        spec = parse_date_spec(row.get(dates_col, ""), diagnostics)
        interval = spec.interval()
        if interval is None:
            return (DateSpec.unknown(), DateSpec.unknown())
        return (DateSpec.exact(interval[0]), DateSpec.exact(interval[1]))
    return (DateSpec.unknown(), DateSpec.unknown())


def _mapped_columns(mapping: dict) -> set[str]:
    used = set()
    for value in mapping.values():
        if isinstance(value, dict):
            used.update(value.values())
        elif value:
            used.add(value)
    return used


def parse_actor_records(
    stream: Union[str, TextIO],
    mapping: dict,
    *,
    institution: Optional[str] = None,
    filename: Optional[str] = None,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> list[ActorRecord]:
    """Read one ActorRecord per CSV row.

    The mapping names the columns for id, names, dates, class and links; an
    ``institution`` mapping entry may name a column, otherwise pass the value
    explicitly. A missing id column aborts; everything else degrades to
    diagnostics. Unmapped columns are preserved as extras in column order.
    """
    if diagnostics is None:
        diagnostics = []
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    id_col = mapping.get("id")
    if not id_col or reader.fieldnames is None or id_col not in reader.fieldnames:
        raise DataError(f"id column {id_col!r} missing from CSV header")
    used = _mapped_columns(mapping)
    records = []
    seen_ids = set()
    for line, row in enumerate(reader, start=2):  # header is line 1
        local_id = (row.get(id_col) or "").strip()
        if not local_id:
            diagnostics.append(Diagnostic("row without id skipped", filename, line))
            continue
        inst = institution or (row.get(mapping.get("institution", "")) or "").strip()
        if not inst:
            diagnostics.append(Diagnostic("row without institution skipped", filename, line))
            continue
        if (inst, local_id) in seen_ids:
            diagnostics.append(
                Diagnostic(f"duplicate local id {local_id!r} skipped", filename, line)
            )
            continue
        name_forms = _parse_name_cell(row.get(mapping.get("names", ""), "") or "")
        if not name_forms:
            diagnostics.append(Diagnostic("row without name form skipped", filename, line))
            continue
        entity_class = (row.get(mapping.get("class", ""), "") or "").strip().lower() or "unknown"
        if entity_class not in ENTITY_CLASSES:
            diagnostics.append(
                Diagnostic(f"unknown entity class {entity_class!r}", filename, line)
            )
            entity_class = "unknown"
        links = _parse_link_cell(
            row.get(mapping.get("links", ""), "") or "", diagnostics, line, filename
        )
        extras = tuple(
            (col, (row.get(col) or "").strip())
            for col in (reader.fieldnames or [])
            if col not in used and (row.get(col) or "").strip()
        )
        seen_ids.add((inst, local_id))
        records.append(
            ActorRecord(
                local_id=local_id,
                institution=inst,
                name_forms=tuple(name_forms),
                dates=_parse_dates(row, mapping, diagnostics),
                entity_class=entity_class,
                asserted_links=tuple(links),
                extras=extras,
            )
        )
    return records


def parse_artwork_records(
    stream: Union[str, TextIO],
    mapping: dict,
    *,
    institution: Optional[str] = None,
    filename: Optional[str] = None,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> list[ArtworkRecord]:
    """Read one ArtworkRecord per CSV row; same conventions as actor parsing.

    Titles: ``text|lang|role`` multi-valued; creators: ``local_id|qualifier``;
    keepers are layered labels (commas inside a label are preserved, layers
    are separated by ";")."""
    if diagnostics is None:
        diagnostics = []
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    id_col = mapping.get("id")
    if not id_col or reader.fieldnames is None or id_col not in reader.fieldnames:
        raise DataError(f"id column {id_col!r} missing from CSV header")
    used = _mapped_columns(mapping)
    records = []
    for line, row in enumerate(reader, start=2):
        local_id = (row.get(id_col) or "").strip()
        if not local_id:
            diagnostics.append(Diagnostic("row without id skipped", filename, line))
            continue
        inst = institution or (row.get(mapping.get("institution", "")) or "").strip()
        if not inst:
            diagnostics.append(Diagnostic("row without institution skipped", filename, line))
            continue
        titles = []
        for part in _split_multi(row.get(mapping.get("titles", ""), "") or ""):
            fields = [f.strip() for f in part.split(FIELD_SEP)]
            titles.append(
                Title(
                    text=fields[0],
                    lang=fields[1] if len(fields) > 1 else "",
                    role=fields[2] if len(fields) > 2 else "",
                )
            )
        creators = []
        for part in _split_multi(row.get(mapping.get("creators", ""), "") or ""):
            ref, _, qual = part.partition(FIELD_SEP)
            qualifier = UncertaintyQualifier.CERTAIN
            if qual.strip():
                try:
                    qualifier = UncertaintyQualifier(qual.strip())
                except ValueError:
                    diagnostics.append(
                        Diagnostic(f"unknown qualifier {qual.strip()!r}", filename, line)
                    )
            creators.append(CreatorRef(local_id=ref.strip(), qualifier=qualifier))
        extras = tuple(
            (col, (row.get(col) or "").strip())
            for col in (reader.fieldnames or [])
            if col not in used and (row.get(col) or "").strip()
        )
        records.append(
            ArtworkRecord(
                local_id=local_id,
                institution=inst,
                titles=tuple(titles),
                creators=tuple(creators),
                date=parse_date_spec(row.get(mapping.get("date", ""), "") or "", diagnostics),
                materials=tuple(_split_multi(row.get(mapping.get("materials", ""), "") or "")),
                subjects=tuple(_split_multi(row.get(mapping.get("subjects", ""), "") or "")),
                keeper_chain=tuple(_split_multi(row.get(mapping.get("keepers", ""), "") or "")),
                parent_work=(row.get(mapping.get("parent", ""), "") or "").strip() or None,
                extras=extras,
            )
        )
    return records


# --- JSON store ----------------------------------------------------------------


def _date_to_json(spec: DateSpec) -> dict:
    return {
        "form": spec.form.value,
        "start_year": spec.start_year,
        "end_year": spec.end_year,
    }


def _date_from_json(data: dict) -> DateSpec:
    from concordia.model import DateForm

    return DateSpec(
        form=DateForm(data["form"]),
        start_year=data.get("start_year"),
        end_year=data.get("end_year"),
    )


def actor_to_json(record: ActorRecord) -> dict:
    return {
        "local_id": record.local_id,
        "institution": record.institution,
        "name_forms": [{"text": n.text, "role": n.role} for n in record.name_forms],
        "dates": [_date_to_json(record.dates[0]), _date_to_json(record.dates[1])],
        "entity_class": record.entity_class,
        "asserted_links": [
            {"target": l.target.value, "kind": l.kind.value, "qualifier": l.qualifier.value}
            for l in record.asserted_links
        ],
        "extras": [list(pair) for pair in record.extras],
    }


def actor_from_json(data: dict) -> ActorRecord:
    return ActorRecord(
        local_id=data["local_id"],
        institution=data["institution"],
        name_forms=tuple(NameForm(n["text"], n.get("role", "preferred")) for n in data["name_forms"]),
        dates=(_date_from_json(data["dates"][0]), _date_from_json(data["dates"][1])),
        entity_class=data.get("entity_class", "unknown"),
        asserted_links=tuple(
            AssertedLink(
                target=EntityUri(l["target"]),
                kind=LinkKind(l.get("kind", "exact_match")),
                qualifier=UncertaintyQualifier(l.get("qualifier", "certain")),
            )
            for l in data.get("asserted_links", [])
        ),
        extras=tuple((k, v) for k, v in data.get("extras", [])),
    )


def artwork_to_json(record: ArtworkRecord) -> dict:
    return {
        "local_id": record.local_id,
        "institution": record.institution,
        "titles": [{"text": t.text, "lang": t.lang, "role": t.role} for t in record.titles],
        "creators": [
            {"local_id": c.local_id, "qualifier": c.qualifier.value} for c in record.creators
        ],
        "date": _date_to_json(record.date),
        "materials": list(record.materials),
        "subjects": list(record.subjects),
        "keeper_chain": list(record.keeper_chain),
        "parent_work": record.parent_work,
        "extras": [list(pair) for pair in record.extras],
    }


def artwork_from_json(data: dict) -> ArtworkRecord:
    return ArtworkRecord(
        local_id=data["local_id"],
        institution=data["institution"],
        titles=tuple(
            Title(t["text"], t.get("lang", ""), t.get("role", "")) for t in data.get("titles", [])
        ),
        creators=tuple(
            CreatorRef(c["local_id"], UncertaintyQualifier(c.get("qualifier", "certain")))
            for c in data.get("creators", [])
        ),
        date=_date_from_json(data["date"]),
        materials=tuple(data.get("materials", [])),
        subjects=tuple(data.get("subjects", [])),
        keeper_chain=tuple(data.get("keeper_chain", [])),
        parent_work=data.get("parent_work"),
        extras=tuple((k, v) for k, v in data.get("extras", [])),
    )


# --- materialization ----------------------------------------------------------


def ingest_graph(namespace: str, institution: str, batch: str = "ingest") -> EntityUri:
    """Named graph id for one institution's ingestion batch; deterministic so
    re-ingestion lands in the same graph."""
    return mint_deterministic_uri(
        namespace, "graph", CanonicalKey.from_raw(institution, batch)
    )


def record_statements(
    record: Union[ActorRecord, ArtworkRecord],
    namespace: str,
    *,
    retrieved_at: str,
    batch: str = "ingest",
) -> list[Statement]:
    """Materialize one record as provenance-tagged statements in the
    institution's ingestion graph."""
    graph = ingest_graph(namespace, record.institution, batch)
    prov = Provenance(
        source=f"local:{record.institution}",
        retrieved_at=retrieved_at,
        method=ProvenanceMethod.ASSERTED,
    )
    subject = record.uri(namespace)
    out = [
        Statement(subject, prop_uri("local_id"), Literal(record.local_id), graph, prov),
        Statement(subject, prop_uri("institution"), Literal(record.institution), graph, prov),
    ]
    if isinstance(record, ActorRecord):
        for form in record.name_forms:
            out.append(
                Statement(subject, prop_uri(f"name_{form.role}"), Literal(form.text), graph, prov)
            )
        out.append(
            Statement(subject, prop_uri("class"), Literal(record.entity_class), graph, prov)
        )
        first, second = record.dates
        if not first.is_unknown() or not second.is_unknown():
            out.append(
                Statement(
                    subject,
                    prop_uri("dates"),
                    Literal(f"{date_spec_to_text(first)}/{date_spec_to_text(second)}"),
                    graph,
                    prov,
                )
            )
        for link in record.asserted_links:
            out.append(
                Statement(subject, link.kind, link.target, graph, prov, link.qualifier)
            )
    else:
        for title in record.titles:
            out.append(
                Statement(
                    subject,
                    prop_uri("title"),
                    Literal(title.text, lang=title.lang or None),
                    graph,
                    prov,
                )
            )
        for creator in record.creators:
            out.append(
                Statement(
                    subject,
                    prop_uri("creator"),
                    Literal(creator.local_id),
                    graph,
                    prov,
                    creator.qualifier,
                )
            )
        if not record.date.is_unknown():
            out.append(
                Statement(
                    subject, prop_uri("date"), Literal(date_spec_to_text(record.date)), graph, prov
                )
            )
        for material in record.materials:
            out.append(Statement(subject, prop_uri("material"), Literal(material), graph, prov))
        for subject_code in record.subjects:
            out.append(Statement(subject, prop_uri("subject"), Literal(subject_code), graph, prov))
        for keeper in record.keeper_chain:
            out.append(Statement(subject, prop_uri("keeper"), Literal(keeper), graph, prov))
        if record.parent_work:
            parent = ArtworkRecord(
                local_id=record.parent_work, institution=record.institution
            ).uri(namespace)
            out.append(Statement(subject, LinkKind.PART_OF, parent, graph, prov))
    for column, value in record.extras:
        out.append(Statement(subject, prop_uri(f"x_{column}"), Literal(value), graph, prov))
    return out
