"""Deterministic synthetic corpora.

The real multi-institution data behind this toolchain is not redistributable,
so acceptance runs on generated fixtures: multi-authority linksets with
configurable rates of injected duplicates, broken round trips and deprecation
chains, a labeled record/authority matching corpus, cross-institution artwork
pairs for the review queue, and a small modeling graph for facets. Everything
derives from the seed; a manifest records the ground truth the generator
built, so tests never guess expected values.
"""

from __future__ import annotations

import csv
import io
import json
import random
from pathlib import Path
from typing import Optional

from concordia.matcher import (
    IndexedEntity,
    candidate_id,
    normalize_name,
    record_ref,
)
from concordia.model import DateSpec, EntityUri, LinkKind
from concordia.modeling import Modeler
from concordia.nquads import export_quads
from concordia.providers import FixtureProvider, ProviderAnswer
from concordia.records import ActorRecord, ArtworkRecord, NameForm, Title, CreatorRef

AUTHORITY_BASES = {
    "loc": "https://id.loc.gov/authorities/names/n",
    "gnd": "https://d-nb.info/gnd/",
    "rkd": "https://data.rkd.nl/artists/",
    "ulan": "http://vocab.getty.edu/ulan/",
    "wikidata": "http://www.wikidata.org/entity/Q",
}

INSTITUTIONS = ("zeri", "frick", "hertziana", "marburg", "khi")

GIVEN_NAMES = (
    "Giovanni", "Maria", "Pietro", "Anna", "Carlo", "Luisa", "Francesco",
    "Elena", "Marco", "Lucia", "Heinrich", "Wilhelm", "Johanna", "Dirk",
    "Margarethe", "Cornelis", "Antonia", "Federico", "Beatrice", "Tommaso",
)
# heads are pairwise >= 2 edits apart, so distinct persons sharing a given
# name can never reach the confident similarity band
_SURNAME_HEADS = (
    "Bar", "Cel", "Dup", "Fos", "Gri", "Hul", "Jan", "Kom", "Lev", "Mon",
    "Nir", "Ost", "Pra", "Qui", "Rud", "Sem", "Tav", "Urb", "Vog", "Zet",
)
_SURNAME_TAILS = (
    "delli", "etti", "oni", "esi", "ucci", "ardo", "ini", "otti", "aldi", "ense",
)


def surname(index: int) -> str:
    # unique for index < 200 (20 heads x 10 tails)
    head = _SURNAME_HEADS[index // len(_SURNAME_TAILS) % len(_SURNAME_HEADS)]
    tail = _SURNAME_TAILS[index % len(_SURNAME_TAILS)]
    return head + tail


def person_name(index: int) -> str:
    return f"{surname(index)}, {GIVEN_NAMES[index % len(GIVEN_NAMES)]}"


def authority_uri(authority: str, number: int) -> str:
    return f"{AUTHORITY_BASES[authority]}{number}"


# --- linkset corpus ---------------------------------------------------------------


def make_linkset_corpus(
    out_dir: Path,
    seed: int = 1,
    clusters: int = 100,
    conflicts: int = 27,
    deprecation_chains: int = 5,
    unverifiable: int = 3,
) -> dict:
    """Generate actor records with authority links plus the provider fixture
    files the harmonizer will consult. Exactly `conflicts` clusters carry an
    injected inconsistency (duplicates and broken round trips alternating);
    every cluster reaches at least two authorities, so the expected
    inconsistency rate is conflicts/clusters by construction."""
    if conflicts > clusters:
        raise ValueError("cannot inject more conflicts than clusters")
    rng = random.Random(seed)
    provider = FixtureProvider(out_dir / "provider")
    conflicted = sorted(rng.sample(range(clusters), conflicts))
    conflict_set = set(conflicted)
    deprecated = set(rng.sample(sorted(set(range(clusters)) - conflict_set),
                                min(deprecation_chains, clusters - conflicts)))
    rows = []
    manifest_clusters = {}
    next_number = seed * 1_000_000

    def fresh(authority: str) -> str:
        nonlocal next_number
        next_number += 1
        return authority_uri(authority, next_number)

    unverifiable_left = unverifiable
    for i in range(clusters):
        institution = INSTITUTIONS[i % len(INSTITUTIONS)]
        local_id = f"A{i:04d}"
        name = person_name(i)
        birth = rng.randint(1400, 1850)
        death = birth + rng.randint(30, 70)
        authorities = rng.sample(("loc", "gnd", "rkd", "ulan"), rng.randint(1, 3))
        authorities.append("wikidata")  # hub record linking the others
        uris = {auth: fresh(auth) for auth in authorities}
        wd = uris["wikidata"]
        asserted = []
        injected = None

        if i in conflict_set and i % 2 == 0:
            # duplicate_in_authority: the hub endorses two URIs of one authority
            dup_auth = next(a for a in authorities if a != "wikidata")
            duplicate = fresh(dup_auth)
            asserted = [wd]
            provider.store(
                ProviderAnswer(
                    uri=EntityUri(wd),
                    links=tuple(
                        (EntityUri(u), LinkKind.EXACT_MATCH)
                        for u in sorted(set(uris.values()) - {wd}) + [duplicate]
                    ),
                )
            )
            injected = {"kind": "duplicate_in_authority", "authority": dup_auth,
                        "candidates": sorted([uris[dup_auth], duplicate])}
        elif i in conflict_set:
            # broken_round_trip: institution asserts A, A links the hub, the
            # hub points back to a different URI of A's authority
            rt_auth = next(a for a in authorities if a != "wikidata")
            a_uri = uris[rt_auth]
            c_uri = fresh(rt_auth)
            asserted = [a_uri]
            provider.store(
                ProviderAnswer(uri=EntityUri(a_uri), links=((EntityUri(wd), LinkKind.EXACT_MATCH),))
            )
            provider.store(
                ProviderAnswer(
                    uri=EntityUri(wd),
                    links=tuple(
                        (EntityUri(u), LinkKind.EXACT_MATCH)
                        for u in sorted((set(uris.values()) - {wd, a_uri}) | {c_uri})
                    ),
                )
            )
            injected = {"kind": "broken_round_trip", "authority": rt_auth,
                        "candidates": sorted([a_uri, c_uri])}
        else:
            # consistent star: the institution asserts one or two URIs and the
            # hub confirms everything with proper back-links
            if i in deprecated and "ulan" not in uris:
                uris["ulan"] = fresh("ulan")
            asserted = sorted(rng.sample(sorted(uris.values()), rng.randint(1, 2)))
            if wd not in asserted and rng.random() < 0.5:
                asserted.append(wd)
            provider.store(
                ProviderAnswer(
                    uri=EntityUri(wd),
                    links=tuple(
                        (EntityUri(u), LinkKind.EXACT_MATCH)
                        for u in sorted(set(uris.values()) - {wd})
                    ),
                )
            )
            for auth, uri in sorted(uris.items()):
                if auth == "wikidata":
                    continue
                if i in deprecated and auth == "ulan":
                    # the institution recorded a URI that was later superseded
                    old = fresh("ulan")
                    provider.store(
                        ProviderAnswer(uri=EntityUri(old), replaced_by=EntityUri(uri))
                    )
                    if uri in asserted:
                        asserted = [old if u == uri else u for u in asserted]
                    else:
                        asserted.append(old)
                provider.store(
                    ProviderAnswer(uri=EntityUri(uri), links=((EntityUri(wd), LinkKind.EXACT_MATCH),))
                )
            if unverifiable_left > 0 and i % 17 == 3:
                # one unreachable record on an authority this cluster does not
                # use otherwise: unverifiable must stay a non-conflict
                spare = next(
                    (a for a in ("gnd", "rkd", "loc", "ulan") if a not in uris), None
                )
                if spare is not None:
                    dead = fresh(spare)
                    provider.store_failure(EntityUri(dead))
                    asserted.append(dead)
                    uris[f"{spare}_dead"] = dead
                    unverifiable_left -= 1

        rows.append(
            {
                "id": local_id,
                "institution": institution,
                "name": name,
                "dates": f"{birth}-{death}",
                "class": "person",
                "links": ";".join(sorted(asserted)),
            }
        )
        manifest_clusters[f"{institution}:{local_id}"] = {
            "authorities": sorted(a for a in uris if not a.endswith("_dead")),
            "conflict": injected,
        }

    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["id", "institution", "name", "dates", "class", "links"])
    writer.writeheader()
    writer.writerows(rows)
    (out_dir / "actors.csv").write_text(buf.getvalue(), encoding="utf-8")
    (out_dir / "actor_mapping.json").write_text(
        json.dumps(
            {
                "id": "id",
                "institution": "institution",
                "names": "name",
                "dates": "dates",
                "class": "class",
                "links": "links",
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return {
        "seed": seed,
        "clusters": clusters,
        "conflicts": conflicts,
        "expected_rate": conflicts / clusters,
        "conflicted_records": [
            ref for ref, info in sorted(manifest_clusters.items()) if info["conflict"]
        ],
        "cluster_details": manifest_clusters,
    }


# --- matching corpus -----------------------------------------------------------------


GAVASIO_ULAN = "http://vocab.getty.edu/ulan/500116387"


def make_match_fixture(seed: int = 1, size: int = 200):
    """A labeled record/authority matching corpus.

    Returns (records, authority entities, truth) where truth maps record
    local ids to the correct authority URI (or None). Includes the
    full-form/short-form pair ("Gavasio, Giovanni Giacomo" matches, the
    divergent "Gavazzi Giovanni" form of the same person must not reach the
    confident band) and a homonym pair separated only by life dates."""
    rng = random.Random(seed)
    records: list[ActorRecord] = []
    entities: list[IndexedEntity] = []
    truth: dict[str, Optional[str]] = {}

    def add_entity(uri: str, name: str, birth: int, death: int,
                   entity_class: str = "person") -> None:
        entities.append(
            IndexedEntity(
                uri=EntityUri(uri),
                label=name,
                name_forms=(normalize_name(name).text,),
                entity_class=entity_class,
                dates=DateSpec.year_range(birth, death),
            )
        )

    def add_record(local_id: str, name: str, dates, expected: Optional[str],
                   entity_class: str = "person") -> None:
        records.append(
            ActorRecord(
                local_id=local_id,
                institution="zeri",
                name_forms=(NameForm(name),),
                dates=dates,
                entity_class=entity_class,
            )
        )
        truth[local_id] = expected

    # the documented pair: one institution's full form matches, another
    # institution's divergent short form does not
    add_entity(GAVASIO_ULAN, "Gavasio, Giovanni Giacomo", 1460, 1512)
    add_record("M0000", "Gavasio, Giovanni Giacomo",
               (DateSpec.exact(1460), DateSpec.exact(1512)), GAVASIO_ULAN)
    add_record("M0001", "Gavazzi Giovanni",
               (DateSpec.unknown(), DateSpec.unknown()), GAVASIO_ULAN)

    # homonyms separated only by life dates: the date veto protects precision
    add_entity("http://vocab.getty.edu/ulan/500108965", "Testa, Pietro", 1611, 1650)
    add_entity("http://vocab.getty.edu/ulan/500108966", "Testa, Pietro", 1810, 1880)
    add_record("M0002", "Testa, Pietro", (DateSpec.exact(1611), DateSpec.exact(1650)),
               "http://vocab.getty.edu/ulan/500108965")

    # a person/organisation homonym: class constraint rejects it
    add_entity("http://vocab.getty.edu/ulan/500300001", "Sarotti", 1880, 1960,
               entity_class="organisation")
    add_record("M0003", "Sarotti", (DateSpec.exact(1890), DateSpec.exact(1955)), None)

    diacritics = str.maketrans({"a": "à", "e": "è", "o": "ò", "u": "ù"})
    next_ulan = 500200000
    for i in range(4, size):
        local_id = f"M{i:04d}"
        name = person_name(i)
        birth = rng.randint(1400, 1850)
        death = birth + rng.randint(30, 70)
        has_match = rng.random() < 0.7
        if not has_match:
            add_record(local_id, name, (DateSpec.exact(birth), DateSpec.exact(death)), None)
            continue
        next_ulan += 1
        uri = f"http://vocab.getty.edu/ulan/{next_ulan}"
        add_entity(uri, name, birth, death)
        style = rng.randint(0, 4)
        given = name.split(", ")[1]
        family = name.split(", ")[0]
        if style == 0:
            form = name  # verbatim
        elif style == 1:
            form = f"{given} {family}"  # already given-first
        elif style == 2:
            form = name.translate(diacritics)  # diacritic-laden copy
        elif style == 3 and len(f"{given} {family}") >= 16:
            # single typo; long names stay above the confident threshold
            flat = f"{family}, {given}"
            pos = rng.randint(1, len(family) - 2)
            form = flat[:pos] + "x" + flat[pos + 1 :]
        else:
            form = name
        dates = (DateSpec.exact(birth), DateSpec.exact(death))
        if rng.random() < 0.15:
            dates = (DateSpec.unknown(), DateSpec.unknown())  # recall cost, not precision
        add_record(local_id, form, dates, uri)
    return records, entities, truth


def write_match_fixture(out_dir: Path, seed: int = 1, size: int = 200) -> dict:
    records, entities, truth = make_match_fixture(seed, size)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["id", "institution", "name", "dates", "class", "links"])
    writer.writeheader()
    for record in records:
        first, second = record.dates
        if first.is_unknown():
            dates = ""
        else:
            dates = f"{first.start_year}-{second.end_year}"
        writer.writerow(
            {
                "id": record.local_id,
                "institution": record.institution,
                "name": record.name_forms[0].text,
                "dates": dates,
                "class": record.entity_class,
                "links": "",
            }
        )
    (out_dir / "match_records.csv").write_text(buf.getvalue(), encoding="utf-8")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["uri", "name", "dates", "class"])
    writer.writeheader()
    for entity in entities:
        writer.writerow(
            {
                "uri": entity.uri.value,
                "name": entity.label,
                "dates": f"{entity.dates.start_year}-{entity.dates.end_year}",
                "class": entity.entity_class,
            }
        )
    (out_dir / "authority.csv").write_text(buf.getvalue(), encoding="utf-8")
    return {"records": len(records), "entities": len(entities), "truth": truth}


def load_authority_csv(path: Path) -> list[IndexedEntity]:
    from concordia.matcher import parse_date_spec

    entities = []
    with path.open(encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            entities.append(
                IndexedEntity(
                    uri=EntityUri(row["uri"]),
                    label=row["name"],
                    name_forms=(normalize_name(row["name"]).text,),
                    entity_class=row.get("class", "unknown") or "unknown",
                    dates=parse_date_spec(row.get("dates", "")),
                )
            )
    return entities


# --- artwork pairs for the review queue -------------------------------------------------


TITLE_PAIRS = (
    ("Annunciazione", "The Annunciation"),
    ("Madonna col Bambino", "Madonna and Child"),
    ("Ritratto di gentiluomo", "Portrait of a Gentleman"),
    ("Natività", "The Nativity"),
    ("San Girolamo nello studio", "Saint Jerome in His Study"),
    ("Adorazione dei Magi", "Adoration of the Magi"),
)
SUBJECT_POOL = ("73D", "11H(FRANCIS)", "25F23", "73A52", "61B2")
KEEPER_POOL = (
    "Hotel George V, Auction Tajan",
    "Allington Castle, collection Lord W.M. Conway",
    "Chatsworth House",
    "Museum of Porziuncola, Basilica of S. Maria degli Angeli",
)


def make_artwork_pairs(seed: int = 1, pairs: int = 12):
    """Cross-institution record pairs describing the same artwork, plus the
    externally produced candidate lines that propose them (stand-ins for the
    image-similarity stage, which is consumed as input and never computed)."""
    rng = random.Random(seed + 7)
    records: list[ArtworkRecord] = []
    candidates = []
    for i in range(pairs):
        title_a, title_b = TITLE_PAIRS[i % len(TITLE_PAIRS)]
        inst_a, inst_b = INSTITUTIONS[i % 3], INSTITUTIONS[3 + i % 2]
        year = rng.randint(1300, 1700)
        subjects = (SUBJECT_POOL[i % len(SUBJECT_POOL)],)
        left = ArtworkRecord(
            local_id=f"W{i:03d}",
            institution=inst_a,
            titles=(Title(f"{title_a} {i}", "it"),),
            creators=(CreatorRef(f"A{(i * 3) % 100:04d}"),),
            date=DateSpec.exact(year),
            subjects=subjects,
            keeper_chain=(KEEPER_POOL[i % len(KEEPER_POOL)],),
        )
        right = ArtworkRecord(
            local_id=f"X{i:03d}",
            institution=inst_b,
            titles=(Title(f"{title_b} {i}", "en"),),
            creators=(CreatorRef(f"A{(i * 3) % 100:04d}"),),
            date=DateSpec.year_range(year - 2, year + 2),
            subjects=subjects,
        )
        records.extend([left, right])
        left_ref = record_ref(inst_a, left.local_id, "work")
        right_ref = record_ref(inst_b, right.local_id, "work")
        candidates.append(
            {
                "id": candidate_id(left_ref, right_ref),
                "left": left_ref,
                "right": right_ref,
                "score": round(0.86 + (i % 10) / 100, 4),
                "signals": {
                    "name_score": 0.9,
                    "date_verdict": "compatible",
                    "class_verdict": "compatible",
                },
                "confidence": "review",
                "status": "pending",
            }
        )
    # one composite work with parts, for the part-whole hierarchy
    parent = ArtworkRecord(
        local_id="C000",
        institution="zeri",
        titles=(Title("Ciclo di affreschi", "it"),),
        date=DateSpec.century(14),
    )
    parts = [
        ArtworkRecord(
            local_id=f"C00{j}",
            institution="zeri",
            titles=(Title(f"Scena {j}", "it"),),
            parent_work="C000",
        )
        for j in (1, 2, 3)
    ]
    records.extend([parent] + parts)
    return records, candidates


# --- modeling corpus ---------------------------------------------------------------------


def build_modeling_graph(namespace: str, retrieved_at: str = "1970-01-01T00:00:00Z") -> Modeler:
    """The ambiguity scenarios as one small graph: umbrella terms with their
    members, a diverging identity, material levels, an alternative
    attribution, and preserved name forms. Used for the facet tree."""
    m = Modeler(namespace, source="curated", retrieved_at=retrieved_at)
    osvaldo = EntityUri("http://www.wikidata.org/entity/Q110300435")
    foto = EntityUri(namespace + "actor/9f00000000000001")
    collective = m.mint_collective_name("Böhm")
    m.mint_umbrella("Böhm", {osvaldo, foto, collective.uri})
    rijksmuseum = EntityUri("http://www.wikidata.org/entity/Q190804")
    fotocommissie = EntityUri(namespace + "actor/9f00000000000002")
    m.mint_umbrella("Rijksmuseum", {rijksmuseum, fotocommissie})
    m.link_diverging_identity(
        "Pseudo Ambrogio di Baldese",
        {
            EntityUri("http://vocab.getty.edu/ulan/500012920"),
            EntityUri("http://vocab.getty.edu/ulan/500082343"),
        },
    )
    m.assert_material_levels(
        "albumen",
        {
            "material": EntityUri("http://vocab.getty.edu/aat/300011802"),
            "process": EntityUri("http://vocab.getty.edu/aat/300133274"),
            "object_type": EntityUri("http://vocab.getty.edu/aat/300127121"),
        },
    )
    m.assert_alternative_attribution(
        EntityUri(namespace + "work/alt0000000000001"),
        [
            EntityUri("http://www.wikidata.org/entity/Q602005"),
            EntityUri("http://www.wikidata.org/entity/Q1478056"),
        ],
        m.provenance,
    )
    # creator statements drive the facet counts
    for pos, member in enumerate(sorted({osvaldo, foto, collective.uri}, key=lambda u: u.value)):
        for j in range(pos + 1):
            m._emit(
                EntityUri(f"{namespace}work/bohm{pos}{j:02d}0000000"),
                "urn:concordia:prop:creator",
                member,
            )
    m.record_name_form(
        EntityUri(namespace + "work/nf00000000000001"),
        "Lotz-Bauer, Hilde",
        EntityUri("http://www.wikidata.org/entity/Q1618235"),
    )
    return m


# --- top level -------------------------------------------------------------------------------


def make_fixtures(
    out_dir: Path | str,
    seed: int = 1,
    clusters: int = 100,
    conflicts: int = 27,
    namespace: str = "https://kg.example.org/",
    match_size: int = 200,
    artwork_pairs: int = 12,
) -> dict:
    """Write the full synthetic corpus under out_dir and return the manifest.

    Byte-reproducible: two runs with the same arguments produce identical
    trees."""
    out_dir = Path(out_dir)
    manifest = {
        "generator": "concordia.fixtures",
        "seed": seed,
        "namespace": namespace,
        "linksets": make_linkset_corpus(out_dir, seed, clusters, conflicts),
        "match": write_match_fixture(out_dir, seed, match_size),
    }
    records, candidates = make_artwork_pairs(seed, artwork_pairs)
    from concordia.records import artwork_to_json

    (out_dir / "artworks.json").write_text(
        json.dumps([artwork_to_json(r) for r in records], indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (out_dir / "incoming_candidates.jsonl").write_text(
        "".join(json.dumps(c, sort_keys=True) + "\n" for c in candidates),
        encoding="utf-8",
    )
    manifest["artworks"] = {
        "records": len(records),
        "candidates": [c["id"] for c in candidates],
    }
    modeler = build_modeling_graph(namespace)
    (out_dir / "modeling.nq").write_text(
        export_quads(modeler.statements), encoding="utf-8"
    )
    manifest["modeling_statements"] = len(modeler.statements)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
