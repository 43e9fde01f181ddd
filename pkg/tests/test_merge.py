import pytest

from concordia.harmonizer import Cluster
from concordia.merge import (
    FacetEntity,
    MergeError,
    TitleEntry,
    build_facet_tree,
    build_part_whole,
    merge_cluster_records,
    select_preferred_title,
    subject_hierarchy,
)
from concordia.model import DataError, DateSpec, EntityUri
from concordia.modeling import Modeler
from concordia.records import ActorRecord, ArtworkRecord, NameForm, Title

NS = "https://kg.example.org/"
WD = "http://www.wikidata.org/entity/"


# --- preferred titles -----------------------------------------------------------


TITLES = [
    TitleEntry("Annunciazione", "zeri"),
    TitleEntry("The Annunciation", "frick"),
    TitleEntry("The Annunciation", "khi"),
]


def test_reviewer_marked_title_wins():
    assert select_preferred_title(TITLES, {"mark": "Annunciazione"}) == (
        "Annunciazione",
        "reviewer_marked",
    )


def test_reviewer_created_title_wins():
    assert select_preferred_title(TITLES, {"create": "Annunciation with donors"}) == (
        "Annunciation with donors",
        "reviewer_created",
    )


def test_rule_default_is_institution_majority():
    assert select_preferred_title(TITLES) == ("The Annunciation", "rule_default")


def test_rule_default_tie_breaks_by_shortest_then_byte_order():
    titles = [TitleEntry("Bb", "a"), TitleEntry("Aa", "b")]
    assert select_preferred_title(titles) == ("Aa", "rule_default")
    titles = [TitleEntry("Long title", "a"), TitleEntry("Tiny", "b")]
    assert select_preferred_title(titles) == ("Tiny", "rule_default")


def test_empty_titles_is_an_error():
    with pytest.raises(MergeError):
        select_preferred_title([])


def test_marking_an_absent_title_is_an_error():
    with pytest.raises(MergeError):
        select_preferred_title(TITLES, {"mark": "Nope"})


# --- merged records --------------------------------------------------------------


def artwork(local_id, institution, title, date=None, parent=None):
    return ArtworkRecord(
        local_id=local_id,
        institution=institution,
        titles=(Title(title),),
        date=date or DateSpec.unknown(),
        parent_work=parent,
    )


def cluster_for(records):
    seeds = sorted(r.uri(NS) for r in records)
    return Cluster(seed=seeds[0], merged_seeds=tuple(seeds))


def test_two_institutions_two_titles_both_kept():
    records = [artwork("W1", "zeri", "Annunciazione"), artwork("F7", "frick", "The Annunciation")]
    merged = merge_cluster_records(cluster_for(records), records, NS)
    assert len(merged.all_titles) == 2
    assert {(t.text, t.institution) for t in merged.all_titles} == {
        ("Annunciazione", "zeri"),
        ("The Annunciation", "frick"),
    }


def test_singleton_cluster_echoes_the_record():
    records = [artwork("W1", "zeri", "Annunciazione")]
    merged = merge_cluster_records(cluster_for(records), records, NS)
    assert merged.display_title == "Annunciazione"
    assert merged.display_title_origin == "rule_default"


def test_record_not_in_cluster_is_an_error():
    records = [artwork("W1", "zeri", "Annunciazione")]
    stranger = artwork("X9", "frick", "Other")
    with pytest.raises(MergeError):
        merge_cluster_records(cluster_for(records), records + [stranger], NS)


def test_three_records_three_provenance_tagged_date_statements():
    records = [
        artwork("W1", "zeri", "T", date=DateSpec.exact(1500)),
        artwork("F1", "frick", "T", date=DateSpec.exact(1500)),
        artwork("K1", "khi", "T", date=DateSpec.century(16)),
    ]
    merged = merge_cluster_records(cluster_for(records), records, NS)
    date_statements = [
        s for s in merged.statements if s.predicate == "urn:concordia:prop:date"
    ]
    assert len(date_statements) == 3  # shared values are not collapsed
    assert len({s.provenance.source for s in date_statements}) == 3


def test_actor_records_merge_name_forms_as_titles():
    records = [
        ActorRecord("Z1", "zeri", (NameForm("Bazzi, Giovanni Antonio"),)),
        ActorRecord("F2", "frick", (NameForm("Sodoma"),)),
    ]
    merged = merge_cluster_records(cluster_for(records), records, NS)
    assert {t.text for t in merged.all_titles} == {"Bazzi, Giovanni Antonio", "Sodoma"}


# --- facet tree --------------------------------------------------------------------


def test_umbrella_root_expands_to_members():
    m = Modeler(NS)
    osvaldo = EntityUri(WD + "Q110300435")
    foto = EntityUri(NS + "actor/fotobohm0000001")
    collective = m.mint_collective_name("Böhm").uri
    umbrella = m.mint_umbrella("Böhm", {osvaldo, foto, collective})
    entities = [
        FacetEntity(osvaldo, "Osvaldo Böhm", frozenset({"w1", "w2"})),
        FacetEntity(foto, "Foto Böhm", frozenset({"w3"})),
        FacetEntity(collective, "Böhm (collective name)", frozenset({"w4"}), "uncertain"),
    ]
    tree = build_facet_tree(entities, [umbrella])
    (root,) = tree.roots
    assert root.label == "Böhm"
    assert len(root.children) == 3
    assert root.artwork_count == 4
    assert {c.certainty for c in root.children} == {"certain", "uncertain"}


def test_no_umbrellas_gives_flat_roots():
    entities = [
        FacetEntity(EntityUri(WD + "Q1"), "A", frozenset({"w1"})),
        FacetEntity(EntityUri(WD + "Q2"), "B", frozenset()),
    ]
    tree = build_facet_tree(entities, [])
    assert [r.label for r in tree.roots] == ["A", "B"]
    assert all(not r.children for r in tree.roots)


def test_shared_artwork_counted_once_per_root():
    m = Modeler(NS)
    a = EntityUri(WD + "Q1")
    b = EntityUri(WD + "Q2")
    umbrella = m.mint_umbrella("Shared", {a, b})
    entities = [
        FacetEntity(a, "A", frozenset({"w1", "w2", "w3"})),
        FacetEntity(b, "B", frozenset({"w3", "w4"})),
    ]
    tree = build_facet_tree(entities, [umbrella])
    assert tree.roots[0].artwork_count == 4


def test_member_in_two_umbrellas_is_allowed():
    m = Modeler(NS)
    shared = EntityUri(WD + "Q1")
    u1 = m.mint_umbrella("First", {shared})
    u2 = m.mint_umbrella("Second", {shared})
    tree = build_facet_tree([FacetEntity(shared, "S", frozenset({"w1"}))], [u1, u2])
    assert len(tree.roots) == 2
    assert all(r.artwork_count == 1 for r in tree.roots)


# --- part-whole ---------------------------------------------------------------------


def test_fresco_cycle_tree_depth_two():
    parent = artwork("C1", "zeri", "Fresco cycle")
    scenes = [artwork(f"S{i}", "zeri", f"Scene {i}", parent="C1") for i in (1, 2, 3)]
    roots = build_part_whole([parent] + scenes)
    assert len(roots) == 1
    assert len(roots[0].children) == 3
    assert all(not child.children for child in roots[0].children)


def test_dangling_parent_is_standalone_with_diagnostic():
    diagnostics = []
    orphan = artwork("S1", "zeri", "Scene", parent="MISSING")
    roots = build_part_whole([orphan], diagnostics)
    assert len(roots) == 1
    assert diagnostics


def test_no_parent_refs_gives_forest_of_singletons():
    records = [artwork(f"W{i}", "zeri", f"T{i}") for i in range(3)]
    roots = build_part_whole(records)
    assert len(roots) == 3


def test_part_whole_cycle_is_an_error():
    a = artwork("A", "zeri", "A", parent="B")
    b = artwork("B", "zeri", "B", parent="A")
    with pytest.raises(DataError):
        build_part_whole([a, b])


# --- subject hierarchy -----------------------------------------------------------------


def test_prefix_expansion():
    assert subject_hierarchy(["73D"]) == [("7", "73", "73D")]


def test_parenthetical_qualifier_is_atomic():
    assert subject_hierarchy(["11H(FRANCIS)"]) == [("1", "11", "11H", "11H(FRANCIS)")]


def test_empty_notation_skipped_with_diagnostic():
    diagnostics = []
    assert subject_hierarchy([""], diagnostics) == []
    assert diagnostics


def test_notation_continues_after_qualifier():
    assert subject_hierarchy(["73D(X)1"]) == [("7", "73", "73D", "73D(X)", "73D(X)1")]
