import pytest

from concordia.model import (
    DataError,
    DateSpec,
    EntityUri,
    LinkKind,
    Provenance,
    ProvenanceMethod,
    UncertaintyQualifier,
)
from concordia.modeling import (
    Modeler,
    attach_uncertainty,
    classify_keeper,
    effective_qualifier,
    normalize_place,
)
from concordia.nquads import export_quads

NS = "https://kg.example.org/"
ULAN = "http://vocab.getty.edu/ulan/"
AAT = "http://vocab.getty.edu/aat/"
WD = "http://www.wikidata.org/entity/"


def modeler() -> Modeler:
    return Modeler(NS, source="curated", retrieved_at="2020-01-01T00:00:00Z")


# --- anonymous groups ---------------------------------------------------------


def test_same_space_time_frame_mints_one_entity_across_institutions():
    a = modeler().mint_anonymous_group("Florentine", DateSpec.century(16))
    b = modeler().mint_anonymous_group("Florentine", DateSpec.century(16))
    assert a.uri == b.uri


def test_different_centuries_mint_distinct_entities():
    m = modeler()
    a = m.mint_anonymous_group("Florentine", DateSpec.century(16))
    b = m.mint_anonymous_group("Florentine", DateSpec.century(17))
    assert a.uri != b.uri


def test_region_normalization_before_keying():
    a = modeler().mint_anonymous_group("florentine ", DateSpec.century(16))
    b = modeler().mint_anonymous_group("Florentine", DateSpec.century(16))
    assert a.uri == b.uri


def test_anonymous_group_needs_something_to_key_on():
    with pytest.raises(DataError):
        modeler().mint_anonymous_group("", DateSpec.unknown())


# --- qualified attributions ------------------------------------------------------


def test_qualified_attribution_relates_without_identifying():
    m = modeler()
    leonardo = EntityUri(ULAN + "500010879")
    entity, relation = m.mint_qualified_attribution(leonardo, "school")
    assert relation.predicate is LinkKind.QUALIFIED_RELATION_TO
    assert relation.object == leonardo
    assert all(s.predicate is not LinkKind.EXACT_MATCH for s in m.statements)


def test_qualified_attribution_is_deterministic():
    leonardo = EntityUri(ULAN + "500010879")
    a, _ = modeler().mint_qualified_attribution(leonardo, "school")
    b, _ = modeler().mint_qualified_attribution(leonardo, "school")
    assert a.uri == b.uri


def test_unknown_qualifier_is_kept_verbatim_with_diagnostic():
    m = modeler()
    entity, relation = m.mint_qualified_attribution(EntityUri(ULAN + "1"), "imitator of")
    assert m.diagnostics
    assert any(
        getattr(s.object, "text", None) == "imitator of" for s in m.statements
    )


def test_collective_name_has_no_relation_to_individuals():
    m = modeler()
    bellini = m.mint_collective_name("Bellini")
    assert bellini.kind == "collective_name"
    kinds = {s.predicate for s in m.statements if isinstance(s.predicate, LinkKind)}
    assert LinkKind.EXACT_MATCH not in kinds
    assert LinkKind.QUALIFIED_RELATION_TO not in kinds


# --- umbrella terms ----------------------------------------------------------------


def bohm_members(m: Modeler):
    osvaldo = EntityUri(WD + "Q110300435")
    foto = EntityUri(NS + "actor/fotobohm0000001")
    collective = m.mint_collective_name("Böhm").uri
    return osvaldo, foto, collective


def test_umbrella_groups_without_relating_members():
    m = modeler()
    members = set(bohm_members(m))
    umbrella = m.mint_umbrella("Böhm", members)
    assert umbrella.members == members
    member_links = [s for s in m.statements if s.predicate is LinkKind.MEMBER_OF_UMBRELLA]
    assert len(member_links) == 3
    assert all(s.object == umbrella.uri for s in member_links)
    # no link of any kind between two members
    for s in m.statements:
        if isinstance(s.predicate, LinkKind) and s.predicate is not LinkKind.MEMBER_OF_UMBRELLA:
            assert not (s.subject in members and s.object in members)


def test_umbrella_is_idempotent_and_extensible():
    m = modeler()
    a = EntityUri(WD + "Q1")
    b = EntityUri(WD + "Q2")
    first = m.mint_umbrella("Armoni Raffaelli Moretti", {a})
    second = m.mint_umbrella("Armoni Raffaelli Moretti", {a, b})
    assert first.uri == second.uri
    assert second.members == {a, b}
    member_links = [s for s in m.statements if s.predicate is LinkKind.MEMBER_OF_UMBRELLA]
    assert len(member_links) == 2  # re-minting a member adds no duplicate


def test_umbrella_requires_label_and_members():
    with pytest.raises(DataError):
        modeler().mint_umbrella("", {EntityUri(WD + "Q1")})
    with pytest.raises(DataError):
        modeler().mint_umbrella("Böhm", set())


# --- diverging identities -----------------------------------------------------------


def test_diverging_identity_links_all_candidates_with_see_also():
    m = modeler()
    uri, statements = m.link_diverging_identity(
        "Pseudo Ambrogio di Baldese",
        {EntityUri(ULAN + "500012920"), EntityUri(ULAN + "500082343")},
    )
    assert len(statements) == 2
    assert all(s.predicate is LinkKind.SEE_ALSO for s in statements)
    assert all(s.qualifier is UncertaintyQualifier.ALTERNATIVE for s in statements)
    assert {s.object for s in statements} == {
        EntityUri(ULAN + "500012920"),
        EntityUri(ULAN + "500082343"),
    }


def test_single_candidate_still_gets_see_also_not_exact_match():
    m = modeler()
    uri, statements = m.link_diverging_identity(
        "Ercole Grandi", {EntityUri(ULAN + "500124891")}
    )
    assert len(statements) == 1
    assert statements[0].predicate is LinkKind.SEE_ALSO


# --- materials -----------------------------------------------------------------------


def test_albumen_three_levels_give_three_statements():
    m = modeler()
    statements = m.assert_material_levels(
        "albumen",
        {
            "material": EntityUri(AAT + "300011802"),
            "process": EntityUri(AAT + "300133274"),
            "object_type": EntityUri(AAT + "300127121"),
        },
    )
    assert len(statements) == 3
    assert {s.predicate for s in statements} == {
        "urn:concordia:prop:material",
        "urn:concordia:prop:process",
        "urn:concordia:prop:object_type",
    }
    # the raw term is preserved on the shared term node
    assert any(
        getattr(s.object, "text", None) == "albumen" for s in m.statements
    )


def test_single_level_gives_one_statement():
    statements = modeler().assert_material_levels(
        "paper", {"material": EntityUri(AAT + "300014109")}
    )
    assert len(statements) == 1


def test_empty_level_map_is_an_error():
    with pytest.raises(DataError):
        modeler().assert_material_levels("albumen", {})


# --- keepers -------------------------------------------------------------------------


def test_hotel_and_auction_house():
    analysis = classify_keeper("Hotel George V, Auction Tajan")
    assert [(c.label, c.guess) for c in analysis.components] == [
        ("Hotel George V", "building"),
        ("Auction Tajan", "agent"),
    ]
    assert ("Auction Tajan", LinkKind.LOCATED_IN, "Hotel George V") in analysis.candidate_links


def test_castle_and_collection():
    analysis = classify_keeper("Allington Castle, collection Lord W.M. Conway")
    assert [(c.label, c.guess) for c in analysis.components] == [
        ("Allington Castle", "building"),
        ("collection Lord W.M. Conway", "collection"),
    ]


def test_manor_defaults_to_place():
    analysis = classify_keeper("Chatsworth House")
    assert [(c.label, c.guess) for c in analysis.components] == [("Chatsworth House", "place")]


def test_museum_in_basilica():
    analysis = classify_keeper("Museum of Porziuncola, Basilica of S. Maria degli Angeli")
    assert [c.guess for c in analysis.components] == ["agent", "building"]


def test_unknown_component_flags_review():
    analysis = classify_keeper("Ajmanov grad")
    assert analysis.components[0].guess == "unknown"
    assert analysis.needs_review


def test_agent_keeps_collection():
    analysis = classify_keeper("Museo Civico, collection B. Rossi")
    assert ("Museo Civico", LinkKind.KEEPER_OF, "collection B. Rossi") in analysis.candidate_links


# --- places ---------------------------------------------------------------------------


WESTMINSTER = EntityUri(WD + "Q170903")
LONDON = EntityUri(WD + "Q84")


def test_normalize_place_walks_up_to_city():
    parents = {WESTMINSTER: LONDON}
    assert normalize_place(WESTMINSTER, parents, {LONDON}) == LONDON


def test_city_is_fixpoint():
    assert normalize_place(LONDON, {}, {LONDON}) == LONDON


def test_place_without_city_ancestor_is_unchanged_with_diagnostic():
    diagnostics = []
    out = normalize_place(WESTMINSTER, {}, set(), diagnostics)
    assert out == WESTMINSTER
    assert diagnostics


def test_place_hierarchy_cycle_is_an_error():
    a, b = WESTMINSTER, LONDON
    with pytest.raises(DataError):
        normalize_place(a, {a: b, b: a}, set())


def test_normalize_place_is_a_projection():
    parents = {WESTMINSTER: LONDON}
    once = normalize_place(WESTMINSTER, parents, {LONDON})
    assert normalize_place(once, parents, {LONDON}) == once


# --- alternative attributions ------------------------------------------------------


def prov() -> Provenance:
    return Provenance("local:khi", "2020-01-01T00:00:00Z", ProvenanceMethod.ASSERTED)


def test_two_alternatives_one_meta_statement():
    m = modeler()
    photo = EntityUri(NS + "work/andersonbrogi01")
    anderson = EntityUri(WD + "Q602005")
    brogi = EntityUri(WD + "Q1478056")
    statements = m.assert_alternative_attribution(photo, [anderson, brogi], prov())
    creators = [s for s in statements if s.predicate == "urn:concordia:prop:creator"]
    metas = [s for s in statements if s.predicate is LinkKind.ALTERNATIVE_OF]
    assert len(creators) == 2
    assert len(metas) == 1
    assert len({s.graph for s in creators}) == 2  # one named graph per alternative
    assert all(s.qualifier is UncertaintyQualifier.ALTERNATIVE for s in statements)


def test_three_alternatives_three_pairwise_meta_statements():
    m = modeler()
    photo = EntityUri(NS + "work/tri01")
    candidates = [EntityUri(WD + f"Q{i}") for i in (1, 2, 3)]
    statements = m.assert_alternative_attribution(photo, candidates, prov())
    metas = [s for s in statements if s.predicate is LinkKind.ALTERNATIVE_OF]
    assert len(metas) == 3  # C(3,2)


def test_reasserting_alternatives_is_idempotent_as_a_set():
    m = modeler()
    photo = EntityUri(NS + "work/andersonbrogi01")
    candidates = [EntityUri(WD + "Q602005"), EntityUri(WD + "Q1478056")]
    first = m.assert_alternative_attribution(photo, candidates, prov())
    second = m.assert_alternative_attribution(photo, list(reversed(candidates)), prov())
    assert set(first) == set(second)


def test_fewer_than_two_candidates_is_an_error():
    with pytest.raises(DataError):
        modeler().assert_alternative_attribution(
            EntityUri(NS + "work/x"), [EntityUri(WD + "Q1")], prov()
        )


# --- statement-level uncertainty ------------------------------------------------------


def test_attach_uncertainty_sets_qualifier():
    m = modeler()
    beyer = EntityUri(WD + "Q95218985")
    photo = EntityUri(NS + "work/beyer01")
    stmt = m._emit(photo, "urn:concordia:prop:creator", beyer)
    qualified = attach_uncertainty(stmt, UncertaintyQualifier.UNCERTAIN)
    assert qualified.qualifier is UncertaintyQualifier.UNCERTAIN
    assert stmt.qualifier is UncertaintyQualifier.CERTAIN  # original untouched


def test_latest_qualifier_wins_at_read_time():
    m = modeler()
    beyer = EntityUri(WD + "Q95218985")
    photo = EntityUri(NS + "work/beyer01")
    first = m._emit(photo, "urn:concordia:prop:creator", beyer)
    from dataclasses import replace

    later = replace(
        attach_uncertainty(first, UncertaintyQualifier.UNCERTAIN),
        provenance=Provenance("curated", "2021-06-01T00:00:00Z", ProvenanceMethod.MINTED),
    )
    assert effective_qualifier([first, later]) is UncertaintyQualifier.UNCERTAIN


# --- name forms -----------------------------------------------------------------------


def test_name_form_node_plus_two_links():
    m = modeler()
    photo = EntityUri(NS + "work/p1")
    person = EntityUri(WD + "Q1618235")
    node, statements = m.record_name_form(photo, "Lotz-Bauer, Hilde", person)
    links = [s for s in statements if isinstance(s.object, EntityUri)]
    assert len(statements) == 3
    assert len(links) == 2
    assert any(s.subject == photo and s.object == node for s in links)
    assert any(s.subject == node and s.object == person for s in links)


def test_distinct_literals_get_distinct_nodes_same_person():
    m = modeler()
    person = EntityUri(WD + "Q1618235")
    node_a, _ = m.record_name_form(EntityUri(NS + "work/p1"), "Lotz-Bauer, Hilde", person)
    node_b, _ = m.record_name_form(EntityUri(NS + "work/p2"), "Degenhart-Bauer, Hilde", person)
    assert node_a != node_b


def test_identical_litert_shares_node():
    m = modeler()
    person = EntityUri(WD + "Q1618235")
    node_a, _ = m.record_name_form(EntityUri(NS + "work/p1"), "Lotz-Bauer, Hilde", person)
    node_b, _ = m.record_name_form(EntityUri(NS + "work/p2"), "Lotz-Bauer, Hilde", person)
    assert node_a == node_b


# --- whole-batch properties -----------------------------------------------------------


def build_full_corpus(m: Modeler):
    """The modeling scenarios exercised together: umbrella terms, collective
    names, diverging identities, materials, alternatives, uncertain names,
    name forms and place normalization."""
    osvaldo, foto, collective = bohm_members(m)
    m.mint_umbrella("Böhm", {osvaldo, foto, collective})
    m.mint_collective_name("Bellini")
    m.link_diverging_identity(
        "Pseudo Ambrogio di Baldese",
        {EntityUri(ULAN + "500012920"), EntityUri(ULAN + "500082343")},
    )
    m.link_diverging_identity("Ercole Grandi", {EntityUri(ULAN + "500124891")})
    m.assert_material_levels(
        "albumen",
        {
            "material": EntityUri(AAT + "300011802"),
            "process": EntityUri(AAT + "300133274"),
            "object_type": EntityUri(AAT + "300127121"),
        },
    )
    m.assert_alternative_attribution(
        EntityUri(NS + "work/andersonbrogi01"),
        [EntityUri(WD + "Q602005"), EntityUri(WD + "Q1478056")],
        prov(),
    )
    # "Beyer, Constantin?": identified link kept, uncertainty on the photo
    stmt = m._emit(
        EntityUri(NS + "work/beyer01"),
        "urn:concordia:prop:creator",
        EntityUri(WD + "Q95218985"),
    )
    m.statements[-1] = attach_uncertainty(stmt, UncertaintyQualifier.UNCERTAIN)
    # "Beyer, ?": reticence, an anonymous entity with zero candidate links
    m.mint_collective_name("Beyer")
    m.record_name_form(
        EntityUri(NS + "work/p1"), "Lotz-Bauer, Hilde", EntityUri(WD + "Q1618235")
    )
    m.record_name_form(
        EntityUri(NS + "work/p2"), "Degenhart-Bauer, Hilde", EntityUri(WD + "Q1618235")
    )
    return m


def test_corpus_never_asserts_exact_match_from_minted_entities():
    m = build_full_corpus(modeler())
    minted = {s.subject for s in m.statements if s.subject.value.startswith(NS)}
    for s in m.statements:
        assert s.predicate is not LinkKind.EXACT_MATCH


def test_corpus_rerun_is_byte_identical():
    first = export_quads(build_full_corpus(modeler()).statements)
    second = export_quads(build_full_corpus(modeler()).statements)
    assert first == second
