import pytest

from concordia.model import DataError, DateForm, EntityUri, LinkKind, UncertaintyQualifier
from concordia.records import (
    ActorRecord,
    NameForm,
    parse_actor_records,
    parse_artwork_records,
    record_statements,
)

NS = "https://kg.example.org/"

ACTOR_MAPPING = {
    "id": "id",
    "names": "name",
    "dates": "dates",
    "class": "class",
    "links": "links",
}


def test_single_row_yields_one_record_with_one_name_form():
    csv_text = "id,name,dates,class,links\nZ123,\"Gavasio, Giovanni Giacomo\",,person,\n"
    records = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert len(records) == 1
    record = records[0]
    assert record.local_id == "Z123"
    assert record.name_forms == (NameForm("Gavasio, Giovanni Giacomo", "preferred"),)
    assert record.entity_class == "person"


def test_empty_date_cell_gives_unknown():
    csv_text = "id,name,dates,class,links\nZ1,Someone,,person,\n"
    (record,) = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert record.dates[0].form is DateForm.UNKNOWN
    assert record.dates[1].form is DateForm.UNKNOWN
    assert record.date_interval().is_unknown()


def test_rows_parse_in_file_order():
    csv_text = "id,name,dates,class,links\nZ1,First,,person,\nZ2,Second,,person,\n"
    records = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert [r.local_id for r in records] == ["Z1", "Z2"]


def test_missing_id_column_aborts():
    with pytest.raises(DataError):
        parse_actor_records("name\nSomeone\n", ACTOR_MAPPING, institution="zeri")


def test_unparseable_date_gives_unknown_plus_diagnostic():
    csv_text = "id,name,dates,class,links\nZ1,Someone,fl. before noon,person,\n"
    diagnostics = []
    (record,) = parse_actor_records(
        csv_text, ACTOR_MAPPING, institution="zeri", diagnostics=diagnostics
    )
    assert record.date_interval().is_unknown()
    assert diagnostics


def test_year_range_date_becomes_pair():
    csv_text = "id,name,dates,class,links\nZ1,Someone,1375-1425,person,\n"
    (record,) = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert record.date_interval().interval() == (1375, 1425)


def test_links_cell_with_kind_and_qualifier():
    csv_text = (
        "id,name,dates,class,links\n"
        'Z1,Someone,,person,"http://vocab.getty.edu/ulan/1;'
        'http://www.wikidata.org/entity/Q1|see_also|alternative"\n'
    )
    (record,) = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert record.asserted_links[0].kind is LinkKind.EXACT_MATCH
    assert record.asserted_links[1].kind is LinkKind.SEE_ALSO
    assert record.asserted_links[1].qualifier is UncertaintyQualifier.ALTERNATIVE


def test_unmapped_columns_become_extras():
    csv_text = "id,name,dates,class,links,notes\nZ1,Someone,,person,,kept as-is\n"
    (record,) = parse_actor_records(csv_text, ACTOR_MAPPING, institution="zeri")
    assert record.extras == (("notes", "kept as-is"),)
    statements = record_statements(record, NS, retrieved_at="2020-01-01T00:00:00Z")
    assert any(
        s.predicate == "urn:concordia:prop:x_notes" for s in statements
    )


def test_duplicate_local_id_is_skipped_with_diagnostic():
    csv_text = "id,name,dates,class,links\nZ1,A,,person,\nZ1,B,,person,\n"
    diagnostics = []
    records = parse_actor_records(
        csv_text, ACTOR_MAPPING, institution="zeri", diagnostics=diagnostics
    )
    assert len(records) == 1
    assert diagnostics


def test_record_requires_name_form():
    with pytest.raises(DataError):
        ActorRecord(local_id="Z1", institution="zeri", name_forms=())


def test_record_uri_is_deterministic():
    record = ActorRecord("Z1", "zeri", (NameForm("Someone"),))
    assert record.uri(NS) == record.uri(NS)
    assert record.uri(NS).value.startswith(NS + "actor/")


ARTWORK_MAPPING = {
    "id": "id",
    "titles": "titles",
    "creators": "creators",
    "date": "date",
    "materials": "materials",
    "subjects": "subjects",
    "keepers": "keepers",
    "parent": "parent",
}


def test_artwork_row_parses_layered_keepers_and_subjects():
    csv_text = (
        "id,titles,creators,date,materials,subjects,keepers,parent\n"
        'W1,Annunciation|en,Z1|attributed,16th century,albumen,73D;11H(FRANCIS),'
        '"Hotel George V, Auction Tajan",\n'
    )
    (record,) = parse_artwork_records(csv_text, ARTWORK_MAPPING, institution="zeri")
    assert record.titles[0].text == "Annunciation"
    assert record.titles[0].lang == "en"
    assert record.creators[0].qualifier is UncertaintyQualifier.ATTRIBUTED
    assert record.date.interval() == (1501, 1600)
    assert record.subjects == ("73D", "11H(FRANCIS)")
    assert record.keeper_chain == ("Hotel George V, Auction Tajan",)


def test_artwork_parent_ref_and_part_of_statement():
    csv_text = (
        "id,titles,creators,date,materials,subjects,keepers,parent\n"
        "W2,Scene one,,,,,,W1\n"
    )
    (record,) = parse_artwork_records(csv_text, ARTWORK_MAPPING, institution="zeri")
    assert record.parent_work == "W1"
    statements = record_statements(record, NS, retrieved_at="2020-01-01T00:00:00Z")
    part_of = [s for s in statements if s.predicate is LinkKind.PART_OF]
    assert len(part_of) == 1
    assert isinstance(part_of[0].object, EntityUri)
