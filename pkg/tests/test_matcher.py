from functools import lru_cache

import pytest
from hypothesis import given, strategies as st

from concordia.matcher import (
    AuthorityIndex,
    ClassVerdict,
    Confidence,
    DateVerdict,
    IndexedEntity,
    Thresholds,
    date_compatibility,
    generate_candidates,
    name_similarity,
    normalize_name,
    parse_date_spec,
)
from concordia.model import DateForm, DateSpec, EntityUri
from concordia.records import ActorRecord, NameForm


# --- normalization -------------------------------------------------------------


def test_surname_given_reorder():
    assert normalize_name("Gavasio, Giovanni Giacomo").text == "giovanni giacomo gavasio"


def test_trailing_question_mark_flags_uncertainty():
    result = normalize_name("Beyer, Constantin?")
    assert result.text == "constantin beyer"
    assert result.uncertain


def test_empty_input_is_degenerate():
    result = normalize_name("")
    assert result.text == ""
    assert result.degenerate


def test_punctuation_only_input_is_degenerate():
    assert normalize_name("...").degenerate


def test_diacritics_are_stripped_and_internal_hyphens_kept():
    assert normalize_name("Lotz-Bauer, Hilde").text == "hilde lotz-bauer"
    assert normalize_name("Böhm").text == "bohm"


# --- similarity ----------------------------------------------------------------


def oracle_similarity(a: str, b: str) -> float:
    """Independent brute-force edit-distance / Jaccard oracle."""

    @lru_cache(maxsize=None)
    def dist(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        cost = 0 if a[i - 1] == b[j - 1] else 1
        return min(dist(i - 1, j) + 1, dist(i, j - 1) + 1, dist(i - 1, j - 1) + cost)

    longest = max(len(a), len(b))
    char_sim = 1.0 if longest == 0 else 1.0 - dist(len(a), len(b)) / longest
    ta, tb = set(a.split()), set(b.split())
    token_sim = 1.0 if not ta and not tb else len(ta & tb) / len(ta | tb)
    return max(char_sim, token_sim)


def test_identical_strings_score_one():
    assert name_similarity("giovanni giacomo gavasio", "giovanni giacomo gavasio") == 1.0


def test_token_permutation_scores_one():
    assert name_similarity("gavasio giovanni giacomo", "giovanni giacomo gavasio") == 1.0


def test_divergent_name_forms_stay_below_confident_threshold():
    a = normalize_name("Gavasio, Giovanni Giacomo").text
    b = normalize_name("Gavazzi Giovanni").text
    score = name_similarity(a, b)
    assert score == pytest.approx(oracle_similarity(a, b))
    assert score < Thresholds().confident


@given(
    a=st.text(alphabet="abcd ef-", max_size=14),
    b=st.text(alphabet="abcd ef-", max_size=14),
)
def test_similarity_is_symmetric_and_bounded(a, b):
    assert name_similarity(a, b) == name_similarity(b, a)
    assert 0.0 <= name_similarity(a, b) <= 1.0


# --- dates ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("1375–1425", DateSpec.year_range(1375, 1425)),
        ("1375-1425", DateSpec.year_range(1375, 1425)),
        ("1451", DateSpec.exact(1451)),
        ("16th century", DateSpec.century(16)),
        ("1390s", DateSpec.decade(1390)),
        ("", DateSpec.unknown()),
        ("fl. before noon", DateSpec.unknown()),
    ],
)
def test_parse_date_spec(raw, expected):
    assert parse_date_spec(raw) == expected


def test_unrecognized_date_emits_diagnostic():
    diagnostics = []
    assert parse_date_spec("fl. before noon", diagnostics).form is DateForm.UNKNOWN
    assert diagnostics


def test_date_compatibility_paper_ranges():
    pseudo = DateSpec.year_range(1375, 1425)
    assert date_compatibility(pseudo, DateSpec.year_range(1399, 1486)) is DateVerdict.COMPATIBLE
    assert date_compatibility(pseudo, DateSpec.year_range(1371, 1451)) is DateVerdict.COMPATIBLE


def test_date_compatibility_disjoint_beyond_slack():
    a = DateSpec.year_range(1300, 1350)
    b = DateSpec.year_range(1500, 1550)
    assert date_compatibility(a, b, slack_years=5) is DateVerdict.INCOMPATIBLE


def test_date_compatibility_slack_bridges_small_gaps():
    a = DateSpec.exact(1500)
    b = DateSpec.exact(1504)
    assert date_compatibility(a, b, slack_years=5) is DateVerdict.COMPATIBLE
    assert date_compatibility(a, b, slack_years=0) is DateVerdict.INCOMPATIBLE


def test_unknown_date_never_rejects():
    assert date_compatibility(DateSpec.unknown(), DateSpec.exact(1500)) is DateVerdict.UNKNOWN


def test_date_compatibility_is_symmetric():
    a = DateSpec.year_range(1375, 1425)
    b = DateSpec.year_range(1500, 1510)
    assert date_compatibility(a, b) == date_compatibility(b, a)


# --- candidate generation ---------------------------------------------------------


ULAN = "http://vocab.getty.edu/ulan/"


def ulan_entity(num: str, name: str, entity_class="person", dates=None) -> IndexedEntity:
    return IndexedEntity(
        uri=EntityUri(ULAN + num),
        label=name,
        name_forms=(normalize_name(name).text,),
        entity_class=entity_class,
        dates=dates or DateSpec.unknown(),
    )


@pytest.fixture
def ulan_index():
    return AuthorityIndex(
        [
            ulan_entity("500116387", "Gavasio, Giovanni Giacomo",
                        dates=DateSpec.year_range(1460, 1512)),
            ulan_entity("500023456", "Tiepolo, Giovanni Battista",
                        dates=DateSpec.year_range(1696, 1770)),
            ulan_entity("500031234", "Rossi, Mario", dates=DateSpec.year_range(1850, 1920)),
        ]
    )


def actor(name: str, dates=(DateSpec.unknown(), DateSpec.unknown()), entity_class="person"):
    return ActorRecord(
        local_id="Z1",
        institution="zeri",
        name_forms=(NameForm(name),),
        dates=dates,
        entity_class=entity_class,
    )


def test_full_name_form_gets_confident_match(ulan_index):
    record = actor(
        "Gavasio, Giovanni Giacomo",
        dates=(DateSpec.exact(1460), DateSpec.exact(1512)),
    )
    candidates = generate_candidates(record, ulan_index)
    confident = [c for c in candidates if c.confidence is Confidence.CONFIDENT]
    assert len(confident) == 1
    assert confident[0].right == ULAN + "500116387"


def test_divergent_name_form_finds_no_confident_match(ulan_index):
    record = actor("Gavazzi Giovanni")
    candidates = generate_candidates(record, ulan_index)
    assert all(c.confidence is not Confidence.CONFIDENT for c in candidates)


def test_class_conflict_rejects_despite_identical_names():
    index = AuthorityIndex([ulan_entity("500999999", "Rijksmuseum", entity_class="organisation")])
    record = actor("Rijksmuseum", entity_class="person")
    (candidate,) = generate_candidates(record, index)
    assert candidate.confidence is Confidence.REJECTED
    assert candidate.class_verdict is ClassVerdict.INCOMPATIBLE


def test_incompatible_dates_reject():
    index = AuthorityIndex(
        [ulan_entity("500000001", "Rossi, Mario", dates=DateSpec.year_range(1500, 1550))]
    )
    record = actor("Rossi, Mario", dates=(DateSpec.exact(1850), DateSpec.exact(1920)))
    (candidate,) = generate_candidates(record, index)
    assert candidate.confidence is Confidence.REJECTED
    assert candidate.date_verdict is DateVerdict.INCOMPATIBLE


def test_unknown_dates_cap_at_review_band(ulan_index):
    record = actor("Gavasio, Giovanni Giacomo")  # no dates on the record side
    candidates = generate_candidates(record, ulan_index)
    best = candidates[0]
    assert best.right == ULAN + "500116387"
    assert best.confidence is Confidence.REVIEW
    assert best.date_verdict is DateVerdict.UNKNOWN


def test_required_class_constrains_index_side():
    index = AuthorityIndex(
        [
            ulan_entity("500000002", "Böhm", entity_class="organisation"),
            ulan_entity("500000003", "Böhm", entity_class="person"),
        ]
    )
    record = actor("Böhm", entity_class="person")
    candidates = generate_candidates(record, index, required_class="person")
    assert [c.right for c in candidates] == [ULAN + "500000003"]


def test_empty_index_gives_empty_list():
    record = actor("Anyone")
    assert generate_candidates(record, AuthorityIndex([])) == []


def test_raising_confident_threshold_never_adds_confident(ulan_index):
    record = actor(
        "Gavasio, Giovanni Giacomo",
        dates=(DateSpec.exact(1460), DateSpec.exact(1512)),
    )
    low = generate_candidates(record, ulan_index, thresholds=Thresholds(0.90, 0.75))
    high = generate_candidates(record, ulan_index, thresholds=Thresholds(0.98, 0.75))
    confident_low = {c.right for c in low if c.confidence is Confidence.CONFIDENT}
    confident_high = {c.right for c in high if c.confidence is Confidence.CONFIDENT}
    assert confident_high <= confident_low


def test_deterministic_ranking_with_byte_order_tie_break():
    index = AuthorityIndex(
        [
            ulan_entity("500000005", "Rossi, Mario"),
            ulan_entity("500000004", "Rossi, Mario"),
        ]
    )
    record = actor("Rossi, Mario")
    first = generate_candidates(record, index)
    second = generate_candidates(record, index)
    assert first == second
    assert [c.right for c in first] == [ULAN + "500000004", ULAN + "500000005"]


def test_suppressed_pairs_are_skipped(ulan_index):
    record = actor("Gavasio, Giovanni Giacomo")
    (best, *_rest) = generate_candidates(record, ulan_index)
    suppressed = frozenset({frozenset((best.left, best.right))})
    remaining = generate_candidates(record, ulan_index, suppressed_pairs=suppressed)
    assert all(c.right != best.right for c in remaining)


def test_candidate_json_round_trip(ulan_index):
    record = actor("Gavasio, Giovanni Giacomo")
    (best, *_rest) = generate_candidates(record, ulan_index)
    from concordia.matcher import MatchCandidate

    assert MatchCandidate.from_json_line(best.to_json_line()) == best
