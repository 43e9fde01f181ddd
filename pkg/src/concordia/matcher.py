"""Rule-based match candidate generation.

High precision over recall: candidates are blocked on shared name tokens,
scored by auditable string similarity, and vetoed by incompatible dates or
entity classes. Thresholds live in configuration and must be echoed in every
report header so results stay interpretable.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Optional

from concordia._kernels import edit_similarity
from concordia.model import DateForm, DateSpec, Diagnostic, EntityUri

if TYPE_CHECKING:  # pragma: no cover
    from concordia.records import ActorRecord


# --- name normalization ------------------------------------------------------

_PUNCT_RE = re.compile(r"[^0-9a-z\s-]")
_EDGE_HYPHEN_RE = re.compile(r"(?<![0-9a-z])-|-(?![0-9a-z])")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizedName:
    text: str
    uncertain: bool = False  # trailing "?" in the source form
    degenerate: bool = False  # nothing left after normalization


def normalize_name(raw: str) -> NormalizedName:
    """Canonical name form: NFC, case-folded, diacritics stripped, punctuation
    dropped (internal hyphens kept), "Surname, Given" reordered to given-first
    token order, trailing "?" stripped and flagged."""
    text = unicodedata.normalize("NFC", raw).strip()
    uncertain = False
    if text.endswith("?"):
        uncertain = True
        text = text[:-1].rstrip()
    if "," in text:
        head, _, tail = text.partition(",")
        if head.strip() and tail.strip():
            text = f"{tail.strip()} {head.strip()}"
    text = text.casefold()
    text = "".join(
        ch
        for ch in unicodedata.normalize("NFD", text)
        if not unicodedata.combining(ch)
    )
    text = _PUNCT_RE.sub(" ", text)
    text = _EDGE_HYPHEN_RE.sub(" ", text)
    text = _WS_RE.sub(" ", text).strip()
    return NormalizedName(text=text, uncertain=uncertain, degenerate=not text)


def name_similarity(a: str, b: str) -> float:
    """max(1 - normalized edit distance, token-set Jaccard), symmetric,
    1.0 iff the strings or their token sets are equal. Inputs are expected to
    be normalized forms."""
    char_sim = edit_similarity(a, b)
    tokens_a = set(a.split())
    tokens_b = set(b.split())
    if not tokens_a and not tokens_b:
        token_sim = 1.0
    else:
        union = tokens_a | tokens_b
        token_sim = len(tokens_a & tokens_b) / len(union)
    return max(char_sim, token_sim)


# --- dates --------------------------------------------------------------------

_RANGE_RE = re.compile(r"^(\d{3,4})\s*[–—-]\s*(\d{3,4})$")
_YEAR_RE = re.compile(r"^(\d{3,4})$")
_CENTURY_RE = re.compile(r"^(\d{1,2})(?:st|nd|rd|th)\s+century$", re.IGNORECASE)
_DECADE_RE = re.compile(r"^(\d{3,4})s$")


def parse_date_spec(raw: str, diagnostics: Optional[list[Diagnostic]] = None) -> DateSpec:
    """Parse a catalogue date string into a DateSpec.

    Recognizes exact years, year ranges (hyphen or dash), ordinal centuries
    and decades; anything else is UNKNOWN (with a diagnostic when the cell was
    non-empty)."""
    text = raw.strip()
    if not text:
        return DateSpec.unknown()
    if text.lower() == "unknown":
        return DateSpec.unknown()
    m = _RANGE_RE.match(text)
    if m:
        start, end = int(m.group(1)), int(m.group(2))
        if start <= end:
            return DateSpec.year_range(start, end)
        if diagnostics is not None:
            diagnostics.append(Diagnostic(f"inverted year range: {raw!r}"))
        return DateSpec.unknown()
    m = _YEAR_RE.match(text)
    if m:
        return DateSpec.exact(int(m.group(1)))
    m = _CENTURY_RE.match(text)
    if m:
        return DateSpec.century(int(m.group(1)))
    m = _DECADE_RE.match(text)
    if m and int(m.group(1)) % 10 == 0:
        return DateSpec.decade(int(m.group(1)))
    if diagnostics is not None:
        diagnostics.append(Diagnostic(f"unrecognized date: {raw!r}"))
    return DateSpec.unknown()


def date_spec_to_text(spec: DateSpec) -> str:
    """Inverse-ish of parse_date_spec; parse(to_text(d)) == d for known forms."""
    if spec.form is DateForm.UNKNOWN:
        return "unknown"
    if spec.form is DateForm.EXACT_YEAR:
        return str(spec.start_year)
    if spec.form is DateForm.CENTURY:
        n = spec.end_year // 100
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10 if n % 100 not in (11, 12, 13) else 0, "th")
        return f"{n}{suffix} century"
    if spec.form is DateForm.DECADE:
        return f"{spec.start_year}s"
    return f"{spec.start_year}-{spec.end_year}"


class DateVerdict(str, Enum):
    COMPATIBLE = "compatible"
    INCOMPATIBLE = "incompatible"
    UNKNOWN = "unknown"


def date_compatibility(a: DateSpec, b: DateSpec, slack_years: int = 5) -> DateVerdict:
    """Compatible iff the slack-widened intervals intersect; UNKNOWN when
    either side carries no years (absence is never evidence against)."""
    if slack_years < 0:
        raise ValueError("slack_years must be >= 0")
    ia, ib = a.interval(), b.interval()
    if ia is None or ib is None:
        return DateVerdict.UNKNOWN
    if ia[0] - slack_years <= ib[1] + slack_years and ib[0] - slack_years <= ia[1] + slack_years:
        return DateVerdict.COMPATIBLE
    return DateVerdict.INCOMPATIBLE


class ClassVerdict(str, Enum):
    COMPATIBLE = "compatible"
    INCOMPATIBLE = "incompatible"
    UNKNOWN = "unknown"


def class_compatibility(a: str, b: str) -> ClassVerdict:
    if a == "unknown" or b == "unknown" or not a or not b:
        return ClassVerdict.UNKNOWN
    return ClassVerdict.COMPATIBLE if a == b else ClassVerdict.INCOMPATIBLE


# --- candidates ---------------------------------------------------------------


class Confidence(str, Enum):
    CONFIDENT = "confident"
    REVIEW = "review"
    REJECTED = "rejected"


class CandidateStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    DEFERRED = "deferred"


@dataclass(frozen=True)
class Thresholds:
    confident: float = 0.93
    review: float = 0.75

    def __post_init__(self) -> None:
        if not self.confident > self.review:
            raise ValueError("confident threshold must exceed review threshold")


# score multiplier when life dates are unknown on either side: such matches
# rank below equally-named pairs with confirmed dates but are never vetoed
UNKNOWN_DATE_WEIGHT = 0.95


@dataclass(frozen=True)
class MatchCandidate:
    """A scored candidate pair awaiting (or past) curator review."""

    id: str
    left: str  # record ref "institution:local_id" or an entity URI
    right: str
    score: float
    name_score: float
    date_verdict: DateVerdict
    class_verdict: ClassVerdict
    confidence: Confidence
    status: CandidateStatus = CandidateStatus.PENDING

    def pair_key(self) -> frozenset[str]:
        return frozenset((self.left, self.right))

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "left": self.left,
                "right": self.right,
                "score": round(self.score, 6),
                "signals": {
                    "name_score": round(self.name_score, 6),
                    "date_verdict": self.date_verdict.value,
                    "class_verdict": self.class_verdict.value,
                },
                "confidence": self.confidence.value,
                "status": self.status.value,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "MatchCandidate":
        data = json.loads(line)
        signals = data.get("signals", {})
        return cls(
            id=data["id"],
            left=data["left"],
            right=data["right"],
            score=float(data["score"]),
            name_score=float(signals.get("name_score", data["score"])),
            date_verdict=DateVerdict(signals.get("date_verdict", "unknown")),
            class_verdict=ClassVerdict(signals.get("class_verdict", "unknown")),
            confidence=Confidence(data["confidence"]),
            status=CandidateStatus(data.get("status", "pending")),
        )


def candidate_id(left: str, right: str) -> str:
    digest = hashlib.sha256(f"{left}\x1f{right}".encode("utf-8")).hexdigest()[:16]
    return f"mc-{digest}"


@dataclass(frozen=True)
class IndexedEntity:
    """One target of matching: an authority record or another institution's record."""

    uri: EntityUri
    label: str
    name_forms: tuple[str, ...]  # already normalized
    entity_class: str = "unknown"
    dates: DateSpec = field(default_factory=DateSpec.unknown)


class AuthorityIndex:
    """Read-only token index over match targets; blocking on shared normalized
    name tokens keeps candidate sets small. Records sharing zero tokens are
    never compared (a documented recall cost)."""

    def __init__(self, entities: Iterable[IndexedEntity]):
        self.entities: list[IndexedEntity] = list(entities)
        self._by_token: dict[str, set[int]] = {}
        for pos, entity in enumerate(self.entities):
            for form in entity.name_forms:
                for token in form.split():
                    self._by_token.setdefault(token, set()).add(pos)

    def __len__(self) -> int:
        return len(self.entities)

    def block(self, tokens: Iterable[str]) -> list[IndexedEntity]:
        hits: set[int] = set()
        for token in tokens:
            hits |= self._by_token.get(token, set())
        return [self.entities[pos] for pos in sorted(hits)]


def record_ref(institution: str, local_id: str, class_tag: str = "actor") -> str:
    """Candidate-side reference for a record; resolvable back to its minted URI."""
    return f"{class_tag}:{institution}:{local_id}"


def generate_candidates(
    record: "ActorRecord",
    index: AuthorityIndex,
    *,
    required_class: Optional[str] = None,
    thresholds: Thresholds = Thresholds(),
    slack_years: int = 5,
    suppressed_pairs: frozenset[frozenset[str]] = frozenset(),
) -> list[MatchCandidate]:
    """Score every blocked (record, target) pair and band it by confidence.

    Incompatible class or dates reject a pair regardless of its name score;
    unknown dates only dampen the ranking score. Output is sorted by score
    descending with ties broken by target URI byte order, so identical inputs
    always give identical lists.
    """
    forms = [
        n for n in (normalize_name(nf.text) for nf in record.name_forms) if not n.degenerate
    ]
    if not forms or len(index) == 0:
        return []
    tokens = {token for form in forms for token in form.text.split()}
    left = record_ref(record.institution, record.local_id)
    record_interval = record.date_interval()
    out = []
    for entity in index.block(tokens):
        if (
            required_class
            and entity.entity_class not in ("unknown", "")
            and entity.entity_class != required_class
        ):
            continue
        name_score = max(
            name_similarity(form.text, target_form)
            for form in forms
            for target_form in entity.name_forms
        )
        if name_score < thresholds.review:
            continue
        pair = frozenset((left, entity.uri.value))
        if pair in suppressed_pairs:
            continue
        date_verdict = date_compatibility(record_interval, entity.dates, slack_years)
        class_verdict = class_compatibility(record.entity_class, entity.entity_class)
        if class_verdict is ClassVerdict.INCOMPATIBLE or date_verdict is DateVerdict.INCOMPATIBLE:
            confidence = Confidence.REJECTED
        elif name_score >= thresholds.confident and date_verdict is DateVerdict.COMPATIBLE:
            confidence = Confidence.CONFIDENT
        else:
            confidence = Confidence.REVIEW
        score = name_score
        if confidence is not Confidence.REJECTED and date_verdict is DateVerdict.UNKNOWN:
            score = name_score * UNKNOWN_DATE_WEIGHT
        out.append(
            MatchCandidate(
                id=candidate_id(left, entity.uri.value),
                left=left,
                right=entity.uri.value,
                score=score,
                name_score=name_score,
                date_verdict=date_verdict,
                class_verdict=class_verdict,
                confidence=confidence,
            )
        )
    out.sort(key=lambda c: (-c.score, c.right))
    return out
