"""Core domain vocabulary: URIs, link kinds, provenance, dates and deterministic minting.

Everything in this module is an immutable value object, safe to share across
threads without coordination. URI canonicalization and minting are pure
functions; replaying an ingestion batch therefore produces identical URIs on
every platform and run.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union
from urllib.parse import urlsplit, urlunsplit


class ConcordiaError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ConcordiaError):
    """Invalid configuration (namespace table, priority order, run config)."""


class DataError(ConcordiaError):
    """Malformed or contradictory input data."""


class UriError(DataError):
    """A string is not a syntactically valid absolute URI."""


# RFC 3986 unreserved characters, safe to percent-decode.
_UNRESERVED = set(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"
)
_PCT_RE = re.compile(r"%([0-9A-Fa-f]{2})")
_WS_RE = re.compile(r"\s+")


def _normalize_pct(text: str) -> str:
    def repl(m: re.Match) -> str:
        octet = int(m.group(1), 16)
        ch = chr(octet)
        if ch in _UNRESERVED:
            return ch
        return "%" + m.group(1).upper()

    return _PCT_RE.sub(repl, text)


def canonicalize_uri(raw: str) -> str:
    """Return the canonical form of an absolute URI.

    Canonical means: Unicode NFC, scheme and host lowercased, percent escapes
    of unreserved characters decoded, remaining escapes uppercased, and no
    trailing slash. The function is idempotent.
    """
    text = unicodedata.normalize("NFC", raw.strip())
    if not text:
        raise UriError("empty URI")
    parts = urlsplit(text)
    if not parts.scheme:
        raise UriError(f"not an absolute URI: {raw!r}")
    netloc = parts.netloc
    if netloc:
        userinfo, sep, hostport = netloc.rpartition("@")
        netloc = userinfo + sep + hostport.lower()
    path = _normalize_pct(parts.path)
    query = _normalize_pct(parts.query)
    fragment = _normalize_pct(parts.fragment)
    out = urlunsplit((parts.scheme.lower(), netloc, path, query, fragment))
    while out.endswith("/"):
        out = out[:-1]
    if not netloc and not path:
        raise UriError(f"not an absolute URI: {raw!r}")
    return out


@dataclass(frozen=True, order=True)
class EntityUri:
    """An absolute URI in canonical form. Minted and external URIs share this type."""

    value: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", canonicalize_uri(self.value))

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Literal:
    """An RDF-style literal with optional language tag or datatype URI."""

    text: str
    lang: Optional[str] = None
    datatype: Optional[str] = None


Node = Union[EntityUri, Literal]


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal problem tied to an input location; serialized as JSON Lines."""

    message: str
    file: Optional[str] = None
    line: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(
            {"file": self.file, "line": self.line, "message": self.message},
            ensure_ascii=False,
            sort_keys=True,
        )


class LinkKind(str, Enum):
    """Relation vocabulary. Only exact_match participates in cluster transitivity;
    see_also never enters any transitive closure."""

    EXACT_MATCH = "exact_match"
    SEE_ALSO = "see_also"
    REPLACED_BY = "replaced_by"
    MEMBER_OF_UMBRELLA = "member_of_umbrella"
    QUALIFIED_RELATION_TO = "qualified_relation_to"
    ALTERNATIVE_OF = "alternative_of"
    PART_OF = "part_of"
    KEEPER_OF = "keeper_of"
    LOCATED_IN = "located_in"


class ProvenanceMethod(str, Enum):
    ASSERTED = "asserted"
    EXPANDED = "expanded"
    MINTED = "minted"
    REVIEWED = "reviewed"


@dataclass(frozen=True)
class Provenance:
    """Who said it, when, and how it entered the graph."""

    source: str
    retrieved_at: str
    method: ProvenanceMethod
    reviewer: Optional[str] = None

    def __post_init__(self) -> None:
        if self.method is ProvenanceMethod.REVIEWED and not self.reviewer:
            raise DataError("reviewed provenance requires a reviewer id")


class UncertaintyQualifier(str, Enum):
    """Statement-level certainty. Default when absent is CERTAIN."""

    CERTAIN = "certain"
    ATTRIBUTED = "attributed"
    UNCERTAIN = "uncertain"
    ALTERNATIVE = "alternative"
    TRADITIONAL = "traditional"


@dataclass(frozen=True)
class Statement:
    """One immutable assertion inside a named graph.

    The graph is the unit of provenance: statements sharing a graph id share
    the provenance under which they were ingested or minted.
    """

    subject: EntityUri
    predicate: Union[LinkKind, str]
    object: Node
    graph: EntityUri
    provenance: Provenance
    qualifier: UncertaintyQualifier = UncertaintyQualifier.CERTAIN


@dataclass(frozen=True)
class CanonicalKey:
    """Ordered normalized tokens used as the substrate for deterministic minting."""

    parts: tuple[str, ...]

    @classmethod
    def from_raw(cls, *parts: str) -> "CanonicalKey":
        normalized = tuple(
            _WS_RE.sub(" ", unicodedata.normalize("NFC", p).casefold()).strip()
            for p in parts
        )
        return cls(parts=normalized)

    def serialize(self) -> str:
        # Escape the separator so distinct part lists never serialize equal.
        return "|".join(p.replace("\\", "\\\\").replace("|", "\\|") for p in self.parts)


def mint_deterministic_uri(namespace: str, class_tag: str, key: CanonicalKey) -> EntityUri:
    """Mint a stable URI: namespace + class_tag + "/" + 16 hex chars of SHA-256(key).

    Identical inputs yield identical URIs on every platform and run, so
    re-ingestions agree on minted entities.
    """
    if not namespace.endswith("/"):
        raise ConfigError(f"namespace must end in '/': {namespace!r}")
    try:
        canonicalize_uri(namespace)
    except UriError as exc:
        raise ConfigError(f"namespace is not a valid absolute URI: {namespace!r}") from exc
    if not class_tag:
        raise ConfigError("class_tag must be non-empty")
    digest = hashlib.sha256(key.serialize().encode("utf-8")).hexdigest()[:16]
    return EntityUri(f"{namespace}{class_tag}/{digest}")


class DateForm(str, Enum):
    EXACT_YEAR = "exact_year"
    YEAR_RANGE = "year_range"
    CENTURY = "century"
    DECADE = "decade"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DateSpec:
    """A year interval at one of several granularities; UNKNOWN carries no years."""

    form: DateForm
    start_year: Optional[int] = None
    end_year: Optional[int] = None

    def __post_init__(self) -> None:
        if self.form is DateForm.UNKNOWN:
            if self.start_year is not None or self.end_year is not None:
                raise DataError("unknown DateSpec must not carry years")
        else:
            if self.start_year is None or self.end_year is None:
                raise DataError(f"{self.form.value} DateSpec requires both years")
            if self.start_year > self.end_year:
                raise DataError(
                    f"start_year {self.start_year} > end_year {self.end_year}"
                )

    @classmethod
    def exact(cls, year: int) -> "DateSpec":
        return cls(DateForm.EXACT_YEAR, year, year)

    @classmethod
    def year_range(cls, start: int, end: int) -> "DateSpec":
        return cls(DateForm.YEAR_RANGE, start, end)

    @classmethod
    def century(cls, n: int) -> "DateSpec":
        # Nth century = [(N-1)*100+1, N*100]; 16th century = 1501-1600.
        return cls(DateForm.CENTURY, (n - 1) * 100 + 1, n * 100)

    @classmethod
    def decade(cls, first_year: int) -> "DateSpec":
        return cls(DateForm.DECADE, first_year, first_year + 9)

    @classmethod
    def unknown(cls) -> "DateSpec":
        return cls(DateForm.UNKNOWN)

    def is_unknown(self) -> bool:
        return self.form is DateForm.UNKNOWN

    def interval(self) -> Optional[tuple[int, int]]:
        if self.is_unknown():
            return None
        assert self.start_year is not None and self.end_year is not None
        return (self.start_year, self.end_year)


# --- Authority namespace registry -------------------------------------------

OTHER_AUTHORITY = "other"

_AUTH_ID_RE = re.compile(r"^[a-z0-9:_-]+$")


@dataclass(frozen=True)
class Authority:
    """One authority namespace: a short id, its URI prefixes, and its priority rank."""

    id: str
    prefixes: tuple[str, ...]
    rank: Optional[int] = None  # None when excluded or unranked
    excluded: bool = False
    institution: bool = False

    def __post_init__(self) -> None:
        if not self.id or not _AUTH_ID_RE.match(self.id):
            raise ConfigError(f"authority id must be non-empty lowercase: {self.id!r}")


@dataclass(frozen=True)
class PriorityOrder:
    """Ordered authority preference used to break reconciliation conflicts.

    Institution assertions rank above every listed authority. Excluded
    authorities never endorse a winner.
    """

    ranked: tuple[str, ...]
    excluded: frozenset[str] = frozenset()
    institutions: frozenset[str] = frozenset()

    INSTITUTION_RANK = -1

    def __post_init__(self) -> None:
        overlap = set(self.ranked) & set(self.excluded)
        if overlap:
            raise ConfigError(f"authorities both ranked and excluded: {sorted(overlap)}")

    def rank_of(self, source: str) -> Optional[int]:
        """Lower is better; None for excluded sources. Unknown sources get the
        lowest rank (see filter_conflicts, which also emits a warning)."""
        if source in self.excluded:
            return None
        if source in self.institutions:
            return self.INSTITUTION_RANK
        try:
            return self.ranked.index(source)
        except ValueError:
            return len(self.ranked)


class AuthorityRegistry:
    """Maps URIs to authority ids via namespace prefix matching.

    Unknown prefixes map to the synthetic authority ``other`` rather than
    erroring, so foreign assertions stay representable.
    """

    def __init__(self, authorities: Iterable[Authority] = ()):
        self._by_id: dict[str, Authority] = {}
        self._prefixes: list[tuple[str, str]] = []  # (prefix, authority id)
        for auth in authorities:
            self.add(auth)

    def add(self, authority: Authority) -> None:
        existing = self._by_id.get(authority.id)
        if existing is not None:
            raise ConfigError(f"duplicate authority id: {authority.id}")
        self._by_id[authority.id] = authority
        for prefix in authority.prefixes:
            # canonicalize_uri strips trailing slashes, which are significant
            # for prefix matching; restore them after canonicalization
            canonical = canonicalize_uri(prefix)
            if prefix.endswith("/"):
                canonical += "/"
            self._prefixes.append((canonical, authority.id))
        # longest prefix first so the most specific namespace wins
        self._prefixes.sort(key=lambda pair: (-len(pair[0]), pair[0]))

    def register_institution(self, institution_id: str, base_uri: str) -> None:
        self.add(
            Authority(
                id=f"local:{institution_id}",
                prefixes=(base_uri,),
                rank=None,
                institution=True,
            )
        )

    def get(self, authority_id: str) -> Optional[Authority]:
        return self._by_id.get(authority_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def resolve(self, uri: EntityUri) -> str:
        value = uri.value
        for prefix, auth_id in self._prefixes:
            if value.startswith(prefix) or value == prefix.rstrip("/"):
                return auth_id
        return OTHER_AUTHORITY

    def priority(self) -> PriorityOrder:
        ranked = sorted(
            (
                a
                for a in self._by_id.values()
                if a.rank is not None and not a.excluded and not a.institution
            ),
            key=lambda a: (a.rank, a.id),
        )
        return PriorityOrder(
            ranked=tuple(a.id for a in ranked),
            excluded=frozenset(a.id for a in self._by_id.values() if a.excluded),
            institutions=frozenset(
                a.id for a in self._by_id.values() if a.institution
            ),
        )

    @classmethod
    def from_table(cls, text: str) -> "AuthorityRegistry":
        """Parse the namespace table: one line per authority,
        ``id<TAB>uri-prefix<TAB>rank-or-"excluded"``. Repeated ids add prefix
        aliases and must agree on the rank."""
        rows: dict[str, dict] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ConfigError(
                    f"namespace table line {lineno}: expected 3 tab-separated fields"
                )
            auth_id, prefix, rank_text = (f.strip() for f in fields)
            excluded = rank_text.lower() == "excluded"
            rank = None if excluded else int(rank_text)
            row = rows.setdefault(
                auth_id, {"prefixes": [], "rank": rank, "excluded": excluded}
            )
            if (row["rank"], row["excluded"]) != (rank, excluded):
                raise ConfigError(
                    f"namespace table line {lineno}: conflicting rank for {auth_id!r}"
                )
            row["prefixes"].append(prefix)
        registry = cls()
        for auth_id, row in rows.items():
            registry.add(
                Authority(
                    id=auth_id,
                    prefixes=tuple(row["prefixes"]),
                    rank=row["rank"],
                    excluded=row["excluded"],
                    institution=auth_id.startswith("local:"),
                )
            )
        return registry

    def to_table(self) -> str:
        lines = []
        for auth_id in self.ids():
            auth = self._by_id[auth_id]
            if auth.excluded:
                rank_text = "excluded"
            else:
                # institutions rank above every authority; 0 is their sentinel
                rank_text = str(auth.rank if auth.rank is not None else 0)
            for prefix in auth.prefixes:
                lines.append(f"{auth_id}\t{prefix}\t{rank_text}")
        return "\n".join(lines) + "\n"


def default_registry() -> AuthorityRegistry:
    """Registry covering the authorities this toolchain ships support for."""
    return AuthorityRegistry(
        [
            Authority("loc", ("https://id.loc.gov/authorities/", "http://id.loc.gov/authorities/"), rank=1),
            Authority("gnd", ("https://d-nb.info/gnd/",), rank=2),
            Authority("rkd", ("https://data.rkd.nl/",), rank=3),
            Authority("ulan", ("http://vocab.getty.edu/ulan/", "https://vocab.getty.edu/ulan/"), rank=4),
            Authority("wikidata", ("http://www.wikidata.org/entity/", "https://www.wikidata.org/wiki/"), rank=5),
            Authority("aat", ("http://vocab.getty.edu/aat/", "https://vocab.getty.edu/aat/"), rank=6),
            Authority("iconclass", ("https://iconclass.org/", "http://iconclass.org/"), rank=7),
            Authority("viaf", ("http://viaf.org/viaf/", "https://viaf.org/viaf/"), excluded=True),
        ]
    )


def parse_priority_spec(spec: str, institutions: Iterable[str] = ()) -> PriorityOrder:
    """Parse a priority flag such as ``"loc,gnd,rkd,ulan,wikidata;exclude=viaf"``."""
    ranked_part, _, rest = spec.partition(";")
    ranked = tuple(tok.strip() for tok in ranked_part.split(",") if tok.strip())
    excluded: frozenset[str] = frozenset()
    if rest:
        key, _, value = rest.partition("=")
        if key.strip() != "exclude":
            raise ConfigError(f"unrecognized priority clause: {rest!r}")
        excluded = frozenset(tok.strip() for tok in value.split(",") if tok.strip())
    return PriorityOrder(
        ranked=ranked, excluded=excluded, institutions=frozenset(institutions)
    )
