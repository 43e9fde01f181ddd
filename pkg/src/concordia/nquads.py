"""Line-oriented N-Triples / N-Quads parsing and canonical serialization.

The named graph is the unit of provenance. On export, each graph's provenance
is reified into a reserved meta graph (`urn:x-meta:provenance`) alongside the
data quads; statement-level uncertainty qualifiers are reified the same way,
keyed by a hash of the statement's canonical line. On parse, recognized meta
quads are folded back into `Statement.provenance` / `Statement.qualifier`, so
`parse(export(S))` reproduces S and `export . parse . export` is a byte
fixpoint.

Export ordering is total: quads are sorted by (graph, subject, predicate,
object) byte order and deduplicated, so permuting the input never changes the
output bytes.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Optional, Sequence, TextIO, Union

from concordia.model import (
    DataError,
    Diagnostic,
    EntityUri,
    LinkKind,
    Literal,
    Node,
    Provenance,
    ProvenanceMethod,
    Statement,
    UncertaintyQualifier,
    UriError,
)

DEFAULT_GRAPH = EntityUri("urn:x-graph:default")
META_GRAPH = EntityUri("urn:x-meta:provenance")

META_SOURCE = "urn:x-meta:source"
META_METHOD = "urn:x-meta:method"
META_RETRIEVED_AT = "urn:x-meta:retrieved_at"
META_REVIEWER = "urn:x-meta:reviewer"
META_QUALIFIER = "urn:x-meta:qualifier"
_STMT_PREFIX = "urn:x-stmt:"

DEFAULT_RETRIEVED_AT = "1970-01-01T00:00:00Z"
DEFAULT_PROVENANCE = Provenance(
    source="other", retrieved_at=DEFAULT_RETRIEVED_AT, method=ProvenanceMethod.ASSERTED
)

KIND_URIS: dict[LinkKind, str] = {
    LinkKind.EXACT_MATCH: "http://www.w3.org/2004/02/skos/core#exactMatch",
    LinkKind.SEE_ALSO: "http://www.w3.org/2000/01/rdf-schema#seeAlso",
    LinkKind.REPLACED_BY: "http://purl.org/dc/terms/isReplacedBy",
    LinkKind.PART_OF: "http://purl.org/dc/terms/isPartOf",
    LinkKind.MEMBER_OF_UMBRELLA: "urn:concordia:kind:member_of_umbrella",
    LinkKind.QUALIFIED_RELATION_TO: "urn:concordia:kind:qualified_relation_to",
    LinkKind.ALTERNATIVE_OF: "urn:concordia:kind:alternative_of",
    LinkKind.KEEPER_OF: "urn:concordia:kind:keeper_of",
    LinkKind.LOCATED_IN: "urn:concordia:kind:located_in",
}
URIS_TO_KIND = {uri: kind for kind, uri in KIND_URIS.items()}


class ParseError(DataError):
    """Raised in strict mode on the first malformed line."""


# --- term serialization ------------------------------------------------------

_IRI_ESCAPES = {c: "\\u%04X" % ord(c) for c in '<>"{}|^`\\'}


def _serialize_iri(value: str) -> str:
    out = []
    for ch in value:
        code = ord(ch)
        if code <= 0x20:
            out.append("\\u%04X" % code)
        elif ch in _IRI_ESCAPES:
            out.append(_IRI_ESCAPES[ch])
        else:
            out.append(ch)
    return "<" + "".join(out) + ">"


def _serialize_literal(lit: Literal) -> str:
    out = ['"']
    for ch in lit.text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append("\\u%04X" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    if lit.lang:
        out.append("@" + lit.lang)
    elif lit.datatype:
        out.append("^^" + _serialize_iri(lit.datatype))
    return "".join(out)


def predicate_uri(predicate: Union[LinkKind, str]) -> str:
    if isinstance(predicate, LinkKind):
        return KIND_URIS[predicate]
    return predicate


def _serialize_node(node: Node) -> str:
    if isinstance(node, EntityUri):
        return _serialize_iri(node.value)
    return _serialize_literal(node)


def serialize_quad(stmt: Statement) -> str:
    """Canonical N-Quads line for one statement, without the newline."""
    return " ".join(
        (
            _serialize_iri(stmt.subject.value),
            _serialize_iri(predicate_uri(stmt.predicate)),
            _serialize_node(stmt.object),
            _serialize_iri(stmt.graph.value),
            ".",
        )
    )


def statement_id(stmt: Statement) -> str:
    """Stable id for qualifier reification, derived from the canonical line."""
    digest = hashlib.sha256(serialize_quad(stmt).encode("utf-8")).hexdigest()[:16]
    return _STMT_PREFIX + digest


# --- term scanning -----------------------------------------------------------


class _Scanner:
    def __init__(self, line: str):
        self.line = line
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(f"{message} at column {self.pos + 1}")

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.line)

    def expect_dot(self) -> None:
        self.skip_ws()
        if self.pos >= len(self.line) or self.line[self.pos] != ".":
            raise self.error("expected '.'")
        self.pos += 1
        self.skip_ws()
        rest = self.line[self.pos :]
        if rest and not rest.startswith("#"):
            raise self.error("trailing content after '.'")
        self.pos = len(self.line)

    def _read_uchar_escapes(self, text: str, what: str) -> str:
        out = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "\\":
                if i + 1 >= len(text):
                    raise self.error(f"dangling escape in {what}")
                esc = text[i + 1]
                if esc == "u" and i + 6 <= len(text):
                    out.append(chr(int(text[i + 2 : i + 6], 16)))
                    i += 6
                elif esc == "U" and i + 10 <= len(text):
                    out.append(chr(int(text[i + 2 : i + 10], 16)))
                    i += 10
                else:
                    raise self.error(f"invalid escape '\\{esc}' in {what}")
            else:
                out.append(ch)
                i += 1
        return "".join(out)

    def read_iri(self) -> EntityUri:
        if self.line[self.pos] != "<":
            raise self.error("expected '<'")
        end = self.line.find(">", self.pos + 1)
        if end < 0:
            raise self.error("unterminated IRI")
        raw = self.line[self.pos + 1 : end]
        self.pos = end + 1
        try:
            return EntityUri(self._read_uchar_escapes(raw, "IRI"))
        except UriError as exc:
            raise self.error(str(exc))

    def read_bnode(self) -> EntityUri:
        # blank nodes are represented as skolem URIs; our own exports never
        # produce them, but foreign dumps may
        start = self.pos + 2
        end = start
        while end < len(self.line) and (
            self.line[end].isalnum() or self.line[end] in "_-."
        ):
            end += 1
        label = self.line[start:end]
        if not label:
            raise self.error("empty blank node label")
        self.pos = end
        return EntityUri("urn:x-bnode:" + label)

    def read_subject(self) -> EntityUri:
        self.skip_ws()
        if self.pos >= len(self.line):
            raise self.error("missing subject")
        if self.line.startswith("_:", self.pos):
            return self.read_bnode()
        return self.read_iri()

    def read_literal(self) -> Literal:
        # opening quote already seen
        out = []
        i = self.pos + 1
        while i < len(self.line):
            ch = self.line[i]
            if ch == "\\":
                if i + 1 >= len(self.line):
                    raise self.error("dangling escape in literal")
                esc = self.line[i + 1]
                if esc == "t":
                    out.append("\t")
                    i += 2
                elif esc == "n":
                    out.append("\n")
                    i += 2
                elif esc == "r":
                    out.append("\r")
                    i += 2
                elif esc == '"':
                    out.append('"')
                    i += 2
                elif esc == "\\":
                    out.append("\\")
                    i += 2
                elif esc == "u" and i + 6 <= len(self.line):
                    out.append(chr(int(self.line[i + 2 : i + 6], 16)))
                    i += 6
                elif esc == "U" and i + 10 <= len(self.line):
                    out.append(chr(int(self.line[i + 2 : i + 10], 16)))
                    i += 10
                else:
                    raise self.error(f"invalid escape '\\{esc}' in literal")
            elif ch == '"':
                self.pos = i + 1
                lang = None
                datatype = None
                if self.line.startswith("@", self.pos):
                    end = self.pos + 1
                    while end < len(self.line) and (
                        self.line[end].isalnum() or self.line[end] == "-"
                    ):
                        end += 1
                    lang = self.line[self.pos + 1 : end]
                    if not lang:
                        raise self.error("empty language tag")
                    self.pos = end
                elif self.line.startswith("^^", self.pos):
                    self.pos += 2
                    datatype = self.read_iri().value
                return Literal("".join(out), lang=lang, datatype=datatype)
            else:
                out.append(ch)
                i += 1
        raise self.error("unterminated literal")

    def read_object(self) -> Node:
        self.skip_ws()
        if self.pos >= len(self.line):
            raise self.error("missing object")
        ch = self.line[self.pos]
        if ch == "<":
            return self.read_iri()
        if ch == '"':
            return self.read_literal()
        if self.line.startswith("_:", self.pos):
            return self.read_bnode()
        raise self.error("expected IRI, literal, or blank node")

    def read_optional_graph(self) -> Optional[EntityUri]:
        self.skip_ws()
        if self.pos >= len(self.line) or self.line[self.pos] == ".":
            return None
        if self.line.startswith("_:", self.pos):
            return self.read_bnode()
        return self.read_iri()


def _parse_line(line: str) -> Optional[tuple[EntityUri, Union[LinkKind, str], Node, EntityUri]]:
    """Parse one N-Triples/N-Quads line; None for blank and comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    scanner = _Scanner(stripped)
    subject = scanner.read_subject()
    scanner.skip_ws()
    predicate = scanner.read_iri().value
    obj = scanner.read_object()
    graph = scanner.read_optional_graph() or DEFAULT_GRAPH
    scanner.expect_dot()
    kind = URIS_TO_KIND.get(predicate)
    return subject, (kind if kind is not None else predicate), obj, graph


def _fold_meta(
    raw: list[tuple[EntityUri, Union[LinkKind, str], Node, EntityUri, int]],
    default_provenance: Provenance,
    diagnostics: list[Diagnostic],
    filename: Optional[str],
) -> list[Statement]:
    graph_meta: dict[str, dict[str, str]] = {}
    qualifier_by_stmt_id: dict[str, tuple[str, int]] = {}
    data_rows = []
    for subject, predicate, obj, graph, lineno in raw:
        if graph != META_GRAPH:
            data_rows.append((subject, predicate, obj, graph, lineno))
            continue
        pred_uri = predicate_uri(predicate)
        text = obj.text if isinstance(obj, Literal) else None
        if pred_uri == META_QUALIFIER and subject.value.startswith(_STMT_PREFIX):
            if text is None:
                diagnostics.append(
                    Diagnostic("qualifier meta value must be a literal", filename, lineno)
                )
            else:
                qualifier_by_stmt_id[subject.value] = (text, lineno)
        elif pred_uri in (META_SOURCE, META_METHOD, META_RETRIEVED_AT, META_REVIEWER):
            if text is None:
                diagnostics.append(
                    Diagnostic("provenance meta value must be a literal", filename, lineno)
                )
            else:
                graph_meta.setdefault(subject.value, {})[pred_uri] = text
        else:
            diagnostics.append(
                Diagnostic(f"unrecognized meta quad dropped: {pred_uri}", filename, lineno)
            )

    statements = []
    for subject, predicate, obj, graph, lineno in data_rows:
        meta = graph_meta.get(graph.value)
        if meta is None:
            prov = default_provenance
        else:
            try:
                method = ProvenanceMethod(meta.get(META_METHOD, "asserted"))
            except ValueError:
                diagnostics.append(
                    Diagnostic(
                        f"unknown provenance method {meta.get(META_METHOD)!r}",
                        filename,
                        lineno,
                    )
                )
                method = ProvenanceMethod.ASSERTED
            prov = Provenance(
                source=meta.get(META_SOURCE, default_provenance.source),
                retrieved_at=meta.get(META_RETRIEVED_AT, default_provenance.retrieved_at),
                method=method,
                reviewer=meta.get(META_REVIEWER),
            )
        stmt = Statement(
            subject=subject, predicate=predicate, object=obj, graph=graph, provenance=prov
        )
        sid = statement_id(stmt)
        if sid in qualifier_by_stmt_id:
            text, qline = qualifier_by_stmt_id.pop(sid)
            try:
                stmt = Statement(
                    subject=subject,
                    predicate=predicate,
                    object=obj,
                    graph=graph,
                    provenance=prov,
                    qualifier=UncertaintyQualifier(text),
                )
            except ValueError:
                diagnostics.append(
                    Diagnostic(f"unknown uncertainty qualifier {text!r}", filename, qline)
                )
        statements.append(stmt)
    for sid, (text, qline) in sorted(qualifier_by_stmt_id.items()):
        diagnostics.append(
            Diagnostic(f"qualifier meta quad matches no statement: {sid}", filename, qline)
        )
    return statements


def parse_statements(
    stream: Union[str, TextIO, Iterable[str]],
    *,
    source: str = DEFAULT_PROVENANCE.source,
    retrieved_at: str = DEFAULT_RETRIEVED_AT,
    method: ProvenanceMethod = ProvenanceMethod.ASSERTED,
    strict: bool = False,
    fold_meta: bool = True,
    filename: Optional[str] = None,
    diagnostics: Optional[list[Diagnostic]] = None,
) -> list[Statement]:
    """Parse N-Triples/N-Quads text into statements.

    Lenient by default: malformed lines become diagnostics (with their line
    number) and parsing continues. In strict mode the first malformed line
    raises ParseError. With fold_meta, reserved meta-graph quads are consumed
    to restore per-graph provenance and per-statement qualifiers.
    """
    if isinstance(stream, str):
        lines: Iterable[str] = stream.splitlines()
    elif hasattr(stream, "read"):
        lines = stream.read().splitlines()  # type: ignore[union-attr]
    else:
        lines = stream
    if diagnostics is None:
        diagnostics = []
    default_provenance = Provenance(
        source=source, retrieved_at=retrieved_at, method=method
    )
    raw = []
    for lineno, line in enumerate(lines, start=1):
        try:
            parsed = _parse_line(line.rstrip("\n"))
        except ParseError as exc:
            if strict:
                raise ParseError(f"line {lineno}: {exc}") from None
            diagnostics.append(Diagnostic(str(exc), filename, lineno))
            continue
        if parsed is not None:
            raw.append((*parsed, lineno))
    if fold_meta:
        return _fold_meta(raw, default_provenance, diagnostics, filename)
    return [
        Statement(s, p, o, g, default_provenance) for s, p, o, g, _lineno in raw
    ]


def _graph_provenance(statements: Sequence[Statement]) -> dict[EntityUri, Provenance]:
    """Pick one provenance per graph; ties resolved by smallest field tuple so
    export stays total and deterministic even on inconsistent input."""
    chosen: dict[EntityUri, Provenance] = {}
    for stmt in statements:
        prov = stmt.provenance
        current = chosen.get(stmt.graph)
        key = (prov.source, prov.retrieved_at, prov.method.value, prov.reviewer or "")
        if current is None or key < (
            current.source,
            current.retrieved_at,
            current.method.value,
            current.reviewer or "",
        ):
            chosen[stmt.graph] = prov
    return chosen


def export_quads(
    statements: Iterable[Statement], header_lines: Sequence[str] = ()
) -> str:
    """Serialize statements as canonical N-Quads (UTF-8 text, LF endings).

    Output contains the data quads plus reified provenance/qualifier quads in
    the reserved meta graph, all totally ordered and deduplicated. Optional
    header lines are emitted as leading comments.
    """
    stmts = list(statements)
    meta_prov = Provenance(
        source="concordia", retrieved_at=DEFAULT_RETRIEVED_AT, method=ProvenanceMethod.MINTED
    )
    extra: list[Statement] = []
    for graph, prov in _graph_provenance(stmts).items():
        fields = [
            (META_SOURCE, prov.source),
            (META_METHOD, prov.method.value),
            (META_RETRIEVED_AT, prov.retrieved_at),
        ]
        if prov.reviewer:
            fields.append((META_REVIEWER, prov.reviewer))
        for pred, value in fields:
            extra.append(
                Statement(graph, pred, Literal(value), META_GRAPH, meta_prov)
            )
    for stmt in stmts:
        if stmt.qualifier is not UncertaintyQualifier.CERTAIN:
            extra.append(
                Statement(
                    EntityUri(statement_id(stmt)),
                    META_QUALIFIER,
                    Literal(stmt.qualifier.value),
                    META_GRAPH,
                    meta_prov,
                )
            )

    keyed = set()
    for stmt in stmts + extra:
        keyed.add(
            (
                stmt.graph.value,
                stmt.subject.value,
                predicate_uri(stmt.predicate),
                _serialize_node(stmt.object),
            )
        )
    lines = [f"# {text}" for text in header_lines]
    for graph, subject, pred, obj in sorted(keyed):
        lines.append(
            " ".join(
                (_serialize_iri(subject), _serialize_iri(pred), obj, _serialize_iri(graph), ".")
            )
        )
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
