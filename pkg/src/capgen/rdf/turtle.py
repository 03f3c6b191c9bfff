"""Turtle 1.1 parser producing located diagnostics.

The parser never raises on malformed input other than through
:class:`TurtleSyntaxError`, which carries every diagnostic collected. After an
error it skips to the next statement terminator and keeps going, so one pass
reports as many independent problems as possible.
"""

from __future__ import annotations

import bisect
import enum
import re
from dataclasses import dataclass
from typing import Optional, Union
from urllib.parse import urljoin

from .graph import Graph
from .terms import (
    IRI,
    BNode,
    Literal,
    Term,
    Triple,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
)

# each level costs several Python frames; keep well inside the default recursion limit
MAX_NESTING = 100


class DiagnosticKind(str, enum.Enum):
    UNEXPECTED_CHAR = "UnexpectedChar"
    UNDEFINED_PREFIX = "UndefinedPrefix"
    BAD_IRI = "BadIri"
    BAD_LITERAL = "BadLiteral"
    UNTERMINATED_STATEMENT = "UnterminatedStatement"
    BAD_DIRECTIVE = "BadDirective"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SyntaxDiagnostic:
    line: int
    column: int
    kind: DiagnosticKind
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.kind.value}: {self.message}"


class TurtleSyntaxError(ValueError):
    """Raised by :func:`parse_turtle`; ``diagnostics`` is never empty."""

    def __init__(self, diagnostics: list[SyntaxDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


# --- lexical grammar -------------------------------------------------------

_PN_CHARS_BASE = (
    "A-Za-z\u00C0-\u00D6\u00D8-\u00F6\u00F8-\u02FF\u0370-\u037D\u037F-\u1FFF"
    "\u200C-\u200D\u2070-\u218F\u2C00-\u2FEF\u3001-\uD7FF\uF900-\uFDCF"
    "\uFDF0-\uFFFD\U00010000-\U000EFFFF"
)
_PN_CHARS_U = _PN_CHARS_BASE + "_"
_PN_CHARS = _PN_CHARS_U + "\\-0-9\u00B7\u0300-\u036F\u203F-\u2040"
_PLX = r"(?:%[0-9A-Fa-f]{2}|\\[_~.\-!$&'()*+,;=/?#@%])"
_PN_PREFIX = f"[{_PN_CHARS_BASE}](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?"
_PN_LOCAL = (
    f"(?:[{_PN_CHARS_U}:0-9]|{_PLX})"
    f"(?:(?:[{_PN_CHARS}.:]|{_PLX})*(?:[{_PN_CHARS}:]|{_PLX}))?"
)

_RE_PNAME = re.compile(f"({_PN_PREFIX})?:({_PN_LOCAL})?")
_RE_BLANK = re.compile(f"_:([{_PN_CHARS_U}0-9](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?)")
_RE_LANGTAG = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")
_RE_AT_WORD = re.compile(r"@([A-Za-z0-9_-]*)")
_RE_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_RE_DOUBLE = re.compile(r"[+-]?(?:[0-9]+\.[0-9]*[eE][+-]?[0-9]+|\.?[0-9]+[eE][+-]?[0-9]+)")
_RE_DECIMAL = re.compile(r"[+-]?[0-9]*\.[0-9]+")
_RE_INTEGER = re.compile(r"[+-]?[0-9]+")
_RE_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_RE_LOCAL_ESC = re.compile(r"\\(.)")
_IRI_FORBIDDEN = set('<>"{}|^`\\') | {chr(c) for c in range(0x21)}
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_PUNCT = set(".;,[]()")


class Tok(enum.Enum):
    IRIREF = "IRI"
    PNAME = "prefixed name"
    BLANK = "blank node"
    STRING = "string"
    LANGTAG = "language tag"
    INTEGER = "integer"
    DECIMAL = "decimal"
    DOUBLE = "double"
    DTMARK = "'^^'"
    PUNCT = "punctuation"
    KEYWORD = "keyword"
    WORD = "word"
    AT_PREFIX = "@prefix"
    AT_BASE = "@base"
    SPARQL_PREFIX = "PREFIX"
    SPARQL_BASE = "BASE"
    ERROR = "error"
    EOF = "end of input"


@dataclass
class Token:
    kind: Tok
    value: str
    start: int
    end: int
    # PNAME tokens carry (prefix, local) split
    extra: Optional[tuple[str, str]] = None

    def describe(self) -> str:
        if self.kind is Tok.EOF:
            return "end of input"
        text = self.value if len(self.value) <= 40 else self.value[:37] + "..."
        return f"{self.kind.value} {text!r}"


class _Source:
    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer(r"\r\n|\r|\n", text)]

    def locate(self, offset: int) -> tuple[int, int]:
        offset = max(0, min(offset, len(self.text)))
        line = bisect.bisect_right(self.line_starts, offset) - 1
        return line + 1, offset - self.line_starts[line] + 1

    def line_of(self, offset: int) -> int:
        return self.locate(offset)[0]


def _decode_uchar(text: str, i: int) -> tuple[Optional[str], int]:
    """Decode \\uXXXX or \\UXXXXXXXX at ``text[i]`` (the backslash)."""
    width = 4 if text[i + 1] == "u" else 8
    digits = text[i + 2 : i + 2 + width]
    if len(digits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
        return None, i + 2
    code = int(digits, 16)
    if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
        return None, i + 2 + width
    return chr(code), i + 2 + width


class _Lexer:
    def __init__(self, src: _Source, diags: list[SyntaxDiagnostic]):
        self.src = src
        self.text = src.text
        self.diags = diags
        self.tokens: list[Token] = []

    def error(self, kind: DiagnosticKind, offset: int, message: str) -> None:
        line, col = self.src.locate(offset)
        self.diags.append(SyntaxDiagnostic(line, col, kind, message))

    def emit(self, kind: Tok, value: str, start: int, end: int, extra=None) -> None:
        self.tokens.append(Token(kind, value, start, end, extra))

    def run(self) -> list[Token]:
        text = self.text
        n = len(text)
        i = 0
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
            elif c == "#":
                while i < n and text[i] not in "\r\n":
                    i += 1
            elif c == "<":
                i = self._iri(i)
            elif c in "\"'":
                i = self._string(i)
            elif c == "@":
                i = self._at(i)
            elif c == "^":
                if text.startswith("^^", i):
                    self.emit(Tok.DTMARK, "^^", i, i + 2)
                    i += 2
                else:
                    i = self._unexpected(i)
            elif c == "_" and text.startswith("_:", i):
                m = _RE_BLANK.match(text, i)
                if m:
                    self.emit(Tok.BLANK, m.group(1), i, m.end())
                    i = m.end()
                else:
                    self.error(DiagnosticKind.UNEXPECTED_CHAR, i, "malformed blank node label")
                    self.emit(Tok.ERROR, "_:", i, i + 2)
                    i += 2
            elif c.isdigit() or (c in "+-." and i + 1 < n and (text[i + 1].isdigit() or (text[i + 1] == "." and c != "."))):
                i = self._number(i)
            elif c in _PUNCT:
                self.emit(Tok.PUNCT, c, i, i + 1)
                i += 1
            else:
                i = self._name(i)
        self.emit(Tok.EOF, "", n, n)
        return self.tokens

    def _unexpected(self, i: int) -> int:
        # one diagnostic per run of junk characters
        j = i + 1
        while j < len(self.text) and not self.text[j].isspace() and self.text[j] not in "<\"'#.;,[]()":
            j += 1
        bad = self.text[i:j]
        self.error(DiagnosticKind.UNEXPECTED_CHAR, i, f"unexpected character {self.text[i]!r} in {bad!r}")
        self.emit(Tok.ERROR, bad, i, j)
        return j

    def _iri(self, i: int) -> int:
        text = self.text
        j = i + 1
        out: list[str] = []
        problem: Optional[str] = None
        while j < len(text) and text[j] != ">":
            c = text[j]
            if c == "\\":
                if j + 1 < len(text) and text[j + 1] in "uU":
                    ch, j = _decode_uchar(text, j)
                    if ch is None:
                        problem = problem or "invalid \\u escape in IRI"
                    elif ch in _IRI_FORBIDDEN or ch.isspace():
                        problem = problem or f"escaped character {ch!r} not allowed in IRI"
                    else:
                        out.append(ch)
                    continue
                problem = problem or "backslash not allowed in IRI"
            elif c in "\r\n":
                break
            elif c in _IRI_FORBIDDEN or c.isspace():
                problem = problem or f"character {c!r} not allowed in IRI"
            out.append(c)
            j += 1
        if j >= len(text) or text[j] != ">":
            self.error(DiagnosticKind.BAD_IRI, i, "IRI not closed with '>'")
            end = i + 1
            while end < len(text) and not text[end].isspace():
                end += 1
            self.emit(Tok.ERROR, text[i:end], i, end)
            return end
        if problem:
            self.error(DiagnosticKind.BAD_IRI, i, f"{problem}: {text[i:j + 1]}")
            self.emit(Tok.ERROR, text[i : j + 1], i, j + 1)
        else:
            self.emit(Tok.IRIREF, "".join(out), i, j + 1)
        return j + 1

    def _string(self, i: int) -> int:
        text = self.text
        q = text[i]
        long = text.startswith(q * 3, i)
        delim = q * 3 if long else q
        j = i + len(delim)
        out: list[str] = []
        problem: Optional[tuple[int, str]] = None
        while True:
            if j >= len(text) or (not long and text[j] in "\r\n"):
                self.error(DiagnosticKind.BAD_LITERAL, i, "unterminated string literal")
                if not long:
                    # leave a trailing statement terminator to the parser
                    m = re.search(r"\.[ \t]*$", text[i:j])
                    if m and m.start() > 0:
                        j = i + m.start()
                self.emit(Tok.ERROR, text[i:j], i, j)
                return j
            if text.startswith(delim, j):
                break
            c = text[j]
            if c == "\\":
                nxt = text[j + 1] if j + 1 < len(text) else ""
                if nxt in _ECHAR:
                    out.append(_ECHAR[nxt])
                    j += 2
                    continue
                if nxt in ("u", "U"):
                    ch, k = _decode_uchar(text, j)
                    if ch is None:
                        problem = problem or (j, "invalid unicode escape in string")
                    else:
                        out.append(ch)
                    j = k
                    continue
                problem = problem or (j, f"invalid escape sequence '\\{nxt}' in string")
                j += 2 if nxt and nxt not in "\r\n" else 1
                continue
            out.append(c)
            j += 1
        end = j + len(delim)
        if problem:
            self.error(DiagnosticKind.BAD_LITERAL, problem[0], problem[1])
            self.emit(Tok.ERROR, text[i:end], i, end)
        else:
            self.emit(Tok.STRING, "".join(out), i, end)
        return end

    def _at(self, i: int) -> int:
        prev = self.tokens[-1] if self.tokens else None
        if prev is not None and prev.kind is Tok.STRING:
            m = _RE_LANGTAG.match(self.text, i)
            if m:
                self.emit(Tok.LANGTAG, m.group(1), i, m.end())
                return m.end()
            self.error(DiagnosticKind.BAD_LITERAL, i, "malformed language tag")
            m = _RE_AT_WORD.match(self.text, i)
            self.emit(Tok.ERROR, m.group(0), i, m.end())
            return max(m.end(), i + 1)
        m = _RE_AT_WORD.match(self.text, i)
        word = m.group(1)
        if word == "prefix":
            self.emit(Tok.AT_PREFIX, "@prefix", i, m.end())
        elif word == "base":
            self.emit(Tok.AT_BASE, "@base", i, m.end())
        else:
            if prev is not None and prev.kind is Tok.ERROR and prev.value[:1] in "\"'":
                # language tag on a string that already failed; stay quiet
                pass
            else:
                self.error(DiagnosticKind.BAD_DIRECTIVE, i, f"unknown directive '@{word}' (expected @prefix or @base)")
            self.emit(Tok.ERROR, m.group(0), i, max(m.end(), i + 1))
        return max(m.end(), i + 1)

    def _number(self, i: int) -> int:
        for rx, kind in ((_RE_DOUBLE, Tok.DOUBLE), (_RE_DECIMAL, Tok.DECIMAL), (_RE_INTEGER, Tok.INTEGER)):
            m = rx.match(self.text, i)
            if m:
                end = m.end()
                if end < len(self.text) and (self.text[end].isalpha() or self.text[end] == "_"):
                    # e.g. "12abc": not a number, not a name
                    j = end
                    while j < len(self.text) and (self.text[j].isalnum() or self.text[j] in "_-"):
                        j += 1
                    self.error(DiagnosticKind.BAD_LITERAL, i, f"malformed numeric literal {self.text[i:j]!r}")
                    self.emit(Tok.ERROR, self.text[i:j], i, j)
                    return j
                self.emit(kind, m.group(0), i, end)
                return end
        return self._unexpected(i)

    def _name(self, i: int) -> int:
        text = self.text
        m = _RE_PNAME.match(text, i)
        if m:
            prefix = m.group(1) or ""
            local = m.group(2) or ""
            self.emit(Tok.PNAME, m.group(0), i, m.end(), (prefix, _RE_LOCAL_ESC.sub(r"\1", local)))
            return m.end()
        m = _RE_WORD.match(text, i)
        if m:
            word = m.group(0)
            if word in ("a", "true", "false"):
                self.emit(Tok.KEYWORD, word, i, m.end())
            elif word.upper() == "PREFIX":
                self.emit(Tok.SPARQL_PREFIX, word, i, m.end())
            elif word.upper() == "BASE":
                self.emit(Tok.SPARQL_BASE, word, i, m.end())
            else:
                self.emit(Tok.WORD, word, i, m.end())
            return m.end()
        return self._unexpected(i)


# --- parser ----------------------------------------------------------------


# stands in for unusable IRIs once a diagnostic is recorded
_PLACEHOLDER = IRI("urn:x-invalid")


class _Abort(Exception):
    """Abandon the current statement; diagnostic already recorded."""


class _Parser:
    def __init__(self, src: _Source, tokens: list[Token], diags: list[SyntaxDiagnostic]):
        self.src = src
        self.tokens = tokens
        self.diags = diags
        self.pos = 0
        self.depth = 0
        self.prefixes: dict[str, str] = {}
        self.base: Optional[str] = None
        self.triples: set[Triple] = set()
        self.labels: dict[str, BNode] = {}
        self.bnode_count = 0

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind is not Tok.EOF:
            self.pos += 1
        return tok

    def prev(self) -> Optional[Token]:
        return self.tokens[self.pos - 1] if self.pos > 0 else None

    def is_punct(self, tok: Token, value: str) -> bool:
        return tok.kind is Tok.PUNCT and tok.value == value

    def report(self, kind: DiagnosticKind, offset: int, message: str) -> None:
        line, col = self.src.locate(offset)
        self.diags.append(SyntaxDiagnostic(line, col, kind, message))

    def fail(self, tok: Token, message: str, kind: DiagnosticKind = DiagnosticKind.UNEXPECTED_CHAR):
        if tok.kind is not Tok.ERROR:
            self.report(kind, tok.start, message)
        raise _Abort

    def fresh_bnode(self) -> BNode:
        self.bnode_count += 1
        return BNode(f"b{self.bnode_count}")

    def emit(self, s: Term, p: IRI, o: Term) -> None:
        self.triples.add(Triple(s, p, o))  # type: ignore[arg-type]

    # document structure

    def parse(self) -> None:
        while self.peek().kind is not Tok.EOF:
            start = self.pos
            try:
                self.statement()
            except _Abort:
                self.recover()
            if self.pos == start:
                # guarantee progress on pathological input
                self.next()

    def recover(self) -> None:
        depth = self.depth
        self.depth = 0
        while True:
            tok = self.peek()
            if tok.kind is Tok.EOF:
                return
            if tok.kind in (Tok.AT_PREFIX, Tok.AT_BASE, Tok.SPARQL_PREFIX, Tok.SPARQL_BASE):
                return
            self.next()
            if tok.kind is Tok.PUNCT:
                if tok.value in "[(":
                    depth += 1
                elif tok.value in "])":
                    depth = max(0, depth - 1)
                elif tok.value == ".":
                    if depth == 0:
                        return
                    # an unbalanced bracket would otherwise swallow the
                    # document; a '.' ending a line before a statement that
                    # starts in column 1 is taken as a boundary
                    nxt = self.peek()
                    if (
                        nxt.kind is not Tok.EOF
                        and self.src.line_of(nxt.start) > self.src.line_of(tok.start)
                        and self.src.locate(nxt.start)[1] == 1
                    ):
                        return

    def expect_dot(self) -> None:
        tok = self.peek()
        if self.is_punct(tok, "."):
            self.next()
            return
        last = self.prev()
        if tok.kind is Tok.ERROR:
            raise _Abort
        new_line = last is not None and self.src.line_of(tok.start) > self.src.line_of(last.end - 1)
        if last is not None and (tok.kind is Tok.EOF or new_line):
            self.report(
                DiagnosticKind.UNTERMINATED_STATEMENT,
                last.end - 1,
                f"statement not terminated: expected '.', ';' or ',' after {last.describe()}",
            )
            return
        self.fail(tok, f"expected '.' to end the statement, found {tok.describe()}")

    def statement(self) -> None:
        tok = self.peek()
        if tok.kind is Tok.AT_PREFIX:
            self.next()
            self.prefix_body(tok)
            self.expect_dot()
        elif tok.kind is Tok.AT_BASE:
            self.next()
            self.base_body(tok)
            self.expect_dot()
        elif tok.kind is Tok.SPARQL_PREFIX:
            self.next()
            self.prefix_body(tok)
            self.sparql_no_dot(tok)
        elif tok.kind is Tok.SPARQL_BASE:
            self.next()
            self.base_body(tok)
            self.sparql_no_dot(tok)
        else:
            self.triples_statement()
            self.expect_dot()

    def sparql_no_dot(self, directive: Token) -> None:
        tok = self.peek()
        if self.is_punct(tok, "."):
            self.next()
            self.report(
                DiagnosticKind.BAD_DIRECTIVE,
                tok.start,
                f"SPARQL-style {directive.value} must not end with '.'; use '@{directive.value.lower()}' for the dotted form",
            )

    def prefix_body(self, directive: Token) -> None:
        tok = self.next()
        if tok.kind is not Tok.PNAME or tok.extra[1]:
            self.fail(
                tok,
                f"{directive.value} must be followed by a prefix label ending in ':', found {tok.describe()}",
                DiagnosticKind.BAD_DIRECTIVE,
            )
        label = tok.extra[0]
        iri_tok = self.next()
        if iri_tok.kind is not Tok.IRIREF:
            self.fail(
                iri_tok,
                f"{directive.value} {label}: must be followed by a namespace IRI in <...>, found {iri_tok.describe()}",
                DiagnosticKind.BAD_DIRECTIVE,
            )
        iri = self.resolve(iri_tok)
        self.prefixes[label] = iri.value

    def base_body(self, directive: Token) -> None:
        iri_tok = self.next()
        if iri_tok.kind is not Tok.IRIREF:
            self.fail(
                iri_tok,
                f"{directive.value} must be followed by an IRI in <...>, found {iri_tok.describe()}",
                DiagnosticKind.BAD_DIRECTIVE,
            )
        self.base = self.resolve(iri_tok).value

    # triples

    def triples_statement(self) -> None:
        tok = self.peek()
        if self.is_punct(tok, "["):
            if self.is_punct(self.peek(1), "]"):
                self.next()
                self.next()
                subject: Term = self.fresh_bnode()
                self.predicate_object_list(subject)
                return
            subject = self.blank_property_list()
            if not self.is_punct(self.peek(), "."):
                self.predicate_object_list(subject)
            return
        subject = self.subject()
        self.predicate_object_list(subject)

    def subject(self) -> Term:
        tok = self.peek()
        if tok.kind in (Tok.IRIREF, Tok.PNAME):
            self.next()
            return self.resolve(tok)
        if tok.kind is Tok.BLANK:
            self.next()
            return self.labelled_bnode(tok.value)
        if self.is_punct(tok, "("):
            return self.collection()
        if tok.kind in (Tok.STRING, Tok.INTEGER, Tok.DECIMAL, Tok.DOUBLE) or (
            tok.kind is Tok.KEYWORD and tok.value in ("true", "false")
        ):
            self.fail(tok, f"a literal cannot be a subject: {tok.describe()}")
        if tok.kind is Tok.WORD:
            self.fail(tok, f"unexpected bare word {tok.value!r}; IRIs need <...> or a prefix such as 'ex:{tok.value}'")
        self.fail(tok, f"expected a subject, found {tok.describe()}")
        raise AssertionError  # unreachable

    def predicate_object_list(self, subject: Term) -> None:
        verb = self.verb()
        self.object_list(subject, verb)
        while self.is_punct(self.peek(), ";"):
            while self.is_punct(self.peek(), ";"):
                self.next()
            tok = self.peek()
            if tok.kind is Tok.EOF or (tok.kind is Tok.PUNCT and tok.value in ".]"):
                return
            verb = self.verb()
            self.object_list(subject, verb)

    def verb(self) -> IRI:
        tok = self.peek()
        if tok.kind is Tok.KEYWORD and tok.value == "a":
            self.next()
            return RDF_TYPE
        if tok.kind in (Tok.IRIREF, Tok.PNAME):
            self.next()
            return self.resolve(tok)
        if tok.kind is Tok.WORD:
            self.fail(tok, f"unexpected bare word {tok.value!r} where a predicate was expected")
        self.fail(tok, f"expected a predicate IRI, found {tok.describe()}")
        raise AssertionError

    def object_list(self, subject: Term, verb: IRI) -> None:
        self.emit(subject, verb, self.object())
        while self.is_punct(self.peek(), ","):
            self.next()
            self.emit(subject, verb, self.object())

    def object(self) -> Term:
        tok = self.peek()
        k = tok.kind
        if k in (Tok.IRIREF, Tok.PNAME):
            self.next()
            return self.resolve(tok)
        if k is Tok.BLANK:
            self.next()
            return self.labelled_bnode(tok.value)
        if self.is_punct(tok, "["):
            if self.is_punct(self.peek(1), "]"):
                self.next()
                self.next()
                return self.fresh_bnode()
            return self.blank_property_list()
        if self.is_punct(tok, "("):
            return self.collection()
        if k is Tok.STRING:
            return self.rdf_literal()
        if k is Tok.INTEGER:
            self.next()
            return Literal(tok.value, XSD_INTEGER)
        if k is Tok.DECIMAL:
            self.next()
            return Literal(tok.value, XSD_DECIMAL)
        if k is Tok.DOUBLE:
            self.next()
            return Literal(tok.value, XSD_DOUBLE)
        if k is Tok.KEYWORD and tok.value in ("true", "false"):
            self.next()
            return Literal(tok.value, XSD_BOOLEAN)
        if k is Tok.WORD:
            self.fail(tok, f"unexpected bare word {tok.value!r}; IRIs need <...> or a prefix such as 'ex:{tok.value}'")
        if k is Tok.LANGTAG or k is Tok.DTMARK:
            self.fail(tok, f"{tok.describe()} must directly follow a string", DiagnosticKind.BAD_LITERAL)
        self.fail(tok, f"expected an object, found {tok.describe()}")
        raise AssertionError

    def rdf_literal(self) -> Literal:
        tok = self.next()
        nxt = self.peek()
        if nxt.kind is Tok.LANGTAG:
            self.next()
            return Literal(tok.value, language=nxt.value)
        if nxt.kind is Tok.DTMARK:
            self.next()
            dt_tok = self.peek()
            if dt_tok.kind not in (Tok.IRIREF, Tok.PNAME):
                self.fail(dt_tok, f"'^^' must be followed by a datatype IRI, found {dt_tok.describe()}", DiagnosticKind.BAD_LITERAL)
            self.next()
            datatype = self.resolve(dt_tok)
            if datatype.value == "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString":
                self.fail(dt_tok, "rdf:langString literals need a language tag instead of '^^'", DiagnosticKind.BAD_LITERAL)
            return Literal(tok.value, datatype)
        return Literal(tok.value)

    def open_nested(self, tok: Token) -> None:
        if self.depth >= MAX_NESTING:
            self.fail(tok, f"nesting deeper than {MAX_NESTING} levels")
        self.depth += 1

    def blank_property_list(self) -> BNode:
        open_tok = self.next()
        self.open_nested(open_tok)
        node = self.fresh_bnode()
        self.predicate_object_list(node)
        tok = self.peek()
        if not self.is_punct(tok, "]"):
            line = self.src.line_of(open_tok.start)
            self.fail(tok, f"expected ']' to close the '[' opened on line {line}, found {tok.describe()}")
        self.next()
        self.depth -= 1
        return node

    def collection(self) -> Term:
        open_tok = self.next()
        self.open_nested(open_tok)
        items: list[Term] = []
        while not self.is_punct(self.peek(), ")"):
            tok = self.peek()
            if tok.kind is Tok.EOF or self.is_punct(tok, "."):
                line = self.src.line_of(open_tok.start)
                self.fail(tok, f"expected ')' to close the '(' opened on line {line}, found {tok.describe()}")
            items.append(self.object())
        self.next()
        self.depth -= 1
        if not items:
            return RDF_NIL
        nodes = [self.fresh_bnode() for _ in items]
        for idx, (node, item) in enumerate(zip(nodes, items)):
            self.emit(node, RDF_FIRST, item)
            self.emit(node, RDF_REST, nodes[idx + 1] if idx + 1 < len(nodes) else RDF_NIL)
        return nodes[0]

    def labelled_bnode(self, label: str) -> BNode:
        node = self.labels.get(label)
        if node is None:
            node = self.labels[label] = self.fresh_bnode()
        return node

    def resolve(self, tok: Token) -> IRI:
        if tok.kind is Tok.PNAME:
            prefix, local = tok.extra
            ns = self.prefixes.get(prefix)
            if ns is None:
                self.report(
                    DiagnosticKind.UNDEFINED_PREFIX,
                    tok.start,
                    f"prefix '{prefix}:' used in {tok.value!r} is not declared; add '@prefix {prefix}: <...> .'",
                )
                return _PLACEHOLDER
            return self.make_iri(ns + local, tok)
        value = tok.value
        if _RE_SCHEME.match(value):
            return self.make_iri(value, tok)
        if self.base is not None:
            return self.make_iri(urljoin(self.base, value), tok)
        self.report(DiagnosticKind.BAD_IRI, tok.start, f"relative IRI <{value}> used without a base; IRIs must be absolute")
        return _PLACEHOLDER

    def make_iri(self, value: str, tok: Token) -> IRI:
        try:
            return IRI(value)
        except ValueError:
            self.report(DiagnosticKind.BAD_IRI, tok.start, f"IRI {value!r} contains whitespace")
            return _PLACEHOLDER


def _decode(source: Union[str, bytes], diags: list[SyntaxDiagnostic]) -> str:
    if isinstance(source, str):
        return source
    try:
        return source.decode("utf-8")
    except UnicodeDecodeError as exc:
        prefix = source[: exc.start].decode("utf-8", errors="replace")
        line = prefix.count("\n") + 1
        col = len(prefix) - (prefix.rfind("\n") + 1) + 1
        diags.append(SyntaxDiagnostic(line, col, DiagnosticKind.UNEXPECTED_CHAR, "input is not valid UTF-8"))
        return source.decode("utf-8", errors="replace")


def _run(source: Union[str, bytes]) -> tuple[Optional[Graph], list[SyntaxDiagnostic]]:
    diags: list[SyntaxDiagnostic] = []
    text = _decode(source, diags)
    if text.startswith("\ufeff"):
        text = text[1:]
    src = _Source(text)
    tokens = _Lexer(src, diags).run()
    parser = _Parser(src, tokens, diags)
    parser.parse()
    diags.sort(key=lambda d: (d.line, d.column))
    if diags:
        return None, diags
    return Graph(parser.triples, parser.prefixes, parser.base), []


def check_turtle(source: Union[str, bytes]) -> list[SyntaxDiagnostic]:
    """Return all syntax diagnostics for ``source`` (empty when valid)."""
    return _run(source)[1]


def parse_turtle(source: Union[str, bytes]) -> Graph:
    """Parse a Turtle document.

    Raises:
        TurtleSyntaxError: carrying at least one :class:`SyntaxDiagnostic`.
    """
    graph, diags = _run(source)
    if diags:
        raise TurtleSyntaxError(diags)
    assert graph is not None
    return graph
