"""RDF terms and well-known vocabulary IRIs."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union


_IRI_UNSAFE = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def _uchar(m: "re.Match[str]") -> str:
    return f"\\u{ord(m.group(0)):04X}"


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __post_init__(self) -> None:
        if not self.value or any(c.isspace() for c in self.value):
            raise ValueError(f"invalid IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{_IRI_UNSAFE.sub(_uchar, self.value)}>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BNode:
    label: str

    def n3(self) -> str:
        return f"_:{self.label}"

    def __str__(self) -> str:
        return self.n3()


_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def escape_string(text: str) -> str:
    return "".join(_STRING_ESCAPES.get(c, c) for c in text)


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: IRI = None  # type: ignore[assignment]
    language: Optional[str] = None

    def __post_init__(self) -> None:
        if self.language is not None:
            object.__setattr__(self, "language", self.language.lower())
            object.__setattr__(self, "datatype", RDF_LANGSTRING)
        elif self.datatype is None:
            object.__setattr__(self, "datatype", XSD_STRING)
        elif self.datatype == RDF_LANGSTRING:
            raise ValueError("rdf:langString literal requires a language tag")

    def n3(self) -> str:
        quoted = f'"{escape_string(self.lexical)}"'
        if self.language is not None:
            return f"{quoted}@{self.language}"
        if self.datatype == XSD_STRING:
            return quoted
        return f"{quoted}^^{self.datatype.n3()}"

    def __str__(self) -> str:
        return self.n3()


Term = Union[IRI, BNode, Literal]
Subject = Union[IRI, BNode]


class Triple(NamedTuple):
    subject: Subject
    predicate: IRI
    object: Term

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def make_triple(subject: Term, predicate: Term, obj: Term) -> Triple:
    """Build a triple, enforcing RDF positional restrictions."""
    if isinstance(subject, Literal):
        raise ValueError(f"literal in subject position: {subject.n3()}")
    if not isinstance(predicate, IRI):
        raise ValueError(f"predicate must be an IRI: {predicate.n3()}")
    return Triple(subject, predicate, obj)


def sort_key(term: Term) -> tuple[int, str]:
    """Total order over terms: IRIs, then blank nodes, then literals."""
    if isinstance(term, IRI):
        return (0, term.value)
    if isinstance(term, BNode):
        return (1, term.label)
    return (2, term.n3())


def triple_sort_key(t: Triple) -> tuple:
    return (sort_key(t.subject), sort_key(t.predicate), sort_key(t.object))


class Namespace(str):
    """String subclass producing IRIs by attribute or item access."""

    def term(self, local: str) -> IRI:
        return IRI(str(self) + local)

    def __getattr__(self, local: str) -> IRI:
        if local.startswith("__"):
            raise AttributeError(local)
        return self.term(local)

    def __getitem__(self, local: str) -> IRI:  # type: ignore[override]
        return self.term(local)


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
SH = Namespace("http://www.w3.org/ns/shacl#")

XSD_STRING = IRI(XSD + "string")
RDF_LANGSTRING = IRI(RDF + "langString")
XSD_INTEGER = IRI(XSD + "integer")
XSD_DECIMAL = IRI(XSD + "decimal")
XSD_DOUBLE = IRI(XSD + "double")
XSD_BOOLEAN = IRI(XSD + "boolean")

RDF_TYPE = IRI(RDF + "type")
RDF_FIRST = IRI(RDF + "first")
RDF_REST = IRI(RDF + "rest")
RDF_NIL = IRI(RDF + "nil")
