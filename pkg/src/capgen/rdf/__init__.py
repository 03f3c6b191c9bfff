"""RDF data model, Turtle parsing and serialization."""

from .graph import Graph, merge
from .isomorphism import find_bijection, graph_isomorphic
from .serializer import serialize_turtle
from .terms import (
    IRI,
    OWL,
    RDF,
    RDFS,
    SH,
    XSD,
    BNode,
    Literal,
    Namespace,
    Term,
    Triple,
)
from .turtle import (
    DiagnosticKind,
    SyntaxDiagnostic,
    TurtleSyntaxError,
    check_turtle,
    parse_turtle,
)

__all__ = [
    "IRI",
    "BNode",
    "Literal",
    "Term",
    "Triple",
    "Graph",
    "Namespace",
    "RDF",
    "RDFS",
    "OWL",
    "XSD",
    "SH",
    "merge",
    "parse_turtle",
    "check_turtle",
    "serialize_turtle",
    "graph_isomorphic",
    "find_bijection",
    "DiagnosticKind",
    "SyntaxDiagnostic",
    "TurtleSyntaxError",
]
