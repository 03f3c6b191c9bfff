"""Deterministic Turtle serializer."""

from __future__ import annotations

import re
from collections import defaultdict
from typing import Mapping, Optional

from .graph import Graph
from .terms import (
    IRI,
    BNode,
    Literal,
    Term,
    Triple,
    escape_string,
    sort_key,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
)
from .turtle import _PN_CHARS, _PN_CHARS_U, _RE_DECIMAL, _RE_DOUBLE, _RE_INTEGER

# local names written without escapes; anything else falls back to <...>
_SAFE_LOCAL = re.compile(f"[{_PN_CHARS_U}0-9](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?|")
_SAFE_PREFIX = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*|")

_INDENT = "    "


class _Writer:
    def __init__(self, graph: Graph, prefixes: Mapping[str, str]):
        self.graph = graph
        self.prefixes = {
            k: v for k, v in prefixes.items() if _SAFE_PREFIX.fullmatch(k) and v
        }
        # longest namespace first so nested namespaces pick the tightest fit
        self.ns_order = sorted(self.prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        self.by_subject: dict[Term, list[Triple]] = defaultdict(list)
        self.object_refs: dict[BNode, int] = defaultdict(int)
        for t in graph:
            self.by_subject[t.subject].append(t)
            if isinstance(t.object, BNode):
                self.object_refs[t.object] += 1
        self.inline: set[BNode] = set()
        self.lists: dict[BNode, list[Term]] = {}
        self.labels: dict[BNode, str] = {}

    def iri(self, iri: IRI) -> str:
        if iri == RDF_TYPE:
            return "a"
        return self.name(iri)

    def name(self, iri: IRI) -> str:
        value = iri.value
        for prefix, ns in self.ns_order:
            if value.startswith(ns):
                local = value[len(ns) :]
                if _SAFE_LOCAL.fullmatch(local):
                    return f"{prefix}:{local}"
        return iri.n3()

    def literal(self, lit: Literal) -> str:
        lex = lit.lexical
        if lit.language is not None:
            return f'"{escape_string(lex)}"@{lit.language}'
        dt = lit.datatype
        if dt == XSD_INTEGER and _RE_INTEGER.fullmatch(lex):
            return lex
        if dt == XSD_DECIMAL and _RE_DECIMAL.fullmatch(lex):
            return lex
        if dt == XSD_DOUBLE and _RE_DOUBLE.fullmatch(lex):
            return lex
        if dt == XSD_BOOLEAN and lex in ("true", "false"):
            return lex
        quoted = f'"{escape_string(lex)}"'
        if dt == XSD_STRING:
            return quoted
        return f"{quoted}^^{self.name(dt)}"

    def plan(self) -> list[Term]:
        """Choose inlined blank nodes and return top-level subjects in order."""
        candidates = {
            b for b, n in self.object_refs.items() if n == 1 and b in self.by_subject
        }
        # well-formed collections: nodes holding exactly rdf:first + rdf:rest
        for b in candidates:
            triples = self.by_subject[b]
            preds = sorted(t.predicate.value for t in triples)
            if preds == sorted([RDF_FIRST.value, RDF_REST.value]):
                items = self.graph.read_list(b)
                if items is not None and self._list_nodes_inlinable(b, candidates):
                    self.lists[b] = items
        self.inline = set(candidates)

        roots = sorted(
            (s for s in self.by_subject if s not in self.inline), key=sort_key
        )
        reached: set[Term] = set()
        for r in roots:
            self._reach(r, reached)
        # blank nodes only reachable through a cycle: promote one per cycle
        pending = sorted((b for b in self.inline if b not in reached), key=sort_key)
        while pending:
            b = pending[0]
            self.inline.discard(b)
            self.lists.pop(b, None)
            roots.append(b)
            self._reach(b, reached)
            pending = [p for p in pending if p not in reached]
        return roots

    def _list_nodes_inlinable(self, head: BNode, candidates: set[BNode]) -> bool:
        node: Term = head
        while node != RDF_NIL:
            if node not in candidates:
                return False
            rest = self.graph.objects(node, RDF_REST)
            node = rest[0]
        return True

    def _reach(self, node: Term, reached: set[Term]) -> None:
        stack = [node]
        while stack:
            n = stack.pop()
            if n in reached:
                continue
            reached.add(n)
            for t in self.by_subject.get(n, ()):
                if isinstance(t.object, BNode) and t.object in self.inline:
                    stack.append(t.object)

    def term(self, term: Term, level: int) -> str:
        if isinstance(term, IRI):
            return "()" if term == RDF_NIL else self.name(term)
        if isinstance(term, Literal):
            return self.literal(term)
        if term in self.lists:
            inner = " ".join(self.term(x, level) for x in self.lists[term])
            return f"( {inner} )" if inner else "()"
        if term in self.inline:
            body = self.predicate_objects(term, level + 1)
            if not body:
                return "[]"
            pad = _INDENT * level
            return f"[\n{body}\n{pad}]"
        return self.label(term)

    def label(self, node: BNode) -> str:
        if node not in self.labels:
            self.labels[node] = f"_:b{len(self.labels) + 1}"
        return self.labels[node]

    def predicate_objects(self, subject: Term, level: int) -> str:
        triples = self.by_subject.get(subject, [])
        grouped: dict[IRI, list[Term]] = defaultdict(list)
        for t in triples:
            grouped[t.predicate].append(t.object)

        def pred_key(p: IRI):
            # rdf:type first, as people expect
            return (p != RDF_TYPE, sort_key(p))

        pad = _INDENT * level
        lines = []
        for p in sorted(grouped, key=pred_key):
            objs = sorted(grouped[p], key=sort_key)
            rendered = ", ".join(self.term(o, level) for o in objs)
            lines.append(f"{pad}{self.iri(p)} {rendered}")
        return " ;\n".join(lines)

    def write(self) -> str:
        out: list[str] = []
        for prefix in sorted(self.prefixes):
            out.append(f"@prefix {prefix}: <{self.prefixes[prefix]}> .")
        roots = self.plan()
        if out and roots:
            out.append("")
        for s in roots:
            subj = self.label(s) if isinstance(s, BNode) else self.term(s, 0)
            body = self.predicate_objects(s, 1)
            out.append(f"{subj}\n{body} .\n")
        return "\n".join(out).rstrip("\n") + "\n" if out else ""


def serialize_turtle(graph: Graph, prefixes: Optional[Mapping[str, str]] = None) -> str:
    """Serialize ``graph`` as Turtle.

    Output depends only on the triple set and the prefix map, so equal graphs
    serialize identically. ``prefixes`` overrides the graph's own map.
    """
    writer = _Writer(graph, graph.prefixes if prefixes is None else prefixes)
    return writer.write()


def compact(term: Term, prefixes: Mapping[str, str]) -> str:
    """Short human-readable form of a term, using ``prefixes`` where possible."""
    writer = _Writer(Graph(), prefixes)
    if isinstance(term, IRI):
        return writer.name(term)
    if isinstance(term, Literal):
        return writer.literal(term)
    return term.n3()
