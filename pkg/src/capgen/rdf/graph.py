"""Immutable RDF graph with a prefix map."""

from __future__ import annotations

from collections import defaultdict
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

from .terms import IRI, BNode, Term, Triple, RDF_FIRST, RDF_NIL, RDF_REST


class Graph:
    """A set of triples plus the prefixes and base it was written with.

    Graphs are immutable; operations that change content return a new graph.
    """

    __slots__ = ("_triples", "_prefixes", "_base", "_index")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Optional[Mapping[str, str]] = None,
        base: Optional[str] = None,
    ) -> None:
        self._triples = frozenset(triples)
        self._prefixes = MappingProxyType(dict(prefixes or {}))
        self._base = base
        self._index = None

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> Mapping[str, str]:
        return self._prefixes

    @property
    def base(self) -> Optional[str]:
        return self._base

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"<Graph {len(self._triples)} triples, {len(self._prefixes)} prefixes>"

    def _indexes(self):
        if self._index is None:
            by_s: dict = defaultdict(list)
            by_p: dict = defaultdict(list)
            by_o: dict = defaultdict(list)
            for t in self._triples:
                by_s[t.subject].append(t)
                by_p[t.predicate].append(t)
                by_o[t.object].append(t)
            self._index = (by_s, by_p, by_o)
        return self._index

    def match(
        self,
        subject: Optional[Term] = None,
        predicate: Optional[IRI] = None,
        obj: Optional[Term] = None,
    ) -> Iterator[Triple]:
        """Yield triples matching the pattern; ``None`` is a wildcard."""
        by_s, by_p, by_o = self._indexes()
        if subject is not None:
            candidates = by_s.get(subject, ())
        elif obj is not None:
            candidates = by_o.get(obj, ())
        elif predicate is not None:
            candidates = by_p.get(predicate, ())
        else:
            candidates = self._triples
        for t in candidates:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if obj is not None and t.object != obj:
                continue
            yield t

    def objects(self, subject: Term, predicate: IRI) -> list[Term]:
        return [t.object for t in self.match(subject, predicate, None)]

    def subjects(self, predicate: IRI, obj: Term) -> list[Term]:
        return [t.subject for t in self.match(None, predicate, obj)]

    def value(self, subject: Term, predicate: IRI) -> Optional[Term]:
        found = self.objects(subject, predicate)
        return found[0] if found else None

    def blank_nodes(self) -> set[BNode]:
        found = set()
        for s, _, o in self._triples:
            if isinstance(s, BNode):
                found.add(s)
            if isinstance(o, BNode):
                found.add(o)
        return found

    def read_list(self, head: Term) -> Optional[list[Term]]:
        """Return the members of an RDF collection, or None if malformed."""
        items: list[Term] = []
        seen = set()
        node = head
        while node != RDF_NIL:
            if node in seen or not isinstance(node, (IRI, BNode)):
                return None
            seen.add(node)
            first = self.objects(node, RDF_FIRST)
            rest = self.objects(node, RDF_REST)
            if len(first) != 1 or len(rest) != 1:
                return None
            items.append(first[0])
            node = rest[0]
        return items

    def with_triples(self, triples: Iterable[Triple]) -> "Graph":
        return Graph(triples, self._prefixes, self._base)


def merge(*graphs: Graph) -> Graph:
    """RDF merge: union of the graphs with blank nodes kept apart.

    Blank nodes of each later graph are relabelled when their labels clash
    with labels already used. Prefix maps are combined, earlier graphs win.
    """
    triples: set[Triple] = set()
    used: set[str] = set()
    prefixes: dict[str, str] = {}
    for g in graphs:
        labels = {b.label for b in g.blank_nodes()}
        rename: dict[BNode, BNode] = {}
        if labels & used:
            n = 0
            for label in sorted(labels):
                fresh = label
                while fresh in used or (fresh != label and fresh in labels):
                    n += 1
                    fresh = f"{label}_{n}"
                rename[BNode(label)] = BNode(fresh)
        for t in g:
            if rename:
                t = Triple(
                    rename.get(t.subject, t.subject),  # type: ignore[arg-type]
                    t.predicate,
                    rename.get(t.object, t.object),  # type: ignore[arg-type]
                )
            triples.add(t)
        used |= {rename.get(BNode(label), BNode(label)).label for label in labels}
        for k, v in g.prefixes.items():
            prefixes.setdefault(k, v)
    return Graph(triples, prefixes)
