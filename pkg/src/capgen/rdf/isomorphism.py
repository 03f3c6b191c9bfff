"""Graph isomorphism modulo blank-node relabelling."""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Optional

from .graph import Graph
from .terms import BNode, Term, Triple


def _refine(graph: Graph, nodes: set[BNode]) -> dict[BNode, int]:
    """Colour blank nodes by iterated neighbourhood hashing."""
    colour = {b: 0 for b in nodes}
    edges: dict[BNode, list[tuple[str, str, Term]]] = defaultdict(list)
    for s, p, o in graph:
        if isinstance(s, BNode):
            edges[s].append(("out", p.value, o))
        if isinstance(o, BNode):
            edges[o].append(("in", p.value, s))

    def show(t: Term) -> object:
        return ("b", colour[t]) if isinstance(t, BNode) else t.n3()

    classes = 1
    for _ in range(len(nodes) + 1):
        updated = {
            b: hash((colour[b], tuple(sorted(repr((d, p, show(t))) for d, p, t in edges[b]))))
            for b in nodes
        }
        n = len(set(updated.values()))
        colour = updated
        if n == classes:
            break
        classes = n
    return colour


def find_bijection(a: Graph, b: Graph) -> Optional[dict[BNode, BNode]]:
    """Return a blank-node mapping that carries ``a`` onto ``b``, if any."""
    if len(a) != len(b):
        return None
    a_nodes, b_nodes = a.blank_nodes(), b.blank_nodes()
    if len(a_nodes) != len(b_nodes):
        return None
    a_ground = {t for t in a if not isinstance(t.subject, BNode) and not isinstance(t.object, BNode)}
    b_ground = {t for t in b if not isinstance(t.subject, BNode) and not isinstance(t.object, BNode)}
    if a_ground != b_ground:
        return None
    if not a_nodes:
        return {}

    # colour both graphs in one pass so hash values are comparable
    joint = Graph(
        [Triple(_tag(t.subject, "a"), t.predicate, _tag(t.object, "a")) for t in a]
        + [Triple(_tag(t.subject, "b"), t.predicate, _tag(t.object, "b")) for t in b]
    )
    colours = _refine(joint, joint.blank_nodes())
    ca = {n: colours[_tag(n, "a")] for n in a_nodes}
    cb = {n: colours[_tag(n, "b")] for n in b_nodes}
    if Counter(ca.values()) != Counter(cb.values()):
        return None

    by_colour: dict[int, list[BNode]] = defaultdict(list)
    for n, c in cb.items():
        by_colour[c].append(n)
    order = sorted(a_nodes, key=lambda n: (len(by_colour[ca[n]]), n.label))

    touching: dict[BNode, list[Triple]] = defaultdict(list)
    for t in a:
        if isinstance(t.subject, BNode):
            touching[t.subject].append(t)
        if isinstance(t.object, BNode) and t.object != t.subject:
            touching[t.object].append(t)
    b_set = b.triples
    mapping: dict[BNode, BNode] = {}
    used: set[BNode] = set()

    def consistent(node: BNode) -> bool:
        for t in touching[node]:
            s, o = t.subject, t.object
            if isinstance(s, BNode):
                if s not in mapping:
                    continue
                s = mapping[s]
            if isinstance(o, BNode):
                if o not in mapping:
                    continue
                o = mapping[o]
            if Triple(s, t.predicate, o) not in b_set:
                return False
        return True

    def search() -> bool:
        # iterative depth-first search; one candidate iterator per level
        levels = [iter(by_colour[ca[order[0]]])]
        while levels:
            node = order[len(levels) - 1]
            if node in mapping:
                used.discard(mapping.pop(node))
            for cand in levels[-1]:
                if cand in used:
                    continue
                mapping[node] = cand
                used.add(cand)
                if consistent(node):
                    break
                used.discard(mapping.pop(node))
            else:
                levels.pop()
                continue
            if len(levels) == len(order):
                return True
            levels.append(iter(by_colour[ca[order[len(levels)]]]))
        return False

    return dict(mapping) if search() else None


def _tag(term: Term, side: str) -> Term:
    return BNode(f"{side}:{term.label}") if isinstance(term, BNode) else term


def graph_isomorphic(a: Graph, b: Graph) -> bool:
    """True iff some blank-node bijection maps the triples of ``a`` onto ``b``."""
    return find_bijection(a, b) is not None
