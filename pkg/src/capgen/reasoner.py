"""Forward-chaining consistency checking over an OWL RL style rule subset.

The closure is computed with semi-naive evaluation over :class:`InferenceRule`
patterns, then scanned for contradictions. This is deliberately not a complete
OWL 2 DL reasoner: it covers the class hierarchy, property characteristics and
``owl:sameAs`` handling needed to expose the clash kinds in :class:`ClashKind`.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .rdf import IRI, OWL, RDF, RDFS, Graph, Literal, Term, Triple, merge
from .rdf.serializer import compact
from .rdf.terms import triple_sort_key

DEFAULT_TRIPLE_CAP = 1_000_000

Pattern = tuple[Union[Term, str], Union[Term, str], Union[Term, str]]
Bindings = dict[str, Term]

TYPE = RDF.type
SUBCLASS = RDFS.subClassOf
SUBPROP = RDFS.subPropertyOf
SAME = OWL.sameAs


class ClosureLimitExceeded(RuntimeError):
    """The closure grew past the configured triple cap."""

    def __init__(self, cap: int):
        super().__init__(
            f"closure exceeded {cap} triples; the ontology is pathological or the cap is too low"
        )
        self.cap = cap


@dataclass(frozen=True)
class InferenceRule:
    """A Horn rule over triple patterns; variables are strings starting with '?'."""

    id: str
    premises: tuple[Pattern, ...]
    conclusion: Pattern
    guard: Optional[Callable[[Bindings], bool]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        bound = {v for p in self.premises for v in p if _is_var(v)}
        free = {v for v in self.conclusion if _is_var(v)} - bound
        if free:
            raise ValueError(f"rule {self.id}: conclusion variables {sorted(free)} not bound by premises")


def _is_var(x: object) -> bool:
    return isinstance(x, str) and x.startswith("?")


def _not_literal(*names: str) -> Callable[[Bindings], bool]:
    return lambda b: not any(isinstance(b[n], Literal) for n in names)


def _distinct_resources(a: str, b: str) -> Callable[[Bindings], bool]:
    return lambda env: env[a] != env[b] and not isinstance(env[a], Literal) and not isinstance(env[b], Literal)


RULES: tuple[InferenceRule, ...] = (
    InferenceRule("rdfs2", (("?p", RDFS.domain, "?c"), ("?x", "?p", "?y")), ("?x", TYPE, "?c")),
    InferenceRule("rdfs3", (("?p", RDFS.range, "?c"), ("?x", "?p", "?y")), ("?y", TYPE, "?c"), _not_literal("?y")),
    InferenceRule("rdfs5", (("?p", SUBPROP, "?q"), ("?q", SUBPROP, "?r")), ("?p", SUBPROP, "?r")),
    InferenceRule("rdfs7", (("?p", SUBPROP, "?q"), ("?x", "?p", "?y")), ("?x", "?q", "?y")),
    InferenceRule("rdfs9", (("?c", SUBCLASS, "?d"), ("?x", TYPE, "?c")), ("?x", TYPE, "?d")),
    InferenceRule("rdfs11", (("?c", SUBCLASS, "?d"), ("?d", SUBCLASS, "?e")), ("?c", SUBCLASS, "?e")),
    InferenceRule("cax-eqc1", (("?c", OWL.equivalentClass, "?d"),), ("?c", SUBCLASS, "?d")),
    InferenceRule("cax-eqc2", (("?c", OWL.equivalentClass, "?d"),), ("?d", SUBCLASS, "?c")),
    InferenceRule("prp-eqp1", (("?p", OWL.equivalentProperty, "?q"),), ("?p", SUBPROP, "?q")),
    InferenceRule("prp-eqp2", (("?p", OWL.equivalentProperty, "?q"),), ("?q", SUBPROP, "?p")),
    InferenceRule("prp-inv1", (("?p", OWL.inverseOf, "?q"), ("?x", "?p", "?y")), ("?y", "?q", "?x")),
    InferenceRule("prp-inv2", (("?p", OWL.inverseOf, "?q"), ("?x", "?q", "?y")), ("?y", "?p", "?x")),
    InferenceRule("prp-symp", (("?p", TYPE, OWL.SymmetricProperty), ("?x", "?p", "?y")), ("?y", "?p", "?x")),
    InferenceRule(
        "prp-trp",
        (("?p", TYPE, OWL.TransitiveProperty), ("?x", "?p", "?y"), ("?y", "?p", "?z")),
        ("?x", "?p", "?z"),
    ),
    InferenceRule("eq-sym", (("?x", SAME, "?y"),), ("?y", SAME, "?x")),
    InferenceRule("eq-trans", (("?x", SAME, "?y"), ("?y", SAME, "?z")), ("?x", SAME, "?z")),
    InferenceRule("eq-rep-s", (("?x", SAME, "?y"), ("?x", "?p", "?o")), ("?y", "?p", "?o")),
    InferenceRule("eq-rep-o", (("?x", SAME, "?y"), ("?s", "?p", "?x")), ("?s", "?p", "?y")),
    InferenceRule(
        "prp-fp",
        (("?p", TYPE, OWL.FunctionalProperty), ("?x", "?p", "?y1"), ("?x", "?p", "?y2")),
        ("?y1", SAME, "?y2"),
        _distinct_resources("?y1", "?y2"),
    ),
    InferenceRule(
        "prp-ifp",
        (("?p", TYPE, OWL.InverseFunctionalProperty), ("?x1", "?p", "?y"), ("?x2", "?p", "?y")),
        ("?x1", SAME, "?x2"),
        _distinct_resources("?x1", "?x2"),
    ),
)


class _FactStore:
    def __init__(self) -> None:
        self.all: set[Triple] = set()
        self.sp: dict[tuple, set] = defaultdict(set)
        self.po: dict[tuple, set] = defaultdict(set)
        self.p: dict[Term, set] = defaultdict(set)
        self.s: dict[Term, set] = defaultdict(set)
        self.o: dict[Term, set] = defaultdict(set)

    def add(self, t: Triple) -> bool:
        if t in self.all:
            return False
        self.all.add(t)
        s, p, o = t
        self.sp[(s, p)].add(t)
        self.po[(p, o)].add(t)
        self.p[p].add(t)
        self.s[s].add(t)
        self.o[o].add(t)
        return True

    def candidates(self, s: Optional[Term], p: Optional[Term], o: Optional[Term]) -> Iterable[Triple]:
        if s is not None and p is not None:
            return self.sp.get((s, p), ())
        if p is not None and o is not None:
            return self.po.get((p, o), ())
        if s is not None:
            return self.s.get(s, ())
        if o is not None:
            return self.o.get(o, ())
        if p is not None:
            return self.p.get(p, ())
        return self.all


def _resolve(x: Union[Term, str], env: Bindings) -> Optional[Term]:
    if _is_var(x):
        return env.get(x)  # type: ignore[arg-type]
    return x  # type: ignore[return-value]


def _unify(pattern: Pattern, t: Triple, env: Bindings) -> Optional[Bindings]:
    out = env
    for pat, val in zip(pattern, t):
        if _is_var(pat):
            bound = out.get(pat)  # type: ignore[arg-type]
            if bound is None:
                if out is env:
                    out = dict(env)
                out[pat] = val  # type: ignore[index]
            elif bound != val:
                return None
        elif pat != val:
            return None
    return out


def _match_all(
    premises: Sequence[Pattern], store: _FactStore, env: Bindings
) -> Iterator[Bindings]:
    if not premises:
        yield env
        return
    pat, rest = premises[0], premises[1:]
    s, p, o = (_resolve(x, env) for x in pat)
    for t in list(store.candidates(s, p, o)):
        new = _unify(pat, t, env)
        if new is not None:
            yield from _match_all(rest, store, new)


def _instantiate(pattern: Pattern, env: Bindings) -> Optional[Triple]:
    s, p, o = (_resolve(x, env) for x in pattern)
    if isinstance(s, Literal) or not isinstance(p, IRI):
        return None
    return Triple(s, p, o)  # type: ignore[arg-type]


def _close(
    facts: Iterable[Triple], rules: Sequence[InferenceRule], cap: int
) -> set[Triple]:
    store = _FactStore()
    delta: set[Triple] = set()
    for t in facts:
        if store.add(t):
            delta.add(t)
    if len(store.all) > cap:
        raise ClosureLimitExceeded(cap)
    while delta:
        derived: set[Triple] = set()
        for rule in rules:
            for i, pat in enumerate(rule.premises):
                others = rule.premises[:i] + rule.premises[i + 1 :]
                for t in delta:
                    env = _unify(pat, t, {})
                    if env is None:
                        continue
                    for full in _match_all(others, store, env):
                        if rule.guard is not None and not rule.guard(full):
                            continue
                        new = _instantiate(rule.conclusion, full)
                        if new is not None and new not in store.all:
                            derived.add(new)
        delta = set()
        for t in derived:
            if store.add(t):
                delta.add(t)
        if len(store.all) > cap:
            raise ClosureLimitExceeded(cap)
    return store.all


def compute_closure(
    data: Graph,
    schema: Graph,
    *,
    rules: Sequence[InferenceRule] = RULES,
    triple_cap: int = DEFAULT_TRIPLE_CAP,
) -> Graph:
    """Return ``data`` merged with ``schema`` and closed under ``rules``.

    Raises:
        ClosureLimitExceeded: when the closure grows beyond ``triple_cap``.
    """
    merged = merge(data, schema)
    return merged.with_triples(_close(merged, rules, triple_cap))


# --- clash detection -------------------------------------------------------


class ClashKind(str, enum.Enum):
    DISJOINT_CLASSES = "DisjointClasses"
    NOTHING_MEMBER = "NothingMember"
    SAME_DIFFERENT_CONFLICT = "SameDifferentConflict"
    NEGATIVE_ASSERTION_VIOLATED = "NegativeAssertionViolated"
    IRREFLEXIVE_VIOLATED = "IrreflexiveViolated"
    ASYMMETRIC_VIOLATED = "AsymmetricViolated"
    DISJOINT_PROPERTIES_VIOLATED = "DisjointPropertiesViolated"
    FUNCTIONAL_LITERAL_CLASH = "FunctionalLiteralClash"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Clash:
    kind: ClashKind
    involved_triples: tuple[Triple, ...]
    explanation: str

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.explanation}"


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    clashes: tuple[Clash, ...]
    closure_size: int

    def render(self) -> str:
        if self.consistent:
            return "consistent: true"
        lines = [f"- {c}" for c in self.clashes]
        n = len(self.clashes)
        lines.append(f"consistent: false ({n} {'clash' if n == 1 else 'clashes'})")
        return "\n".join(lines)


class _Scanner:
    def __init__(self, closure: Graph, prefixes: Mapping[str, str]):
        self.g = closure
        self.prefixes = prefixes
        self.clashes: list[Clash] = []
        self.seen: set = set()

    def name(self, term: Term) -> str:
        return compact(term, self.prefixes)

    def match(self, s=None, p=None, o=None) -> list[Triple]:
        return sorted(self.g.match(s, p, o), key=triple_sort_key)

    def add(self, kind: ClashKind, key: object, triples: Iterable[Triple], text: str) -> None:
        if (kind, key) in self.seen:
            return
        self.seen.add((kind, key))
        self.clashes.append(Clash(kind, tuple(triples), text))

    def disjoint_pairs(self) -> Iterator[tuple[Term, Term, Triple]]:
        for t in self.match(None, OWL.disjointWith, None):
            yield t.subject, t.object, t
        for t in self.match(None, TYPE, OWL.AllDisjointClasses):
            members = self.g.value(t.subject, OWL.members)
            items = self.g.read_list(members) if members is not None else None
            for a, b in combinations(items or [], 2):
                yield a, b, t

    def disjoint_classes(self) -> None:
        for a, b, axiom in self.disjoint_pairs():
            if a == b:
                continue
            for ta in self.match(None, TYPE, a):
                x = ta.subject
                tb = Triple(x, TYPE, b)  # type: ignore[arg-type]
                if tb in self.g:
                    key = (x, frozenset((a, b)))
                    self.add(
                        ClashKind.DISJOINT_CLASSES,
                        key,
                        (ta, tb, axiom),
                        f"{self.name(x)} is an instance of both {self.name(a)} and {self.name(b)}, "
                        f"which are declared disjoint",
                    )

    def nothing(self) -> None:
        for t in self.match(None, TYPE, OWL.Nothing):
            self.add(
                ClashKind.NOTHING_MEMBER,
                t.subject,
                (t,),
                f"{self.name(t.subject)} is an instance of owl:Nothing, which can have no members",
            )

    def same_different(self) -> None:
        # substitution copies a conflict onto every alias; report one per alias class
        conflicts = sorted(
            self.match(None, OWL.differentFrom, None),
            key=lambda t: (t.subject == t.object, triple_sort_key(t)),
        )
        for t in conflicts:
            a, b = t.subject, t.object
            aliases = frozenset([a, *self.g.objects(a, SAME)])
            if a == b:
                self.add(
                    ClashKind.SAME_DIFFERENT_CONFLICT,
                    aliases,
                    (t,),
                    f"{self.name(a)} is declared different from itself",
                )
                continue
            same = Triple(a, SAME, b)  # type: ignore[arg-type]
            if same in self.g:
                self.add(
                    ClashKind.SAME_DIFFERENT_CONFLICT,
                    aliases,
                    (same, t),
                    f"{self.name(a)} and {self.name(b)} are both owl:sameAs and owl:differentFrom each other",
                )

    def negative_assertions(self) -> None:
        for decl in self.match(None, TYPE, OWL.NegativePropertyAssertion):
            n = decl.subject
            src = self.g.value(n, OWL.sourceIndividual)
            prop = self.g.value(n, OWL.assertionProperty)
            target = self.g.value(n, OWL.targetIndividual)
            if target is None:
                target = self.g.value(n, OWL.targetValue)
            if src is None or target is None or not isinstance(prop, IRI) or isinstance(src, Literal):
                continue
            t = Triple(src, prop, target)
            if t in self.g:
                self.add(
                    ClashKind.NEGATIVE_ASSERTION_VIOLATED,
                    (src, prop, target),
                    (t, decl),
                    f"{self.name(src)} {self.name(prop)} {self.name(target)} holds, "
                    f"but a negative property assertion forbids it",
                )

    def irreflexive(self) -> None:
        for decl in self.match(None, TYPE, OWL.IrreflexiveProperty):
            p = decl.subject
            if not isinstance(p, IRI):
                continue
            for t in self.match(None, p, None):
                if t.subject == t.object:
                    self.add(
                        ClashKind.IRREFLEXIVE_VIOLATED,
                        (t.subject, p),
                        (t, decl),
                        f"{self.name(t.subject)} is related to itself by {self.name(p)}, which is irreflexive",
                    )

    def asymmetric(self) -> None:
        for decl in self.match(None, TYPE, OWL.AsymmetricProperty):
            p = decl.subject
            if not isinstance(p, IRI):
                continue
            for t in self.match(None, p, None):
                if isinstance(t.object, Literal):
                    continue
                back = Triple(t.object, p, t.subject)  # type: ignore[arg-type]
                if back in self.g:
                    self.add(
                        ClashKind.ASYMMETRIC_VIOLATED,
                        (frozenset((t.subject, t.object)), p),
                        (t, back, decl),
                        f"{self.name(t.subject)} and {self.name(t.object)} are related in both directions "
                        f"by {self.name(p)}, which is asymmetric",
                    )

    def disjoint_properties(self) -> None:
        for decl in self.match(None, OWL.propertyDisjointWith, None):
            p, q = decl.subject, decl.object
            if not isinstance(p, IRI) or not isinstance(q, IRI) or p == q:
                continue
            for t in self.match(None, p, None):
                other = Triple(t.subject, q, t.object)
                if other in self.g:
                    self.add(
                        ClashKind.DISJOINT_PROPERTIES_VIOLATED,
                        (t.subject, t.object, frozenset((p, q))),
                        (t, other, decl),
                        f"{self.name(t.subject)} is related to {self.name(t.object)} by both "
                        f"{self.name(p)} and {self.name(q)}, which are declared disjoint",
                    )

    def functional_literals(self) -> None:
        for decl in self.match(None, TYPE, OWL.FunctionalProperty):
            p = decl.subject
            if not isinstance(p, IRI):
                continue
            values: dict[Term, list[Triple]] = defaultdict(list)
            for t in self.match(None, p, None):
                if isinstance(t.object, Literal):
                    values[t.subject].append(t)
            for subj, ts in values.items():
                if len(ts) < 2:
                    continue
                ts = sorted(ts, key=lambda t: t.object.n3())
                shown = ", ".join(self.name(t.object) for t in ts)
                self.add(
                    ClashKind.FUNCTIONAL_LITERAL_CLASH,
                    (subj, p),
                    (*ts, decl),
                    f"{self.name(subj)} has {len(ts)} different values for the functional property "
                    f"{self.name(p)}: {shown} (literals are equal only if lexical form and datatype match)",
                )

    def run(self) -> list[Clash]:
        self.disjoint_classes()
        self.nothing()
        self.same_different()
        self.negative_assertions()
        self.irreflexive()
        self.asymmetric()
        self.disjoint_properties()
        self.functional_literals()
        order = list(ClashKind)
        return sorted(self.clashes, key=lambda c: (order.index(c.kind), c.explanation))


def find_clashes(closure: Graph, prefixes: Optional[Mapping[str, str]] = None) -> list[Clash]:
    """Scan an already closed graph for contradictions."""
    return _Scanner(closure, closure.prefixes if prefixes is None else prefixes).run()


def check_consistency(
    data: Graph,
    schema: Graph,
    *,
    rules: Sequence[InferenceRule] = RULES,
    triple_cap: int = DEFAULT_TRIPLE_CAP,
    prefixes: Optional[Mapping[str, str]] = None,
) -> ConsistencyResult:
    closure = compute_closure(data, schema, rules=rules, triple_cap=triple_cap)
    clashes = find_clashes(closure, prefixes)
    return ConsistencyResult(not clashes, tuple(clashes), len(closure))
