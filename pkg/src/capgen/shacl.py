"""SHACL Core subset: targets, cardinality, value-type and closed-shape checks.

Supported constraints are the four target kinds, ``sh:minCount``,
``sh:maxCount``, ``sh:class``, ``sh:datatype``, ``sh:nodeKind``,
``sh:hasValue``, ``sh:in`` and ``sh:closed`` with ``sh:ignoredProperties``,
on predicate and inverse paths. Anything else in the ``sh:`` namespace is
reported in :attr:`ShapesGraph.warnings` rather than silently dropped.
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .rdf import IRI, RDF, RDFS, SH, XSD, BNode, Graph, Literal, Term, merge
from .rdf.serializer import compact
from .rdf.terms import sort_key


class ShapeDefinitionError(ValueError):
    """A shape in the shapes graph is malformed."""

    def __init__(self, shape: Term, problem: str):
        super().__init__(f"shape {shape.n3()}: {problem}")
        self.shape = shape


class Severity(str, enum.Enum):
    VIOLATION = "Violation"
    WARNING = "Warning"
    INFO = "Info"


class NodeKind(str, enum.Enum):
    IRI = "IRI"
    LITERAL = "Literal"
    BLANK_NODE = "BlankNode"
    BLANK_NODE_OR_IRI = "BlankNodeOrIRI"
    IRI_OR_LITERAL = "IRIOrLiteral"
    BLANK_NODE_OR_LITERAL = "BlankNodeOrLiteral"

    def admits(self, term: Term) -> bool:
        kind = {IRI: "IRI", BNode: "BlankNode", Literal: "Literal"}[type(term)]
        return kind in _NODE_KIND_MEMBERS[self]


_NODE_KIND_MEMBERS = {
    NodeKind.IRI: {"IRI"},
    NodeKind.LITERAL: {"Literal"},
    NodeKind.BLANK_NODE: {"BlankNode"},
    NodeKind.BLANK_NODE_OR_IRI: {"BlankNode", "IRI"},
    NodeKind.IRI_OR_LITERAL: {"IRI", "Literal"},
    NodeKind.BLANK_NODE_OR_LITERAL: {"BlankNode", "Literal"},
}


class Component(str, enum.Enum):
    MIN_COUNT = "MinCountConstraintComponent"
    MAX_COUNT = "MaxCountConstraintComponent"
    CLASS = "ClassConstraintComponent"
    DATATYPE = "DatatypeConstraintComponent"
    NODE_KIND = "NodeKindConstraintComponent"
    HAS_VALUE = "HasValueConstraintComponent"
    IN = "InConstraintComponent"
    CLOSED = "ClosedConstraintComponent"

    @property
    def iri(self) -> IRI:
        return SH.term(self.value)


class TargetKind(str, enum.Enum):
    CLASS = "targetClass"
    NODE = "targetNode"
    SUBJECTS_OF = "targetSubjectsOf"
    OBJECTS_OF = "targetObjectsOf"


@dataclass(frozen=True)
class Path:
    predicate: IRI
    inverse: bool = False

    def n3(self, prefixes: Mapping[str, str] = {}) -> str:
        p = compact(self.predicate, prefixes)
        return f"^{p}" if self.inverse else p


@dataclass(frozen=True)
class PropertyShape:
    id: Term
    path: Path
    min_count: Optional[int] = None
    max_count: Optional[int] = None
    class_constraint: Optional[IRI] = None
    datatype: Optional[IRI] = None
    node_kind: Optional[NodeKind] = None
    has_value: Optional[Term] = None
    in_values: Optional[tuple[Term, ...]] = None
    severity: Severity = Severity.VIOLATION
    message: Optional[str] = None


@dataclass(frozen=True)
class NodeShape:
    id: Term
    targets: tuple[tuple[TargetKind, Term], ...]
    closed: bool = False
    ignored_properties: tuple[IRI, ...] = ()
    property_shapes: tuple[PropertyShape, ...] = ()
    severity: Severity = Severity.VIOLATION
    message: Optional[str] = None

    def allowed_predicates(self) -> set[IRI]:
        allowed = set(self.ignored_properties)
        allowed.update(ps.path.predicate for ps in self.property_shapes if not ps.path.inverse)
        return allowed


@dataclass(frozen=True)
class ShapesGraph:
    node_shapes: tuple[NodeShape, ...] = ()
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationResult:
    focus_node: Term
    path: Optional[Path]
    value: Optional[Term]
    component: Component
    source_shape: Term
    message: str
    severity: Severity = Severity.VIOLATION

    def sort_key(self) -> tuple:
        return (
            sort_key(self.focus_node),
            (self.path.inverse, sort_key(self.path.predicate)) if self.path else (False, (-1, "")),
            self.component.value,
            sort_key(self.value) if self.value is not None else (-1, ""),
            sort_key(self.source_shape),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "focus_node": self.focus_node.n3(),
            "path": self.path.n3() if self.path else None,
            "value": self.value.n3() if self.value is not None else None,
            "constraint_component": self.component.value,
            "source_shape": self.source_shape.n3(),
            "severity": self.severity.value,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    conforms: bool
    results: tuple[ValidationResult, ...] = ()
    prefixes: Mapping[str, str] = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {"conforms": self.conforms, "results": [r.to_dict() for r in self.results]}


# --- shapes graph parsing --------------------------------------------------

_TARGETS = {SH.term(k.value): k for k in TargetKind}
_NODE_KEYS = {
    *_TARGETS,
    SH.closed,
    SH.ignoredProperties,
    SH.property,
    SH.severity,
    SH.message,
    SH.deactivated,
}
_PROPERTY_KEYS = {
    SH.path,
    SH.minCount,
    SH.maxCount,
    SH["class"],
    SH.datatype,
    SH.nodeKind,
    SH.hasValue,
    SH["in"],
    SH.severity,
    SH.message,
    SH.deactivated,
}
# informational properties with no validation meaning
_NON_VALIDATING = {SH.name, SH.description, SH.order, SH.group, SH.defaultValue}
_PATH_FORMS = {SH.inversePath, SH.alternativePath, SH.zeroOrMorePath, SH.oneOrMorePath, SH.zeroOrOnePath}
_SEVERITIES = {SH.Violation: Severity.VIOLATION, SH.Warning: Severity.WARNING, SH.Info: Severity.INFO}


class _ShapeReader:
    def __init__(self, g: Graph):
        self.g = g
        self.warnings: list[str] = []

    def warn(self, shape: Term, text: str) -> None:
        self.warnings.append(f"{shape.n3()}: {text}")

    def single(self, shape: Term, pred: IRI) -> Optional[Term]:
        values = self.g.objects(shape, pred)
        if len(values) > 1:
            raise ShapeDefinitionError(shape, f"{compact(pred, _SH_PREFIX)} given {len(values)} times")
        return values[0] if values else None

    def integer(self, shape: Term, pred: IRI) -> Optional[int]:
        v = self.single(shape, pred)
        if v is None:
            return None
        if not isinstance(v, Literal) or not re.fullmatch(r"\+?[0-9]+", v.lexical):
            raise ShapeDefinitionError(shape, f"{compact(pred, _SH_PREFIX)} must be a non-negative integer")
        return int(v.lexical)

    def boolean(self, shape: Term, pred: IRI) -> bool:
        v = self.single(shape, pred)
        if v is None:
            return False
        if not isinstance(v, Literal) or v.lexical not in ("true", "false", "1", "0"):
            raise ShapeDefinitionError(shape, f"{compact(pred, _SH_PREFIX)} must be a boolean")
        return v.lexical in ("true", "1")

    def iri(self, shape: Term, pred: IRI) -> Optional[IRI]:
        v = self.single(shape, pred)
        if v is not None and not isinstance(v, IRI):
            raise ShapeDefinitionError(shape, f"{compact(pred, _SH_PREFIX)} must be an IRI")
        return v

    def items(self, shape: Term, pred: IRI) -> Optional[list[Term]]:
        head = self.single(shape, pred)
        if head is None:
            return None
        items = self.g.read_list(head)
        if items is None:
            raise ShapeDefinitionError(shape, f"{compact(pred, _SH_PREFIX)} must be an RDF list")
        return items

    def severity(self, shape: Term) -> Severity:
        v = self.single(shape, SH.severity)
        if v is None:
            return Severity.VIOLATION
        if v not in _SEVERITIES:
            self.warn(shape, f"unknown severity {v.n3()}; treated as sh:Violation")
            return Severity.VIOLATION
        return _SEVERITIES[v]  # type: ignore[index]

    def message(self, shape: Term) -> Optional[str]:
        msgs = sorted(m.lexical for m in self.g.objects(shape, SH.message) if isinstance(m, Literal))
        return msgs[0] if msgs else None

    def check_keys(self, shape: Term, allowed: set[IRI]) -> None:
        for t in sorted(self.g.match(shape, None, None), key=lambda t: t.predicate.value):
            p = t.predicate
            if p.value.startswith(str(SH)) and p not in allowed and p not in _NON_VALIDATING:
                self.warn(shape, f"unsupported SHACL construct {compact(p, _SH_PREFIX)} ignored")

    def deactivated(self, shape: Term) -> bool:
        return self.boolean(shape, SH.deactivated)

    def path(self, shape: Term) -> Optional[Path]:
        paths = self.g.objects(shape, SH.path)
        if len(paths) != 1:
            raise ShapeDefinitionError(shape, f"property shape needs exactly one sh:path, found {len(paths)}")
        node = paths[0]
        if isinstance(node, IRI):
            return Path(node)
        if isinstance(node, Literal):
            raise ShapeDefinitionError(shape, "sh:path must be an IRI or a blank node")
        forms = [t.predicate for t in self.g.match(node, None, None) if t.predicate in _PATH_FORMS]
        is_list = bool(self.g.objects(node, RDF.first))
        if len(forms) + is_list > 1:
            raise ShapeDefinitionError(shape, "sh:path combines several path forms")
        if forms == [SH.inversePath]:
            inner = self.g.objects(node, SH.inversePath)
            if len(inner) == 1 and isinstance(inner[0], IRI):
                return Path(inner[0], inverse=True)
        kind = compact(forms[0], _SH_PREFIX) if forms else "sequence path"
        self.warn(shape, f"unsupported path form ({kind}); property shape ignored")
        return None

    def property_shape(self, shape: Term) -> Optional[PropertyShape]:
        self.check_keys(shape, _PROPERTY_KEYS)
        if self.deactivated(shape):
            return None
        path = self.path(shape)
        if path is None:
            return None
        min_count = self.integer(shape, SH.minCount)
        max_count = self.integer(shape, SH.maxCount)
        if min_count is not None and max_count is not None and min_count > max_count:
            raise ShapeDefinitionError(shape, f"sh:minCount {min_count} exceeds sh:maxCount {max_count}")
        node_kind = self.iri(shape, SH.nodeKind)
        kind = None
        if node_kind is not None:
            try:
                kind = NodeKind(node_kind.value[len(SH) :])
            except ValueError:
                raise ShapeDefinitionError(shape, f"unknown sh:nodeKind {node_kind.n3()}") from None
        in_values = self.items(shape, SH["in"])
        return PropertyShape(
            id=shape,
            path=path,
            min_count=min_count,
            max_count=max_count,
            class_constraint=self.iri(shape, SH["class"]),
            datatype=self.iri(shape, SH.datatype),
            node_kind=kind,
            has_value=self.single(shape, SH.hasValue),
            in_values=tuple(in_values) if in_values is not None else None,
            severity=self.severity(shape),
            message=self.message(shape),
        )

    def node_shape(self, shape: Term) -> Optional[NodeShape]:
        self.check_keys(shape, _NODE_KEYS)
        if self.deactivated(shape):
            return None
        targets = sorted(
            ((_TARGETS[t.predicate], t.object) for t in self.g.match(shape, None, None) if t.predicate in _TARGETS),
            key=lambda kv: (kv[0].value, sort_key(kv[1])),
        )
        if not targets:
            self.warn(shape, "node shape has no target and is never applied")
            return None
        ignored = self.items(shape, SH.ignoredProperties) or []
        if any(not isinstance(i, IRI) for i in ignored):
            raise ShapeDefinitionError(shape, "sh:ignoredProperties must list IRIs")
        props = []
        for ps in sorted(self.g.objects(shape, SH.property), key=sort_key):
            parsed = self.property_shape(ps)
            if parsed is not None:
                props.append(parsed)
        for kind, value in targets:
            if kind is not TargetKind.NODE and not isinstance(value, IRI):
                raise ShapeDefinitionError(shape, f"sh:{kind.value} must be an IRI")
        return NodeShape(
            id=shape,
            targets=tuple(targets),
            closed=self.boolean(shape, SH.closed),
            ignored_properties=tuple(ignored),  # type: ignore[arg-type]
            property_shapes=tuple(props),
            severity=self.severity(shape),
            message=self.message(shape),
        )


_SH_PREFIX = {"sh": str(SH)}


def parse_shapes(doc: Graph) -> ShapesGraph:
    """Read node shapes and their property shapes from a shapes graph.

    Raises:
        ShapeDefinitionError: for malformed shapes, naming the shape.
    """
    reader = _ShapeReader(doc)
    candidates = set(doc.subjects(RDF.type, SH.NodeShape))
    for pred in _TARGETS:
        candidates.update(t.subject for t in doc.match(None, pred, None))
    shapes = []
    for s in sorted(candidates, key=sort_key):
        parsed = reader.node_shape(s)
        if parsed is not None:
            shapes.append(parsed)
    return ShapesGraph(tuple(shapes), tuple(reader.warnings))


# --- validation ------------------------------------------------------------

_INT_TYPES = {
    "integer": None,
    "int": (-(2**31), 2**31 - 1),
    "long": (-(2**63), 2**63 - 1),
    "short": (-(2**15), 2**15 - 1),
    "byte": (-128, 127),
    "nonNegativeInteger": (0, None),
    "positiveInteger": (1, None),
    "nonPositiveInteger": (None, 0),
    "negativeInteger": (None, -1),
    "unsignedInt": (0, 2**32 - 1),
    "unsignedLong": (0, 2**64 - 1),
    "unsignedShort": (0, 2**16 - 1),
    "unsignedByte": (0, 255),
}
_LEXICAL = {
    "decimal": re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)"),
    "double": re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?INF|NaN"),
    "float": re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?INF|NaN"),
    "boolean": re.compile(r"true|false|1|0"),
    "date": re.compile(r"-?[0-9]{4,}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])(Z|[+-][0-9]{2}:[0-9]{2})?"),
    "dateTime": re.compile(
        r"-?[0-9]{4,}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])T([01][0-9]|2[0-4]):[0-5][0-9]:[0-5][0-9](\.[0-9]+)?"
        r"(Z|[+-][0-9]{2}:[0-9]{2})?"
    ),
}


def _well_formed(lit: Literal) -> bool:
    dt = lit.datatype.value
    if not dt.startswith(str(XSD)):
        return True
    local = dt[len(XSD) :]
    if local in _INT_TYPES:
        if not re.fullmatch(r"[+-]?[0-9]+", lit.lexical):
            return False
        bounds = _INT_TYPES[local]
        if bounds is None:
            return True
        lo, hi = bounds
        v = int(lit.lexical)
        return (lo is None or v >= lo) and (hi is None or v <= hi)
    rx = _LEXICAL.get(local)
    return rx is None or rx.fullmatch(lit.lexical) is not None


class _Validator:
    def __init__(self, data: Graph, schema: Graph):
        self.data = data
        hierarchy = merge(schema, data)
        self.supers: dict[Term, set[Term]] = defaultdict(set)
        edges: dict[Term, set[Term]] = defaultdict(set)
        for t in hierarchy.match(None, RDFS.subClassOf, None):
            edges[t.subject].add(t.object)
        self.edges = edges
        self.typed = hierarchy
        self.prefixes = {**schema.prefixes, **data.prefixes}
        self.results: list[ValidationResult] = []

    def superclasses(self, cls: Term) -> set[Term]:
        if cls not in self.supers:
            seen = {cls}
            stack = [cls]
            while stack:
                for sup in self.edges.get(stack.pop(), ()):
                    if sup not in seen:
                        seen.add(sup)
                        stack.append(sup)
            self.supers[cls] = seen
        return self.supers[cls]

    def is_instance(self, node: Term, cls: Term, graph: Graph) -> bool:
        return any(cls in self.superclasses(t) for t in graph.objects(node, RDF.type))

    def name(self, term: Term) -> str:
        return compact(term, self.prefixes)

    def focus_nodes(self, shape: NodeShape) -> list[Term]:
        found: set[Term] = set()
        for kind, value in shape.targets:
            if kind is TargetKind.NODE:
                found.add(value)
            elif kind is TargetKind.CLASS:
                for t in self.data.match(None, RDF.type, None):
                    if value in self.superclasses(t.object):
                        found.add(t.subject)
            elif kind is TargetKind.SUBJECTS_OF:
                found.update(t.subject for t in self.data.match(None, value, None))  # type: ignore[arg-type]
            else:
                found.update(t.object for t in self.data.match(None, value, None))  # type: ignore[arg-type]
        return sorted(found, key=sort_key)

    def values(self, focus: Term, path: Path) -> list[Term]:
        if path.inverse:
            return sorted(set(self.data.subjects(path.predicate, focus)), key=sort_key)
        if isinstance(focus, Literal):
            return []
        return sorted(set(self.data.objects(focus, path.predicate)), key=sort_key)

    def report(self, shape: Any, focus: Term, path: Optional[Path], value: Optional[Term],
               component: Component, detail: str) -> None:
        text = f"{self.name(focus)}: {detail}"
        if shape.message:
            text = f"{self.name(focus)}: {shape.message} ({detail})"
        self.results.append(
            ValidationResult(focus, path, value, component, shape.id, " ".join(text.split()), shape.severity)
        )

    def check_property(self, ps: PropertyShape, focus: Term) -> None:
        vals = self.values(focus, ps.path)
        path = ps.path
        pname = path.n3(self.prefixes)
        if ps.min_count is not None and len(vals) < ps.min_count:
            self.report(ps, focus, path, None, Component.MIN_COUNT,
                        f"has {len(vals)} value(s) for {pname} but needs at least {ps.min_count}")
        if ps.max_count is not None and len(vals) > ps.max_count:
            self.report(ps, focus, path, None, Component.MAX_COUNT,
                        f"has {len(vals)} value(s) for {pname} but allows at most {ps.max_count}")
        if ps.class_constraint is not None:
            for v in vals:
                if isinstance(v, Literal) or not self.is_instance(v, ps.class_constraint, self.typed):
                    self.report(ps, focus, path, v, Component.CLASS,
                                f"value {self.name(v)} of {pname} is not an instance of {self.name(ps.class_constraint)}")
        if ps.datatype is not None:
            for v in vals:
                ok = isinstance(v, Literal) and v.datatype == ps.datatype and _well_formed(v)
                if not ok:
                    self.report(ps, focus, path, v, Component.DATATYPE,
                                f"value {self.name(v)} of {pname} is not a valid {self.name(ps.datatype)} literal")
        if ps.node_kind is not None:
            for v in vals:
                if not ps.node_kind.admits(v):
                    self.report(ps, focus, path, v, Component.NODE_KIND,
                                f"value {self.name(v)} of {pname} is not of node kind sh:{ps.node_kind.value}")
        if ps.has_value is not None and ps.has_value not in vals:
            self.report(ps, focus, path, None, Component.HAS_VALUE,
                        f"{pname} must include the value {self.name(ps.has_value)}")
        if ps.in_values is not None:
            allowed = set(ps.in_values)
            for v in vals:
                if v not in allowed:
                    shown = ", ".join(self.name(x) for x in ps.in_values)
                    self.report(ps, focus, path, v, Component.IN,
                                f"value {self.name(v)} of {pname} is not one of ({shown})")

    def check_closed(self, shape: NodeShape, focus: Term) -> None:
        allowed = shape.allowed_predicates()
        if isinstance(focus, Literal):
            return
        offending = sorted(
            (t for t in self.data.match(focus, None, None) if t.predicate not in allowed),
            key=lambda t: (sort_key(t.predicate), sort_key(t.object)),
        )
        for t in offending:
            shown = ", ".join(sorted(self.name(p) for p in allowed))
            self.report(shape, focus, Path(t.predicate), t.object, Component.CLOSED,
                        f"uses {self.name(t.predicate)} (value {self.name(t.object)}), which closed shape "
                        f"{self.name(shape.id)} does not allow; allowed predicates: {shown}")

    def run(self, shapes: ShapesGraph) -> ValidationReport:
        for shape in shapes.node_shapes:
            for focus in self.focus_nodes(shape):
                for ps in shape.property_shapes:
                    self.check_property(ps, focus)
                if shape.closed:
                    self.check_closed(shape, focus)
        results = tuple(sorted(self.results, key=ValidationResult.sort_key))
        # any result, whatever its severity, means the data does not conform
        conforms = not results
        return ValidationReport(conforms, results, self.prefixes)


def validate(data: Graph, schema: Graph, shapes: ShapesGraph) -> ValidationReport:
    """Validate ``data`` against ``shapes``.

    ``schema`` contributes the ``rdfs:subClassOf`` hierarchy used for
    ``sh:targetClass`` and ``sh:class`` and the types of vocabulary
    individuals; focus nodes themselves come from ``data`` only.
    """
    return _Validator(data, schema).run(shapes)


def render_report(report: ValidationReport, prefixes: Optional[Mapping[str, str]] = None) -> str:
    """One line per result, then ``conforms: true|false``."""
    pm = report.prefixes if prefixes is None else prefixes
    lines = []
    for r in report.results:
        path = r.path.n3(pm) if r.path else "-"
        lines.append(
            f"[{r.severity.value}] focus={compact(r.focus_node, pm)} path={path} "
            f"component=sh:{r.component.value} message={r.message}"
        )
    lines.append(f"conforms: {'true' if report.conforms else 'false'}")
    return "\n".join(lines)


def result_keys(report: ValidationReport) -> list[tuple[str, str]]:
    """(focus node, component) pairs, handy for comparing reports."""
    return sorted((r.focus_node.n3(), r.component.value) for r in report.results)

