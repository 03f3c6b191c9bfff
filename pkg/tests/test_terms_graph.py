import pytest

from capgen.rdf import IRI, RDF, XSD, BNode, Graph, Literal, Triple, merge
from capgen.rdf.terms import RDF_LANGSTRING, XSD_STRING, make_triple, sort_key

EX = "http://example.org/"


def iri(x):
    return IRI(EX + x)


def test_iri_rejects_whitespace_and_empty():
    with pytest.raises(ValueError):
        IRI("")
    with pytest.raises(ValueError):
        IRI("http://a b")


def test_iri_n3_escapes_unsafe_characters():
    assert IRI('http://x/"q"').n3() == "<http://x/\\u0022q\\u0022>"


def test_literal_defaults_and_language():
    assert Literal("x").datatype == XSD_STRING
    lit = Literal("chat", language="FR")
    assert lit.language == "fr" and lit.datatype == RDF_LANGSTRING
    assert lit.n3() == '"chat"@fr'
    with pytest.raises(ValueError):
        Literal("x", RDF_LANGSTRING)


def test_literal_equality_is_term_equality():
    assert Literal("1", XSD.integer) != Literal("01", XSD.integer)
    assert Literal("a") == Literal("a", XSD_STRING)


def test_make_triple_positions():
    with pytest.raises(ValueError):
        make_triple(Literal("x"), iri("p"), iri("o"))
    with pytest.raises(ValueError):
        make_triple(iri("s"), BNode("b"), iri("o"))


def test_sort_key_orders_kinds():
    terms = [Literal("a"), BNode("z"), iri("b")]
    assert [type(t) for t in sorted(terms, key=sort_key)] == [IRI, BNode, Literal]


def test_graph_set_semantics_and_match():
    t1 = Triple(iri("s"), iri("p"), iri("o"))
    t2 = Triple(iri("s"), iri("q"), Literal("v"))
    g = Graph([t1, t1, t2])
    assert len(g) == 2
    assert g.match(iri("s"), None, None) and set(g.match(None, iri("q"), None)) == {t2}
    assert g.objects(iri("s"), iri("q")) == [Literal("v")]
    assert g.value(iri("s"), iri("p")) == iri("o")
    assert Graph([t2, t1]) == g and hash(Graph([t2, t1])) == hash(g)


def test_read_list_and_malformed_list():
    head, tail = BNode("l1"), BNode("l2")
    g = Graph(
        [
            Triple(head, RDF.first, Literal("a")),
            Triple(head, RDF.rest, tail),
            Triple(tail, RDF.first, Literal("b")),
            Triple(tail, RDF.rest, RDF.nil),
        ]
    )
    assert g.read_list(head) == [Literal("a"), Literal("b")]
    broken = g.with_triples([Triple(tail, RDF.rest, head)])
    assert broken.read_list(head) is None


def test_merge_keeps_blank_nodes_apart():
    a = Graph([Triple(BNode("b"), iri("p"), Literal("1"))], {"ex": EX})
    b = Graph([Triple(BNode("b"), iri("p"), Literal("2"))], {"ex": "http://other/"})
    m = merge(a, b)
    assert len(m) == 2
    assert len(m.blank_nodes()) == 2
    assert m.prefixes["ex"] == EX
