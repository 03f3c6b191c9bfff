"""Hypothesis strategies for RDF terms and graphs."""

from hypothesis import strategies as st

from capgen.rdf import IRI, XSD, BNode, Graph, Literal, Triple

NAMESPACES = ["http://example.org/", "http://example.org/ns#", "urn:x:"]

local = st.text(
    alphabet=st.sampled_from("abcXYZ019_-.é~%"), min_size=0, max_size=6
)
iris = st.builds(lambda ns, l: IRI(ns + l), st.sampled_from(NAMESPACES), local).filter(
    lambda i: i.value.strip() == i.value
)
predicates = st.builds(lambda l: IRI("http://example.org/p" + l), st.sampled_from(["", "1", "2", "x"]))
bnodes = st.builds(BNode, st.sampled_from(["a", "b", "c", "d", "e"]))

text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), max_codepoint=0x1FFFF), max_size=12
)
literals = st.one_of(
    st.builds(Literal, text),
    st.builds(lambda s, tag: Literal(s, language=tag), text, st.sampled_from(["en", "de-ch", "fr"])),
    st.builds(lambda n: Literal(str(n), XSD.integer), st.integers(-(10**6), 10**6)),
    st.builds(lambda s: Literal(s, XSD.decimal), st.sampled_from(["1.5", "-0.25", "10.0"])),
    st.builds(lambda s: Literal(s, XSD.double), st.sampled_from(["1e3", "2.5E-1", "1.0e0"])),
    st.builds(lambda b: Literal(b, XSD.boolean), st.sampled_from(["true", "false"])),
    st.builds(lambda s: Literal(s, IRI("http://example.org/dt")), text),
)
subjects = st.one_of(iris, bnodes)
objects = st.one_of(iris, bnodes, literals)
triples = st.builds(Triple, subjects, predicates, objects)

prefix_maps = st.sampled_from(
    [
        {},
        {"ex": "http://example.org/"},
        {"ex": "http://example.org/", "ns": "http://example.org/ns#", "": "urn:x:"},
    ]
)


@st.composite
def graphs(draw, max_triples=12):
    ts = draw(st.lists(triples, max_size=max_triples))
    return Graph(ts, draw(prefix_maps))
