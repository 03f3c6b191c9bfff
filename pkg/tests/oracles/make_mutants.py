"""Write the single-error syntax mutants and their expected diagnostics.

Each mutant changes one line of base.ttl; the expected kind and line were
worked out by hand from the edit.
"""

import json
from pathlib import Path

HERE = Path(__file__).resolve().parent.parent / "fixtures" / "mutants"

BASE = '''@prefix : <http://www.example.org/cap#> .
@prefix cask: <http://www.w3id.org/hsu-aut/cask#> .
@prefix VDI3682: <http://www.w3id.org/hsu-aut/VDI3682#> .
@prefix DINEN61360: <http://www.w3id.org/hsu-aut/DINEN61360#> .

:Drill a cask:ProvidedCapability ;
    VDI3682:hasInput :Blank ;
    VDI3682:hasOutput :DrilledPart .

:Blank a VDI3682:Product .

:DrilledPart a VDI3682:Product ;
    VDI3682:isCharacterizedBy :Diameter .

:Diameter a DINEN61360:DataElement ;
    DINEN61360:hasTypeDescription :Diameter_TD .

:Diameter_TD a DINEN61360:TypeDescription ;
    DINEN61360:preferredName "diameter" ;
    DINEN61360:unitOfMeasure "mm" .
'''
LINES = BASE.split("\n")


def mut(lineno, old, new):
    lines = list(LINES)
    assert old in lines[lineno - 1], (lineno, old)
    lines[lineno - 1] = lines[lineno - 1].replace(old, new, 1)
    return "\n".join(lines)


def drop(lineno):
    lines = list(LINES)
    del lines[lineno - 1]
    return "\n".join(lines)


CASES = [
    # missing prefix declarations; dropping a line shifts later lines up by one
    ("undefined-prefix-cask", drop(2), "UndefinedPrefix", 5),
    ("undefined-prefix-dinen", drop(4), "UndefinedPrefix", 14),
    ("undefined-prefix-typo", mut(10, "VDI3682:Product", "VDI3862:Product"), "UndefinedPrefix", 10),
    ("undefined-empty-prefix", drop(1), "UndefinedPrefix", 5),
    ("missing-dot-after-statement", mut(8, "DrilledPart .", "DrilledPart"), "UnterminatedStatement", 8),
    ("missing-dot-short-statement", mut(10, "Product .", "Product"), "UnterminatedStatement", 10),
    ("missing-dot-last-line", mut(20, '"mm" .', '"mm"'), "UnterminatedStatement", 20),
    ("stray-character", mut(7, "hasInput :Blank", "hasInput :Blank §"), "UnexpectedChar", 7),
    ("stray-brace", mut(12, ":DrilledPart a", ":DrilledPart { a"), "UnexpectedChar", 12),
    ("unterminated-string", mut(19, '"diameter"', '"diameter'), "BadLiteral", 19),
    ("bad-string-escape", mut(20, '"mm"', r'"m\qm"'), "BadLiteral", 20),
    ("empty-lang-tag", mut(19, '"diameter"', '"diameter"@'), "BadLiteral", 19),
    ("iri-with-space", mut(1, "cap#>", "cap #>"), "BadIri", 1),
    ("unterminated-iri", mut(2, "cask#>", "cask#"), "BadIri", 2),
    ("iri-bad-char", mut(3, "VDI3682#>", "VDI{3682}#>"), "BadIri", 3),
    ("bad-directive-name", mut(3, "@prefix", "@prefx"), "BadDirective", 3),
    ("prefix-missing-iri", mut(4, " <http://www.w3id.org/hsu-aut/DINEN61360#>", ""), "BadDirective", 4),
    ("prefix-missing-colon", mut(2, "cask:", "cask"), "BadDirective", 2),
    ("relative-iri-no-base", mut(10, "VDI3682:Product", "<Product>"), "BadIri", 10),
    ("sparql-prefix-with-dot", mut(1, "@prefix", "PREFIX"), "BadDirective", 1),
    ("literal-as-subject", mut(10, ":Blank a", '"Blank" a'), "UnexpectedChar", 10),
    ("bad-escape-in-iri", mut(1, "cap#>", r"cap\x#>"), "BadIri", 1),
    ("missing-object", mut(7, ":Blank ;", ";"), "UnexpectedChar", 7),
    ("unclosed-bracket", mut(16, ":Diameter_TD .", "[ a :Thing"), "UnexpectedChar", 18),
    ("unclosed-collection", mut(13, ":Diameter .", "( :Diameter ."), "UnexpectedChar", 13),
]


def main():
    (HERE / "base.ttl").write_text(BASE, encoding="utf-8")
    out = []
    for name, text, kind, line in CASES:
        fname = f"{name}.ttl"
        (HERE / fname).write_text(text, encoding="utf-8")
        out.append({"file": fname, "kind": kind, "line": line})
    (HERE / "cases.json").write_text(json.dumps(out, indent=2) + "\n")
    print(f"{len(out)} mutants")


if __name__ == "__main__":
    main()
