import json
from decimal import Decimal
from pathlib import Path

import pytest

from capgen.config import PipelineConfig
from capgen.rdf import XSD, Graph, Literal, Triple

FIXTURES = Path(__file__).parent / "fixtures"
TURTLE_DIR = FIXTURES / "turtle"
MUTANT_DIR = FIXTURES / "mutants"
REASONER_DIR = FIXTURES / "reasoner"
SHACL_DIR = FIXTURES / "shacl"
SESSION_DIR = FIXTURES / "sessions"

SCENARIOS = ["happy", "syntax-repair", "recurrence", "full-repair"]


def read(path: Path) -> str:
    return path.read_bytes().decode("utf-8")


def load_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def turtle_fixtures():
    return sorted(TURTLE_DIR.glob("*.ttl"))


def mutant_cases():
    return load_json(MUTANT_DIR / "cases.json")


def reasoner_cases():
    return load_json(REASONER_DIR / "expected.json")


def shacl_cases():
    return sorted(p for p in SHACL_DIR.iterdir() if p.is_dir())


_NUMERIC = {
    XSD.integer: lambda s: str(int(s)),
    XSD.decimal: lambda s: str(Decimal(s).normalize()),
    XSD.double: lambda s: repr(float(s)),
    XSD.dateTime: lambda s: s[:-1] + "+00:00" if s.endswith("Z") else s,
}


def canonical_literals(g: Graph) -> Graph:
    """Map numeric and dateTime literals to a canonical lexical form.

    The reference parser rewrites these lexical forms ("+3" -> "3",
    "...Z" -> "...+00:00"), so comparisons against its output go by value.
    """

    def fix(t):
        if isinstance(t, Literal) and t.datatype in _NUMERIC:
            return Literal(_NUMERIC[t.datatype](t.lexical), t.datatype)
        return t

    return Graph(Triple(s, p, fix(o)) for s, p, o in g)


def session_config(name: str, **overrides) -> PipelineConfig:
    return PipelineConfig().with_overrides(replay=SESSION_DIR / f"{name}.json", **overrides)


@pytest.fixture(scope="session")
def task_text() -> str:
    return read(SESSION_DIR / "task.txt").strip()


@pytest.fixture(scope="session")
def default_config() -> PipelineConfig:
    return PipelineConfig().check()


@pytest.fixture
def no_api_keys(monkeypatch):
    for name in ("ANTHROPIC_API_KEY", "OPENAI_API_KEY"):
        monkeypatch.delenv(name, raising=False)
