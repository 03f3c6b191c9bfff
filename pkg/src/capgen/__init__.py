"""Generate capability ontologies with an LLM and verify them automatically."""

__version__ = "0.1.0"
