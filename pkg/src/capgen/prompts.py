"""Few-shot prompt assembly and repair prompts.

A template directory looks like::

    instruction.txt
    context.ttl
    examples/
        01-name/description.txt
        01-name/ontology.ttl
        02-other/...

Examples are used in lexical order of their directory names.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, InputError
from .rdf import TurtleSyntaxError, parse_turtle

DEFAULT_PLACEHOLDER = "{{TASK}}"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def estimate_tokens(text: str) -> int:
    # rough: ~4 characters per token for English and Turtle alike
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class ExamplePair:
    description: str
    ontology: str
    name: str = ""

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise ConfigError(f"example {self.name or '?'}: empty description")
        _check_turtle_text(self.ontology, f"example {self.name or '?'} ontology")


@dataclass(frozen=True)
class PromptTemplate:
    instruction: str
    context_ontology: str
    examples: tuple[ExamplePair, ...]
    task_placeholder: str = DEFAULT_PLACEHOLDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        if not self.instruction.strip():
            raise ConfigError("instruction is empty")
        if not self.task_placeholder:
            raise ConfigError("task placeholder is empty")
        _check_turtle_text(self.context_ontology, "context ontology")
        if self.skeleton().count(self.task_placeholder) != 1:
            raise ConfigError(
                f"placeholder {self.task_placeholder!r} must occur exactly once in the prompt"
            )

    def skeleton(self) -> str:
        """The rendered prompt with the task placeholder still in place."""
        parts = [
            self.instruction.strip(),
            "",
            "## Context: capability ontology",
            "",
            _fence(self.context_ontology),
        ]
        for i, ex in enumerate(self.examples, 1):
            parts += [
                "",
                f"## Example {i}",
                "",
                "Description:",
                ex.description.strip(),
                "",
                "Ontology:",
                _fence(ex.ontology),
            ]
        parts += ["", "## Task", "", "Description:", self.task_placeholder, "", "Ontology:", ""]
        return "\n".join(parts)


@dataclass(frozen=True)
class PromptBundle:
    rendered_text: str
    token_estimate: int
    sections_digest: Mapping[str, object] = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return sha256_hex(self.rendered_text)


def _fence(turtle: str) -> str:
    return f"```turtle\n{turtle.strip()}\n```"


def _check_turtle_text(text: str, what: str) -> None:
    try:
        parse_turtle(text)
    except TurtleSyntaxError as exc:
        first = exc.diagnostics[0] if exc.diagnostics else "unknown error"
        raise ConfigError(f"{what} is not valid Turtle: {first}") from None


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"missing file: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def load_template(directory: "str | Path", placeholder: str = DEFAULT_PLACEHOLDER) -> PromptTemplate:
    """Load and validate a prompt template directory."""
    root = Path(directory)
    if not root.is_dir():
        raise ConfigError(f"template directory not found: {root}")
    instruction = _read(root / "instruction.txt")
    context_path = root / "context.ttl"
    context = _read(context_path)
    try:
        parse_turtle(context)
    except TurtleSyntaxError as exc:
        raise ConfigError(f"{context_path}: {exc.diagnostics[0]}") from None

    ex_root = root / "examples"
    dirs = sorted(p for p in ex_root.iterdir() if p.is_dir()) if ex_root.is_dir() else []
    if not dirs:
        raise ConfigError(f"no examples found under {ex_root}")
    examples = []
    for d in dirs:
        ont_path = d / "ontology.ttl"
        description = _read(d / "description.txt")
        ontology = _read(ont_path)
        try:
            parse_turtle(ontology)
        except TurtleSyntaxError as exc:
            raise ConfigError(f"{ont_path}: {exc.diagnostics[0]}") from None
        if not description.strip():
            raise ConfigError(f"{d / 'description.txt'}: empty description")
        examples.append(ExamplePair(description, ontology, name=d.name))
    return PromptTemplate(instruction, context, tuple(examples), placeholder)


def build_prompt(template: PromptTemplate, task: str) -> PromptBundle:
    """Substitute ``task`` into the template and render the full prompt."""
    task = task.strip()
    if not task:
        raise InputError("task description is empty")
    if template.task_placeholder in task:
        raise InputError("task description contains the template placeholder")
    text = template.skeleton().replace(template.task_placeholder, task)
    digest = {
        "instruction": sha256_hex(template.instruction),
        "context": sha256_hex(template.context_ontology),
        "examples": [
            sha256_hex(ex.description + "\x00" + ex.ontology) for ex in template.examples
        ],
        "task": sha256_hex(task),
    }
    return PromptBundle(text, estimate_tokens(text), digest)


REPAIR_TEMPLATE = (
    "The ontology you returned failed the {step} check. "
    "Fix every problem listed below and keep everything else as it is."
)

_STEP_TITLES = {
    "Syntax": "Turtle syntax",
    "Reasoning": "consistency (reasoning)",
    "Shacl": "SHACL shape validation",
}


def build_backprompt(
    previous: PromptBundle,
    failed_ontology: str,
    step_name: str,
    diagnostics_text: str,
) -> PromptBundle:
    """Render a repair request for an ontology that failed ``step_name``.

    The failed ontology is repeated inline so the request stands on its own
    even for providers that keep no history.
    """
    if not diagnostics_text.strip():
        raise InputError("diagnostics text is empty")
    parts = [
        REPAIR_TEMPLATE.format(step=_STEP_TITLES.get(step_name, step_name)),
        "",
        "Ontology that failed:",
        f"```turtle\n{failed_ontology.strip()}\n```",
        "",
        "Problems found:",
        diagnostics_text.rstrip(),
        "",
        "Return the complete corrected ontology in Turtle, and nothing else.",
    ]
    text = "\n".join(parts)
    digest = {
        "previous": previous.digest,
        "step": step_name,
        "failed_ontology": sha256_hex(failed_ontology),
        "diagnostics": sha256_hex(diagnostics_text),
    }
    return PromptBundle(text, estimate_tokens(text), digest)
