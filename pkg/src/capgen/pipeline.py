"""Generate-and-verify loop: prompt, complete, then syntax, reasoning and SHACL checks.

A failing check sends its diagnostics back to the model and verification
starts again at the syntax step on the new reply. Each step keeps a failure
counter for the whole run; once any counter goes past ``max_repeat_per_step``
the run stops and the last result is handed over for manual review.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

from .config import PipelineConfig
from .errors import InputError
from .llm import (
    ExtractionError,
    LlmRequest,
    Message,
    Provider,
    ProviderError,
    Role,
    extract_with_note,
    open_provider,
)
from .prompts import PromptBundle, build_backprompt, build_prompt, sha256_hex
from .rdf import Graph, TurtleSyntaxError, parse_turtle, serialize_turtle
from .reasoner import ClosureLimitExceeded, check_consistency
from .shacl import render_report, validate

TRACE_SCHEMA_VERSION = "1"


class Step(str, enum.Enum):
    SYNTAX = "Syntax"
    REASONING = "Reasoning"
    SHACL = "Shacl"


class Status(str, enum.Enum):
    VERIFIED = "Verified"
    NEEDS_MANUAL_REVIEW = "NeedsManualReview"
    PROVIDER_ERROR = "ProviderError"


@dataclass(frozen=True)
class StepOutcome:
    step: Step
    passed: bool
    diagnostics_text: str
    attempt_index: int
    details: Any = None

    def __post_init__(self) -> None:
        if self.passed and self.diagnostics_text:
            raise ValueError("a passing step carries no diagnostics")

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step.value,
            "passed": self.passed,
            "diagnostics_text": self.diagnostics_text,
            "attempt_index": self.attempt_index,
            "details": self.details,
        }


@dataclass
class Attempt:
    index: int
    prompt_digest: str
    prompt_kind: str
    started_at: str
    raw_response: str = ""
    extracted_ontology: Optional[str] = None
    extraction_note: str = ""
    step_outcomes: list[StepOutcome] = field(default_factory=list)
    latency_ms: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "prompt_kind": self.prompt_kind,
            "prompt_digest": self.prompt_digest,
            "started_at": self.started_at,
            "latency_ms": self.latency_ms,
            "raw_response": self.raw_response,
            "extracted_ontology": self.extracted_ontology,
            "extraction_note": self.extraction_note,
            "step_outcomes": [o.to_dict() for o in self.step_outcomes],
        }


@dataclass
class PipelineTrace:
    started_at: str
    attempts: list[Attempt] = field(default_factory=list)
    final_status: Optional[Status] = None
    failure_step: Optional[Step] = None
    failure_counts: dict[str, int] = field(default_factory=dict)
    provider_error: Optional[str] = None
    finished_at: Optional[str] = None
    total_latency_ms: int = 0
    model: str = ""
    max_repeat_per_step: int = 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": TRACE_SCHEMA_VERSION,
            "model": self.model,
            "max_repeat_per_step": self.max_repeat_per_step,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "total_latency_ms": self.total_latency_ms,
            "final_status": self.final_status.value if self.final_status else None,
            "failure_step": self.failure_step.value if self.failure_step else None,
            "failure_counts": dict(self.failure_counts),
            "provider_error": self.provider_error,
            "attempts": [a.to_dict() for a in self.attempts],
        }


@dataclass
class PipelineResult:
    status: Status
    ontology: Optional[Graph]
    report: str
    trace: PipelineTrace

    @property
    def ontology_text(self) -> Optional[str]:
        return None if self.ontology is None else serialize_turtle(self.ontology)

    def to_dict(self) -> dict[str, Any]:
        return {
            "final_status": self.status.value,
            "failure_step": self.trace.failure_step.value if self.trace.failure_step else None,
            "ontology": self.ontology_text,
            "report": self.report,
            "trace": self.trace.to_dict(),
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class CheckResult:
    outcomes: list[StepOutcome]
    graph: Optional[Graph]

    @property
    def failed(self) -> Optional[StepOutcome]:
        return next((o for o in self.outcomes if not o.passed), None)


def run_checks(text: str, config: PipelineConfig, attempt_index: int = 0) -> CheckResult:
    """Run syntax, reasoning and SHACL checks in order, stopping at the first failure."""
    outcomes: list[StepOutcome] = []
    try:
        graph = parse_turtle(text)
    except TurtleSyntaxError as exc:
        lines = [str(d) for d in exc.diagnostics]
        outcomes.append(StepOutcome(Step.SYNTAX, False, "\n".join(lines), attempt_index, lines))
        return CheckResult(outcomes, None)
    outcomes.append(StepOutcome(Step.SYNTAX, True, "", attempt_index, {"triples": len(graph)}))

    prefixes = {**config.schema.prefixes, **graph.prefixes}
    try:
        consistency = check_consistency(
            graph, config.schema, triple_cap=config.closure_triple_cap, prefixes=prefixes
        )
    except ClosureLimitExceeded as exc:
        text_ = f"- ClosureLimit: {exc}"
        outcomes.append(StepOutcome(Step.REASONING, False, text_, attempt_index, {"error": str(exc)}))
        return CheckResult(outcomes, graph)
    clash_details = [
        {"kind": c.kind.value, "explanation": c.explanation} for c in consistency.clashes
    ]
    if not consistency.consistent:
        outcomes.append(
            StepOutcome(Step.REASONING, False, consistency.render(), attempt_index, clash_details)
        )
        return CheckResult(outcomes, graph)
    outcomes.append(
        StepOutcome(Step.REASONING, True, "", attempt_index, {"closure_size": consistency.closure_size})
    )

    report = validate(graph, config.schema, config.shapes)
    if not report.conforms:
        rendered = render_report(report, prefixes)
        outcomes.append(StepOutcome(Step.SHACL, False, rendered, attempt_index, report.to_dict()))
    else:
        outcomes.append(StepOutcome(Step.SHACL, True, "", attempt_index, report.to_dict()))
    return CheckResult(outcomes, graph)


def _summary(result_status: Status, trace: PipelineTrace, last_failure: Optional[StepOutcome]) -> str:
    lines = [f"status: {result_status.value}", f"attempts: {len(trace.attempts)}"]
    if trace.failure_step:
        lines.append(f"failure step: {trace.failure_step.value}")
    counts = ", ".join(f"{k}={v}" for k, v in trace.failure_counts.items())
    lines.append(f"failures per step: {counts}")
    if trace.provider_error:
        lines.append(f"provider error: {trace.provider_error}")
    if result_status is Status.NEEDS_MANUAL_REVIEW and last_failure is not None:
        lines.append(
            f"the {last_failure.step.value} check failed more than "
            f"{trace.max_repeat_per_step} time(s); last diagnostics:"
        )
        lines.append(last_failure.diagnostics_text)
    elif result_status is Status.VERIFIED:
        lines.append("syntax, reasoning and SHACL checks passed; review the content manually")
    return "\n".join(lines)


def run(
    config: PipelineConfig,
    description: str,
    *,
    provider: Optional[Provider] = None,
    provider_factory: Optional[Callable[[], Provider]] = None,
) -> PipelineResult:
    """Generate a capability ontology for ``description`` and verify it."""
    if not description.strip():
        raise InputError("capability description is empty")
    config.check()
    bundle: PromptBundle = build_prompt(config.template, description)
    if provider is None:
        provider = provider_factory() if provider_factory else open_provider(config.provider)

    started = time.monotonic()
    trace = PipelineTrace(
        started_at=_now(),
        model=config.provider.model,
        max_repeat_per_step=config.max_repeat_per_step,
        failure_counts={s.value: 0 for s in Step},
    )
    messages = [Message(Role.USER, bundle.rendered_text)]
    prompt_kind = "initial"
    last_graph: Optional[Graph] = None
    last_failure: Optional[StepOutcome] = None
    status: Optional[Status] = None

    while status is None:
        request = LlmRequest(
            tuple(messages), config.provider.model, config.provider.max_output_tokens
        )
        attempt = Attempt(
            index=len(trace.attempts),
            prompt_digest=sha256_hex(messages[-1].content),
            prompt_kind=prompt_kind,
            started_at=_now(),
        )
        try:
            response = provider.complete(request)
        except ProviderError as exc:
            trace.provider_error = f"{type(exc).__name__}: {exc}"
            status = Status.PROVIDER_ERROR
            break
        trace.attempts.append(attempt)
        attempt.raw_response = response.content
        attempt.latency_ms = response.latency_ms
        messages.append(Message(Role.ASSISTANT, response.content))

        try:
            text, attempt.extraction_note = extract_with_note(response)
        except ExtractionError as exc:
            attempt.extraction_note = str(exc)
            failure = StepOutcome(Step.SYNTAX, False, f"- {exc}", attempt.index, [str(exc)])
            attempt.step_outcomes.append(failure)
            text = response.content
        else:
            attempt.extracted_ontology = text
            checks = run_checks(text, config, attempt.index)
            attempt.step_outcomes.extend(checks.outcomes)
            if checks.graph is not None:
                last_graph = checks.graph
            failure = checks.failed
            if failure is None:
                status = Status.VERIFIED
                break

        last_failure = failure
        trace.failure_counts[failure.step.value] += 1
        if trace.failure_counts[failure.step.value] > config.max_repeat_per_step:
            trace.failure_step = failure.step
            status = Status.NEEDS_MANUAL_REVIEW
            break
        bundle = build_backprompt(bundle, text, failure.step.value, failure.diagnostics_text)
        messages.append(Message(Role.USER, bundle.rendered_text))
        prompt_kind = f"repair:{failure.step.value}"

    trace.final_status = status
    trace.finished_at = _now()
    trace.total_latency_ms = int((time.monotonic() - started) * 1000)
    return PipelineResult(status, last_graph, _summary(status, trace, last_failure), trace)
