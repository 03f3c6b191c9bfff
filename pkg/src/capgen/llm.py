"""Chat-completion providers: two HTTP wire formats plus a replay provider."""

from __future__ import annotations

import enum
import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, NamedTuple, Optional, Protocol, Sequence

import httpx

from .errors import ConfigError
from .prompts import sha256_hex


class ProviderError(RuntimeError):
    """Base class for failures talking to a model provider."""


class MissingCredentials(ProviderError):
    pass


class Timeout(ProviderError):
    pass


class TransportFailure(ProviderError):
    pass


class HttpStatus(ProviderError):
    def __init__(self, code: int, body: str):
        excerpt = body[:300]
        super().__init__(f"HTTP {code}: {excerpt}")
        self.code = code
        self.body_excerpt = excerpt


class BadProviderResponse(ProviderError):
    pass


class ReplayMismatch(ProviderError):
    pass


class ReplayExhausted(ProviderError):
    pass


class ExtractionError(ValueError):
    pass


class EmptyExtraction(ExtractionError):
    pass


class TruncatedResponse(ExtractionError):
    pass


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class Message:
    role: Role
    content: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class LlmRequest:
    messages: tuple[Message, ...]
    model: str
    max_output_tokens: int = 4096
    # always 0.0: whatever the caller passes is overridden
    temperature: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "temperature", 0.0)
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.messages[0].role is Role.ASSISTANT:
            raise ValueError("first message must be a system or user message")

    @property
    def last_user_content(self) -> str:
        for m in reversed(self.messages):
            if m.role is Role.USER:
                return m.content
        return ""


class FinishReason(str, enum.Enum):
    STOP = "Stop"
    LENGTH = "Length"
    OTHER = "Other"


@dataclass(frozen=True)
class Usage:
    input_tokens: Optional[int] = None
    output_tokens: Optional[int] = None


@dataclass(frozen=True)
class LlmResponse:
    content: str
    finish_reason: FinishReason = FinishReason.STOP
    usage: Optional[Usage] = None
    latency_ms: int = 0


class ProviderKind(str, enum.Enum):
    OPENAI = "openai"
    ANTHROPIC = "anthropic"
    REPLAY = "replay"


_DEFAULT_ENDPOINTS = {
    ProviderKind.OPENAI: "https://api.openai.com/v1/chat/completions",
    ProviderKind.ANTHROPIC: "https://api.anthropic.com/v1/messages",
}
_DEFAULT_KEY_ENV = {
    ProviderKind.OPENAI: "OPENAI_API_KEY",
    ProviderKind.ANTHROPIC: "ANTHROPIC_API_KEY",
}


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind = ProviderKind.ANTHROPIC
    model: str = "claude-3-opus-20240229"
    endpoint_url: Optional[str] = None
    api_key_env: Optional[str] = None
    timeout_seconds: float = 60
    max_retries_transport: int = 3
    max_output_tokens: int = 4096
    session_path: Optional[Path] = None

    def __post_init__(self) -> None:
        try:
            kind = ProviderKind(self.kind)
        except ValueError:
            choices = ", ".join(k.value for k in ProviderKind)
            raise ConfigError(f"unknown provider kind {self.kind!r} (expected {choices})") from None
        object.__setattr__(self, "kind", kind)
        if kind is ProviderKind.REPLAY:
            if self.session_path is None:
                raise ConfigError("replay provider needs a session file")
            object.__setattr__(self, "session_path", Path(self.session_path))
        else:
            if self.endpoint_url is None:
                object.__setattr__(self, "endpoint_url", _DEFAULT_ENDPOINTS[kind])
            if self.api_key_env is None:
                object.__setattr__(self, "api_key_env", _DEFAULT_KEY_ENV[kind])
        if self.max_retries_transport < 0:
            raise ConfigError("max_retries_transport must be >= 0")
        if self.timeout_seconds <= 0:
            raise ConfigError("timeout_seconds must be positive")
        if self.max_output_tokens <= 0:
            raise ConfigError("max_output_tokens must be positive")


class Provider(Protocol):
    def complete(self, request: LlmRequest) -> LlmResponse: ...


# -- HTTP providers ---------------------------------------------------------


class _HttpProvider:
    def __init__(
        self,
        config: ProviderConfig,
        *,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.sleep = sleep
        self.client = httpx.Client(timeout=config.timeout_seconds, transport=transport)

    def close(self) -> None:
        self.client.close()

    def api_key(self) -> str:
        name = self.config.api_key_env or ""
        key = os.environ.get(name)
        if not key:
            raise MissingCredentials(f"environment variable {name} is not set")
        return key

    def headers(self, key: str) -> dict[str, str]:
        raise NotImplementedError

    def body(self, request: LlmRequest) -> dict[str, Any]:
        raise NotImplementedError

    def parse(self, payload: Any) -> tuple[str, FinishReason, Optional[Usage]]:
        raise NotImplementedError

    def complete(self, request: LlmRequest) -> LlmResponse:
        key = self.api_key()
        body = self.body(request)
        attempts = self.config.max_retries_transport + 1
        started = time.monotonic()
        for i in range(attempts):
            last = i == attempts - 1
            try:
                resp = self.client.post(
                    self.config.endpoint_url or "", json=body, headers=self.headers(key)
                )
            except httpx.TimeoutException as exc:
                if last:
                    raise Timeout(f"request timed out after {attempts} attempt(s): {exc}") from exc
            except httpx.TransportError as exc:
                if last:
                    raise TransportFailure(f"transport error after {attempts} attempt(s): {exc}") from exc
            else:
                if resp.status_code >= 500 and not last:
                    pass
                elif resp.status_code >= 400:
                    raise HttpStatus(resp.status_code, resp.text)
                else:
                    try:
                        content, reason, usage = self.parse(resp.json())
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        raise BadProviderResponse(f"unexpected response body: {exc}") from exc
                    latency = int((time.monotonic() - started) * 1000)
                    return LlmResponse(content, reason, usage, latency)
            self.sleep(2.0**i)
        raise AssertionError("unreachable")


class OpenAiProvider(_HttpProvider):
    def headers(self, key: str) -> dict[str, str]:
        return {"Authorization": f"Bearer {key}"}

    def body(self, request: LlmRequest) -> dict[str, Any]:
        return {
            "model": request.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [{"role": m.role.value, "content": m.content} for m in request.messages],
        }

    def parse(self, payload: Any) -> tuple[str, FinishReason, Optional[Usage]]:
        choice = payload["choices"][0]
        content = choice["message"].get("content") or ""
        reason = {"stop": FinishReason.STOP, "length": FinishReason.LENGTH}.get(
            choice.get("finish_reason"), FinishReason.OTHER
        )
        u = payload.get("usage") or {}
        usage = Usage(u.get("prompt_tokens"), u.get("completion_tokens")) if u else None
        return content, reason, usage


class AnthropicProvider(_HttpProvider):
    API_VERSION = "2023-06-01"

    def headers(self, key: str) -> dict[str, str]:
        return {"x-api-key": key, "anthropic-version": self.API_VERSION}

    def body(self, request: LlmRequest) -> dict[str, Any]:
        system = [m.content for m in request.messages if m.role is Role.SYSTEM]
        body: dict[str, Any] = {
            "model": request.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [
                {"role": m.role.value, "content": m.content}
                for m in request.messages
                if m.role is not Role.SYSTEM
            ],
        }
        if system:
            body["system"] = "\n\n".join(system)
        return body

    def parse(self, payload: Any) -> tuple[str, FinishReason, Optional[Usage]]:
        content = "".join(
            block.get("text", "") for block in payload["content"] if block.get("type") == "text"
        )
        reason = {
            "end_turn": FinishReason.STOP,
            "stop_sequence": FinishReason.STOP,
            "max_tokens": FinishReason.LENGTH,
        }.get(payload.get("stop_reason"), FinishReason.OTHER)
        u = payload.get("usage") or {}
        usage = Usage(u.get("input_tokens"), u.get("output_tokens")) if u else None
        return content, reason, usage


# -- replay -----------------------------------------------------------------


@dataclass(frozen=True)
class ReplayTurn:
    response: str
    expected_prompt_digest: Optional[str] = None
    finish_reason: FinishReason = FinishReason.STOP


@dataclass
class ReplaySession:
    """Scripted responses, consumed strictly in order."""

    turns: list[ReplayTurn]
    position: int = 0
    digests_seen: list[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Any) -> "ReplaySession":
        if not isinstance(data, dict) or not isinstance(data.get("turns"), list):
            raise ConfigError("replay session must be an object with a 'turns' list")
        turns = []
        for i, t in enumerate(data["turns"]):
            if not isinstance(t, dict) or not isinstance(t.get("response"), str):
                raise ConfigError(f"replay turn {i}: needs a string 'response'")
            digest = t.get("expected_prompt_digest")
            if digest is not None and not re.fullmatch(r"[0-9a-f]{64}", digest):
                raise ConfigError(f"replay turn {i}: digest must be 64 lowercase hex digits")
            try:
                reason = FinishReason(t.get("finish_reason", "Stop"))
            except ValueError:
                raise ConfigError(f"replay turn {i}: bad finish_reason") from None
            turns.append(ReplayTurn(t["response"], digest, reason))
        return cls(turns)

    @classmethod
    def load(cls, path: "str | Path") -> "ReplaySession":
        p = Path(path)
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"replay session not found: {p}") from None
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read replay session {p}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        out = []
        for t in self.turns:
            d: dict[str, Any] = {"response": t.response}
            if t.expected_prompt_digest:
                d["expected_prompt_digest"] = t.expected_prompt_digest
            if t.finish_reason is not FinishReason.STOP:
                d["finish_reason"] = t.finish_reason.value
            out.append(d)
        return {"turns": out}


class ReplayProvider:
    """Answers requests from a :class:`ReplaySession`.

    The digest compared against ``expected_prompt_digest`` is the SHA-256 of
    the latest user message.
    """

    def __init__(self, session: ReplaySession):
        self.session = session

    def complete(self, request: LlmRequest) -> LlmResponse:
        s = self.session
        if s.position >= len(s.turns):
            raise ReplayExhausted(f"replay session has only {len(s.turns)} turn(s)")
        turn = s.turns[s.position]
        digest = sha256_hex(request.last_user_content)
        if turn.expected_prompt_digest and turn.expected_prompt_digest != digest:
            raise ReplayMismatch(
                f"turn {s.position}: prompt digest {digest} != expected {turn.expected_prompt_digest}"
            )
        s.position += 1
        s.digests_seen.append(digest)
        return LlmResponse(turn.response, turn.finish_reason, None, 0)


def open_provider(
    config: ProviderConfig,
    *,
    transport: Optional[httpx.BaseTransport] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Provider:
    """Create a provider for ``config``. Replay providers start a fresh session."""
    if config.kind is ProviderKind.REPLAY:
        return ReplayProvider(ReplaySession.load(config.session_path))  # type: ignore[arg-type]
    cls = OpenAiProvider if config.kind is ProviderKind.OPENAI else AnthropicProvider
    return cls(config, transport=transport, sleep=sleep)


def complete(config: ProviderConfig, request: LlmRequest, **kwargs: Any) -> LlmResponse:
    """One-off completion; opens a provider, sends ``request`` and closes it."""
    provider = open_provider(config, **kwargs)
    try:
        return provider.complete(request)
    finally:
        close = getattr(provider, "close", None)
        if close:
            close()


# -- extracting Turtle from a reply ----------------------------------------

_FENCE = re.compile(
    r"^[ \t]*(?P<fence>`{3,}|~{3,})[^\n]*\n(?P<body>.*?)^[ \t]*(?P=fence)[ \t]*$",
    re.MULTILINE | re.DOTALL,
)
_OPEN_FENCE = re.compile(r"^[ \t]*(?:`{3,}|~{3,})[^\n]*\n", re.MULTILINE)


class Extraction(NamedTuple):
    text: str
    note: str


def split_turtle(content: str) -> Extraction:
    """Pull the Turtle document out of a model reply, saying how it was found."""
    blocks = [m.group("body") for m in _FENCE.finditer(content)]
    if blocks:
        best = max(blocks, key=len)  # first of the longest on ties
        text = best.strip()
        note = f"fenced block ({len(blocks)} found, longest used)"
    else:
        opened = _OPEN_FENCE.search(content)
        if opened:
            text = content[opened.end() :].strip()
            note = "unterminated fence, text after the opening fence used"
        else:
            text = content.strip()
            note = "no fence, whole reply used"
    if not text:
        raise EmptyExtraction("reply contains no ontology text")
    return Extraction(text, note)


def extract_with_note(response: LlmResponse) -> Extraction:
    if response.finish_reason is not FinishReason.STOP:
        raise TruncatedResponse(
            f"reply did not finish normally (finish reason {response.finish_reason.value})"
        )
    return split_turtle(response.content)


def extract_turtle(response: LlmResponse) -> str:
    """Turtle text of a finished reply: the longest fenced block, else the whole reply."""
    return extract_with_note(response).text


def messages_to_json(messages: Sequence[Message]) -> list[dict[str, str]]:
    return [{"role": m.role.value, "content": m.content} for m in messages]
