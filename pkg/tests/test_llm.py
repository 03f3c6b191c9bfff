import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capgen.errors import ConfigError
from capgen.llm import (
    AnthropicProvider,
    EmptyExtraction,
    FinishReason,
    HttpStatus,
    LlmRequest,
    LlmResponse,
    Message,
    MissingCredentials,
    OpenAiProvider,
    ProviderConfig,
    ProviderKind,
    ReplayExhausted,
    ReplayMismatch,
    ReplayProvider,
    ReplaySession,
    Role,
    Timeout,
    TransportFailure,
    TruncatedResponse,
    extract_turtle,
    open_provider,
    split_turtle,
)
from capgen.prompts import sha256_hex


def request(content="hello", **kw):
    return LlmRequest((Message(Role.USER, content),), "m", **kw)


def test_request_temperature_always_zero():
    assert LlmRequest((Message("user", "x"),), "m", temperature=0.9).temperature == 0.0
    with pytest.raises(ValueError):
        LlmRequest((), "m")
    with pytest.raises(ValueError):
        LlmRequest((Message("assistant", "x"),), "m")


# --- replay ----------------------------------------------------------------------


def test_replay_returns_turns_in_order_then_exhausts():
    p = ReplayProvider(ReplaySession.from_dict({"turns": [{"response": "one"}, {"response": "two"}]}))
    assert p.complete(request()).content == "one"
    assert p.complete(request()).content == "two"
    with pytest.raises(ReplayExhausted):
        p.complete(request())


def test_replay_digest_check():
    good = {"response": "ok", "expected_prompt_digest": sha256_hex("hello")}
    assert ReplayProvider(ReplaySession.from_dict({"turns": [good]})).complete(request()).content == "ok"
    bad = dict(good, expected_prompt_digest="0" * 64)
    with pytest.raises(ReplayMismatch):
        ReplayProvider(ReplaySession.from_dict({"turns": [bad]})).complete(request())


def test_replay_session_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        ReplaySession.load(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text('{"turns": [{"nope": 1}]}')
    with pytest.raises(ConfigError):
        ReplaySession.load(tmp_path / "bad.json")
    (tmp_path / "ok.json").write_text(json.dumps({"turns": [{"response": "r", "finish_reason": "Length"}]}))
    s = ReplaySession.load(tmp_path / "ok.json")
    assert s.turns[0].finish_reason is FinishReason.LENGTH
    assert ReplaySession.from_dict(s.to_dict()).turns == s.turns


def test_replay_config_requires_session():
    with pytest.raises(ConfigError):
        ProviderConfig(kind="replay")
    with pytest.raises(ConfigError):
        ProviderConfig(kind="gemini")


# --- HTTP wire formats -------------------------------------------------------------


def openai_reply(content="```turtle\n<a> <b> <c> .\n```", reason="stop"):
    return {
        "choices": [{"message": {"role": "assistant", "content": content}, "finish_reason": reason}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 5},
    }


def anthropic_reply(text="<a> <b> <c> .", reason="end_turn"):
    return {
        "content": [{"type": "text", "text": text}],
        "stop_reason": reason,
        "usage": {"input_tokens": 10, "output_tokens": 5},
    }


class Recorder:
    def __init__(self, *responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, req: httpx.Request):
        self.requests.append(req)
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return r


def make(kind, handler, monkeypatch, retries=3):
    monkeypatch.setenv("TEST_KEY", "sk-test")
    config = ProviderConfig(kind=kind, model="m1", api_key_env="TEST_KEY", max_retries_transport=retries)
    sleeps = []
    provider = open_provider(config, transport=httpx.MockTransport(handler), sleep=sleeps.append)
    return provider, sleeps


def test_openai_body_has_temperature_zero(monkeypatch):
    rec = Recorder(httpx.Response(200, json=openai_reply()))
    provider, _ = make("openai", rec, monkeypatch)
    assert isinstance(provider, OpenAiProvider)
    resp = provider.complete(LlmRequest((Message("system", "s"), Message("user", "u")), "m1", temperature=1))
    body = json.loads(rec.requests[0].content)
    assert body["temperature"] == 0
    assert body["messages"] == [{"role": "system", "content": "s"}, {"role": "user", "content": "u"}]
    assert rec.requests[0].headers["authorization"] == "Bearer sk-test"
    assert resp.finish_reason is FinishReason.STOP and resp.usage.output_tokens == 5


def test_anthropic_body_and_headers(monkeypatch):
    rec = Recorder(httpx.Response(200, json=anthropic_reply(reason="max_tokens")))
    provider, _ = make("anthropic", rec, monkeypatch)
    assert isinstance(provider, AnthropicProvider)
    resp = provider.complete(LlmRequest((Message("system", "s"), Message("user", "u")), "m1"))
    body = json.loads(rec.requests[0].content)
    assert body["temperature"] == 0 and body["system"] == "s" and body["max_tokens"] == 4096
    assert body["messages"] == [{"role": "user", "content": "u"}]
    assert rec.requests[0].headers["x-api-key"] == "sk-test"
    assert resp.finish_reason is FinishReason.LENGTH


def test_default_provider_is_anthropic():
    assert ProviderConfig().kind is ProviderKind.ANTHROPIC


def test_missing_credentials(monkeypatch):
    monkeypatch.delenv("NOT_SET_ANYWHERE", raising=False)
    config = ProviderConfig(kind="openai", api_key_env="NOT_SET_ANYWHERE")
    with pytest.raises(MissingCredentials):
        open_provider(config, transport=httpx.MockTransport(Recorder())).complete(request())


def test_transport_errors_retried_with_backoff(monkeypatch):
    rec = Recorder(
        httpx.ConnectError("down"),
        httpx.Response(503, text="busy"),
        httpx.Response(200, json=openai_reply()),
    )
    provider, sleeps = make("openai", rec, monkeypatch)
    assert provider.complete(request()).content.startswith("```")
    assert sleeps == [1.0, 2.0]


def test_retries_exhausted(monkeypatch):
    rec = Recorder(*[httpx.ConnectError("down")] * 3)
    provider, sleeps = make("openai", rec, monkeypatch, retries=2)
    with pytest.raises(TransportFailure):
        provider.complete(request())
    assert sleeps == [1.0, 2.0]
    rec = Recorder(*[httpx.ReadTimeout("slow")] * 2)
    provider, _ = make("openai", rec, monkeypatch, retries=1)
    with pytest.raises(Timeout):
        provider.complete(request())
    rec = Recorder(*[httpx.Response(500, text="boom")] * 2)
    provider, _ = make("openai", rec, monkeypatch, retries=1)
    with pytest.raises(HttpStatus) as info:
        provider.complete(request())
    assert info.value.code == 500


def test_client_errors_not_retried(monkeypatch):
    rec = Recorder(httpx.Response(400, text="bad request body"), httpx.Response(200, json=openai_reply()))
    provider, sleeps = make("openai", rec, monkeypatch)
    with pytest.raises(HttpStatus) as info:
        provider.complete(request())
    assert info.value.code == 400 and "bad request" in info.value.body_excerpt
    assert len(rec.requests) == 1 and sleeps == []


# --- extraction ------------------------------------------------------------------------


def stop(content):
    return LlmResponse(content, FinishReason.STOP)


def test_extract_single_fence():
    assert extract_turtle(stop("```turtle\n@prefix a: <x> .\n```")) == "@prefix a: <x> ."


def test_extract_prose_and_fence():
    content = "Sure! Here it is:\n```ttl\n<a> <b> <c> .\n```\nLet me know."
    assert extract_turtle(stop(content)) == "<a> <b> <c> ."


def test_extract_longest_fence_wins():
    content = "```\nshort\n```\ntext\n```turtle\n<a> <b> <c> .\n<d> <e> <f> .\n```"
    assert extract_turtle(stop(content)) == "<a> <b> <c> .\n<d> <e> <f> ."
    assert "2 found" in split_turtle(content).note


def test_extract_bare_content():
    assert extract_turtle(stop("  <a> <b> <c> .\n")) == "<a> <b> <c> ."
    assert split_turtle("<a> <b> <c> .").note.startswith("no fence")


def test_extract_errors():
    with pytest.raises(EmptyExtraction):
        extract_turtle(stop("```turtle\n\n```"))
    with pytest.raises(EmptyExtraction):
        extract_turtle(stop("   "))
    with pytest.raises(TruncatedResponse):
        extract_turtle(LlmResponse("<a> <b>", FinishReason.LENGTH))


body_text = st.text(alphabet=st.characters(blacklist_characters="`~", blacklist_categories=("Cs",)), max_size=80)


@given(body_text, st.sampled_from(["", "Here you go:\n", "Prose.\n\n"]), st.booleans())
def test_extract_idempotent(body, prose, fence):
    content = f"{prose}```turtle\n{body}\n```\n" if fence else prose + body
    try:
        once = extract_turtle(stop(content))
    except EmptyExtraction:
        return
    assert extract_turtle(stop(once)) == once
