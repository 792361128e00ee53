from __future__ import annotations

import json

import httpx
import pytest

from interviewkit.errors import ClientError
from interviewkit.pipeline import ClientConfig, HttpLanguageModel, stage_prompt


class FakeResponse:
    def __init__(self, content: str):
        self._content = content

    def raise_for_status(self):
        return None

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


def test_retries_with_exponential_backoff(monkeypatch):
    attempts = []
    sleeps = []

    def fake_post(url, json=None, headers=None, timeout=None):
        attempts.append(json)
        if len(attempts) < 3:
            raise httpx.ConnectError("boom")
        return FakeResponse("corrected text")

    monkeypatch.setattr(httpx, "post", fake_post)
    client = HttpLanguageModel(ClientConfig(endpoint="http://example/v1", retry_budget=2,
                                            backoff_s=0.5),
                               sleep=sleeps.append)
    assert client.complete("prompt", "input") == "corrected text"
    assert len(attempts) == 3
    assert sleeps == [0.5, 1.0]  # 0.5 * 2**attempt


def test_budget_exhaustion_raises_client_error(monkeypatch):
    def always_fail(url, json=None, headers=None, timeout=None):
        raise httpx.ReadTimeout("slow")

    monkeypatch.setattr(httpx, "post", always_fail)
    client = HttpLanguageModel(ClientConfig(endpoint="http://example/v1", retry_budget=2),
                               sleep=lambda _: None)
    with pytest.raises(ClientError, match="after 3 attempts"):
        client.complete("prompt", "input")


def test_deterministic_stages_pin_temperature_to_zero(monkeypatch):
    bodies = []

    def capture(url, json=None, headers=None, timeout=None):
        bodies.append(json)
        return FakeResponse("ok")

    monkeypatch.setattr(httpx, "post", capture)
    client = HttpLanguageModel(ClientConfig(endpoint="http://example/v1", temperature=0.9))
    client.complete(stage_prompt("01_correct"), "x")
    client.complete(stage_prompt("02_summarize"), "x")
    client.complete(stage_prompt("04_slides"), "x")
    assert [b["temperature"] for b in bodies] == [0.0, 0.0, 0.9]


def test_api_key_sent_as_bearer_but_not_in_repr(monkeypatch):
    headers_seen = []

    def capture(url, json=None, headers=None, timeout=None):
        headers_seen.append(headers)
        return FakeResponse("ok")

    monkeypatch.setattr(httpx, "post", capture)
    config = ClientConfig(endpoint="http://example/v1", api_key="s3cret")
    HttpLanguageModel(config).complete("p", "i")
    assert headers_seen[0]["Authorization"] == "Bearer s3cret"
    assert "s3cret" not in repr(config)


def test_missing_endpoint_rejected(monkeypatch):
    monkeypatch.delenv("INTERVIEWKIT_LLM_ENDPOINT", raising=False)
    with pytest.raises(ClientError, match="endpoint"):
        HttpLanguageModel(ClientConfig())
