"""Chat-completion client contract and implementations.

A model client streams completion text for a prompt and stops at (excluding)
the first stop sequence. The HTTP client targets a plain wire contract
(POST /v1/generate, chunked text deltas; see docs/model-server.md) so any
local model server can be adapted. CI and all scenario tests use the
deterministic scripted client only.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable, Iterator, Protocol

import httpx


class ModelUnavailable(Exception):
    pass


class ScriptStubMiss(Exception):
    """The scripted stub had no rule matching the prompt (fixture drift)."""


class ModelClient(Protocol):
    name: str

    def generate(self, prompt: str, stop_sequences: list[str]) -> Iterator[str]:
        """Yield completion text chunks, truncated before any stop sequence."""
        ...


def cut_at_stop(chunks: Iterable[str], stop_sequences: list[str]) -> Iterator[str]:
    """Stream-safe stop-sequence truncation across chunk boundaries."""
    stops = [s for s in stop_sequences if s]
    if not stops:
        yield from chunks
        return
    holdback = max(len(s) for s in stops) - 1
    buffer = ""
    for chunk in chunks:
        buffer += chunk
        earliest = min((i for i in (buffer.find(s) for s in stops) if i >= 0), default=-1)
        if earliest >= 0:
            if buffer[:earliest]:
                yield buffer[:earliest]
            return
        if holdback and len(buffer) > holdback:
            yield buffer[:-holdback]
            buffer = buffer[-holdback:]
        elif not holdback:
            yield buffer
            buffer = ""
    if buffer:
        yield buffer


def complete(model: ModelClient, prompt: str, stop_sequences: list[str]) -> str:
    return "".join(model.generate(prompt, stop_sequences))


class ScriptedModelClient:
    """Deterministic stub: ordered regex rules over the prompt, first match wins.

    Rules come from scenario fixture files; put rules for later loop steps
    first so their more specific patterns shadow the task-level fallback.
    """

    def __init__(self, rules: list[tuple[re.Pattern, str]], name: str = "scripted-stub"):
        self.name = name
        self.rules = rules
        self.calls: list[str] = []

    @classmethod
    def from_fixture(cls, path: str | Path) -> "ScriptedModelClient":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            (re.compile(rule["when"], re.DOTALL), rule["reply"])
            for rule in data["rules"]
        ]
        return cls(rules, name=data.get("name", Path(path).stem))

    def generate(self, prompt: str, stop_sequences: list[str]) -> Iterator[str]:
        self.calls.append(prompt)
        for pattern, reply in self.rules:
            if pattern.search(prompt):
                return cut_at_stop(iter(reply.splitlines(keepends=True)), stop_sequences)
        raise ScriptStubMiss(
            f"no stub rule matched the prompt (tail: ...{prompt[-200:]!r})"
        )


def load_stub_fixture(path: str | Path) -> tuple[ScriptedModelClient, dict]:
    """Load a scenario stub fixture: the scripted model plus expert responder scripts."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    client = ScriptedModelClient(
        [(re.compile(rule["when"], re.DOTALL), rule["reply"]) for rule in data["rules"]],
        name=data.get("name", Path(path).stem),
    )
    return client, data.get("responders", {})


class HttpModelClient:
    """Client for the POST /v1/generate streaming wire contract."""

    def __init__(self, endpoint: str, name: str, timeout: float = 120.0):
        self.endpoint = endpoint.rstrip("/")
        self.name = name
        self.timeout = timeout

    def generate(self, prompt: str, stop_sequences: list[str]) -> Iterator[str]:
        def chunks():
            payload = {
                "model": self.name,
                "prompt": prompt,
                "stop": stop_sequences,
                "stream": True,
            }
            try:
                with httpx.stream(
                    "POST", f"{self.endpoint}/v1/generate", json=payload, timeout=self.timeout
                ) as response:
                    response.raise_for_status()
                    yield from response.iter_text()
            except httpx.HTTPError as exc:
                raise ModelUnavailable(f"{self.endpoint}: {exc}") from exc

        return cut_at_stop(chunks(), stop_sequences)


class RecordingModel:
    """Wrapper that records every prompt sent through it (used in budget tests)."""

    def __init__(self, inner: ModelClient):
        self.inner = inner
        self.name = getattr(inner, "name", "recording")
        self.prompts: list[str] = []

    def generate(self, prompt: str, stop_sequences: list[str]) -> Iterator[str]:
        self.prompts.append(prompt)
        return self.inner.generate(prompt, stop_sequences)
