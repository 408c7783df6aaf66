"""Step events: the parsed units of agent output forming a transcript.

A well-formed transcript pairs every tool call with exactly one observation
immediately after it, allows observations only after tool calls or malformed
output (the corrective nudge), and puts the final answer last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Thought:
    text: str


@dataclass(frozen=True)
class ToolCall:
    tool: str
    input: str


@dataclass(frozen=True)
class Observation:
    text: str
    source: str


@dataclass(frozen=True)
class FinalAnswer:
    text: str


@dataclass(frozen=True)
class MalformedModelOutput:
    raw: str
    reason: str


StepEvent = Union[Thought, ToolCall, Observation, FinalAnswer, MalformedModelOutput]

_TYPE_NAMES = {
    Thought: "thought",
    ToolCall: "tool_call",
    Observation: "observation",
    FinalAnswer: "final_answer",
    MalformedModelOutput: "malformed",
}


def event_to_dict(event: StepEvent) -> dict:
    kind = _TYPE_NAMES[type(event)]
    if isinstance(event, Thought):
        return {"type": kind, "text": event.text}
    if isinstance(event, ToolCall):
        return {"type": kind, "tool": event.tool, "input": event.input}
    if isinstance(event, Observation):
        return {"type": kind, "text": event.text, "source": event.source}
    if isinstance(event, FinalAnswer):
        return {"type": kind, "text": event.text}
    return {"type": kind, "raw": event.raw, "reason": event.reason}


def event_from_dict(d: dict) -> StepEvent:
    kind = d["type"]
    if kind == "thought":
        return Thought(d["text"])
    if kind == "tool_call":
        return ToolCall(d["tool"], d["input"])
    if kind == "observation":
        return Observation(d["text"], d["source"])
    if kind == "final_answer":
        return FinalAnswer(d["text"])
    if kind == "malformed":
        return MalformedModelOutput(d["raw"], d["reason"])
    raise ValueError(f"unknown event type {kind!r}")


class MalformedTranscript(Exception):
    pass


def validate_transcript(events: list[StepEvent]) -> None:
    """Raise MalformedTranscript if the sequencing invariant is broken."""
    for i, event in enumerate(events):
        if isinstance(event, ToolCall):
            if i + 1 >= len(events) or not isinstance(events[i + 1], Observation):
                raise MalformedTranscript(f"tool call at index {i} lacks a following observation")
        if isinstance(event, Observation):
            if i == 0 or not isinstance(events[i - 1], (ToolCall, MalformedModelOutput)):
                raise MalformedTranscript(f"observation at index {i} does not follow a tool call")
        if isinstance(event, FinalAnswer) and i != len(events) - 1:
            raise MalformedTranscript(f"final answer at index {i} is not the last event")


def render_transcript(events: list[StepEvent]) -> str:
    """Render events as the textual Thought/Action/Observation protocol."""
    lines = []
    for event in events:
        if isinstance(event, Thought):
            lines.append(f"Thought: {event.text}")
        elif isinstance(event, ToolCall):
            lines.append(f"Action: {event.tool}")
            lines.append(f"Action Input: {event.input}")
        elif isinstance(event, Observation):
            lines.append(f"Observation: {event.text}")
        elif isinstance(event, FinalAnswer):
            lines.append(f"Final Answer: {event.text}")
        else:
            lines.append(event.raw)
    return "\n".join(lines)
