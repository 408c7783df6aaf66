"""Parsing of raw model output into step events.

The textual protocol is: optional `Thought:` line(s), then either an
`Action:` / `Action Input:` pair or a `Final Answer:` marker. Parsing is
total: anything that fits no rule becomes MalformedModelOutput, never an
exception.
"""

from __future__ import annotations

import re

from .events import FinalAnswer, MalformedModelOutput, StepEvent, ToolCall

_THOUGHT_RE = re.compile(r"^[ \t]*Thought:[ \t]*", re.MULTILINE)
_ACTION_RE = re.compile(r"^[ \t]*Action:[ \t]*(.*)$", re.MULTILINE)
_INPUT_RE = re.compile(r"^[ \t]*Action Input:[ \t]*", re.MULTILINE)
_FINAL_RE = re.compile(r"^[ \t]*Final Answer:[ \t]*", re.MULTILINE)


def parse_step(text: str) -> StepEvent:
    """Parse one model emission; total over arbitrary input."""
    action = _ACTION_RE.search(text)
    action_input = _INPUT_RE.search(text)
    if action and action_input:
        tool = action.group(1).strip()
        input_text = text[action_input.end():].strip()
        return ToolCall(tool=tool, input=input_text)
    final = _FINAL_RE.search(text)
    if final:
        return FinalAnswer(text[final.end():].strip())
    if action and not action_input:
        return MalformedModelOutput(raw=text, reason="missing Action Input")
    return MalformedModelOutput(raw=text, reason="no Action or Final Answer marker")


def extract_thought(text: str) -> str | None:
    """The thought text preceding the first Action / Final Answer marker, if any."""
    m = _THOUGHT_RE.search(text)
    if not m:
        return None
    rest = text[m.end():]
    cut = len(rest)
    for marker in (_ACTION_RE, _INPUT_RE, _FINAL_RE):
        hit = marker.search(rest)
        if hit:
            cut = min(cut, hit.start())
    thought = rest[:cut].strip()
    return thought or None
