"""Tool registry and dispatch.

Tool failures never escape dispatch: every outcome, including unknown tool
names and internal errors, becomes observation text so the agent loop can
continue. All observations are capped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from ..react.prompt import ToolSpec
from ..react.tokens import cap_text

_NAME_RE = re.compile(r"[a-z_]+\Z")

ToolFn = Callable[[str, "SessionContext"], str]


@dataclass
class SessionContext:
    """Per-session switches handed to every tool invocation."""

    session_id: str = "cli"
    auto_approve: bool = False
    cap_chars: int = 2000


class ToolRegistry:
    def __init__(self):
        self._tools: dict[str, tuple[ToolSpec, ToolFn]] = {}

    def register(self, spec: ToolSpec, fn: ToolFn):
        if not _NAME_RE.match(spec.name):
            raise ValueError(f"tool name must match [a-z_]+: {spec.name!r}")
        if spec.name in self._tools:
            raise ValueError(f"duplicate tool name {spec.name!r}")
        self._tools[spec.name] = (spec, fn)

    def remove(self, name: str):
        self._tools.pop(name, None)

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    def names(self) -> list[str]:
        return list(self._tools)

    def dispatch(self, tool: str, input_text: str, ctx: SessionContext | None = None) -> str:
        ctx = ctx or SessionContext()
        entry = self._tools.get(tool)
        if entry is None:
            text = f"Unknown tool {tool!r}. Available: {', '.join(self._tools)}."
        else:
            _, fn = entry
            try:
                text = fn(input_text, ctx)
            except Exception as exc:
                text = f"Tool error: {exc}"
        return cap_text(text, ctx.cap_chars)
