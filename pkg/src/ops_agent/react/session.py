"""The reasoning/tool-use loop.

Each iteration renders the prompt (compacting old observations if the token
budget demands it), streams a completion that stops before any fabricated
"Observation:", parses it, and either dispatches the requested tool and
injects the real observation, or finishes on a final answer. Malformed
output earns a corrective observation and a bounded number of retries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

from .events import (
    FinalAnswer,
    MalformedModelOutput,
    Observation,
    StepEvent,
    Thought,
    ToolCall,
    validate_transcript,
)
from .model import ModelClient, ModelUnavailable, complete
from .parser import extract_thought, parse_step
from .prompt import ToolSpec, default_template, render_prompt
from .tokens import cap_text, estimate_tokens

# The chars/4 token rule is an estimate, so the advertised context budget is
# enforced at this fraction of its nominal value.
BUDGET_SAFETY = 0.95

# A malformed emission is retried this many times before the session fails.
MAX_MALFORMED_RETRIES = 2

STOP_SEQUENCE = "Observation:"


@dataclass(frozen=True)
class SessionLimits:
    context_budget_tokens: int = 32768
    max_steps: int = 10
    tool_output_cap_chars: int = 2000

    def __post_init__(self):
        if min(self.context_budget_tokens, self.max_steps, self.tool_output_cap_chars) < 1:
            raise ValueError("session limits must be positive")

    @property
    def effective_budget_tokens(self) -> int:
        return int(self.context_budget_tokens * BUDGET_SAFETY)


class SessionStatus(str, Enum):
    DONE = "done"
    STEP_LIMIT_EXCEEDED = "step_limit_exceeded"
    CONTEXT_BUDGET_EXCEEDED = "context_budget_exceeded"
    MALFORMED_OUTPUT = "malformed_output"
    MODEL_UNAVAILABLE = "model_unavailable"


@dataclass
class SessionResult:
    status: SessionStatus
    transcript: list[StepEvent]
    failure: str | None = None

    @property
    def final_answer(self) -> str | None:
        if self.transcript and isinstance(self.transcript[-1], FinalAnswer):
            return self.transcript[-1].text
        return None


class ToolDispatcher(Protocol):
    def specs(self) -> list[ToolSpec]: ...

    def dispatch(self, tool: str, input_text: str, ctx) -> str: ...


class ContextBudgetExceeded(Exception):
    pass


def compact_context(
    transcript: list[StepEvent],
    budget_tokens: int,
    render: Callable[[list[StepEvent]], str],
) -> list[StepEvent]:
    """Elide oldest observation bodies until the rendered prompt fits the budget.

    The task, tool-call lines, and the most recent observation are never
    touched. Raises ContextBudgetExceeded if even the fully elided transcript
    does not fit.
    """
    if estimate_tokens(render(transcript)) <= budget_tokens:
        return transcript
    working = list(transcript)
    observation_indices = [i for i, e in enumerate(working) if isinstance(e, Observation)]
    if observation_indices:
        observation_indices = observation_indices[:-1]  # keep the newest intact
    for index in observation_indices:
        old = working[index]
        working[index] = Observation(
            text=f"[observation elided: {old.source}, {len(old.text)} chars]",
            source=old.source,
        )
        if estimate_tokens(render(working)) <= budget_tokens:
            return working
    raise ContextBudgetExceeded(
        f"prompt skeleton exceeds the token budget ({budget_tokens} tokens)"
    )


@dataclass
class _Emitter:
    transcript: list[StepEvent] = field(default_factory=list)
    on_event: Callable[[StepEvent], None] | None = None

    def emit(self, event: StepEvent):
        self.transcript.append(event)
        if self.on_event is not None:
            self.on_event(event)


def run_session(
    task: str,
    registry: ToolDispatcher,
    model: ModelClient,
    limits: SessionLimits = SessionLimits(),
    template: str | None = None,
    ctx=None,
    on_event: Callable[[StepEvent], None] | None = None,
) -> SessionResult:
    """Run one task to completion against the tool registry and model."""
    tools = registry.specs()
    if not tools:
        raise ValueError("tool registry is empty")
    if template is None:
        template = default_template()
    emitter = _Emitter(on_event=on_event)
    transcript = emitter.transcript

    def render(events: list[StepEvent]) -> str:
        return render_prompt(template, tools, events, task)

    def finish(status: SessionStatus, failure: str | None = None) -> SessionResult:
        validate_transcript(transcript)
        return SessionResult(status=status, transcript=transcript, failure=failure)

    consecutive_malformed = 0
    for _ in range(limits.max_steps):
        try:
            working = compact_context(transcript, limits.effective_budget_tokens, render)
        except ContextBudgetExceeded as exc:
            return finish(SessionStatus.CONTEXT_BUDGET_EXCEEDED, str(exc))
        prompt = render(working)
        try:
            raw = complete(model, prompt, [STOP_SEQUENCE]).strip()
        except ModelUnavailable as exc:
            return finish(SessionStatus.MODEL_UNAVAILABLE, str(exc))

        thought = extract_thought(raw)
        if thought:
            emitter.emit(Thought(thought))
        event = parse_step(raw)

        if isinstance(event, FinalAnswer):
            emitter.emit(event)
            return finish(SessionStatus.DONE)

        if isinstance(event, ToolCall):
            consecutive_malformed = 0
            emitter.emit(event)
            observation = registry.dispatch(event.tool, event.input, ctx)
            observation = cap_text(observation, limits.tool_output_cap_chars)
            emitter.emit(Observation(text=observation, source=event.tool))
            continue

        # malformed output: nudge the model back into the format, retry bounded
        consecutive_malformed += 1
        emitter.emit(event)
        if consecutive_malformed > MAX_MALFORMED_RETRIES:
            return finish(
                SessionStatus.MALFORMED_OUTPUT,
                f"model output stayed malformed after {MAX_MALFORMED_RETRIES} retries: {event.reason}",
            )
        emitter.emit(Observation(
            text=f"Your last output was malformed: {event.reason}. Follow the format.",
            source="format-check",
        ))

    return finish(
        SessionStatus.STEP_LIMIT_EXCEEDED,
        f"no final answer within {limits.max_steps} steps",
    )
