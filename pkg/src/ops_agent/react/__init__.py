from .events import (
    FinalAnswer,
    MalformedModelOutput,
    MalformedTranscript,
    Observation,
    StepEvent,
    Thought,
    ToolCall,
    event_from_dict,
    event_to_dict,
    render_transcript,
    validate_transcript,
)
from .model import (
    HttpModelClient,
    ModelClient,
    ModelUnavailable,
    RecordingModel,
    ScriptStubMiss,
    ScriptedModelClient,
    complete,
    cut_at_stop,
    load_stub_fixture,
)
from .parser import extract_thought, parse_step
from .prompt import MissingPlaceholder, ToolSpec, default_template, describe_tools, render_prompt
from .session import (
    BUDGET_SAFETY,
    MAX_MALFORMED_RETRIES,
    STOP_SEQUENCE,
    ContextBudgetExceeded,
    SessionLimits,
    SessionResult,
    SessionStatus,
    compact_context,
    run_session,
)
from .tokens import cap_text, estimate_tokens

__all__ = [
    "BUDGET_SAFETY",
    "ContextBudgetExceeded",
    "FinalAnswer",
    "HttpModelClient",
    "MAX_MALFORMED_RETRIES",
    "MalformedModelOutput",
    "MalformedTranscript",
    "MissingPlaceholder",
    "ModelClient",
    "ModelUnavailable",
    "Observation",
    "RecordingModel",
    "STOP_SEQUENCE",
    "ScriptStubMiss",
    "ScriptedModelClient",
    "SessionLimits",
    "SessionResult",
    "SessionStatus",
    "StepEvent",
    "Thought",
    "ToolCall",
    "ToolSpec",
    "cap_text",
    "complete",
    "compact_context",
    "cut_at_stop",
    "default_template",
    "describe_tools",
    "estimate_tokens",
    "event_from_dict",
    "event_to_dict",
    "extract_thought",
    "load_stub_fixture",
    "parse_step",
    "render_prompt",
    "render_transcript",
    "run_session",
    "validate_transcript",
]
