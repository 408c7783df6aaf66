"""ReAct core: parsing, prompt rendering, budgets, and the session loop."""

import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ops_agent.react import (
    ContextBudgetExceeded,
    FinalAnswer,
    MalformedModelOutput,
    MissingPlaceholder,
    Observation,
    ScriptedModelClient,
    SessionLimits,
    SessionStatus,
    Thought,
    ToolCall,
    ToolSpec,
    compact_context,
    cut_at_stop,
    estimate_tokens,
    extract_thought,
    parse_step,
    render_prompt,
    run_session,
    validate_transcript,
)
from ops_agent.react.events import MalformedTranscript


class MiniRegistry:
    """Tiny dispatcher for loop tests."""

    def __init__(self, tools=None):
        self._tools = tools or {"echo": lambda text, ctx: f"echo: {text}"}

    def specs(self):
        return [ToolSpec(name, f"{name} tool", "text") for name in self._tools]

    def dispatch(self, tool, input_text, ctx):
        fn = self._tools.get(tool)
        if fn is None:
            return f"Unknown tool {tool!r}. Available: {', '.join(self._tools)}."
        return fn(input_text, ctx)


def stub(*rules):
    return ScriptedModelClient([(re.compile(p, re.DOTALL), r) for p, r in rules])


TEMPLATE = "Tools:\n{tools}\n\nTask: {task}\n\n{transcript}"


# -- parse_step -----------------------------------------------------------------

def test_parse_tool_call():
    text = "Thought: need the probe value\nAction: machine_read\nAction Input: SIM.RF/GUN/GUN/AMPL.PROBE"
    event = parse_step(text)
    assert event == ToolCall("machine_read", "SIM.RF/GUN/GUN/AMPL.PROBE")
    assert extract_thought(text) == "need the probe value"


def test_parse_final_answer():
    event = parse_step("Final Answer: The value is nominal.")
    assert event == FinalAnswer("The value is nominal.")


def test_parse_missing_action_input():
    event = parse_step("Action: machine_read")
    assert isinstance(event, MalformedModelOutput)
    assert event.reason == "missing Action Input"


def test_parse_freeform_text_is_malformed():
    event = parse_step("I will now do something unstructured.")
    assert isinstance(event, MalformedModelOutput)


def test_parse_multiline_action_input():
    text = 'Action: run_procedure\nAction Input: {\n  "type": "serial"\n}'
    event = parse_step(text)
    assert event.tool == "run_procedure"
    assert event.input.startswith("{") and event.input.endswith("}")


def test_parse_step_total_on_fuzz():
    rng = random.Random(1234)
    for _ in range(2000):
        raw = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 200)))
        event = parse_step(raw.decode("utf-8", errors="replace"))
        assert event is not None


# -- prompt rendering ---------------------------------------------------------------

def test_render_prompt_tool_order_and_task():
    tools = [ToolSpec("alpha", "first."), ToolSpec("beta", "second.")]
    prompt = render_prompt(TEMPLATE, tools, [], "do the thing")
    assert prompt.index("alpha") < prompt.index("beta")
    assert prompt.rstrip().endswith("Task: do the thing")


def test_render_prompt_injective_on_transcripts():
    tools = [ToolSpec("echo", "echo.")]
    t1 = [Thought("a")]
    t2 = [Thought("b")]
    assert render_prompt(TEMPLATE, tools, t1, "t") != render_prompt(TEMPLATE, tools, t2, "t")


def test_render_prompt_missing_placeholder():
    with pytest.raises(MissingPlaceholder):
        render_prompt("Task: {task}\n{transcript}", [], [], "x")


# -- tokens / stop sequences ----------------------------------------------------------

@pytest.mark.parametrize("text,expected", [("abcd", 1), ("", 0), ("0123456789", 3)])
def test_estimate_tokens(text, expected):
    assert estimate_tokens(text) == expected


def test_cut_at_stop_across_chunk_boundary():
    chunks = ["Thought: looking\nObse", "rvation: fabricated\nmore"]
    assert "".join(cut_at_stop(iter(chunks), ["Observation:"])) == "Thought: looking\n"


def test_cut_at_stop_without_stop():
    chunks = ["abc", "def"]
    assert "".join(cut_at_stop(iter(chunks), ["XYZ"])) == "abcdef"


# -- compaction -------------------------------------------------------------------

def _render(events):
    return render_prompt(TEMPLATE, [ToolSpec("echo", "e.")], events, "task")


def test_compact_returns_unchanged_when_under_budget():
    transcript = [ToolCall("echo", "x"), Observation("short", "echo")]
    assert compact_context(transcript, 10_000, _render) is transcript


def test_compact_elides_oldest_observations_first():
    transcript = []
    for i in range(4):
        transcript.append(ToolCall("echo", f"call-{i}"))
        transcript.append(Observation("X" * 400, "echo"))
    budget = estimate_tokens(_render(transcript)) - 50
    compacted = compact_context(transcript, budget, _render)
    assert estimate_tokens(_render(compacted)) <= budget
    assert "[observation elided: echo, 400 chars]" in compacted[1].text
    # newest observation untouched
    assert compacted[-1].text == "X" * 400
    # tool call lines untouched
    assert all(isinstance(compacted[i], ToolCall) for i in (0, 2, 4, 6))


def test_compact_raises_when_skeleton_too_big():
    transcript = [ToolCall("echo", "Y" * 4000), Observation("Z", "echo")]
    with pytest.raises(ContextBudgetExceeded):
        compact_context(transcript, 10, _render)


# -- run_session -------------------------------------------------------------------

def test_immediate_final_answer():
    model = stub((r".", "Thought: trivial\nFinal Answer: done"))
    result = run_session("t", MiniRegistry(), model, template=TEMPLATE)
    assert result.status == SessionStatus.DONE
    assert result.transcript == [Thought("trivial"), FinalAnswer("done")]


def test_tool_call_then_answer():
    model = stub(
        (r"Observation: echo: ping", "Thought: got it\nFinal Answer: pong"),
        (r".", "Thought: try the tool\nAction: echo\nAction Input: ping"),
    )
    result = run_session("t", MiniRegistry(), model, template=TEMPLATE)
    assert [type(e).__name__ for e in result.transcript] == [
        "Thought", "ToolCall", "Observation", "Thought", "FinalAnswer"]
    validate_transcript(result.transcript)


def test_step_limit_exceeded():
    model = stub((r".", "Thought: pondering\nAction: echo\nAction Input: again"))
    result = run_session("t", MiniRegistry(), model,
                         limits=SessionLimits(max_steps=3), template=TEMPLATE)
    assert result.status == SessionStatus.STEP_LIMIT_EXCEEDED
    assert sum(isinstance(e, ToolCall) for e in result.transcript) == 3
    validate_transcript(result.transcript)


def test_malformed_gets_corrective_observation_then_recovers():
    model = stub(
        (r"Your last output was malformed", "Final Answer: better now"),
        (r".", "rambling without any markers"),
    )
    result = run_session("t", MiniRegistry(), model, template=TEMPLATE)
    assert result.status == SessionStatus.DONE
    kinds = [type(e).__name__ for e in result.transcript]
    assert kinds == ["MalformedModelOutput", "Observation", "FinalAnswer"]
    assert result.transcript[1].text == (
        "Your last output was malformed: no Action or Final Answer marker. Follow the format."
    )


def test_malformed_fails_after_two_retries():
    model = stub((r".", "never following the format"))
    result = run_session("t", MiniRegistry(), model, template=TEMPLATE)
    assert result.status == SessionStatus.MALFORMED_OUTPUT
    assert sum(isinstance(e, MalformedModelOutput) for e in result.transcript) == 3
    validate_transcript(result.transcript)


def test_observation_capped():
    registry = MiniRegistry({"big": lambda text, ctx: "B" * 10_000})
    model = stub(
        (r"Observation: B+", "Final Answer: saw it"),
        (r".", "Action: big\nAction Input: x"),
    )
    result = run_session("t", registry, model,
                         limits=SessionLimits(tool_output_cap_chars=500), template=TEMPLATE)
    obs = [e for e in result.transcript if isinstance(e, Observation)][0]
    assert len(obs.text) == 500
    assert obs.text.endswith("[truncated]")


def test_session_deterministic():
    def run():
        model = stub(
            (r"Observation: echo: ping", "Thought: got it\nFinal Answer: pong"),
            (r".", "Thought: try\nAction: echo\nAction Input: ping"),
        )
        return run_session("t", MiniRegistry(), model, template=TEMPLATE).transcript

    assert run() == run()


def test_model_cannot_fabricate_observations():
    model = stub(
        (r"Observation: echo: real", "Final Answer: ok"),
        (r".", "Thought: sneaky\nAction: echo\nAction Input: real\nObservation: fabricated"),
    )
    result = run_session("t", MiniRegistry(), model, template=TEMPLATE)
    # the fabricated tail was cut at the stop sequence; the real observation followed
    observations = [e for e in result.transcript if isinstance(e, Observation)]
    assert observations[0].text == "echo: real"
    assert result.status == SessionStatus.DONE


def test_transcript_invariant_checker():
    with pytest.raises(MalformedTranscript):
        validate_transcript([ToolCall("a", "b")])
    with pytest.raises(MalformedTranscript):
        validate_transcript([Observation("x", "a")])
    with pytest.raises(MalformedTranscript):
        validate_transcript([FinalAnswer("x"), Thought("y")])


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=400))
def test_parse_step_never_raises(text):
    event = parse_step(text)
    assert event is not None
