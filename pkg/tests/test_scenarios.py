"""The five paper-style scenarios, end to end through the CLI, bit-matched
against their frozen golden transcripts."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ops_agent.gateway.cli import main

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

SCENARIOS = {
    "fig1": "Can you summarize the last operations meeting?",
    "fig2": "I want to write values to multiple devices in parallel. How do I do this?",
    "fig3": "Did they manage to define the new hexapod parking position today?",
    "fig4": "Can you ask an expert whether the current value of the Gun Amplitude (Probe) is correct?",
    "fig5": ("Please cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel "
             "and post the result to the logbook afterwards."),
}


def run_scenario(name, task, tmp_path):
    out = tmp_path / f"{name}.transcript.json"
    runner = CliRunner()
    result = runner.invoke(main, [
        "ask", task,
        "--stub", str(FIXTURES / "stubs" / f"{name}.stub.json"),
        "--state-dir", str(tmp_path / name),
        "--transcript-out", str(out),
    ])
    assert result.exit_code == 0, result.output
    return out, result


@pytest.mark.parametrize("name,task", sorted(SCENARIOS.items()))
def test_scenario_transcript_bit_matches_golden(name, task, tmp_path):
    out, _ = run_scenario(name, task, tmp_path)
    golden = (FIXTURES / "golden" / f"{name}.transcript.json").read_bytes()
    assert out.read_bytes() == golden


def test_fig5_transcript_has_three_tool_calls(tmp_path):
    out, _ = run_scenario("fig5", SCENARIOS["fig5"], tmp_path)
    events = json.loads(out.read_text(encoding="utf-8"))
    tool_calls = [e for e in events if e["type"] == "tool_call"]
    assert [t["tool"] for t in tool_calls] == ["experiment_builder", "run_procedure", "logbook_search"]


def test_cli_prints_final_answer_only_by_default(tmp_path):
    _, result = run_scenario("fig3", SCENARIOS["fig3"], tmp_path)
    assert result.output.startswith("Yes. Logbook entry #11")
    assert "Thought:" not in result.output


def test_cli_show_cot_prints_transcript(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "ask", SCENARIOS["fig3"],
        "--stub", str(FIXTURES / "stubs" / "fig3.stub.json"),
        "--state-dir", str(tmp_path / "cot"),
        "--show-cot",
    ])
    assert result.exit_code == 0
    assert "Thought:" in result.output and "Action: logbook_search" in result.output


def test_cli_run_procedure_fixture(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "run-procedure", str(FIXTURES / "procedures" / "fig5.procedure.json"),
        "--state-dir", str(tmp_path / "proc"),
    ])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == "2/2 cycles succeeded, logbook entry #13 created"
    assert "total simulated duration: 10.0 s" in result.output


def test_cli_replay_renders_without_model(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "replay", str(FIXTURES / "golden" / "fig4.transcript.json"),
    ])
    assert result.exit_code == 0
    assert "Action: machine_read" in result.output
    assert "Final Answer:" in result.output


def test_shipped_fig5_document_parses_to_expected_tree():
    from ops_agent.engine import Parallel, Serial, parse_procedure

    text = (FIXTURES / "procedures" / "fig5.procedure.json").read_text(encoding="utf-8")
    node = parse_procedure(text)
    assert isinstance(node, Serial)
    parallel, post = node.children
    assert isinstance(parallel, Parallel)
    assert [c.kind for c in parallel.children] == ["cycle_magnet", "cycle_magnet"]
    assert [c.address.location for c in parallel.children] == ["ARDLMQZM1", "ARDLMQZM2"]
    assert post.kind == "post_logbook"
