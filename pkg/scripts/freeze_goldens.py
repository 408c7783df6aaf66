#!/usr/bin/env python3
"""Regenerate scenario fixtures: stub files, procedure documents, golden transcripts.

Run from the repo root. The generated files under fixtures/ are frozen test
inputs; regenerating them is a deliberate act (audit the printed transcripts
before committing a change).
"""

from __future__ import annotations

import json
import re
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from ops_agent.engine import Scan, Serial, format_procedure, parse_procedure  # noqa: E402
from ops_agent.gateway import build_runtime, run_task, transcript_to_json  # noqa: E402
from ops_agent.gateway.service import GatewayService  # noqa: E402
from ops_agent.react import render_transcript  # noqa: E402

FIXTURES = ROOT / "fixtures"

PROBE_VALUE = "57.9937979450515"  # first seeded draw at seed 42, setpoint 58.0

TASKS = {
    "fig1": "Can you summarize the last operations meeting?",
    "fig2": "I want to write values to multiple devices in parallel. How do I do this?",
    "fig3": "Did they manage to define the new hexapod parking position today?",
    "fig4": "Can you ask an expert whether the current value of the Gun Amplitude (Probe) is correct?",
    "fig5": ("Please cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel "
             "and post the result to the logbook afterwards."),
}

FIG5_INTENT = ("cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel "
               "and post the result to the logbook")

MEETING_ANSWER = (
    "In the operations meeting of 2024-04-22 the team reported that gun conditioning "
    "is complete and the machine now runs at the 58 MV working point, with the "
    "amplitude probe calibration cross-checked against the power meter chain. It was "
    "decided to go ahead with the hexapod chamber realignment and redefine the parking "
    "position afterwards, and to schedule a magnet cycling campaign for the ARDL "
    "matching quadrupoles. The DAQ maintenance window remains to be coordinated."
)

PARALLEL_ANSWER = (
    "Put one write_value action per device inside a parallel node: all children start "
    "at the same simulated instant and the group finishes with the slowest child, so "
    "the writes are issued together. Wrap the group in a serial node if settling waits "
    "or readbacks must follow. The validator checks every target address for existence "
    "and writability before anything runs."
)

EXPERT_REPLY = (
    "Yes, that is correct: at the 58 MV working point the probe scatters by about "
    "0.2 MV around the setpoint, so 57.99 MV is nominal."
)


def build_fig5_document() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        runtime = build_runtime(state_dir=tmp)
        return runtime.builder.build(FIG5_INTENT).document


def build_scan_document() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        runtime = build_runtime(state_dir=tmp)
        built = runtime.builder.build("I want to operate the accelerator at maximum energy gain")
        return built.document


def stub_fixtures() -> dict[str, dict]:
    fig5_document = build_fig5_document()
    return {
        "fig1": {
            "name": "fig1-meeting-summary",
            "rules": [
                {
                    "when": r"^You are the meeting-notes retrieval expert",
                    "reply": MEETING_ANSWER,
                },
                {
                    "when": r"Observation: In the operations meeting of 2024-04-22",
                    "reply": (
                        "Thought: The meeting-notes expert returned a condensed summary; "
                        "I can answer now.\n"
                        "Final Answer: Summary of the last operations meeting (2024-04-22): "
                        "gun conditioning is complete and the machine runs at the 58 MV working "
                        "point with the probe calibration cross-checked; the hexapod chamber "
                        "realignment goes ahead and the parking position will be redefined "
                        "afterwards; a magnet cycling campaign for the ARDL matching quadrupoles "
                        "is scheduled; the DAQ maintenance window still needs to be coordinated."
                    ),
                },
                {
                    "when": r"Task: Can you summarize the last operations meeting\?",
                    "reply": (
                        "Thought: The user wants a summary of the most recent operations "
                        "meeting. The meeting_summary expert condenses the meeting notes "
                        "in its own context.\n"
                        "Action: meeting_summary\n"
                        "Action Input: summarize the most recent operations meeting"
                    ),
                },
            ],
        },
        "fig2": {
            "name": "fig2-parallel-writes",
            "rules": [
                {
                    "when": r"^You are the toolkit documentation retrieval expert",
                    "reply": PARALLEL_ANSWER,
                },
                {
                    "when": r"Observation: Put one write_value action per device",
                    "reply": (
                        "Thought: The documentation expert explained the pattern; I can "
                        "answer with the recipe.\n"
                        "Final Answer: Use a parallel group: put one write_value action per "
                        "device inside a node of type \"parallel\". All writes start at the "
                        "same simulated instant and the group finishes with the slowest "
                        "child. Wrap it in a serial node if you need settling waits or "
                        "readback checks afterwards; validation rejects read-only or unknown "
                        "targets before anything runs."
                    ),
                },
                {
                    "when": r"Task: I want to write values to multiple devices in parallel",
                    "reply": (
                        "Thought: This is a how-to question about the experiment toolkit; "
                        "the documentation expert can answer it.\n"
                        "Action: docs_howto\n"
                        "Action Input: write values to multiple devices in parallel"
                    ),
                },
            ],
        },
        "fig3": {
            "name": "fig3-hexapod-logbook",
            "rules": [
                {
                    "when": r"Observation: #11 \[New hexapod parking position defined\]",
                    "reply": (
                        "Thought: The logbook confirms the parking position was redefined "
                        "today.\n"
                        "Final Answer: Yes. Logbook entry #11 \"New hexapod parking position "
                        "defined\" reports that the hexapod parking position was redefined "
                        "after the chamber realignment: the new position is "
                        "[2.5, 0.0, 1.2, 0.0, 0.0, 0.0] mm, stored in the machine "
                        "configuration and verified for clearance with the vacuum group."
                    ),
                },
                {
                    "when": r"Task: Did they manage to define the new hexapod parking position today\?",
                    "reply": (
                        "Thought: This asks about a recent operational change; the "
                        "electronic logbook is the right source.\n"
                        "Action: logbook_search\n"
                        "Action Input: hexapod parking position"
                    ),
                },
            ],
        },
        "fig4": {
            "name": "fig4-gun-probe-expert",
            "responders": {
                "rf-experts": {"reply": EXPERT_REPLY, "delay_s": 0},
            },
            "rules": [
                {
                    "when": r"Observation: Expert reply from rf-experts",
                    "reply": (
                        "Thought: The RF experts confirmed the reading.\n"
                        f"Final Answer: The Gun Amplitude (Probe) currently reads "
                        f"{PROBE_VALUE} MV. I asked the RF experts and they confirm this "
                        "value is correct for the 58 MV working point (the probe scatters "
                        "by about 0.2 MV around the setpoint)."
                    ),
                },
                {
                    "when": rf"Observation: value={re.escape(PROBE_VALUE)} MV \(read-only\)",
                    "reply": (
                        "Thought: I have the current probe value; now I should ask a human "
                        "RF expert whether it is correct.\n"
                        "Action: ask_expert\n"
                        f"Action Input: rf-experts: The Gun Amplitude (Probe) currently "
                        f"reads {PROBE_VALUE} MV. Is this value correct?"
                    ),
                },
                {
                    "when": r"Task: Can you ask an expert whether the current value of the Gun Amplitude \(Probe\) is correct\?",
                    "reply": (
                        "Thought: First I need the current value of the Gun Amplitude "
                        "(Probe) from the machine.\n"
                        "Action: machine_read\n"
                        "Action Input: SIM.RF/GUN/GUN/AMPL.PROBE"
                    ),
                },
            ],
        },
        "fig5": {
            "name": "fig5-parallel-cycle-logbook",
            "rules": [
                {
                    "when": r"Observation: #13 \[Magnet cycling report\]",
                    "reply": (
                        "Thought: The report entry exists in the logbook; everything is "
                        "done.\n"
                        "Final Answer: Both magnets were cycled in parallel: the parallel "
                        "stage finished in 10.0 simulated seconds (ARDLMQZM1 took 8.0 s, "
                        "ARDLMQZM2 10.0 s) and both setpoints returned exactly to their "
                        "pre-cycle values. The outcome is recorded as logbook entry #13 "
                        "\"Magnet cycling report\"."
                    ),
                },
                {
                    "when": r"2/2 cycles succeeded, logbook entry #13 created",
                    "reply": (
                        "Thought: The procedure ran and posted its report; let me confirm "
                        "the logbook entry exists.\n"
                        "Action: logbook_search\n"
                        "Action Input: Magnet cycling report"
                    ),
                },
                {
                    "when": r"Rationale: matched schema 'cycle-magnets'",
                    "reply": (
                        "Thought: The builder returned a validated procedure document that "
                        "cycles both magnets in parallel and posts to the logbook. I will "
                        "run it.\n"
                        "Action: run_procedure\n"
                        f"Action Input: {fig5_document}"
                    ),
                },
                {
                    "when": r"Task: Please cycle the two magnets",
                    "reply": (
                        "Thought: This is a machine task combining magnet knowledge and "
                        "procedure writing; the experiment_builder composes both experts.\n"
                        "Action: experiment_builder\n"
                        f"Action Input: {FIG5_INTENT}"
                    ),
                },
            ],
        },
    }


def freeze_procedures():
    procedures = FIXTURES / "procedures"
    procedures.mkdir(parents=True, exist_ok=True)
    fig5 = build_fig5_document()
    parse_procedure(fig5)  # sanity
    (procedures / "fig5.procedure.json").write_text(fig5, encoding="utf-8")
    scan = build_scan_document()
    parse_procedure(scan)
    (procedures / "scan.procedure.json").write_text(scan, encoding="utf-8")
    print(f"wrote {procedures / 'fig5.procedure.json'}")
    print(f"wrote {procedures / 'scan.procedure.json'}")


def freeze_stubs() -> dict[str, Path]:
    stubs_dir = FIXTURES / "stubs"
    stubs_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, stub in stub_fixtures().items():
        path = stubs_dir / f"{name}.stub.json"
        path.write_text(json.dumps(stub, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        paths[name] = path
        print(f"wrote {path}")
    return paths


def freeze_transcripts(stub_paths: dict[str, Path]):
    golden = FIXTURES / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    for name, stub_path in stub_paths.items():
        with tempfile.TemporaryDirectory() as tmp:
            runtime = build_runtime(state_dir=tmp, stub_path=stub_path)
            result = run_task(runtime, TASKS[name], session_id="cli")
        assert result.status.value == "done", f"{name}: {result.status} {result.failure}"
        path = golden / f"{name}.transcript.json"
        path.write_text(transcript_to_json(result.transcript), encoding="utf-8")
        print(f"\n=== {name}: {TASKS[name]}")
        print(render_transcript(result.transcript))
        print(f"wrote {path}")


def freeze_gateway_events(stub_paths: dict[str, Path]):
    golden = FIXTURES / "golden"
    with tempfile.TemporaryDirectory() as tmp:
        runtime = build_runtime(state_dir=tmp, stub_path=stub_paths["fig1"])
        service = GatewayService(runtime, state_dir=tmp)
        state = service.create_session(TASKS["fig1"], show_cot=True)
        service.wait_done(state.id)
        events = list(service.subscribe(state.id))
    path = golden / "fig1.events.json"
    path.write_text(json.dumps(events, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {path}")


if __name__ == "__main__":
    freeze_procedures()
    stub_paths = freeze_stubs()
    freeze_transcripts(stub_paths)
    freeze_gateway_events(stub_paths)
    print("\nall fixtures written")
