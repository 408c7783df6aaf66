"""Tool suite: dispatch, write gating, the two-expert builder, run_procedure."""

import random
import re

import pytest

from ops_agent.engine import Parallel, Serial, parse_procedure, validate
from ops_agent.gateway import build_runtime
from ops_agent.react import ScriptedModelClient
from ops_agent.tools import (
    AlreadyResolved,
    ApprovalBroker,
    NoMatchingTemplate,
    SessionContext,
    UnknownPendingWrite,
)

SP1 = "SIM.MAGNETS/MAGNET/ARDLMQZM1/CURRENT.SP"
PROBE = "SIM.RF/GUN/GUN/AMPL.PROBE"


@pytest.fixture
def runtime(tmp_path):
    model = ScriptedModelClient([(re.compile(r".", re.DOTALL), "canned retrieval answer")])
    return build_runtime(state_dir=tmp_path / "state", model=model)


def dispatch(runtime, tool, text, **ctx_kwargs):
    return runtime.registry.dispatch(tool, text, SessionContext(**ctx_kwargs))


# -- dispatch basics ---------------------------------------------------------

def test_machine_read_initial_setpoint(runtime):
    assert dispatch(runtime, "machine_read", SP1) == "value=0.0 A (writable)"


def test_unknown_tool_lists_registry(runtime):
    obs = dispatch(runtime, "nonexistent", "x")
    assert obs.startswith("Unknown tool 'nonexistent'. Available: ")
    assert "machine_read" in obs and "ask_expert" in obs


def test_tool_error_becomes_observation(runtime):
    obs = dispatch(runtime, "machine_read", "SIM.FOO/X/Y/Z")
    assert obs.startswith("Tool error:")


def test_observations_capped(runtime):
    obs = runtime.registry.dispatch("machine_read", SP1, SessionContext(cap_chars=10))
    assert len(obs) <= 10


# -- write gating ---------------------------------------------------------------

def test_write_requires_approval_then_applies(runtime):
    obs = dispatch(runtime, "machine_write", f"{SP1} 2.5")
    assert "requires operator approval" in obs and "pw-0001" in obs
    assert runtime.sim.read(SP1).value == 0.0  # not applied yet
    pending = runtime.broker.resolve("pw-0001", approve=True)
    assert pending.state == "executed"
    assert runtime.sim.read(SP1).value == 2.5


def test_write_rejected_never_applies(runtime):
    dispatch(runtime, "machine_write", f"{SP1} 3.0")
    runtime.broker.resolve("pw-0001", approve=False)
    assert runtime.sim.read(SP1).value == 0.0


def test_resolve_twice_already_resolved(runtime):
    dispatch(runtime, "machine_write", f"{SP1} 1.0")
    runtime.broker.resolve("pw-0001", approve=True)
    with pytest.raises(AlreadyResolved):
        runtime.broker.resolve("pw-0001", approve=False)
    with pytest.raises(UnknownPendingWrite):
        runtime.broker.resolve("pw-9999", approve=True)


def test_auto_approve_executes_immediately(runtime):
    obs = dispatch(runtime, "machine_write", f"{SP1} 2.5", auto_approve=True)
    assert obs.startswith("written:")
    assert runtime.sim.read(SP1).value == 2.5
    assert runtime.broker.get("pw-0001").state == "executed"


def test_write_read_only_and_limits_surfaced(runtime):
    assert dispatch(runtime, "machine_write", f"{PROBE} 1.0").startswith("ReadOnly:")
    assert dispatch(runtime, "machine_write", f"{SP1} 999").startswith("OutOfLimits:")
    assert runtime.broker.pending() == []


def test_blocking_broker_times_out_to_rejected(tmp_path):
    model = ScriptedModelClient([(re.compile(r"."), "unused")])
    runtime = build_runtime(state_dir=tmp_path / "s", model=model,
                            approval_mode=ApprovalBroker.BLOCK)
    runtime.broker.timeout = 0.05
    obs = dispatch(runtime, "machine_write", f"{SP1} 2.0")
    assert "rejected" in obs and "timed out" in obs
    assert runtime.sim.read(SP1).value == 0.0


# -- experiment builder -----------------------------------------------------------

def test_builder_fig5_intent(runtime):
    built = runtime.builder.build(
        "cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel and post the result to the logbook"
    )
    assert built.schema == "cycle-magnets"
    node = built.node
    assert isinstance(node, Serial) and len(node.children) == 2
    assert isinstance(node.children[0], Parallel)
    kinds = [c.kind for c in node.children[0].children]
    assert kinds == ["cycle_magnet", "cycle_magnet"]
    assert node.children[1].kind == "post_logbook"


def test_builder_energy_gain_intent(runtime):
    built = runtime.builder.build("I want to operate the accelerator at maximum energy gain")
    assert built.schema == "rf-phase-scan"
    scan = built.node.children[0]
    assert scan.kind == "scan"
    assert str(scan.address) == "SIM.RF/GUN/GUN/PHASE"
    assert str(scan.readout) == "SIM.RF/GUN/GUN/AMPL.PROBE"
    assert (scan.start, scan.stop, scan.steps) == (-30.0, 30.0, 13)


def test_builder_single_magnet_serial(runtime):
    built = runtime.builder.build("please cycle ARDLMQZM2 3 times")
    cycles = [n for n in built.node.children if n.kind == "cycle_magnet"]
    assert len(cycles) == 1
    assert cycles[0].address.location == "ARDLMQZM2"
    assert cycles[0].cycles == 3


def test_builder_no_matching_template(runtime):
    with pytest.raises(NoMatchingTemplate):
        runtime.builder.build("brew a pot of coffee")


def test_builder_observation_contains_document_and_rationale(runtime):
    obs = dispatch(runtime, "experiment_builder", "cycle ARDLMQZM1 and ARDLMQZM2 in parallel")
    assert '"type": "serial"' in obs
    assert "Rationale: matched schema 'cycle-magnets'" in obs


def test_builder_documents_always_validate(runtime):
    intents = [
        "cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel and post the result to the logbook",
        "cycle ARDLMQZM1",
        "cycle the magnets 2 times in parallel",
        "I want to operate the accelerator at maximum energy gain",
        "scan the gun phase for best energy gain and post the result to the logbook",
        "what is the hexapod parking position on the machine",
    ]
    for intent in intents:
        built = runtime.builder.build(intent)
        node = parse_procedure(built.document)
        assert validate(node, runtime.sim) == [], intent


def test_builder_deterministic(runtime):
    intent = "cycle ARDLMQZM1 and ARDLMQZM2 in parallel"
    assert runtime.builder.build(intent).document == runtime.builder.build(intent).document


# -- run_procedure tool ---------------------------------------------------------------

def test_run_procedure_fig5_document(runtime):
    built = runtime.builder.build(
        "cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel and post the result to the logbook"
    )
    obs = dispatch(runtime, "run_procedure", built.document)
    assert obs.splitlines()[0] == "2/2 cycles succeeded, logbook entry #13 created"
    assert "total simulated duration: 10.0 s" in obs


def test_run_procedure_invalid_document(runtime):
    obs = dispatch(runtime, "run_procedure", '{"type": "parallel", "children": []}')
    assert obs.startswith("Procedure invalid:")
    assert "empty composite" in obs


def test_run_procedure_parse_error(runtime):
    obs = dispatch(runtime, "run_procedure", "not json at all")
    assert obs.startswith("Procedure parse error:")


def test_run_procedure_busy_magnet_aborts(runtime):
    runtime.sim.start_cycle(SP1, 1)
    doc = ('{"type": "parallel", "children": ['
           '{"type": "action", "kind": "cycle_magnet", "address": "%s", "cycles": 1},'
           '{"type": "action", "kind": "wait", "seconds": 50.0}]}' % SP1)
    obs = dispatch(runtime, "run_procedure", doc)
    assert obs.startswith("Procedure aborted:")
    assert "cancelled" in obs


# -- knowledge and relay tools ------------------------------------------------------

def test_logbook_search_tool(runtime):
    obs = dispatch(runtime, "logbook_search", "hexapod parking position")
    assert obs.splitlines()[0].startswith("#11 [New hexapod parking position defined]")


def test_logbook_post_tool(runtime):
    obs = dispatch(runtime, "logbook_post", "Test title\nline one\nline two")
    assert obs == "Logbook entry #13 created: Test title"
    assert runtime.logbook.get(13).body == "line one\nline two"


def test_docs_howto_tool_uses_disjunct_context(runtime):
    obs = dispatch(runtime, "docs_howto", "write values to multiple devices in parallel")
    assert obs == "canned retrieval answer"
    rag_prompt = runtime.rag_model.calls[-1]
    assert "toolkit documentation retrieval expert" in rag_prompt
    assert "Task:" not in rag_prompt


def test_meeting_summary_no_match(runtime):
    obs = dispatch(runtime, "meeting_summary", "zebra xylophone")
    assert obs.startswith("No relevant content")


def test_ask_expert_tool(runtime):
    runtime.relay.register_responder("hexapod-experts", lambda q, reply: reply("all good"))
    obs = dispatch(runtime, "ask_expert", "hexapod-experts: is the parking position current?")
    assert obs == "Expert reply from hexapod-experts: all good"


def test_ask_expert_unknown_channel(runtime):
    obs = dispatch(runtime, "ask_expert", "no-such-channel: hello?")
    assert obs.startswith("Unknown expert channel")


# -- safety fuzz -----------------------------------------------------------------------

def _strip_timestamps(snapshot):
    return {
        "clock": snapshot["clock"],
        "records": {
            addr: {k: v for k, v in rec.items() if k != "timestamp"}
            for addr, rec in snapshot["records"].items()
        },
    }


def test_dispatch_fuzz_leaves_machine_untouched(runtime):
    rng = random.Random(42)
    names = runtime.registry.names() + ["bogus_tool", "frobnicate"]
    inputs = [
        SP1, PROBE, f"{SP1} 3.0", "SIM.FOO/X/Y/Z 1.0", "", "hexapod parking",
        '{"type": "action"}', "ghost-channel: hi", "junk " * 50,
    ]
    before = _strip_timestamps(runtime.sim.snapshot())
    for _ in range(300):
        tool = rng.choice(names)
        if tool == "run_procedure":
            text = rng.choice(["garbage", '{"type": "wat"}'])
        elif tool == "logbook_post":
            text = ""  # empty posts are rejected; logbook stays untouched too
        else:
            text = rng.choice(inputs)
        runtime.registry.dispatch(tool, text, SessionContext(session_id="fuzz"))
    assert _strip_timestamps(runtime.sim.snapshot()) == before
