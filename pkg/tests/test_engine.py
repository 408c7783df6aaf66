"""Experiment engine: validation, document round-trips, and timing laws."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ops_agent.controlsim import Address, Simulator, build_simulator
from ops_agent.engine import (
    AskExpert,
    CycleMagnet,
    ExecutionAborted,
    ExperimentEngine,
    Parallel,
    ParseError,
    PostLogbook,
    ProcedureLockError,
    ReadValue,
    Scan,
    Serial,
    Wait,
    WriteValue,
    format_procedure,
    mutated_addresses,
    parse_procedure,
    validate,
)
from ops_agent.knowledge import LogbookStore

SP1 = Address.parse("SIM.MAGNETS/MAGNET/ARDLMQZM1/CURRENT.SP")
SP2 = Address.parse("SIM.MAGNETS/MAGNET/ARDLMQZM2/CURRENT.SP")
PROBE = Address.parse("SIM.RF/GUN/GUN/AMPL.PROBE")
PHASE = Address.parse("SIM.RF/GUN/GUN/PHASE")


@pytest.fixture
def sim():
    return build_simulator(seed=42)


@pytest.fixture
def engine(sim, tmp_path):
    logbook = LogbookStore(tmp_path / "logbook.jsonl", clock=lambda: sim.clock)
    return ExperimentEngine(sim, logbook=logbook)


# -- validation ---------------------------------------------------------------

def test_validate_write_to_read_only(sim):
    issues = validate(WriteValue(PROBE, 1.0), sim)
    assert len(issues) == 1 and "read-only" in issues[0].message


def test_validate_empty_parallel(sim):
    issues = validate(Parallel(()), sim)
    assert len(issues) == 1 and "empty composite" in issues[0].message


def test_validate_unknown_address(sim):
    issues = validate(ReadValue(Address.parse("SIM.FOO/X/Y/Z")), sim)
    assert len(issues) == 1 and "unknown address" in issues[0].message


def test_validate_cycle_non_magnet(sim):
    issues = validate(CycleMagnet(PHASE, 1), sim)
    assert any("not a magnet" in i.message for i in issues)


def test_validate_scan_invariants(sim):
    issues = validate(Scan(PHASE, 0.0, 0.0, 1, PROBE), sim)
    messages = " | ".join(i.message for i in issues)
    assert "at least 2 steps" in messages and "from equals to" in messages


def test_validate_depth_limit(sim):
    node = Wait(0.0)
    for _ in range(17):
        node = Serial((node,))
    issues = validate(node, sim)
    assert any("depth" in i.message for i in issues)


def test_fig5_procedure_validates_clean(sim):
    proc = Serial((
        Parallel((CycleMagnet(SP1, 1), CycleMagnet(SP2, 1))),
        PostLogbook("Magnet cycling report", "Cycled.\n{results}"),
    ))
    assert validate(proc, sim) == []


# -- documents -----------------------------------------------------------------

def test_parse_unknown_action_kind():
    doc = '{"type": "action", "kind": "FROBNICATE"}'
    with pytest.raises(ParseError) as err:
        parse_procedure(doc)
    assert "FROBNICATE" in str(err.value)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_procedure('{"type": "serial",\n  "children": [}')
    assert err.value.line == 2


def test_parse_rejects_unknown_fields():
    doc = '{"type": "action", "kind": "wait", "seconds": 1.0, "frobnicate": true}'
    with pytest.raises(ParseError) as err:
        parse_procedure(doc)
    assert "frobnicate" in str(err.value)


_ADDRESSES = [SP1, SP2, PHASE, PROBE]

_actions = st.one_of(
    st.builds(ReadValue, st.sampled_from(_ADDRESSES), label=st.sampled_from(["", "x", "read it"])),
    st.builds(WriteValue, st.sampled_from(_ADDRESSES), st.floats(-10, 10, allow_nan=False),
              label=st.just("")),
    st.builds(Wait, st.floats(0, 5, allow_nan=False), label=st.sampled_from(["", "pause"])),
    st.builds(CycleMagnet, st.sampled_from([SP1, SP2]), st.integers(1, 3), label=st.just("")),
    st.builds(Scan, st.sampled_from(_ADDRESSES), st.floats(-5, 0), st.floats(1, 5),
              st.integers(2, 7), st.sampled_from(_ADDRESSES), label=st.just("")),
    st.builds(PostLogbook, st.text(min_size=1, max_size=12), st.text(min_size=1, max_size=30),
              label=st.just("")),
    st.builds(AskExpert, st.sampled_from(["rf-experts", "ops"]), st.text(min_size=1, max_size=20),
              label=st.just("")),
)

_trees = st.recursive(
    _actions,
    lambda children: st.one_of(
        st.builds(Serial, st.lists(children, min_size=1, max_size=4).map(tuple),
                  label=st.sampled_from(["", "group"])),
        st.builds(Parallel, st.lists(children, min_size=1, max_size=4).map(tuple),
                  label=st.just("")),
    ),
    max_leaves=12,
)


@settings(max_examples=150, deadline=None)
@given(_trees)
def test_parse_format_roundtrip(tree):
    assert parse_procedure(format_procedure(tree)) == tree


# -- execution -----------------------------------------------------------------

def test_serial_waits_sum(engine):
    report = engine.execute(Serial((Wait(1.0), Wait(2.0))))
    assert report.total_duration == 3.0


def test_parallel_waits_max(engine):
    report = engine.execute(Parallel((Wait(1.0), Wait(2.0))))
    assert report.total_duration == 2.0


def test_fig5_execution(engine):
    sim = engine.sim
    sp1_before = sim.read(SP1).value
    sp2_before = sim.read(SP2).value
    proc = Serial((
        Parallel((CycleMagnet(SP1, 1, label="cycle ARDLMQZM1"),
                  CycleMagnet(SP2, 1, label="cycle ARDLMQZM2"))),
        PostLogbook("Magnet cycling report", "Cycled both.\n{results}"),
    ))
    report = engine.execute(proc)
    parallel_report = report.root.children[0]
    # ARDLMQZM1: 80 A at 10 A/s -> 8 s; ARDLMQZM2: 80 A at 8 A/s -> 10 s
    assert parallel_report.duration == max(8.0, 10.0)
    assert sim.read(SP1).value == sp1_before
    assert sim.read(SP2).value == sp2_before
    assert len(report.logbook_ids) == 1
    entry = engine.logbook.get(report.logbook_ids[0])
    assert "ARDLMQZM1" in entry.body and "10.0 s" in entry.body


def test_serial_vs_parallel_cycle_timing(sim, tmp_path):
    def run(parallel):
        fresh = build_simulator(seed=42)
        engine = ExperimentEngine(fresh, logbook=LogbookStore(tmp_path / f"lb-{parallel}.jsonl"))
        leaves = (CycleMagnet(SP1, 1), CycleMagnet(SP2, 1))
        proc = Parallel(leaves) if parallel else Serial(leaves)
        return engine.execute(proc).total_duration

    assert run(parallel=True) == 10.0
    assert run(parallel=False) == 18.0


def test_scan_captures_settled_readings(engine):
    proc = Scan(SP1, -2.0, 2.0, 5, Address.parse("SIM.MAGNETS/MAGNET/ARDLMQZM1/CURRENT.RBV"))
    report = engine.execute(proc)
    # settle is 2*tau per step; tau=0.8 -> 1.6 s, 5 steps -> 8 s
    assert report.total_duration == pytest.approx(5 * 1.6)
    assert [pair[0] for pair in report.root.captured] == [-2.0, -1.0, 0.0, 1.0, 2.0]
    for step_value, reading in report.root.captured:
        # after 2*tau the readback is within 15% of the step (1-e^-2 = 0.8647)
        assert abs(reading - step_value) <= 0.15 * 4.0


def test_fail_fast_cancels_parallel_sibling(engine):
    failing = WriteValue(SP1, 999.0)  # out of limits at execution time
    proc = Parallel((failing, Wait(1000.0)))
    with pytest.raises(ExecutionAborted) as err:
        engine.execute(proc)
    report = err.value.report
    statuses = [c.status for c in report.root.children]
    assert statuses == ["failed", "cancelled"]
    assert report.total_duration < 1000.0


def test_serial_failure_skips_rest(engine):
    proc = Serial((WriteValue(SP1, 999.0), Wait(5.0)))
    with pytest.raises(ExecutionAborted) as err:
        engine.execute(proc)
    assert [c.status for c in err.value.report.root.children] == ["failed", "skipped"]


def test_execute_requires_clean_validation(engine):
    with pytest.raises(ValueError):
        engine.execute(Parallel(()))


def test_repeat_execution_is_deterministic(tmp_path):
    def run():
        sim = build_simulator(seed=42)
        engine = ExperimentEngine(sim, logbook=LogbookStore(tmp_path / "det.jsonl", clock=lambda: sim.clock))
        proc = Serial((
            Parallel((CycleMagnet(SP1, 1), Wait(3.0))),
            Scan(SP2, -1.0, 1.0, 3, SP2),
        ))
        report = engine.execute(proc)
        return report.to_dict()

    first, second = run(), run()
    # logbook ids differ only through the shared tmp store; reports have none here
    assert first == second


def test_ask_expert_action_captures_reply(sim, tmp_path):
    from ops_agent.relay import ExpertRelay

    relay = ExpertRelay()
    relay.register_responder("rf-experts", lambda q, reply: reply("looks nominal"))
    engine = ExperimentEngine(sim, relay=relay, ask_timeout=1.0)
    report = engine.execute(AskExpert("rf-experts", "is the gun amplitude ok?"))
    assert report.root.captured == ["looks nominal"]
    assert report.total_duration == 0.0


def test_ask_expert_without_relay_fails_cleanly(engine):
    with pytest.raises(ExecutionAborted) as err:
        engine.execute(AskExpert("rf-experts", "anyone?"))
    assert "no expert relay" in err.value.report.root.error


def test_lock_sets_reject_overlapping_procedures(engine):
    assert mutated_addresses(Serial((CycleMagnet(SP1, 1), Wait(1.0)))) == {SP1}
    engine._locked = {SP1}
    with pytest.raises(ProcedureLockError):
        engine.execute(WriteValue(SP1, 1.0))
    engine._locked = set()


@settings(max_examples=60, deadline=None)
@given(_waits=st.recursive(
    st.builds(Wait, st.floats(0, 3, allow_nan=False, allow_infinity=False), label=st.just("")),
    lambda children: st.one_of(
        st.builds(Serial, st.lists(children, min_size=1, max_size=3).map(tuple), label=st.just("")),
        st.builds(Parallel, st.lists(children, min_size=1, max_size=3).map(tuple), label=st.just("")),
    ),
    max_leaves=10,
))
def test_timing_laws_hold_exactly(_waits):
    sim = build_simulator(seed=1)
    engine = ExperimentEngine(sim)
    report = engine.execute(_waits)

    def check(node):
        if node.kind == "serial":
            assert node.duration == sum(c.duration for c in node.children if c.status != "skipped")
            for child in node.children:
                check(child)
        elif node.kind == "parallel":
            assert node.duration == max(c.duration for c in node.children)
            for child in node.children:
                check(child)

    check(report.root)
