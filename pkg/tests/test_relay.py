"""Expert relay: routing, reply/timeout race, durable log."""

import random
import threading
import time

import pytest

from ops_agent.relay import (
    ANSWERED,
    TIMED_OUT,
    DuplicateChannel,
    ExpertRelay,
    UnknownChannel,
)


def immediate(reply_text):
    def responder(query, reply):
        reply(reply_text)
    return responder


def delayed(reply_text, delay):
    def responder(query, reply):
        threading.Timer(delay, reply, args=(reply_text,)).start()
    return responder


def test_scripted_responder_answers():
    relay = ExpertRelay()
    relay.register_responder("rf-experts", delayed("value is nominal", 0.05))
    query = relay.ask("rf-experts", "is the probe value ok?", timeout=5.0)
    assert query.state == ANSWERED
    assert query.reply == "value is nominal"


def test_no_responder_times_out():
    relay = ExpertRelay(channels=("rf-experts",))
    query = relay.ask("rf-experts", "anyone there?", timeout=0.1)
    assert query.state == TIMED_OUT


def test_unknown_channel():
    relay = ExpertRelay(channels=("rf-experts",))
    with pytest.raises(UnknownChannel):
        relay.ask("no-such-channel", "hello", timeout=0.1)


def test_responder_invoked_once_per_ask():
    calls = []
    relay = ExpertRelay()

    def responder(query, reply):
        calls.append(query.id)
        reply("ok")

    relay.register_responder("ops", responder)
    relay.ask("ops", "one", timeout=1.0)
    relay.ask("ops", "two", timeout=1.0)
    assert len(calls) == 2


def test_duplicate_responder_rejected():
    relay = ExpertRelay()
    relay.register_responder("ops", immediate("a"))
    with pytest.raises(DuplicateChannel):
        relay.register_responder("ops", immediate("b"))


def test_channels_route_independently():
    relay = ExpertRelay()
    relay.register_responder("rf", immediate("rf answer"))
    relay.register_responder("magnets", immediate("magnet answer"))
    assert relay.ask("rf", "q", timeout=1.0).reply == "rf answer"
    assert relay.ask("magnets", "q", timeout=1.0).reply == "magnet answer"


def test_late_reply_discarded_after_timeout(tmp_path):
    relay = ExpertRelay(log_path=tmp_path / "relay.jsonl")
    relay.register_responder("slow", delayed("too late", 0.3))
    query = relay.ask("slow", "q", timeout=0.05)
    assert query.state == TIMED_OUT
    time.sleep(0.4)
    assert query.state == TIMED_OUT  # terminal state never overwritten
    log = (tmp_path / "relay.jsonl").read_text(encoding="utf-8")
    assert "late_reply" in log


def test_exactly_once_transition_under_races():
    rng = random.Random(99)
    relay = ExpertRelay()

    def racy(query, reply):
        delay = rng.choice([0.0, 0.005, 0.01, 0.02, 0.04])
        threading.Timer(delay, reply, args=("r",)).start()

    relay.register_responder("race", racy)
    for _ in range(40):
        query = relay.ask("race", "q", timeout=0.01)
        assert query.state in (ANSWERED, TIMED_OUT)
        if query.state == ANSWERED:
            assert query.reply == "r"
        else:
            assert query.reply is None
    time.sleep(0.1)  # let stragglers land; none may flip a terminal state
    for query in relay.queries():
        assert query.state in (ANSWERED, TIMED_OUT)


def test_restart_replays_durable_log(tmp_path):
    path = tmp_path / "relay.jsonl"
    relay = ExpertRelay(channels=("quiet",), log_path=path)
    relay.register_responder("ops", immediate("done"))
    answered = relay.ask("ops", "will you answer?", timeout=1.0)
    timed_out = relay.ask("quiet", "silence?", timeout=0.05)

    reloaded = ExpertRelay(log_path=path)
    states = {q.id: q for q in reloaded.queries()}
    assert states[answered.id].state == ANSWERED
    assert states[answered.id].reply == "done"
    assert states[timed_out.id].state == TIMED_OUT
    # id counter continues past replayed queries
    reloaded.add_channel("ops")
    fresh = reloaded.ask("ops", "new", timeout=0.05)
    assert int(fresh.id.split("-")[1]) > int(timed_out.id.split("-")[1])
