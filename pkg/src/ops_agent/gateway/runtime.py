"""Runtime assembly: one object wiring simulator, stores, relay, tools, model.

Two clock modes exist: "sim" timestamps logbook posts and relay records with
the simulated clock (fully deterministic; used by `ops-agent ask` and tests),
"wall" uses real time (used by `ops-agent serve`).
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..controlsim import Simulator, build_simulator, load_machine_config
from ..knowledge import DocCorpus, LogbookStore
from ..react import (
    ModelClient,
    ScriptedModelClient,
    SessionLimits,
    SessionResult,
    default_template,
    event_from_dict,
    event_to_dict,
    load_stub_fixture,
    run_session,
)
from ..react.model import HttpModelClient
from ..relay import ExpertRelay
from ..tools import ApprovalBroker, ExperimentBuilder, SessionContext, ToolRegistry, build_registry
from ..engine import ExperimentEngine
from .config import AppConfig


@dataclass
class Runtime:
    config: AppConfig
    sim: Simulator
    engine: ExperimentEngine
    logbook: LogbookStore
    meetings: DocCorpus
    docs: DocCorpus
    beamline: DocCorpus
    relay: ExpertRelay
    broker: ApprovalBroker
    builder: ExperimentBuilder
    registry: ToolRegistry
    model: ModelClient | None
    rag_model: ModelClient | None
    template: str
    limits: SessionLimits

    @property
    def ask_timeout(self) -> float:
        return self.config.ask_timeout

    @property
    def rag_k(self) -> int:
        return self.config.rag_k


def _packaged_corpora_dir() -> Path:
    return Path(str(resources.files("ops_agent").joinpath("data/corpus")))


def build_runtime(
    config: AppConfig | None = None,
    state_dir: str | Path | None = None,
    stub_path: str | Path | None = None,
    model: ModelClient | None = None,
    clock_mode: str = "sim",
    approval_mode: str = ApprovalBroker.QUEUE,
    on_write_request=None,
    on_write_resolved=None,
) -> Runtime:
    config = config or AppConfig()
    state = Path(state_dir or config.state_dir)
    state.mkdir(parents=True, exist_ok=True)

    if config.machine_config_path:
        sim = Simulator({**load_machine_config(config.machine_config_path), "seed": config.seed})
    else:
        sim = build_simulator(seed=config.seed)
    clock = (lambda: sim.clock) if clock_mode == "sim" else time.time

    corpora_dir = Path(config.corpora_dir) if config.corpora_dir else _packaged_corpora_dir()
    logbook = LogbookStore.open_seeded(
        state / "logbook.jsonl", corpora_dir / "logbook.seed.jsonl", clock=clock
    )
    meetings = DocCorpus("meeting-notes")
    meetings.ingest(corpora_dir / "meetings")
    docs = DocCorpus("toolkit documentation")
    docs.ingest(corpora_dir / "dge")
    beamline = DocCorpus("beamline knowledge")
    beamline.ingest(corpora_dir / "beamline")

    relay = ExpertRelay(
        channels=tuple(config.relay_channels),
        log_path=state / "relay.jsonl",
        clock=clock,
    )

    stub_responders: dict = {}
    if model is None:
        source = stub_path or config.stub_path
        if source:
            model, stub_responders = load_stub_fixture(source)
        elif config.model_endpoint:
            model = HttpModelClient(config.model_endpoint, config.model_name)
    for channel, script in stub_responders.items():
        delay = float(script.get("delay_s", 0.0))
        reply_text = script["reply"]

        def responder(query, reply, _text=reply_text, _delay=delay):
            if _delay > 0:
                threading.Timer(_delay, reply, args=(_text,)).start()
            else:
                reply(_text)

        relay.register_responder(channel, responder)

    broker = ApprovalBroker(
        sim,
        mode=approval_mode,
        timeout=config.approval_timeout,
        on_request=on_write_request,
        on_resolved=on_write_resolved,
    )
    engine = ExperimentEngine(sim, logbook=logbook, relay=relay, ask_timeout=config.ask_timeout)
    builder = ExperimentBuilder(beamline, sim)
    limits = SessionLimits(
        context_budget_tokens=config.context_budget_tokens,
        max_steps=config.max_steps,
        tool_output_cap_chars=config.tool_output_cap_chars,
    )
    template = (
        Path(config.template_path).read_text(encoding="utf-8")
        if config.template_path
        else default_template()
    )

    runtime = Runtime(
        config=config,
        sim=sim,
        engine=engine,
        logbook=logbook,
        meetings=meetings,
        docs=docs,
        beamline=beamline,
        relay=relay,
        broker=broker,
        builder=builder,
        registry=None,  # filled below; tools need the runtime handle
        model=model,
        rag_model=model,
        template=template,
        limits=limits,
    )
    registry = build_registry(runtime)
    for name in config.disabled_tools:
        registry.remove(name)
    runtime.registry = registry
    return runtime


def run_task(
    runtime: Runtime,
    task: str,
    session_id: str = "cli",
    auto_approve: bool = False,
    on_event=None,
) -> SessionResult:
    if runtime.model is None:
        raise ValueError("no model configured: pass --stub or set [model] endpoint")
    ctx = SessionContext(
        session_id=session_id,
        auto_approve=auto_approve,
        cap_chars=runtime.limits.tool_output_cap_chars,
    )
    return run_session(
        task=task,
        registry=runtime.registry,
        model=runtime.model,
        limits=runtime.limits,
        template=runtime.template,
        ctx=ctx,
        on_event=on_event,
    )


def transcript_to_json(events) -> str:
    """Canonical transcript serialization used for golden fixtures."""
    return json.dumps([event_to_dict(e) for e in events], indent=2, ensure_ascii=False,
                      sort_keys=True) + "\n"


def transcript_from_json(text: str):
    return [event_from_dict(d) for d in json.loads(text)]
