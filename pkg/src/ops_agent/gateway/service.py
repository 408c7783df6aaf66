"""Session service: runs agent sessions, fans out ordered event streams,
owns the approval workflow, and persists terminal transcripts."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..react import FinalAnswer, event_to_dict
from ..tools import AlreadyResolved, PendingWrite, UnknownPendingWrite  # noqa: F401 (re-exported)
from .runtime import Runtime, run_task

RUNNING = "running"
AWAITING_APPROVAL = "awaiting_approval"
DONE = "done"
FAILED = "failed"

# Event types delivered to subscribers of sessions created with show_cot=false.
PUBLIC_EVENT_TYPES = ("status", "approval_request", "final_answer")


class UnknownSession(Exception):
    pass


@dataclass
class SessionState:
    id: str
    task: str
    show_cot: bool
    auto_approve: bool
    created_at: float
    status: str = RUNNING
    failure: str | None = None
    events: list[dict] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition, repr=False)
    terminal: bool = False

    def summary(self) -> dict:
        return {
            "id": self.id,
            "task": self.task,
            "status": self.status,
            "failure": self.failure,
            "show_cot": self.show_cot,
            "created_at": self.created_at,
        }


class GatewayService:
    def __init__(self, runtime: Runtime, state_dir: str | Path):
        self.runtime = runtime
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_path = self.state_dir / "sessions.jsonl"
        self._sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()
        self._counter = 0
        runtime.broker.on_request = self._on_write_request
        runtime.broker.on_resolved = self._on_write_resolved
        self._load_persisted()

    # -- persistence ------------------------------------------------------

    def _load_persisted(self):
        if not self.sessions_path.exists():
            return
        for line in self.sessions_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            state = SessionState(
                id=record["id"],
                task=record["task"],
                show_cot=record.get("show_cot", False),
                auto_approve=record.get("auto_approve", False),
                created_at=record.get("created_at", 0.0),
                status=record["status"],
                failure=record.get("failure"),
                events=record.get("events", []),
            )
            state.terminal = True
            self._sessions[state.id] = state
            number = int(state.id.split("-")[-1])
            self._counter = max(self._counter, number)

    def _persist(self, state: SessionState):
        record = {**state.summary(), "auto_approve": state.auto_approve, "events": state.events}
        with self.sessions_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    # -- event plumbing -----------------------------------------------------

    def _emit(self, state: SessionState, event: dict):
        with state.cond:
            event = {"seq": len(state.events), **event}
            state.events.append(event)
            state.cond.notify_all()

    def _set_status(self, state: SessionState, status: str, detail: str | None = None):
        state.status = status
        event = {"type": "status", "status": status}
        if detail:
            event["detail"] = detail
        self._emit(state, event)

    def _on_write_request(self, pending: PendingWrite):
        state = self._sessions.get(pending.requested_by)
        if state is None:
            return
        self._set_status(state, AWAITING_APPROVAL)
        self._emit(state, {
            "type": "approval_request",
            "pending_id": pending.id,
            "address": pending.address,
            "value": pending.value,
        })

    def _on_write_resolved(self, pending: PendingWrite):
        state = self._sessions.get(pending.requested_by)
        if state is None or state.terminal:
            return
        if state.status == AWAITING_APPROVAL:
            self._set_status(state, RUNNING, detail=f"write {pending.id} {pending.state}")

    # -- sessions ------------------------------------------------------------

    def create_session(self, task: str, show_cot: bool = False, auto_approve: bool = False) -> SessionState:
        with self._lock:
            self._counter += 1
            state = SessionState(
                id=f"s-{self._counter:04d}",
                task=task,
                show_cot=show_cot,
                auto_approve=auto_approve,
                created_at=time.time(),
            )
            self._sessions[state.id] = state
        thread = threading.Thread(target=self._run, args=(state,), daemon=True)
        thread.start()
        return state

    def _run(self, state: SessionState):
        self._set_status(state, RUNNING)
        try:
            result = run_task(
                self.runtime,
                state.task,
                session_id=state.id,
                auto_approve=state.auto_approve,
                on_event=lambda ev: self._emit(state, event_to_dict(ev)),
            )
        except Exception as exc:  # defensive: a crashed loop must still terminate the stream
            state.failure = str(exc)
            self._finish(state, FAILED, detail=str(exc))
            return
        if result.status.value == "done" and isinstance(result.transcript[-1], FinalAnswer):
            self._finish(state, DONE)
        else:
            state.failure = result.failure or result.status.value
            self._finish(state, FAILED, detail=state.failure)

    def _finish(self, state: SessionState, status: str, detail: str | None = None):
        with state.cond:
            state.terminal = True
        self._set_status(state, status, detail)
        self._persist(state)

    def get_session(self, session_id: str) -> SessionState:
        state = self._sessions.get(session_id)
        if state is None:
            raise UnknownSession(session_id)
        return state

    def list_sessions(self) -> list[dict]:
        with self._lock:
            return [s.summary() for s in self._sessions.values()]

    def subscribe(self, session_id: str, privileged: bool | None = None, poll_timeout: float = 0.2):
        """Yield the session's events in order: full replay, then follow to the end.

        `privileged=None` derives visibility from the session's show_cot flag;
        hidden sessions only ever deliver status, approval, and final-answer
        events to subscribers.
        """
        state = self.get_session(session_id)
        if privileged is None:
            privileged = state.show_cot
        index = 0
        while True:
            with state.cond:
                while index >= len(state.events) and not state.terminal:
                    state.cond.wait(poll_timeout)
                batch = state.events[index:]
                terminal = state.terminal
            for event in batch:
                if privileged or event["type"] in PUBLIC_EVENT_TYPES:
                    yield event
            index += len(batch)
            if terminal and index >= len(state.events):
                return

    def wait_done(self, session_id: str, timeout: float = 30.0) -> SessionState:
        state = self.get_session(session_id)
        deadline = time.time() + timeout
        with state.cond:
            while not state.terminal and time.time() < deadline:
                state.cond.wait(0.05)
        return state

    # -- approvals, machine, logbook, relay -------------------------------------

    def resolve_write(self, pending_id: str, approve: bool) -> PendingWrite:
        return self.runtime.broker.resolve(pending_id, approve)

    def pending_writes(self) -> list[PendingWrite]:
        return self.runtime.broker.pending()

    def snapshot(self) -> dict:
        return self.runtime.sim.snapshot()


def start_ticker(runtime: Runtime, hz: float = 10.0) -> threading.Event:
    """Advance the simulated clock at `hz` from wall time; returns the stop flag."""
    stop = threading.Event()
    dt = 1.0 / hz

    def loop():
        while not stop.wait(dt):
            runtime.sim.tick(dt)

    threading.Thread(target=loop, daemon=True).start()
    return stop
