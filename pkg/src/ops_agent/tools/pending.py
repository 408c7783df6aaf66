"""Gated machine writes: the safety boundary between the agent and the machine.

Every direct write request becomes a PendingWrite. The value reaches the
simulator exactly when the state becomes `executed`, which is only reachable
from `approved`. Sessions may block awaiting a human decision (gateway mode)
or just queue the request; `auto_approve` is for tests and headless runs that
opt in explicitly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

from ..controlsim import Simulator

PENDING = "pending"
APPROVED = "approved"
REJECTED = "rejected"
EXECUTED = "executed"


class UnknownPendingWrite(Exception):
    pass


class AlreadyResolved(Exception):
    pass


@dataclass
class PendingWrite:
    id: str
    address: str
    value: float
    requested_by: str
    state: str = PENDING
    error: str | None = None
    _event: threading.Event = field(default_factory=threading.Event, repr=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "address": self.address,
            "value": self.value,
            "requested_by": self.requested_by,
            "state": self.state,
            "error": self.error,
        }


class ApprovalBroker:
    """Holds pending writes and applies approved ones to the simulator."""

    QUEUE = "queue"
    BLOCK = "block"

    def __init__(
        self,
        sim: Simulator,
        mode: str = QUEUE,
        timeout: float = 600.0,
        on_request: Callable[[PendingWrite], None] | None = None,
        on_resolved: Callable[[PendingWrite], None] | None = None,
    ):
        self.sim = sim
        self.mode = mode
        self.timeout = timeout
        self.on_request = on_request
        self.on_resolved = on_resolved
        self._lock = threading.Lock()
        self._writes: dict[str, PendingWrite] = {}
        self._counter = 0

    def submit(self, address: str, value: float, requested_by: str) -> PendingWrite:
        with self._lock:
            self._counter += 1
            pending = PendingWrite(
                id=f"pw-{self._counter:04d}",
                address=str(address),
                value=float(value),
                requested_by=requested_by,
            )
            self._writes[pending.id] = pending
        if self.on_request is not None:
            self.on_request(pending)
        return pending

    def get(self, pending_id: str) -> PendingWrite:
        pending = self._writes.get(pending_id)
        if pending is None:
            raise UnknownPendingWrite(pending_id)
        return pending

    def pending(self) -> list[PendingWrite]:
        with self._lock:
            return [w for w in self._writes.values() if w.state == PENDING]

    def all_writes(self) -> list[PendingWrite]:
        with self._lock:
            return list(self._writes.values())

    def resolve(self, pending_id: str, approve: bool) -> PendingWrite:
        """Transition a pending write; approval applies the value to the machine."""
        pending = self.get(pending_id)
        with self._lock:
            if pending.state != PENDING:
                raise AlreadyResolved(f"{pending_id} is already {pending.state}")
            pending.state = APPROVED if approve else REJECTED
        if approve:
            try:
                self.sim.write(pending.address, pending.value)
            except Exception as exc:
                pending.error = str(exc)
            else:
                pending.state = EXECUTED
        pending._event.set()
        if self.on_resolved is not None:
            self.on_resolved(pending)
        return pending

    def await_resolution(self, pending: PendingWrite) -> PendingWrite:
        """Block until resolved; unresolved requests are rejected at the timeout."""
        pending._event.wait(self.timeout)
        with self._lock:
            still_pending = pending.state == PENDING
        if still_pending:
            try:
                self.resolve(pending.id, approve=False)
            except AlreadyResolved:
                pass
            pending.error = f"approval timed out after {self.timeout:g} s"
        return pending
