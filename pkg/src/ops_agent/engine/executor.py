"""Procedure validation and execution on the simulated clock.

Execution is a small discrete-event loop: every running branch of the tree is
a generator that yields sleep requests; the scheduler advances the simulator
to the earliest pending wake-up. Serial children run inside their parent's
generator; parallel children run as independently scheduled tasks joined by
the parent. Durations are accumulated from the requested sleeps, so the
timing laws (serial = sum, parallel = max) hold exactly in float arithmetic.
"""

from __future__ import annotations

import heapq
import itertools
import threading
from dataclasses import dataclass, field

from ..controlsim import Address, SimError, Simulator
from .model import (
    MAX_TREE_DEPTH,
    Action,
    AskExpert,
    CycleMagnet,
    Parallel,
    PostLogbook,
    ProcedureNode,
    ReadValue,
    Scan,
    Serial,
    ValidationIssue,
    Wait,
    WriteValue,
    mutated_addresses,
    walk,
)


class ExecutionAborted(Exception):
    """Raised when the root procedure fails; carries the partial report."""

    def __init__(self, report: "ExecutionReport"):
        super().__init__(report.root.error or "procedure failed")
        self.report = report


class ProcedureLockError(Exception):
    """Another running procedure holds one of the requested addresses."""


class _SubtreeFailed(Exception):
    pass


# -- validation --------------------------------------------------------------

def validate(proc: ProcedureNode, catalog) -> list[ValidationIssue]:
    """Check a procedure against the machine catalog; issues are data, not errors.

    An empty list means every address exists, write/cycle targets are
    writable/magnets, and the structural invariants hold.
    """
    issues = []
    max_depth = 0

    def check_address(path, addr: Address, what="address") -> bool:
        if not catalog.has(addr):
            issues.append(ValidationIssue(path, f"unknown {what} {addr}"))
            return False
        return True

    for path, node, depth in walk(proc):
        max_depth = max(max_depth, depth)
        if isinstance(node, (Serial, Parallel)):
            if not node.children:
                issues.append(ValidationIssue(path, "empty composite"))
        elif isinstance(node, ReadValue):
            check_address(path, node.address)
        elif isinstance(node, WriteValue):
            if check_address(path, node.address) and not catalog.is_writable(node.address):
                issues.append(ValidationIssue(path, f"read-only target {node.address}"))
        elif isinstance(node, CycleMagnet):
            if check_address(path, node.address) and not catalog.is_magnet(node.address):
                issues.append(ValidationIssue(path, f"not a magnet: {node.address}"))
            if node.cycles < 1:
                issues.append(ValidationIssue(path, "cycles must be >= 1"))
        elif isinstance(node, Scan):
            if check_address(path, node.address) and not catalog.is_writable(node.address):
                issues.append(ValidationIssue(path, f"read-only target {node.address}"))
            check_address(path, node.readout, what="readout address")
            if node.steps < 2:
                issues.append(ValidationIssue(path, "scan needs at least 2 steps"))
            if node.start == node.stop:
                issues.append(ValidationIssue(path, "scan range is empty (from equals to)"))
        elif isinstance(node, Wait):
            if node.seconds < 0:
                issues.append(ValidationIssue(path, "wait must be non-negative"))
    if max_depth > MAX_TREE_DEPTH:
        issues.append(ValidationIssue("$", f"tree depth {max_depth} exceeds limit {MAX_TREE_DEPTH}"))
    return issues


# -- reports -----------------------------------------------------------------

@dataclass
class NodeReport:
    kind: str
    label: str
    status: str | None = None
    error: str | None = None
    started_at: float | None = None
    ended_at: float | None = None
    duration: float = 0.0
    captured: list = field(default_factory=list)
    children: list["NodeReport"] = field(default_factory=list)

    def leaves(self):
        if not self.children:
            yield self
        for child in self.children:
            yield from child.leaves()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "status": self.status,
            "error": self.error,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "duration": self.duration,
            "captured": self.captured,
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class ExecutionReport:
    root: NodeReport
    started_at: float
    ended_at: float
    logbook_ids: list[int]

    @property
    def total_duration(self) -> float:
        return self.root.duration

    @property
    def succeeded(self) -> bool:
        return self.root.status == "succeeded"

    def leaves(self):
        return list(self.root.leaves())

    def to_dict(self) -> dict:
        return {
            "root": self.root.to_dict(),
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "total_duration": self.total_duration,
            "logbook_ids": self.logbook_ids,
        }


def _build_reports(node: ProcedureNode) -> NodeReport:
    if isinstance(node, (Serial, Parallel)):
        rep = NodeReport("serial" if isinstance(node, Serial) else "parallel", node.label)
        rep.children = [_build_reports(c) for c in node.children]
        return rep
    return NodeReport(node.kind, node.label)


# -- scheduler ----------------------------------------------------------------

class _Task:
    def __init__(self, gen, report: NodeReport):
        self.gen = gen
        self.report = report
        self.join: "_Join | None" = None
        self.spawned: list["_Task"] = []
        self.done = False
        self.failed = False
        self.cancelled = False


class _Join:
    def __init__(self, parent: _Task, tasks: list[_Task]):
        self.parent = parent
        self.tasks = tasks
        self.remaining = len(tasks)


class _Scheduler:
    def __init__(self, sim: Simulator):
        self.sim = sim
        self.heap: list = []
        self.seq = itertools.count()

    @property
    def now(self) -> float:
        return self.sim.clock

    def schedule(self, task: _Task, at: float):
        heapq.heappush(self.heap, (at, next(self.seq), task))

    def run(self):
        while self.heap:
            at, _, task = heapq.heappop(self.heap)
            if task.done:
                continue
            dt = at - self.sim.clock
            if dt > 0:
                self.sim.tick(dt)
            self._resume(task)

    def _resume(self, task: _Task):
        try:
            command = next(task.gen)
        except StopIteration:
            self._finish(task, failed=False)
            return
        except _SubtreeFailed:
            self._finish(task, failed=True)
            return
        if command[0] == "sleep":
            self.schedule(task, self.now + command[1])
        elif command[0] == "spawn_join":
            children = command[1]
            join = _Join(task, children)
            for child in children:
                child.join = join
                task.spawned.append(child)
                self.schedule(child, self.now)
        else:  # pragma: no cover - internal protocol
            raise RuntimeError(f"unknown scheduler command {command[0]!r}")

    def _finish(self, task: _Task, failed: bool):
        task.done = True
        task.failed = failed
        join = task.join
        if join is None:
            return
        join.remaining -= 1
        if failed:
            for sibling in join.tasks:
                if not sibling.done:
                    self._cancel(sibling)
                    join.remaining -= 1
        if join.remaining == 0:
            self.schedule(join.parent, self.now)

    def _cancel(self, task: _Task):
        task.done = True
        task.cancelled = True
        task.gen.close()
        self._mark_cancelled(task.report)
        for child in task.spawned:
            if not child.done:
                self._cancel(child)
                if child.join is not None:
                    child.join.remaining -= 1

    def _mark_cancelled(self, report: NodeReport):
        if report.status in (None, "running"):
            report.status = "cancelled"
            report.ended_at = self.now
        for child in report.children:
            self._mark_cancelled(child)


# -- leaf behaviour -------------------------------------------------------------

class _Services:
    """Runtime collaborators handed to leaf actions."""

    def __init__(self, sim, logbook=None, relay=None, ask_timeout=120.0):
        self.sim = sim
        self.logbook = logbook
        self.relay = relay
        self.ask_timeout = ask_timeout
        self.logbook_ids: list[int] = []
        self.completed_lines: list[str] = []

    def results_summary(self) -> str:
        return "\n".join(self.completed_lines) if self.completed_lines else "(no results captured)"


def _sleep(report: NodeReport, dt: float):
    yield ("sleep", dt)
    report.duration += dt


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _perform(action: Action, report: NodeReport, services: _Services):
    sim = services.sim
    if isinstance(action, ReadValue):
        record = sim.read(action.address)
        report.captured.append(record.value)
        services.completed_lines.append(f"read {action.address}: {_fmt(record.value)} {record.unit}".rstrip())
    elif isinstance(action, WriteValue):
        sim.write(action.address, action.value)
        services.completed_lines.append(f"write {action.address} = {_fmt(action.value)}")
    elif isinstance(action, Wait):
        yield from _sleep(report, action.seconds)
    elif isinstance(action, CycleMagnet):
        handle = sim.start_cycle(action.address, action.cycles)
        yield from _sleep(report, handle.duration)
        noun = "cycle" if action.cycles == 1 else "cycles"
        services.completed_lines.append(
            f"cycle {action.address.location} ({action.cycles} {noun}): completed in {_fmt(handle.duration)} s"
        )
    elif isinstance(action, Scan):
        settle = 2.0 * sim.time_constant(action.address)
        for value in action.step_values():
            sim.write(action.address, value)
            if settle > 0:
                yield from _sleep(report, settle)
            reading = sim.read(action.readout).value
            report.captured.append([value, reading])
        services.completed_lines.append(
            f"scan {action.address}: {action.steps} points captured from {action.readout}"
        )
    elif isinstance(action, PostLogbook):
        if services.logbook is None:
            raise _SubtreeFailed("no logbook configured")
        body = action.body.replace("{results}", services.results_summary())
        entry_id = services.logbook.post(title=action.title, body=body, author="ops-agent")
        report.captured.append(entry_id)
        services.logbook_ids.append(entry_id)
        services.completed_lines.append(f"logbook entry #{entry_id}: {action.title}")
    elif isinstance(action, AskExpert):
        if services.relay is None:
            raise _SubtreeFailed("no expert relay configured")
        query = services.relay.ask(action.channel, action.question, timeout=services.ask_timeout)
        if query.state != "answered":
            raise _SubtreeFailed(f"no expert reply on {action.channel!r} (state: {query.state})")
        report.captured.append(query.reply)
        services.completed_lines.append(f"expert {action.channel}: {query.reply}")
    else:  # pragma: no cover
        raise _SubtreeFailed(f"unsupported action {action!r}")


def _run_node(node: ProcedureNode, report: NodeReport, sched: _Scheduler, services: _Services):
    if isinstance(node, Serial):
        yield from _run_serial(node, report, sched, services)
    elif isinstance(node, Parallel):
        yield from _run_parallel(node, report, sched, services)
    else:
        yield from _run_leaf(node, report, sched, services)


def _run_leaf(action: Action, report: NodeReport, sched: _Scheduler, services: _Services):
    report.started_at = sched.now
    report.status = "running"
    try:
        yield from _perform(action, report, services)
    except _SubtreeFailed as exc:
        report.status = "failed"
        report.error = str(exc)
        report.ended_at = sched.now
        raise _SubtreeFailed(f"{report.label or report.kind}: {exc}") from None
    except SimError as exc:
        report.status = "failed"
        report.error = str(exc)
        report.ended_at = sched.now
        raise _SubtreeFailed(f"{report.label or report.kind}: {exc}") from None
    report.status = "succeeded"
    report.ended_at = sched.now


def _run_serial(node: Serial, report: NodeReport, sched: _Scheduler, services: _Services):
    report.started_at = sched.now
    report.status = "running"
    failure: str | None = None
    for child, child_report in zip(node.children, report.children):
        if failure is not None:
            child_report.status = "skipped"
            continue
        try:
            yield from _run_node(child, child_report, sched, services)
        except _SubtreeFailed as exc:
            failure = str(exc)
    report.duration = sum(c.duration for c in report.children if c.status != "skipped")
    report.ended_at = sched.now
    if failure is not None:
        report.status = "failed"
        report.error = failure
        raise _SubtreeFailed(failure)
    report.status = "succeeded"


def _run_parallel(node: Parallel, report: NodeReport, sched: _Scheduler, services: _Services):
    report.started_at = sched.now
    report.status = "running"
    tasks = [
        _Task(_run_node(child, child_report, sched, services), child_report)
        for child, child_report in zip(node.children, report.children)
    ]
    yield ("spawn_join", tasks)
    report.duration = max((c.duration for c in report.children), default=0.0)
    report.ended_at = sched.now
    failed = [c for c in report.children if c.status in ("failed", "cancelled")]
    if failed:
        errors = "; ".join(c.error for c in report.children if c.status == "failed" and c.error)
        report.status = "failed"
        report.error = errors or "parallel child failed"
        raise _SubtreeFailed(report.error)
    report.status = "succeeded"


# -- engine ---------------------------------------------------------------------

class ExperimentEngine:
    """Validates and executes procedures against one simulator.

    Procedures may run concurrently only when their mutated address sets are
    disjoint; overlapping execution raises ProcedureLockError.
    """

    def __init__(self, sim: Simulator, logbook=None, relay=None, ask_timeout: float = 120.0):
        self.sim = sim
        self.logbook = logbook
        self.relay = relay
        self.ask_timeout = ask_timeout
        self._guard = threading.Lock()
        self._locked: set[Address] = set()

    def validate(self, proc: ProcedureNode) -> list[ValidationIssue]:
        return validate(proc, self.sim)

    def execute(self, proc: ProcedureNode) -> ExecutionReport:
        issues = self.validate(proc)
        if issues:
            raise ValueError("procedure failed validation: " + "; ".join(map(str, issues)))
        lock_set = mutated_addresses(proc)
        with self._guard:
            conflict = lock_set & self._locked
            if conflict:
                raise ProcedureLockError(
                    "addresses locked by a running procedure: "
                    + ", ".join(sorted(map(str, conflict)))
                )
            self._locked |= lock_set
        try:
            return self._execute(proc)
        finally:
            with self._guard:
                self._locked -= lock_set

    def _execute(self, proc: ProcedureNode) -> ExecutionReport:
        root_report = _build_reports(proc)
        services = _Services(self.sim, self.logbook, self.relay, self.ask_timeout)
        sched = _Scheduler(self.sim)
        started = self.sim.clock
        root_task = _Task(_run_node(proc, root_report, sched, services), root_report)
        sched.schedule(root_task, started)
        sched.run()
        report = ExecutionReport(
            root=root_report,
            started_at=started,
            ended_at=self.sim.clock,
            logbook_ids=services.logbook_ids,
        )
        if root_task.failed:
            raise ExecutionAborted(report)
        return report
