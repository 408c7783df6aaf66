"""The standard multi-expert tool set.

Thin adapters that turn tool-call text into operations on the simulator,
experiment engine, knowledge stores, and expert relay. Every outcome is
observation text; machine mutations only happen through the approval broker
or validated procedure execution.
"""

from __future__ import annotations

from ..controlsim import Address, MalformedAddress, SimError
from ..engine import ExecutionAborted, ExecutionReport, ParseError, parse_procedure
from ..knowledge import RetrievalEmpty, answer_from_corpus
from ..react.model import ModelUnavailable
from ..react.prompt import ToolSpec
from ..relay import ANSWERED, TIMED_OUT, UnknownChannel
from .builder import NoMatchingTemplate
from .pending import EXECUTED, REJECTED, ApprovalBroker
from .registry import SessionContext, ToolRegistry


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    return str(value)


def summarize_report(report: ExecutionReport, aborted: bool = False) -> str:
    """Human- and agent-readable execution summary; deterministic text."""
    leaves = report.leaves()
    cycles = [l for l in leaves if l.kind == "cycle_magnet"]
    if cycles:
        ok = sum(1 for l in cycles if l.status == "succeeded")
        head = f"{ok}/{len(cycles)} cycles succeeded"
    else:
        ok = sum(1 for l in leaves if l.status == "succeeded")
        head = f"{ok}/{len(leaves)} actions succeeded"
    for entry_id in report.logbook_ids:
        head += f", logbook entry #{entry_id} created"
    lines = [head, f"total simulated duration: {format_value(report.total_duration)} s"]
    if aborted and report.root.error:
        lines.insert(0, f"Procedure aborted: {report.root.error}")
    for leaf in leaves:
        name = leaf.label or leaf.kind
        detail = f" ({format_value(leaf.duration)} s)" if leaf.duration else ""
        if leaf.status == "failed" and leaf.error:
            detail += f" [{leaf.error}]"
        lines.append(f"- {name}: {leaf.status}{detail}")
    return "\n".join(lines)


def build_registry(runtime) -> ToolRegistry:
    """Wire the standard tools against a runtime (see gateway.runtime.Runtime)."""
    registry = ToolRegistry()
    sim = runtime.sim
    broker: ApprovalBroker = runtime.broker

    def machine_read(input_text: str, ctx: SessionContext) -> str:
        record = sim.read(input_text.strip())
        access = "writable" if record.writable else "read-only"
        unit = f" {record.unit}" if record.unit else ""
        return f"value={format_value(record.value)}{unit} ({access})"

    def machine_write(input_text: str, ctx: SessionContext) -> str:
        parts = input_text.split()
        if len(parts) != 2:
            return "machine_write input must be '<address> <value>'"
        addr_text, value_text = parts
        try:
            address = Address.parse(addr_text)
            value = float(value_text)
        except MalformedAddress as exc:
            return f"Tool error: {exc}"
        except ValueError:
            return f"machine_write value must be a number, got {value_text!r}"
        record = sim.read(address)  # raises UnknownAddress -> observation via dispatch
        if not record.writable:
            return f"ReadOnly: {address} cannot be written"
        if record.limits and not (record.limits[0] <= value <= record.limits[1]):
            return (
                f"OutOfLimits: {format_value(value)} outside "
                f"[{format_value(record.limits[0])}, {format_value(record.limits[1])}] for {address}"
            )
        pending = broker.submit(address, value, requested_by=ctx.session_id)
        if ctx.auto_approve:
            broker.resolve(pending.id, approve=True)
            if pending.state == EXECUTED:
                return f"written: {address} = {format_value(value)} (auto-approved)"
            return f"Tool error: approved write failed: {pending.error}"
        if broker.mode == ApprovalBroker.BLOCK:
            broker.await_resolution(pending)
            if pending.state == EXECUTED:
                return f"approved by operator; written: {address} = {format_value(value)}"
            if pending.state == REJECTED:
                reason = pending.error or "rejected by operator"
                return f"write rejected ({reason}); {address} unchanged"
            return f"Tool error: write {pending.id} ended in state {pending.state}: {pending.error}"
        return (
            f"Write requires operator approval: pending id {pending.id} "
            f"({address} := {format_value(value)}). The value is NOT applied yet."
        )

    def experiment_builder(input_text: str, ctx: SessionContext) -> str:
        try:
            built = runtime.builder.build(input_text.strip())
        except NoMatchingTemplate as exc:
            return f"I could not derive a procedure: {exc}."
        return f"{built.document}\n{built.rationale}"

    def run_procedure(input_text: str, ctx: SessionContext) -> str:
        try:
            node = parse_procedure(input_text)
        except ParseError as exc:
            return f"Procedure parse error: {exc}"
        issues = runtime.engine.validate(node)
        if issues:
            return "Procedure invalid:\n" + "\n".join(f"- {issue}" for issue in issues)
        try:
            report = runtime.engine.execute(node)
        except ExecutionAborted as exc:
            return summarize_report(exc.report, aborted=True)
        return summarize_report(report)

    def logbook_search(input_text: str, ctx: SessionContext) -> str:
        hits = runtime.logbook.search(input_text, k=5)
        if not hits:
            return f"No logbook entries matched {input_text.strip()!r}."
        lines = []
        for hit in hits:
            entry = runtime.logbook.get(hit.ref)
            snippet = " ".join(entry.body.split())
            if len(snippet) > 160:
                snippet = snippet[:157] + "..."
            lines.append(f"#{entry.id} [{entry.title}] {snippet}")
        return "\n".join(lines)

    def logbook_post(input_text: str, ctx: SessionContext) -> str:
        title, _, body = input_text.partition("\n")
        entry_id = runtime.logbook.post(
            title=title.strip(), body=body.strip() or title.strip(), author=ctx.session_id
        )
        return f"Logbook entry #{entry_id} created: {title.strip()}"

    def _rag(corpus, question: str) -> str:
        try:
            return answer_from_corpus(
                question, corpus, runtime.rag_model, k=runtime.rag_k, cap_chars=2000
            )
        except RetrievalEmpty:
            return f"No relevant content in the {corpus.name} for {question.strip()!r}."
        except ModelUnavailable as exc:
            return f"Tool error: retrieval model unavailable: {exc}"

    def meeting_summary(input_text: str, ctx: SessionContext) -> str:
        return _rag(runtime.meetings, input_text)

    def docs_howto(input_text: str, ctx: SessionContext) -> str:
        return _rag(runtime.docs, input_text)

    def ask_expert(input_text: str, ctx: SessionContext) -> str:
        channel, sep, question = input_text.partition(":")
        if not sep or not question.strip():
            return "ask_expert input must be '<channel>: <question>'"
        channel = channel.strip()
        try:
            query = runtime.relay.ask(channel, question.strip(), timeout=runtime.ask_timeout)
        except UnknownChannel:
            known = ", ".join(runtime.relay.channels()) or "none"
            return f"Unknown expert channel {channel!r}. Registered channels: {known}."
        if query.state == ANSWERED:
            return f"Expert reply from {channel}: {query.reply}"
        if query.state == TIMED_OUT:
            return f"No reply from {channel} within {runtime.ask_timeout:g} s (query {query.id})."
        return f"Query {query.id} is {query.state}."

    registry.register(ToolSpec(
        "machine_read", "Read one machine property value.",
        "four-segment property address"), machine_read)
    registry.register(ToolSpec(
        "machine_write",
        "Request a machine write; a human operator must approve it before the value is applied.",
        "'<address> <value>'"), machine_write)
    registry.register(ToolSpec(
        "experiment_builder",
        "Turn an operator intent into a validated experiment procedure document "
        "using beamline knowledge and vetted templates.",
        "task description in plain words"), experiment_builder)
    registry.register(ToolSpec(
        "run_procedure",
        "Validate and execute a procedure document on the machine; reports per-action "
        "status and simulated timing.",
        "procedure document JSON"), run_procedure)
    registry.register(ToolSpec(
        "logbook_search", "Search the electronic logbook; returns the best-matching entries.",
        "search terms"), logbook_search)
    registry.register(ToolSpec(
        "logbook_post", "Create a new logbook entry.",
        "first line title, remaining lines body"), logbook_post)
    registry.register(ToolSpec(
        "meeting_summary", "Answer a question from the operations meeting notes.",
        "question"), meeting_summary)
    registry.register(ToolSpec(
        "docs_howto", "Answer a how-to question from the experiment toolkit documentation.",
        "question"), docs_howto)
    registry.register(ToolSpec(
        "ask_expert", "Ask a human subsystem expert and wait for their reply.",
        "'<channel>: <question>'"), ask_expert)
    return registry
