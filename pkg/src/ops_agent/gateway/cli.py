"""The ops-agent command line: serve, ask, run-procedure, replay."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ..engine import ExecutionAborted, ParseError, parse_procedure
from ..react import render_transcript
from ..tools import ApprovalBroker, summarize_report
from .config import load_config
from .runtime import build_runtime, run_task, transcript_from_json, transcript_to_json
from .service import GatewayService, start_ticker


@click.group()
def main():
    """Operations assistant for a simulated accelerator control system."""


@main.command()
@click.argument("task")
@click.option("--stub", "stub_path", type=click.Path(exists=True), default=None,
              help="Scripted model fixture (required unless the config names a model endpoint).")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--state-dir", type=click.Path(), default=None,
              help="Directory for logbook/relay/session state (default: config state_dir).")
@click.option("--show-cot", is_flag=True, help="Print the full chain of thought, not just the answer.")
@click.option("--auto-approve", is_flag=True,
              help="Apply machine writes without operator approval (test mode).")
@click.option("--transcript-out", type=click.Path(), default=None,
              help="Write the transcript as canonical JSON to this path.")
def ask(task, stub_path, config_path, state_dir, show_cot, auto_approve, transcript_out):
    """Run one task headlessly against the local simulator and print the answer."""
    config = load_config(config_path)
    runtime = build_runtime(config, state_dir=state_dir, stub_path=stub_path, clock_mode="sim")
    result = run_task(runtime, task, session_id="cli", auto_approve=auto_approve)

    if show_cot:
        click.echo(render_transcript(result.transcript))
    elif result.final_answer is not None:
        click.echo(result.final_answer)

    if transcript_out:
        Path(transcript_out).write_text(transcript_to_json(result.transcript), encoding="utf-8")

    pending = runtime.broker.pending()
    if pending:
        click.echo("", err=True)
        for write in pending:
            click.echo(
                f"pending write {write.id}: {write.address} := {write.value} "
                "(resolve via the gateway)", err=True)

    if result.status.value != "done":
        click.echo(f"session ended without final answer: {result.failure}", err=True)
        sys.exit(1)


@main.command("run-procedure")
@click.argument("procedure_file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--state-dir", type=click.Path(), default=None)
def run_procedure(procedure_file, config_path, state_dir):
    """Validate and execute a procedure document against a local simulator."""
    config = load_config(config_path)
    runtime = build_runtime(config, state_dir=state_dir, clock_mode="sim")
    text = Path(procedure_file).read_text(encoding="utf-8")
    try:
        node = parse_procedure(text)
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(1)
    issues = runtime.engine.validate(node)
    if issues:
        click.echo("procedure invalid:", err=True)
        for issue in issues:
            click.echo(f"- {issue}", err=True)
        sys.exit(1)
    try:
        report = runtime.engine.execute(node)
    except ExecutionAborted as exc:
        click.echo(summarize_report(exc.report, aborted=True))
        sys.exit(1)
    click.echo(summarize_report(report))


@main.command()
@click.argument("transcript_file", type=click.Path(exists=True))
def replay(transcript_file):
    """Render a stored transcript without any model."""
    events = transcript_from_json(Path(transcript_file).read_text(encoding="utf-8"))
    click.echo(render_transcript(events))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True)
def serve(config_path, host, port):
    """Run the gateway HTTP service (sessions, approvals, machine, logbook, UI)."""
    import uvicorn

    from ..controlsim import SimTcpServer
    from .http import create_app

    config = load_config(config_path)
    runtime = build_runtime(
        config, clock_mode="wall", approval_mode=ApprovalBroker.BLOCK
    )
    service = GatewayService(runtime, state_dir=config.state_dir)
    ticker = start_ticker(runtime, hz=config.tick_hz)
    tcp_server = None
    if config.tcp_port is not None:
        tcp_server = SimTcpServer(runtime.sim, host=host, port=config.tcp_port).start()
        click.echo(f"machine wire protocol on tcp://{host}:{tcp_server.port}")
    app = create_app(service, ui_dir=config.ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    finally:
        ticker.set()
        if tcp_server is not None:
            tcp_server.stop()


if __name__ == "__main__":
    main()
