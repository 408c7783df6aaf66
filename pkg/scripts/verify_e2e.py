#!/usr/bin/env python3
"""End-to-end drive of the real gateway: uvicorn over a socket, a live
session streamed via SSE, an approval round trip, machine endpoints, and the
TCP wire protocol. Exits non-zero on the first failed check."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

ROOT = Path(__file__).resolve().parents[1]
SP1 = "SIM.MAGNETS/MAGNET/ARDLMQZM1/CURRENT.SP"

SERVER_SNIPPET = """
import sys, tempfile
sys.path.insert(0, {src!r})
import uvicorn
from ops_agent.gateway import GatewayService, build_runtime, start_ticker
from ops_agent.gateway.http import create_app
from ops_agent.tools import ApprovalBroker
from ops_agent.controlsim import SimTcpServer

state = tempfile.mkdtemp(prefix="ops-verify-")
runtime = build_runtime(state_dir=state, stub_path={stub!r},
                        clock_mode="wall", approval_mode=ApprovalBroker.BLOCK)
runtime.broker.timeout = 30.0
service = GatewayService(runtime, state_dir=state)
start_ticker(runtime, hz=10.0)
SimTcpServer(runtime.sim, port={tcp_port}).start()
uvicorn.run(create_app(service), host="127.0.0.1", port={port}, log_level="warning")
"""

WRITE_STUB = {
    "name": "verify-write",
    "rules": [
        {"when": r"Observation: approved by operator",
         "reply": "Thought: applied\nFinal Answer: the current is set"},
        {"when": r"Observation: write rejected",
         "reply": "Thought: denied\nFinal Answer: the operator rejected the write"},
        {"when": r"Task: set the magnet",
         "reply": f"Thought: request the write\nAction: machine_write\nAction Input: {SP1} 2.5"},
    ],
}


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def start_server(stub: str, port: int, tcp_port: int) -> subprocess.Popen:
    snippet = SERVER_SNIPPET.format(src=str(ROOT / "src"), stub=stub, port=port, tcp_port=tcp_port)
    return subprocess.Popen([sys.executable, "-c", snippet])


def wait_http(base: str, deadline: float = 20.0):
    start = time.time()
    while time.time() - start < deadline:
        try:
            if httpx.get(f"{base}/machine/snapshot", timeout=2).status_code == 200:
                return
        except httpx.HTTPError:
            time.sleep(0.1)
    raise RuntimeError("gateway did not come up")


def check(name: str, ok: bool, detail: str = ""):
    print(f"{'[PASS]' if ok else '[FAIL]'} {name}{': ' + detail if detail else ''}")
    if not ok:
        sys.exit(1)


def phase_scenario():
    port, tcp_port = free_port(), free_port()
    base = f"http://127.0.0.1:{port}"
    server = start_server(str(ROOT / "fixtures/stubs/fig5.stub.json"), port, tcp_port)
    try:
        wait_http(base)
        check("gateway boots under uvicorn", True, base)

        snapshot = httpx.get(f"{base}/machine/snapshot").json()
        check("snapshot lists the machine", SP1 in snapshot["records"])

        task = ("Please cycle the two magnets ARDLMQZM1 and ARDLMQZM2 in parallel "
                "and post the result to the logbook afterwards.")
        session = httpx.post(f"{base}/sessions", json={"task": task, "show_cot": True}).json()
        events = []
        with httpx.stream("GET", f"{base}/sessions/{session['id']}/events", timeout=60) as response:
            for line in response.iter_lines():
                if line.startswith("data: ") and line != "data: {}":
                    events.append(json.loads(line[6:]))
        kinds = [e["type"] for e in events]
        check("SSE stream delivers the full fig5 transcript",
              kinds.count("tool_call") == 3 and events[-1].get("status") == "done",
              f"{len(events)} events")
        final = next(e for e in events if e["type"] == "final_answer")
        check("fig5 answer reports the parallel cycle", "10.0 simulated seconds" in final["text"])

        hits = httpx.get(f"{base}/logbook", params={"q": "Magnet cycling report", "k": 1}).json()
        check("procedure posted the logbook entry", bool(hits) and hits[0]["id"] == 13)

        wrote = httpx.post(f"{base}/machine/op",
                           json={"op": "write", "addr": SP1, "value": 1.25}).json()
        check("HTTP machine op writes", wrote["ok"])
        with socket.create_connection(("127.0.0.1", tcp_port), timeout=5) as conn:
            f = conn.makefile("rwb")
            f.write((json.dumps({"op": "read", "addr": SP1}) + "\n").encode())
            f.flush()
            reply = json.loads(f.readline())
        check("TCP wire protocol reads the same machine",
              reply["ok"] and reply["result"]["value"] == 1.25)
    finally:
        server.terminate()
        server.wait(timeout=10)


def phase_approval():
    port, tcp_port = free_port(), free_port()
    base = f"http://127.0.0.1:{port}"
    with tempfile.NamedTemporaryFile("w", suffix=".stub.json", delete=False) as fh:
        json.dump(WRITE_STUB, fh)
        stub_path = fh.name
    server = start_server(stub_path, port, tcp_port)
    try:
        wait_http(base)
        session = httpx.post(f"{base}/sessions", json={"task": "set the magnet"}).json()
        pending = []
        deadline = time.time() + 10
        while time.time() < deadline and not pending:
            pending = httpx.get(f"{base}/writes").json()
            time.sleep(0.05)
        check("agent write appears as pending approval", bool(pending))
        value = httpx.get(f"{base}/machine/snapshot").json()["records"][SP1]["value"]
        check("value not applied while pending", value == 0.0)
        state = httpx.get(f"{base}/sessions/{session['id']}").json()
        check("session paused awaiting approval", state["status"] == "awaiting_approval")

        resolved = httpx.post(f"{base}/writes/{pending[0]['id']}/resolve",
                              json={"decision": "approve"}).json()
        check("approval executes the write", resolved["state"] == "executed")
        deadline = time.time() + 10
        status = ""
        while time.time() < deadline and status != "done":
            status = httpx.get(f"{base}/sessions/{session['id']}").json()["status"]
            time.sleep(0.05)
        check("session resumes and finishes after approval", status == "done")
        value = httpx.get(f"{base}/machine/snapshot").json()["records"][SP1]["value"]
        check("machine shows the approved value", value == 2.5)
    finally:
        server.terminate()
        server.wait(timeout=10)


if __name__ == "__main__":
    phase_scenario()
    phase_approval()
    print("end-to-end drive complete")
