"""Newline-delimited JSON wire protocol for the simulator, served over TCP.

Requests are one JSON object per line:
    {"op": "read", "addr": "..."}
    {"op": "write", "addr": "...", "value": ...}
    {"op": "cycle", "addr": "...", "n": ...}
    {"op": "list", "pattern": "..."}
    {"op": "snapshot"}
Responses are {"ok": true, "result": ...} or {"ok": false, "error": "<code>", "message": "..."}.
The same verbs are available over HTTP via the gateway's POST /machine/op.
"""

from __future__ import annotations

import json
import socketserver
import threading

from .errors import SimError
from .machine import PropertyRecord, Simulator


def record_to_dict(record: PropertyRecord) -> dict:
    return {
        "value": record.value,
        "unit": record.unit,
        "writable": record.writable,
        "limits": list(record.limits) if record.limits else None,
        "timestamp": record.timestamp,
    }


def apply_op(sim: Simulator, request: dict) -> dict:
    """Apply one wire-protocol request to the simulator, returning the response."""
    try:
        op = request.get("op")
        if op == "read":
            return {"ok": True, "result": record_to_dict(sim.read(request["addr"]))}
        if op == "write":
            sim.write(request["addr"], request.get("value"))
            return {"ok": True, "result": "written"}
        if op == "cycle":
            handle = sim.start_cycle(request["addr"], int(request.get("n", 1)))
            return {"ok": True, "result": {
                "address": str(handle.address),
                "n_cycles": handle.n_cycles,
                "duration": handle.duration,
                "started_at": handle.started_at,
            }}
        if op == "list":
            return {"ok": True, "result": [str(a) for a in sim.list_addresses(request["pattern"])]}
        if op == "snapshot":
            return {"ok": True, "result": sim.snapshot()}
        return {"ok": False, "error": "UnknownOp", "message": f"unknown op {op!r}"}
    except SimError as exc:
        return {"ok": False, "error": exc.code, "message": str(exc)}
    except (KeyError, TypeError, ValueError) as exc:
        return {"ok": False, "error": "BadRequest", "message": str(exc)}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.strip()
            if not line:
                continue
            try:
                request = json.loads(line)
            except json.JSONDecodeError as exc:
                response = {"ok": False, "error": "BadJson", "message": str(exc)}
            else:
                response = apply_op(self.server.sim, request)
            self.wfile.write(json.dumps(response).encode("utf-8") + b"\n")
            self.wfile.flush()


class SimTcpServer(socketserver.ThreadingTCPServer):
    """TCP front-end for one simulator; start() serves on a daemon thread."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, sim: Simulator, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.sim = sim
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start(self) -> "SimTcpServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.shutdown()
        self.server_close()
