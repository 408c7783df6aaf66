"""Application configuration: one file (TOML or JSON) wiring every subsystem."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_RELAY_CHANNELS = ("rf-experts", "magnet-experts", "operations")


@dataclass
class AppConfig:
    # [model]
    model_endpoint: str | None = None
    model_name: str = "scripted-stub"
    stub_path: str | None = None
    # [machine]
    machine_config_path: str | None = None  # None -> packaged default
    seed: int = 42
    tick_hz: float = 10.0
    tcp_port: int | None = None
    # [paths]
    state_dir: str = "var"
    corpora_dir: str | None = None  # None -> packaged seed corpora
    template_path: str | None = None
    ui_dir: str | None = None
    # [limits]
    context_budget_tokens: int = 32768
    max_steps: int = 10
    tool_output_cap_chars: int = 2000
    # [relay]
    relay_channels: tuple[str, ...] = DEFAULT_RELAY_CHANNELS
    ask_timeout: float = 120.0
    # [approvals]
    approval_timeout: float = 600.0
    # [tools]
    disabled_tools: tuple[str, ...] = ()
    rag_k: int = 4


def _read_config_file(path: Path) -> dict:
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    if path.suffix == ".toml":
        with path.open("rb") as fh:
            return tomllib.load(fh)
    raise ValueError(f"config file must be .toml or .json: {path}")


def load_config(path: str | Path | None = None) -> AppConfig:
    if path is None:
        return AppConfig()
    data = _read_config_file(Path(path))
    model = data.get("model", {})
    machine = data.get("machine", {})
    paths = data.get("paths", {})
    limits = data.get("limits", {})
    relay = data.get("relay", {})
    approvals = data.get("approvals", {})
    tools = data.get("tools", {})
    return AppConfig(
        model_endpoint=model.get("endpoint"),
        model_name=model.get("name", "scripted-stub"),
        stub_path=model.get("stub"),
        machine_config_path=machine.get("config"),
        seed=int(machine.get("seed", 42)),
        tick_hz=float(machine.get("tick_hz", 10.0)),
        tcp_port=machine.get("tcp_port"),
        state_dir=paths.get("state_dir", "var"),
        corpora_dir=paths.get("corpora"),
        template_path=paths.get("template"),
        ui_dir=paths.get("ui"),
        context_budget_tokens=int(limits.get("context_budget_tokens", 32768)),
        max_steps=int(limits.get("max_steps", 10)),
        tool_output_cap_chars=int(limits.get("tool_output_cap_chars", 2000)),
        relay_channels=tuple(relay.get("channels", DEFAULT_RELAY_CHANNELS)),
        ask_timeout=float(relay.get("ask_timeout", 120.0)),
        approval_timeout=float(approvals.get("timeout", 600.0)),
        disabled_tools=tuple(tools.get("disabled", ())),
        rag_k=int(tools.get("rag_k", 4)),
    )
