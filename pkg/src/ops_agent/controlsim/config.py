"""Machine configuration loading.

The machine config is a JSON document; see docs/machine-config.md for the
schema and src/ops_agent/data/machine.json for the shipped default.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .machine import Simulator

_REQUIRED_BY_TYPE = {
    "magnet": ("tau", "i_max", "ramp_rate"),
    "rf": (),
    "hexapod": (),
}


def validate_machine_config(config: dict) -> None:
    if not isinstance(config.get("devices"), list) or not config["devices"]:
        raise ValueError("machine config needs a non-empty 'devices' list")
    for i, dev in enumerate(config["devices"]):
        kind = dev.get("type")
        if kind not in _REQUIRED_BY_TYPE:
            raise ValueError(f"devices[{i}]: unknown type {kind!r}")
        if "address" not in dev:
            raise ValueError(f"devices[{i}]: missing 'address'")
        for key in _REQUIRED_BY_TYPE[kind]:
            if key not in dev:
                raise ValueError(f"devices[{i}] ({dev['address']}): missing {key!r}")


def load_machine_config(path: str | Path) -> dict:
    config = json.loads(Path(path).read_text(encoding="utf-8"))
    validate_machine_config(config)
    return config


def default_machine_config() -> dict:
    text = resources.files("ops_agent").joinpath("data/machine.json").read_text(encoding="utf-8")
    config = json.loads(text)
    validate_machine_config(config)
    return config


def build_simulator(config: dict | None = None, seed: int | None = None) -> Simulator:
    config = dict(config) if config is not None else default_machine_config()
    if seed is not None:
        config["seed"] = seed
    validate_machine_config(config)
    return Simulator(config)
