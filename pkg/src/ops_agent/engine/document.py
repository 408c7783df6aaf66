"""Procedure documents: the JSON carrier for generated experiment trees.

See docs/procedure-schema.md. `parse_procedure` and `format_procedure` are
inverse up to canonicalization: parse(format(tree)) is structurally identical
to the tree.
"""

from __future__ import annotations

import json

from ..controlsim import Address, MalformedAddress
from .model import (
    ACTION_KINDS,
    Action,
    AskExpert,
    CycleMagnet,
    Parallel,
    PostLogbook,
    ProcedureNode,
    ReadValue,
    Scan,
    Serial,
    Wait,
    WriteValue,
)


class ParseError(Exception):
    def __init__(self, reason: str, line: int = 1, column: int = 1):
        super().__init__(f"{reason} (line {line}, column {column})")
        self.reason = reason
        self.line = line
        self.column = column


def _locate(source: str, needle: str) -> tuple[int, int]:
    """Best-effort line/column of a literal's first occurrence in the source."""
    pos = source.find(needle)
    if pos < 0:
        return 1, 1
    line = source.count("\n", 0, pos) + 1
    column = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, column


def _fail(source: str, reason: str, needle: str = "") -> ParseError:
    line, column = _locate(source, needle) if needle else (1, 1)
    return ParseError(reason, line, column)


def _require(obj: dict, key: str, types, source: str, path: str):
    if key not in obj:
        raise _fail(source, f"{path}: missing required field {key!r}")
    value = obj[key]
    if not isinstance(value, types):
        raise _fail(source, f"{path}: field {key!r} has wrong type", needle=json.dumps(key))
    return value


_ACTION_FIELDS = {
    "read_value": {"address"},
    "write_value": {"address", "value"},
    "wait": {"seconds"},
    "cycle_magnet": {"address", "cycles"},
    "scan": {"address", "from", "to", "steps", "readout"},
    "post_logbook": {"title", "body"},
    "ask_expert": {"channel", "question"},
}


def _parse_address(text, source: str, path: str) -> Address:
    if not isinstance(text, str):
        raise _fail(source, f"{path}: address must be a string")
    try:
        return Address.parse(text)
    except MalformedAddress as exc:
        raise _fail(source, f"{path}: {exc}", needle=text)


def _parse_number(value, source: str, path: str, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(source, f"{path}: {name!r} must be a number")
    return float(value)


def _parse_node(obj, source: str, path: str) -> ProcedureNode:
    if not isinstance(obj, dict):
        raise _fail(source, f"{path}: node must be an object")
    node_type = _require(obj, "type", str, source, path)
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise _fail(source, f"{path}: 'label' must be a string")

    if node_type in ("serial", "parallel"):
        allowed = {"type", "label", "children"}
        extra = set(obj) - allowed
        if extra:
            raise _fail(source, f"{path}: unknown fields {sorted(extra)}", needle=sorted(extra)[0])
        children = _require(obj, "children", list, source, path)
        parsed = tuple(
            _parse_node(child, source, f"{path}.children[{i}]") for i, child in enumerate(children)
        )
        cls = Serial if node_type == "serial" else Parallel
        return cls(children=parsed, label=label)

    if node_type != "action":
        raise _fail(source, f"{path}: unknown node type {node_type!r}", needle=node_type)

    kind = _require(obj, "kind", str, source, path)
    if kind not in ACTION_KINDS:
        raise _fail(source, f"{path}: unknown action kind {kind!r}", needle=kind)
    fields = _ACTION_FIELDS[kind]
    allowed = fields | {"type", "kind", "label"}
    extra = set(obj) - allowed
    if extra:
        raise _fail(source, f"{path}: unknown fields {sorted(extra)} for action {kind!r}",
                    needle=sorted(extra)[0])
    missing = fields - set(obj)
    if missing:
        raise _fail(source, f"{path}: action {kind!r} missing fields {sorted(missing)}", needle=kind)

    if kind == "read_value":
        return ReadValue(_parse_address(obj["address"], source, path), label=label)
    if kind == "write_value":
        return WriteValue(
            _parse_address(obj["address"], source, path),
            _parse_number(obj["value"], source, path, "value"),
            label=label,
        )
    if kind == "wait":
        seconds = _parse_number(obj["seconds"], source, path, "seconds")
        return Wait(seconds, label=label)
    if kind == "cycle_magnet":
        cycles = obj["cycles"]
        if isinstance(cycles, bool) or not isinstance(cycles, int):
            raise _fail(source, f"{path}: 'cycles' must be an integer")
        return CycleMagnet(_parse_address(obj["address"], source, path), cycles, label=label)
    if kind == "scan":
        steps = obj["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int):
            raise _fail(source, f"{path}: 'steps' must be an integer")
        return Scan(
            _parse_address(obj["address"], source, path),
            _parse_number(obj["from"], source, path, "from"),
            _parse_number(obj["to"], source, path, "to"),
            steps,
            _parse_address(obj["readout"], source, path),
            label=label,
        )
    if kind == "post_logbook":
        title = _require(obj, "title", str, source, path)
        body = _require(obj, "body", str, source, path)
        return PostLogbook(title, body, label=label)
    channel = _require(obj, "channel", str, source, path)
    question = _require(obj, "question", str, source, path)
    return AskExpert(channel, question, label=label)


def parse_procedure(text: str) -> ProcedureNode:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno)
    return _parse_node(obj, text, "$")


def _node_to_obj(node: ProcedureNode) -> dict:
    if isinstance(node, (Serial, Parallel)):
        obj = {
            "type": "serial" if isinstance(node, Serial) else "parallel",
            "children": [_node_to_obj(c) for c in node.children],
        }
    else:
        obj = {"type": "action", "kind": node.kind}
        if isinstance(node, (ReadValue, WriteValue, CycleMagnet, Scan)):
            obj["address"] = str(node.address)
        if isinstance(node, WriteValue):
            obj["value"] = node.value
        if isinstance(node, Wait):
            obj["seconds"] = node.seconds
        if isinstance(node, CycleMagnet):
            obj["cycles"] = node.cycles
        if isinstance(node, Scan):
            obj["from"] = node.start
            obj["to"] = node.stop
            obj["steps"] = node.steps
            obj["readout"] = str(node.readout)
        if isinstance(node, PostLogbook):
            obj["title"] = node.title
            obj["body"] = node.body
        if isinstance(node, AskExpert):
            obj["channel"] = node.channel
            obj["question"] = node.question
    if node.label:
        obj["label"] = node.label
    return obj


def format_procedure(node: ProcedureNode) -> str:
    """Canonical JSON form; stable for fixtures and round-trip tests."""
    return json.dumps(_node_to_obj(node), indent=2, sort_keys=True) + "\n"
