"""Actions and procedure trees.

Actions are the leaf units of an experiment; they compose into procedures as
arbitrarily nested serial/parallel groups (validation caps the depth at 16).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..controlsim import Address

MAX_TREE_DEPTH = 16


@dataclass(frozen=True)
class ReadValue:
    address: Address
    label: str = ""
    kind = "read_value"


@dataclass(frozen=True)
class WriteValue:
    address: Address
    value: float
    label: str = ""
    kind = "write_value"


@dataclass(frozen=True)
class Wait:
    seconds: float
    label: str = ""
    kind = "wait"


@dataclass(frozen=True)
class CycleMagnet:
    address: Address
    cycles: int = 1
    label: str = ""
    kind = "cycle_magnet"


@dataclass(frozen=True)
class Scan:
    """1-D scan: write each step value, settle, read the readout address."""

    address: Address
    start: float
    stop: float
    steps: int
    readout: Address
    label: str = ""
    kind = "scan"

    def step_values(self) -> list[float]:
        span = self.stop - self.start
        return [self.start + span * i / (self.steps - 1) for i in range(self.steps)]


@dataclass(frozen=True)
class PostLogbook:
    """Post an entry; '{results}' in the body expands to a summary of completed actions."""

    title: str
    body: str
    label: str = ""
    kind = "post_logbook"


@dataclass(frozen=True)
class AskExpert:
    channel: str
    question: str
    label: str = ""
    kind = "ask_expert"


Action = Union[ReadValue, WriteValue, Wait, CycleMagnet, Scan, PostLogbook, AskExpert]

ACTION_KINDS = {
    "read_value": ReadValue,
    "write_value": WriteValue,
    "wait": Wait,
    "cycle_magnet": CycleMagnet,
    "scan": Scan,
    "post_logbook": PostLogbook,
    "ask_expert": AskExpert,
}


@dataclass(frozen=True)
class Serial:
    children: tuple
    label: str = ""


@dataclass(frozen=True)
class Parallel:
    children: tuple
    label: str = ""


ProcedureNode = Union[Action, Serial, Parallel]


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def walk(node: ProcedureNode, path: str = "$"):
    """Yield (path, node, depth) over the whole tree, parents first."""
    stack = [(path, node, 1)]
    while stack:
        p, n, depth = stack.pop()
        yield p, n, depth
        if isinstance(n, (Serial, Parallel)):
            for i, child in enumerate(reversed(n.children)):
                idx = len(n.children) - 1 - i
                stack.append((f"{p}.children[{idx}]", child, depth + 1))


def mutated_addresses(node: ProcedureNode) -> set[Address]:
    """Addresses a procedure writes, cycles, or scans; used for lock sets."""
    out = set()
    for _, n, _ in walk(node):
        if isinstance(n, (WriteValue, CycleMagnet, Scan)):
            out.add(n.address)
    return out
