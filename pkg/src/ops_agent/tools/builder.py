"""Two-expert procedure builder.

Expert A retrieves from the beamline-knowledge corpus: the top-ranked note
maps the operator's intent to a task schema and the machine elements it
involves. Expert B instantiates a vetted template for that schema into a
procedure document. The composition is deterministic: same intent and
corpora, same document.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..controlsim import Address, Simulator
from ..engine import (
    CycleMagnet,
    Parallel,
    PostLogbook,
    ProcedureNode,
    ReadValue,
    Scan,
    Serial,
    format_procedure,
)
from ..knowledge import DocChunk, DocCorpus, tokenize

# Filler words carry no intent; without this filter any "the"/"to" in a note
# would count as a retrieval match and nonsense requests would build procedures.
_INTENT_STOPWORDS = frozenset(
    "a an and are at by can could do for from how i in is it me my of on or "
    "please shall should that the this to want we what which with would you".split()
)


class NoMatchingTemplate(Exception):
    pass


@dataclass(frozen=True)
class BuiltProcedure:
    schema: str
    node: ProcedureNode
    document: str
    rationale: str


_META_RE = re.compile(r"^(schema|elements|scan_from|scan_to|scan_steps):\s*(.+)$", re.MULTILINE)
_NCYCLES_RE = re.compile(r"(\d+)\s*(?:times|cycles?)\b")


def _chunk_metadata(chunk: DocChunk) -> dict:
    meta: dict = {}
    for key, value in _META_RE.findall(chunk.body):
        meta[key] = value.strip()
    if "elements" in meta:
        meta["elements"] = [Address.parse(a.strip()) for a in meta["elements"].split(",")]
    return meta


class ExperimentBuilder:
    def __init__(self, beamline: DocCorpus, sim: Simulator):
        self.beamline = beamline
        self.sim = sim

    def build(self, intent: str) -> BuiltProcedure:
        query = " ".join(t for t in tokenize(intent) if t not in _INTENT_STOPWORDS)
        hits = self.beamline.search(query, k=3) if query else []
        if not hits:
            raise NoMatchingTemplate(
                f"no beamline knowledge matches {intent!r}; please restate the task"
            )
        chunk = self.beamline.chunk(hits[0].ref)
        meta = _chunk_metadata(chunk)
        schema = meta.get("schema")
        if not schema:
            raise NoMatchingTemplate(
                f"the closest beamline note ({chunk.heading!r}) names no task schema; "
                "please restate the task"
            )
        template = _TEMPLATES.get(schema)
        if template is None:
            raise NoMatchingTemplate(f"no template for schema {schema!r}; please restate the task")
        node = template(intent, meta.get("elements", []), meta)
        rationale = (
            f"Rationale: matched schema '{schema}' via beamline note '{chunk.heading}'."
        )
        return BuiltProcedure(
            schema=schema,
            node=node,
            document=format_procedure(node),
            rationale=rationale,
        )


def _wants_logbook(intent: str) -> bool:
    return "logbook" in intent.lower() or "log book" in intent.lower()


def _cycle_magnets(intent: str, elements: list[Address], meta: dict) -> ProcedureNode:
    lowered = intent.lower()
    mentioned = [a for a in elements if a.location in intent.upper()]
    targets = mentioned or elements
    if not targets:
        raise NoMatchingTemplate("the cycling note names no magnet elements")
    m = _NCYCLES_RE.search(lowered)
    cycles = int(m.group(1)) if m else 1
    leaves = tuple(
        CycleMagnet(addr, cycles, label=f"cycle {addr.location}") for addr in targets
    )
    children: list[ProcedureNode]
    if "parallel" in lowered and len(leaves) > 1:
        children = [Parallel(leaves, label="cycle magnets in parallel")]
    else:
        children = list(leaves)
    if _wants_logbook(intent):
        names = ", ".join(a.location for a in targets)
        children.append(PostLogbook(
            title="Magnet cycling report",
            body=f"Cycled {names}.\n\n{{results}}",
            label="post cycle report",
        ))
    return Serial(tuple(children), label="magnet cycling")


def _rf_phase_scan(intent: str, elements: list[Address], meta: dict) -> ProcedureNode:
    if len(elements) < 2:
        raise NoMatchingTemplate("the rf scan note must name a scan element and a readout")
    scan = Scan(
        address=elements[0],
        start=float(meta.get("scan_from", -30.0)),
        stop=float(meta.get("scan_to", 30.0)),
        steps=int(meta.get("scan_steps", 13)),
        readout=elements[1],
        label="gun phase scan with probe readout",
    )
    children: list[ProcedureNode] = [scan]
    if _wants_logbook(intent):
        children.append(PostLogbook(
            title="RF phase scan results",
            body="Scanned the gun phase for maximum energy gain.\n\n{results}",
            label="post scan results",
        ))
    return Serial(tuple(children), label="rf phase scan for energy gain")


def _hexapod_park(intent: str, elements: list[Address], meta: dict) -> ProcedureNode:
    if not elements:
        raise NoMatchingTemplate("the hexapod note names no elements")
    return Serial(
        (ReadValue(elements[0], label="read hexapod parking position"),),
        label="hexapod parking readout",
    )


_TEMPLATES = {
    "cycle-magnets": _cycle_magnets,
    "rf-phase-scan": _rf_phase_scan,
    "hexapod-park": _hexapod_park,
}

TEMPLATE_SCHEMAS = tuple(_TEMPLATES)
