"""Prompt assembly: system template + tool descriptions + task + transcript."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .events import StepEvent, render_transcript


class MissingPlaceholder(Exception):
    pass


@dataclass(frozen=True)
class ToolSpec:
    """Registry entry describing one tool to the model."""

    name: str
    description: str
    input_note: str = ""


REQUIRED_PLACEHOLDERS = ("{tools}", "{task}", "{transcript}")


def default_template() -> str:
    return resources.files("ops_agent").joinpath("data/prompts/react_system.txt").read_text(
        encoding="utf-8"
    )


def describe_tools(tools: list[ToolSpec]) -> str:
    lines = []
    for spec in tools:
        note = f" Input: {spec.input_note}" if spec.input_note else ""
        lines.append(f"- {spec.name}: {spec.description}{note}")
    return "\n".join(lines)


def render_prompt(template: str, tools: list[ToolSpec], transcript: list[StepEvent], task: str) -> str:
    """Deterministic prompt text; tool descriptions and transcript in order."""
    for placeholder in REQUIRED_PLACEHOLDERS:
        if placeholder not in template:
            raise MissingPlaceholder(placeholder)
    rendered = render_transcript(transcript)
    out = template.replace("{tools}", describe_tools(tools))
    out = out.replace("{tool_names}", ", ".join(spec.name for spec in tools))
    out = out.replace("{task}", task)
    out = out.replace("{transcript}", rendered)
    return out.rstrip() + "\n"
