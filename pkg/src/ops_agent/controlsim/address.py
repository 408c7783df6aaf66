"""Hierarchical machine addresses of the form FACILITY/DEVICE/LOCATION/PROPERTY."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MalformedAddress

_SEGMENT_RE = re.compile(r"[A-Z0-9._-]+\Z")


@dataclass(frozen=True)
class Address:
    """Four-segment identifier of one machine property.

    Each segment matches ``[A-Z0-9._-]+``; the canonical text form joins the
    segments with ``/``.
    """

    facility: str
    device: str
    location: str
    property: str

    def __post_init__(self):
        for segment in (self.facility, self.device, self.location, self.property):
            if not _SEGMENT_RE.match(segment):
                raise MalformedAddress(f"bad address segment: {segment!r}")

    @classmethod
    def parse(cls, text: str) -> "Address":
        parts = text.split("/")
        if len(parts) != 4:
            raise MalformedAddress(f"expected 4 segments separated by '/': {text!r}")
        return cls(*parts)

    def __str__(self) -> str:
        return f"{self.facility}/{self.device}/{self.location}/{self.property}"

    @property
    def device_prefix(self) -> str:
        """First three segments; identifies the device an address belongs to."""
        return f"{self.facility}/{self.device}/{self.location}"

    def with_property(self, prop: str) -> "Address":
        return Address(self.facility, self.device, self.location, prop)
