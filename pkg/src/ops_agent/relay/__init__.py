from .relay import (
    ANSWERED,
    PENDING,
    TIMED_OUT,
    DuplicateChannel,
    ExpertQuery,
    ExpertRelay,
    UnknownChannel,
)

__all__ = [
    "ANSWERED",
    "DuplicateChannel",
    "ExpertQuery",
    "ExpertRelay",
    "PENDING",
    "TIMED_OUT",
    "UnknownChannel",
]
