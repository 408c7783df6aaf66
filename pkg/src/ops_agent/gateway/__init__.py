from .config import AppConfig, load_config
from .runtime import (
    Runtime,
    build_runtime,
    run_task,
    transcript_from_json,
    transcript_to_json,
)
from .service import (
    AWAITING_APPROVAL,
    DONE,
    FAILED,
    PUBLIC_EVENT_TYPES,
    RUNNING,
    GatewayService,
    SessionState,
    UnknownSession,
    start_ticker,
)

__all__ = [
    "AWAITING_APPROVAL",
    "AppConfig",
    "DONE",
    "FAILED",
    "GatewayService",
    "PUBLIC_EVENT_TYPES",
    "RUNNING",
    "Runtime",
    "SessionState",
    "UnknownSession",
    "build_runtime",
    "load_config",
    "run_task",
    "start_ticker",
    "transcript_from_json",
    "transcript_to_json",
]
