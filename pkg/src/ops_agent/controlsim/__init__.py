from .address import Address
from .config import build_simulator, default_machine_config, load_machine_config
from .errors import (
    Busy,
    InvalidValue,
    MalformedAddress,
    MalformedPattern,
    NegativeDt,
    NotAMagnet,
    OutOfLimits,
    ReadOnly,
    SimError,
    UnknownAddress,
)
from .machine import CycleHandle, Magnet, PropertyRecord, Simulator
from .server import SimTcpServer, apply_op, record_to_dict

__all__ = [
    "Address",
    "Busy",
    "CycleHandle",
    "InvalidValue",
    "Magnet",
    "MalformedAddress",
    "MalformedPattern",
    "NegativeDt",
    "NotAMagnet",
    "OutOfLimits",
    "PropertyRecord",
    "ReadOnly",
    "SimError",
    "SimTcpServer",
    "Simulator",
    "UnknownAddress",
    "apply_op",
    "build_simulator",
    "default_machine_config",
    "load_machine_config",
    "record_to_dict",
]
