"""Deterministic simulated accelerator control system.

The simulator owns a table of addressable properties backed by simple device
models (magnets with first-order current response and cycling programs, an RF
station with a noisy amplitude probe, a hexapod). Time advances only through
explicit `tick` calls; with a fixed seed the full state trajectory is
reproducible bit-for-bit.
"""

from __future__ import annotations

import math
import random
import re
import threading
from dataclasses import dataclass, field
from typing import Union

from .address import Address
from .errors import (
    Busy,
    InvalidValue,
    MalformedPattern,
    NegativeDt,
    NotAMagnet,
    OutOfLimits,
    ReadOnly,
    UnknownAddress,
)

Scalar = Union[float, str, list]

# Residual simulated time below this is treated as zero when deciding whether
# a cycling program has finished; guards against float round-off when a tick
# lands exactly on the program's end time.
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class PropertyRecord:
    """Point-in-time view of one machine property."""

    value: Scalar
    unit: str
    writable: bool
    limits: tuple[float, float] | None
    timestamp: float


class CycleProgram:
    """Piecewise-linear setpoint schedule for one magnet cycling run.

    Knots hold absolute simulated times and the setpoint value reached at each
    time; between knots the setpoint ramps linearly at the magnet's ramp rate.
    """

    def __init__(self, knot_times: list[float], knot_values: list[float], restore: float):
        self.knot_times = knot_times
        self.knot_values = knot_values
        self.restore = restore
        self.segment = 0
        self.completed = False

    @property
    def end_time(self) -> float:
        return self.knot_times[-1]

    @property
    def segments_total(self) -> int:
        return len(self.knot_times) - 1

    @property
    def segments_remaining(self) -> int:
        return 0 if self.completed else self.segments_total - self.segment


@dataclass
class CycleHandle:
    """Returned by `start_cycle`; reports the expected duration and completion."""

    address: Address
    n_cycles: int
    duration: float
    started_at: float
    _program: CycleProgram

    @property
    def done(self) -> bool:
        return self._program.completed


@dataclass
class Magnet:
    location: str
    setpoint: float
    readback: float
    tau: float
    i_max: float
    ramp_rate: float
    unit: str
    cycle: CycleProgram | None = None

    @property
    def cycle_state(self) -> str:
        if self.cycle is None:
            return "IDLE"
        return f"CYCLING {self.cycle.segment + 1}/{self.cycle.segments_total}"


@dataclass
class RfStation:
    location: str
    amplitude_setpoint: float
    phase: float
    probe_noise_sigma: float
    unit: str
    amplitude_limits: tuple[float, float]
    phase_limits: tuple[float, float]
    rng: random.Random = field(repr=False, default=None)


@dataclass
class Hexapod:
    location: str
    parking_position: list[float]
    unit: str


class _Slot:
    """One entry in the address table."""

    __slots__ = ("unit", "writable", "limits", "getter", "setter", "snapshot_getter", "device")

    def __init__(self, unit, writable, limits, getter, setter=None, snapshot_getter=None, device=None):
        self.unit = unit
        self.writable = writable
        self.limits = limits
        self.getter = getter
        self.setter = setter
        self.snapshot_getter = snapshot_getter or getter
        self.device = device


def _const_response(readback: float, setpoint: float, dt: float, tau: float) -> float:
    """First-order relaxation toward a constant setpoint over dt seconds."""
    return setpoint + (readback - setpoint) * math.exp(-dt / tau)


def _ramp_response(readback: float, s_start: float, rate: float, dt: float, tau: float) -> float:
    """First-order response to a setpoint ramping linearly from s_start at `rate`."""
    s_end = s_start + rate * dt
    return s_end - rate * tau + (readback - s_start + rate * tau) * math.exp(-dt / tau)


class Simulator:
    """Owner of all simulated machine state.

    All mutations (write, tick, start_cycle) are serialized through one lock;
    reads return immutable records. The simulated clock only moves forward,
    and only via `tick`.
    """

    def __init__(self, config: dict):
        self.clock = float(config.get("clock_start", 0.0))
        self.seed = int(config.get("seed", 0))
        self._lock = threading.RLock()
        self._slots: dict[Address, _Slot] = {}
        self._magnets: list[Magnet] = []
        self._magnet_by_prefix: dict[str, Magnet] = {}
        for spec in config["devices"]:
            self._add_device(spec)

    # -- construction ------------------------------------------------------

    def _add_device(self, spec: dict):
        kind = spec["type"]
        base = spec["address"]
        parts = base.split("/")
        if len(parts) != 3:
            raise ValueError(f"device address must have 3 segments: {base!r}")
        make = Address(parts[0], parts[1], parts[2], "X").with_property
        if kind == "magnet":
            dev = Magnet(
                location=parts[2],
                setpoint=float(spec.get("initial_setpoint", 0.0)),
                readback=float(spec.get("initial_setpoint", 0.0)),
                tau=float(spec["tau"]),
                i_max=float(spec["i_max"]),
                ramp_rate=float(spec["ramp_rate"]),
                unit=spec.get("unit", "A"),
            )
            if dev.tau <= 0 or dev.ramp_rate <= 0 or dev.i_max <= 0:
                raise ValueError(f"magnet {base}: tau, i_max and ramp_rate must be positive")
            self._magnets.append(dev)
            self._magnet_by_prefix[base] = dev
            lim = (-dev.i_max, dev.i_max)
            self._slots[make("CURRENT.SP")] = _Slot(
                dev.unit, True, lim,
                getter=lambda d=dev: d.setpoint,
                setter=lambda v, d=dev: setattr(d, "setpoint", v),
                device=dev,
            )
            self._slots[make("CURRENT.RBV")] = _Slot(
                dev.unit, False, None, getter=lambda d=dev: d.readback, device=dev,
            )
            self._slots[make("CYCLE.STATE")] = _Slot(
                "", False, None, getter=lambda d=dev: d.cycle_state, device=dev,
            )
        elif kind == "rf":
            dev = RfStation(
                location=parts[2],
                amplitude_setpoint=float(spec.get("initial_amplitude", 0.0)),
                phase=float(spec.get("initial_phase", 0.0)),
                probe_noise_sigma=float(spec.get("probe_noise_sigma", 0.0)),
                unit=spec.get("unit", "MV"),
                amplitude_limits=tuple(spec.get("amplitude_limits", (0.0, 100.0))),
                phase_limits=tuple(spec.get("phase_limits", (-180.0, 180.0))),
            )
            probe_addr = make("AMPL.PROBE")
            dev.rng = random.Random(f"{self.seed}/{probe_addr}")
            self._slots[make("AMPL")] = _Slot(
                dev.unit, True, dev.amplitude_limits,
                getter=lambda d=dev: d.amplitude_setpoint,
                setter=lambda v, d=dev: setattr(d, "amplitude_setpoint", v),
                device=dev,
            )
            self._slots[make("PHASE")] = _Slot(
                "deg", True, dev.phase_limits,
                getter=lambda d=dev: d.phase,
                setter=lambda v, d=dev: setattr(d, "phase", v),
                device=dev,
            )
            self._slots[probe_addr] = _Slot(
                dev.unit, False, None,
                getter=lambda d=dev: d.amplitude_setpoint + d.rng.gauss(0.0, d.probe_noise_sigma),
                snapshot_getter=lambda d=dev: d.amplitude_setpoint,
                device=dev,
            )
        elif kind == "hexapod":
            dev = Hexapod(
                location=parts[2],
                parking_position=[float(x) for x in spec.get("parking_position", [])],
                unit=spec.get("unit", "mm"),
            )
            self._slots[make("PARKING.POS")] = _Slot(
                dev.unit, False, None, getter=lambda d=dev: list(d.parking_position), device=dev,
            )
        else:
            raise ValueError(f"unknown device type: {kind!r}")

    # -- lookups -----------------------------------------------------------

    def _resolve(self, address: Address | str) -> Address:
        return Address.parse(address) if isinstance(address, str) else address

    def _slot(self, address: Address | str) -> tuple[Address, _Slot]:
        addr = self._resolve(address)
        slot = self._slots.get(addr)
        if slot is None:
            raise UnknownAddress(str(addr))
        return addr, slot

    def has(self, address: Address | str) -> bool:
        try:
            return self._resolve(address) in self._slots
        except Exception:
            return False

    def is_writable(self, address: Address | str) -> bool:
        return self._slot(address)[1].writable

    def is_magnet(self, address: Address | str) -> bool:
        return isinstance(self._slot(address)[1].device, Magnet)

    def time_constant(self, address: Address | str) -> float:
        """First-order time constant of the device behind an address; 0 if none."""
        dev = self._slot(address)[1].device
        return dev.tau if isinstance(dev, Magnet) else 0.0

    def magnet_locations(self) -> list[str]:
        return [m.location for m in self._magnets]

    # -- operations --------------------------------------------------------

    def read(self, address: Address | str) -> PropertyRecord:
        with self._lock:
            _, slot = self._slot(address)
            value = slot.getter()
            return PropertyRecord(value, slot.unit, slot.writable, slot.limits, self.clock)

    def write(self, address: Address | str, value) -> None:
        with self._lock:
            addr, slot = self._slot(address)
            if not slot.writable:
                raise ReadOnly(str(addr))
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidValue(f"{addr}: value must be a number, got {value!r}")
            v = float(value)
            if not math.isfinite(v):
                raise InvalidValue(f"{addr}: value must be finite")
            if slot.limits is not None and not (slot.limits[0] <= v <= slot.limits[1]):
                raise OutOfLimits(f"{addr}: {v} outside [{slot.limits[0]}, {slot.limits[1]}]")
            slot.setter(v)

    def tick(self, dt: float) -> None:
        if dt < 0:
            raise NegativeDt(f"dt must be >= 0, got {dt}")
        with self._lock:
            if dt == 0:
                return
            t0 = self.clock
            t1 = t0 + dt
            for magnet in self._magnets:
                self._advance_magnet(magnet, t0, t1)
            self.clock = t1

    def _advance_magnet(self, dev: Magnet, t0: float, t1: float) -> None:
        t = t0
        prog = dev.cycle
        while prog is not None and not prog.completed and t < t1:
            seg_end_t = prog.knot_times[prog.segment + 1]
            seg_start_t = prog.knot_times[prog.segment]
            step_end = min(t1, seg_end_t)
            span = seg_end_t - seg_start_t
            if step_end > t and span > 0:
                target = prog.knot_values[prog.segment + 1]
                rate = (target - prog.knot_values[prog.segment]) / span
                dev.readback = _ramp_response(dev.readback, dev.setpoint, rate, step_end - t, dev.tau)
                dev.setpoint = target if step_end >= seg_end_t else dev.setpoint + rate * (step_end - t)
            if step_end >= seg_end_t:
                dev.setpoint = prog.knot_values[prog.segment + 1]
                prog.segment += 1
                if prog.segment >= prog.segments_total:
                    prog.completed = True
                    dev.setpoint = prog.restore
                    dev.cycle = None
                    prog = None
            t = step_end
        if prog is not None and not prog.completed and t1 >= prog.end_time - _TIME_EPS:
            prog.completed = True
            dev.setpoint = prog.restore
            dev.cycle = None
            t = t1
        if dev.cycle is None and t < t1:
            dev.readback = _const_response(dev.readback, dev.setpoint, t1 - t, dev.tau)

    def start_cycle(self, address: Address | str, n_cycles: int) -> CycleHandle:
        if n_cycles < 1:
            raise InvalidValue(f"n_cycles must be >= 1, got {n_cycles}")
        with self._lock:
            addr, slot = self._slot(address)
            dev = slot.device
            if not isinstance(dev, Magnet):
                raise NotAMagnet(str(addr))
            if dev.cycle is not None:
                raise Busy(f"{dev.location} is already cycling")
            s0 = dev.setpoint
            values = [s0]
            for _ in range(n_cycles):
                values.extend([dev.i_max, -dev.i_max])
            values.append(s0)
            times = [self.clock]
            cumulative = 0.0
            for prev, nxt in zip(values, values[1:]):
                cumulative = cumulative + abs(nxt - prev) / dev.ramp_rate
                times.append(self.clock + cumulative)
            prog = CycleProgram(times, values, restore=s0)
            dev.cycle = prog
            sp_addr = addr.with_property("CURRENT.SP")
            return CycleHandle(sp_addr, n_cycles, cumulative, self.clock, prog)

    def list_addresses(self, pattern: str) -> list[Address]:
        parts = pattern.split("/")
        if len(parts) != 4:
            raise MalformedPattern(f"expected 4 segments separated by '/': {pattern!r}")
        regexes = []
        for part in parts:
            if not part or not re.fullmatch(r"[A-Z0-9._*-]+", part):
                raise MalformedPattern(f"bad pattern segment: {part!r}")
            regexes.append(re.compile(re.escape(part).replace(r"\*", r"[A-Z0-9._-]*") + r"\Z"))
        with self._lock:
            hits = [
                addr for addr in self._slots
                if all(rx.match(seg) for rx, seg in zip(
                    regexes, (addr.facility, addr.device, addr.location, addr.property)))
            ]
        return sorted(hits, key=str)

    def snapshot(self) -> dict:
        """Consistent point-in-time copy of all records, keyed by address text.

        Noisy probe properties report their noise-free underlying value here, so
        taking a snapshot never consumes random draws.
        """
        with self._lock:
            records = {}
            for addr in sorted(self._slots, key=str):
                slot = self._slots[addr]
                value = slot.snapshot_getter()
                records[str(addr)] = {
                    "value": value,
                    "unit": slot.unit,
                    "writable": slot.writable,
                    "limits": list(slot.limits) if slot.limits else None,
                    "timestamp": self.clock,
                }
            return {"clock": self.clock, "records": records}
