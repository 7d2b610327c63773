"""Deterministic single-timeline simulator core.

Execution is modeled as one sequence of closed intervals on a virtual cycle
clock; there is no concurrency, so latency is the sum of interval lengths
plus flag-polling gaps. Every interval and signal edge is recorded as a
`SimEvent`, and the event trace is the ground truth: totals folded from the
trace must equal the running accumulators, and the reported digest is a hash
of the trace's canonical serialization (prefixed by the configuration
fingerprint, so any constant that could change behavior changes the digest).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

from .costmodel import CostQuote, SimConfig
from .errors import SimulationError

DIGEST_BYTES = 8


class EventKind(Enum):
    DMA_LOAD = "DmaLoad"
    DMA_STORE = "DmaStore"
    KERNEL = "Kernel"
    HOST_COMPUTE = "HostCompute"
    SB_WRITE = "SbWrite"
    SB_READ = "SbRead"
    FLAG_RAISE = "FlagRaise"
    FLAG_OBSERVE = "FlagObserve"
    OWNERSHIP_TRANSFER = "OwnershipTransfer"


INTERVAL_KINDS = frozenset(
    {
        EventKind.DMA_LOAD,
        EventKind.DMA_STORE,
        EventKind.KERNEL,
        EventKind.HOST_COMPUTE,
        EventKind.SB_WRITE,
        EventKind.SB_READ,
    }
)

BUS_KINDS = frozenset(
    {EventKind.DMA_LOAD, EventKind.DMA_STORE, EventKind.HOST_COMPUTE}
)


@dataclass(frozen=True)
class SimEvent:
    """One interval or signal edge on the timeline.

    `payload_bytes` is the accounted data payload: bus bytes for DMA and
    host-fill traffic, buffer bytes for sidebar data accesses, zero for
    control words and signal edges.
    """

    kind: EventKind
    start_cycle: int
    end_cycle: int
    payload_bytes: int = 0
    detail: str = ""

    @property
    def length(self) -> int:
        return self.end_cycle - self.start_cycle

    def to_line(self) -> str:
        return (
            f"{self.kind.value} {self.start_cycle} {self.end_cycle} "
            f"{self.payload_bytes} {self.detail}"
        )


@dataclass(frozen=True)
class RunMetrics:
    """Headline totals of one scenario run."""

    latency_cycles: int
    bus_bytes: int
    sidebar_bytes: int
    dram_energy_pj: float
    sidebar_energy_pj: float
    accelerator_energy_pj: float

    @property
    def data_energy_pj(self) -> float:
        """Energy spent moving data, the cost coupling choices control."""
        return self.dram_energy_pj + self.sidebar_energy_pj

    @property
    def total_energy_pj(self) -> float:
        return self.data_energy_pj + self.accelerator_energy_pj

    def edp_joule_seconds(self, clock_hz: float) -> float:
        return (self.data_energy_pj * 1.0e-12) * (self.latency_cycles / clock_hz)


class Simulator:
    """Advances the clock by executing cost quotes and records the trace."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.clock = 0
        self.events: list[SimEvent] = []
        self.bus_bytes = 0
        self.sidebar_bytes = 0
        self.dram_energy_pj = 0.0
        self.sidebar_energy_pj = 0.0
        self.accelerator_energy_pj = 0.0

    def run(
        self,
        kind: EventKind,
        quote: CostQuote,
        payload_bytes: int = 0,
        detail: str = "",
    ) -> SimEvent:
        """Execute one interval: advance the clock and accumulate its costs."""
        if kind not in INTERVAL_KINDS:
            raise SimulationError(f"{kind.value} is not an interval event")
        start = self.clock
        self.clock += quote.cycles
        event = SimEvent(kind, start, self.clock, payload_bytes, detail)
        self.events.append(event)
        self.bus_bytes += quote.bus_bytes
        self.sidebar_bytes += quote.sidebar_bytes
        if kind in BUS_KINDS:
            self.dram_energy_pj += quote.energy_pj
        elif kind is EventKind.KERNEL:
            self.accelerator_energy_pj += quote.energy_pj
        else:
            self.sidebar_energy_pj += quote.energy_pj
        return event

    def mark(self, kind: EventKind, detail: str = "") -> SimEvent:
        """Record a zero-length signal edge at the current cycle."""
        if kind in INTERVAL_KINDS:
            raise SimulationError(f"{kind.value} is not a signal edge")
        event = SimEvent(kind, self.clock, self.clock, 0, detail)
        self.events.append(event)
        return event

    def wait_for_poll(self) -> SimEvent:
        """Advance to the host's next flag-poll tick and record the observation.

        The host samples the flag every `host_poll_interval_cycles`; a flag
        raised at cycle t is seen at the first tick strictly after t.
        """
        interval = self.config.transfer.host_poll_interval_cycles
        tick = (self.clock // interval + 1) * interval
        self.clock = tick
        return self.mark(EventKind.FLAG_OBSERVE, detail="flag=1")

    def metrics(self) -> RunMetrics:
        return RunMetrics(
            latency_cycles=self.clock,
            bus_bytes=self.bus_bytes,
            sidebar_bytes=self.sidebar_bytes,
            dram_energy_pj=self.dram_energy_pj,
            sidebar_energy_pj=self.sidebar_energy_pj,
            accelerator_energy_pj=self.accelerator_energy_pj,
        )


def replay_totals(events: list[SimEvent], config: SimConfig) -> RunMetrics:
    """Recompute totals from the trace alone.

    Independent of the simulator's accumulators: bus traffic is the payload
    sum over DMA and host-fill intervals, buffer traffic the payload sum over
    buffer writes, energies follow from the per-byte constants and the kernel
    characterization table keyed by event detail.
    """
    transfer = config.transfer
    bus = 0
    sidebar_commits = 0
    sidebar_touched = 0
    accel = 0.0
    latency = 0
    last_raise: int | None = None
    poll_gap_total = 0
    interval_total = 0
    for ev in events:
        if ev.kind in INTERVAL_KINDS:
            interval_total += ev.length
        if ev.kind in BUS_KINDS:
            bus += ev.payload_bytes
        elif ev.kind is EventKind.SB_WRITE:
            sidebar_commits += ev.payload_bytes
            sidebar_touched += ev.payload_bytes
        elif ev.kind is EventKind.SB_READ:
            sidebar_touched += ev.payload_bytes
        elif ev.kind is EventKind.KERNEL:
            spec = config.accelerators.get(ev.detail)
            if spec is None:
                raise SimulationError(
                    f"kernel event names unknown accelerator '{ev.detail}'"
                )
            accel += float(spec.energy_pj)
        if ev.kind is EventKind.FLAG_RAISE:
            last_raise = ev.end_cycle
        if ev.kind is EventKind.FLAG_OBSERVE:
            if last_raise is None:
                raise SimulationError("flag observed before any raise")
            poll_gap_total += ev.start_cycle - last_raise
            last_raise = None
        latency = max(latency, ev.end_cycle)
    if interval_total + poll_gap_total != latency:
        raise SimulationError(
            "trace is not dense: intervals plus poll gaps cover "
            f"{interval_total + poll_gap_total} of {latency} cycles"
        )
    return RunMetrics(
        latency_cycles=latency,
        bus_bytes=bus,
        sidebar_bytes=sidebar_commits,
        dram_energy_pj=bus * transfer.dram_energy_pj_per_byte,
        sidebar_energy_pj=sidebar_touched * transfer.sidebar_energy_pj_per_byte,
        accelerator_energy_pj=accel,
    )


def serialize_trace(events: list[SimEvent], config: SimConfig) -> str:
    """Canonical text form: config fingerprint, events, folded totals."""
    totals = replay_totals(events, config)
    lines = [f"config {config.fingerprint()}"]
    lines.extend(ev.to_line() for ev in events)
    lines.append(
        "totals "
        f"latency={totals.latency_cycles} "
        f"bus={totals.bus_bytes} "
        f"sidebar={totals.sidebar_bytes} "
        f"dram_pj={totals.dram_energy_pj!r} "
        f"sidebar_pj={totals.sidebar_energy_pj!r} "
        f"accel_pj={totals.accelerator_energy_pj!r}"
    )
    return "\n".join(lines) + "\n"


def trace_digest(events: list[SimEvent], config: SimConfig) -> str:
    """Stable 64-bit hex digest of the canonical trace serialization."""
    return hashlib.blake2b(
        serialize_trace(events, config).encode("utf-8"),
        digest_size=DIGEST_BYTES,
    ).hexdigest()
