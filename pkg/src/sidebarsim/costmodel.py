"""Cycle, energy, and traffic cost model for host-accelerator transfers.

All latencies are in cycles of a single shared clock, all energies in
picojoules (a cycle-milliwatt at 1 GHz integrates to 1 pJ, which is what the
per-byte constants encode). Costs are returned as `CostQuote` values that add
componentwise, so a scenario's totals are the sum of its parts.

Three transfer mechanisms are modeled:

* `dma_cost`: a full coherent DMA. The host flushes dirty lines, invalidates,
  and the payload crosses the memory bus.
* `dma_stream_cost`: a streaming DMA for producer-consumer handoffs that skips
  the flush pass (non-temporal stores on the producing side leave nothing
  dirty; the engine snoops), keeping setup and invalidate costs.
* `sidebar_cost` / `sidebar_load_cost`: accesses to a small shared SRAM that
  both parties can reach at L1-like latency, bypassing the bus entirely.

Accelerator kernels are characterized offline; their cycle and energy totals
are table entries (`AcceleratorSpec`), not analytic functions.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigurationError
from .protocol import SidebarLayout

ACTIVATION_KEYS = (
    "heaviside",
    "tanh",
    "sigmoid",
    "relu",
    "leaky_relu",
    "elu",
    "softplus",
)

WIRE_DTYPES = {4: "<f4", 8: "<f8"}


@dataclass(frozen=True)
class CostQuote:
    """Additive cost of one operation.

    `bus_bytes` counts traffic over the DRAM bus, `sidebar_bytes` counts
    payload bytes committed to the shared buffer. Energy covers the data
    movement or compute the quote describes, nothing else.
    """

    cycles: int
    energy_pj: float
    bus_bytes: int = 0
    sidebar_bytes: int = 0

    def __add__(self, other: "CostQuote") -> "CostQuote":
        return CostQuote(
            self.cycles + other.cycles,
            self.energy_pj + other.energy_pj,
            self.bus_bytes + other.bus_bytes,
            self.sidebar_bytes + other.sidebar_bytes,
        )


ZERO_COST = CostQuote(0, 0.0, 0, 0)


@dataclass(frozen=True)
class AcceleratorSpec:
    """Synthesis-derived characterization of one accelerator build.

    `activation` names the fused nonlinearity for single-block builds and is
    None for the activation-free pipeline stages.
    """

    name: str
    activation: str | None
    cycles: int
    energy_pj: int
    area_um2: float

    def validate(self) -> None:
        if self.cycles <= 0 or self.energy_pj <= 0 or self.area_um2 <= 0:
            raise ConfigurationError(
                f"accelerator '{self.name}' must have positive cycles, "
                "energy_pj, and area_um2"
            )
        if self.activation is not None and self.activation not in ACTIVATION_KEYS:
            raise ConfigurationError(
                f"accelerator '{self.name}' has unknown activation "
                f"'{self.activation}'"
            )


SHIPPED_ACCELERATORS: dict[str, AcceleratorSpec] = {
    spec.name: spec
    for spec in (
        AcceleratorSpec("relu_mono", "relu", 122151, 724294354, 4.82445e8),
        AcceleratorSpec("softplus_mono", "softplus", 147967, 873817638, 4.82448e8),
        AcceleratorSpec("stage1", None, 23124, 138988189, 4.61686e8),
        AcceleratorSpec("stage2", None, 22541, 86039447, 2.90202e8),
        AcceleratorSpec("stage3", None, 66060, 51164791, 6.10141e7),
        AcceleratorSpec("stage4", None, 17847, 3560833, 1.46956e7),
        AcceleratorSpec("stage5", None, 2546, 110980, 2.60089e6),
    )
}

STAGE_NAMES = ("stage1", "stage2", "stage3", "stage4", "stage5")


def _default_host_cycles() -> dict[str, float]:
    return {
        "heaviside": 0.125,
        "tanh": 2.0,
        "sigmoid": 2.0,
        "relu": 0.125,
        "leaky_relu": 0.25,
        "elu": 2.5,
        "softplus": 4.5,
    }


@dataclass(frozen=True)
class TransferParams:
    """Hardware constants the cost functions close over."""

    clock_hz: float = 1.0e9
    cache_line_bytes: int = 64
    dma_setup_cycles: int = 2500
    flush_cycles_per_line: int = 150
    invalidate_cycles_per_line: int = 40
    bus_bytes_per_cycle: int = 8
    dram_energy_pj_per_byte: float = 20.0
    sidebar_latency_cycles: int = 4
    sidebar_bytes_per_cycle: int = 64
    sidebar_energy_pj_per_byte: float = 3.0
    host_poll_interval_cycles: int = 50
    host_call_overhead_cycles: int = 50
    wire_bytes_per_element: int = 4
    host_activation_cycles_per_element: dict[str, float] = field(
        default_factory=_default_host_cycles
    )

    def validate(self) -> None:
        for f in fields(self):
            if f.name == "host_activation_cycles_per_element":
                continue
            value = getattr(self, f.name)
            if value <= 0:
                raise ConfigurationError(f"{f.name} must be > 0, got {value}")
        if self.wire_bytes_per_element not in WIRE_DTYPES:
            raise ConfigurationError(
                "wire_bytes_per_element must be 4 or 8, got "
                f"{self.wire_bytes_per_element}"
            )
        if not self.sidebar_energy_pj_per_byte < self.dram_energy_pj_per_byte:
            raise ConfigurationError(
                "sidebar access must cost less energy per byte than the DRAM "
                f"bus ({self.sidebar_energy_pj_per_byte} >= "
                f"{self.dram_energy_pj_per_byte})"
            )
        line_turnaround = self.flush_cycles_per_line + self.invalidate_cycles_per_line
        if not self.sidebar_latency_cycles <= line_turnaround:
            raise ConfigurationError(
                "sidebar latency must not exceed one cache line flush plus "
                f"invalidate ({self.sidebar_latency_cycles} > {line_turnaround})"
            )
        if not self.sidebar_bytes_per_cycle >= self.bus_bytes_per_cycle:
            raise ConfigurationError(
                "sidebar port must be at least as wide as the DMA bus "
                f"({self.sidebar_bytes_per_cycle} < {self.bus_bytes_per_cycle})"
            )
        cycles = self.host_activation_cycles_per_element
        missing = [k for k in ACTIVATION_KEYS if k not in cycles]
        if missing:
            raise ConfigurationError(
                f"host cycle table missing activations: {', '.join(missing)}"
            )
        unknown = [k for k in cycles if k not in ACTIVATION_KEYS]
        if unknown:
            raise ConfigurationError(
                f"host cycle table has unknown activations: {', '.join(unknown)}"
            )
        bad = [k for k, v in cycles.items() if v <= 0]
        if bad:
            raise ConfigurationError(
                f"host cycles per element must be > 0 for: {', '.join(bad)}"
            )

    def wire_bytes(self, element_count: int) -> int:
        return element_count * self.wire_bytes_per_element


def cache_lines(params: TransferParams, nbytes: int) -> int:
    return math.ceil(nbytes / params.cache_line_bytes)


def bus_cycles(params: TransferParams, nbytes: int) -> int:
    return math.ceil(nbytes / params.bus_bytes_per_cycle)


def dma_cost(params: TransferParams, nbytes: int) -> CostQuote:
    """Coherent DMA of `nbytes`: setup, flush+invalidate each line, transfer."""
    lines = cache_lines(params, nbytes)
    cycles = (
        params.dma_setup_cycles
        + (params.flush_cycles_per_line + params.invalidate_cycles_per_line) * lines
        + bus_cycles(params, nbytes)
    )
    return CostQuote(
        cycles, nbytes * params.dram_energy_pj_per_byte, bus_bytes=nbytes
    )


def dma_stream_cost(params: TransferParams, nbytes: int) -> CostQuote:
    """Streaming DMA that skips the flush pass but still invalidates."""
    lines = cache_lines(params, nbytes)
    cycles = (
        params.dma_setup_cycles
        + params.invalidate_cycles_per_line * lines
        + bus_cycles(params, nbytes)
    )
    return CostQuote(
        cycles, nbytes * params.dram_energy_pj_per_byte, bus_bytes=nbytes
    )


def host_fill_cost(params: TransferParams, nbytes: int) -> CostQuote:
    """Demand fill of `nbytes` into the host cache, overlapped with compute.

    The fill hides under the consuming loop, so it contributes traffic and
    energy but no additional cycles.
    """
    return CostQuote(
        0, nbytes * params.dram_energy_pj_per_byte, bus_bytes=nbytes
    )


def sidebar_cost(params: TransferParams, nbytes: int) -> CostQuote:
    """Store of `nbytes` into the shared buffer."""
    cycles = params.sidebar_latency_cycles + math.ceil(
        nbytes / params.sidebar_bytes_per_cycle
    )
    return CostQuote(
        cycles,
        nbytes * params.sidebar_energy_pj_per_byte,
        sidebar_bytes=nbytes,
    )


def sidebar_load_cost(params: TransferParams, nbytes: int) -> CostQuote:
    """Load of `nbytes` from the shared buffer; reads are not commit traffic."""
    cycles = params.sidebar_latency_cycles + math.ceil(
        nbytes / params.sidebar_bytes_per_cycle
    )
    return CostQuote(cycles, nbytes * params.sidebar_energy_pj_per_byte)


def sidebar_control_cost(params: TransferParams) -> CostQuote:
    """Single control-word access: flag, function id, or argument slot."""
    return CostQuote(params.sidebar_latency_cycles, 0.0)


def host_activation_cost(
    params: TransferParams, activation_key: str, element_count: int
) -> CostQuote:
    """Host-side elementwise activation over `element_count` values."""
    try:
        per_element = params.host_activation_cycles_per_element[activation_key]
    except KeyError:
        raise ConfigurationError(
            f"no host cycle estimate for activation '{activation_key}'"
        ) from None
    cycles = params.host_call_overhead_cycles + math.ceil(
        per_element * element_count
    )
    return CostQuote(cycles, 0.0)


def accelerator_cost(spec: AcceleratorSpec) -> CostQuote:
    return CostQuote(spec.cycles, float(spec.energy_pj))


def edp_joule_seconds(cycles: int, energy_pj: float, clock_hz: float) -> float:
    """Energy-delay product in joule-seconds."""
    return (energy_pj * 1.0e-12) * (cycles / clock_hz)


def monolithic_spec(
    accelerators: dict[str, AcceleratorSpec], activation_key: str
) -> AcceleratorSpec:
    """Find the single-block build fusing `activation_key`, if one exists."""
    matches = sorted(
        (s for s in accelerators.values() if s.activation == activation_key),
        key=lambda s: s.name,
    )
    if not matches:
        raise ConfigurationError(
            f"no monolithic spec fuses activation '{activation_key}'; "
            f"available: {sorted(s.activation for s in accelerators.values() if s.activation)}"
        )
    return matches[0]


def stage_specs(
    accelerators: dict[str, AcceleratorSpec],
) -> tuple[AcceleratorSpec, ...]:
    missing = [n for n in STAGE_NAMES if n not in accelerators]
    if missing:
        raise ConfigurationError(
            f"accelerator table missing stages: {', '.join(missing)}"
        )
    return tuple(accelerators[n] for n in STAGE_NAMES)


@dataclass(frozen=True)
class SimConfig:
    """Full simulation configuration: transfer constants, buffer layout, and
    the accelerator characterization table."""

    transfer: TransferParams = field(default_factory=TransferParams)
    layout: SidebarLayout = field(default_factory=SidebarLayout)
    accelerators: dict[str, AcceleratorSpec] = field(
        default_factory=lambda: dict(SHIPPED_ACCELERATORS)
    )

    def validate(self) -> None:
        self.transfer.validate()
        self.layout.validate()
        for spec in self.accelerators.values():
            spec.validate()
        stage_specs(self.accelerators)

    def canonical_text(self) -> str:
        """Stable key=value rendering used for fingerprints and digests."""
        lines = []
        for f in fields(TransferParams):
            value = getattr(self.transfer, f.name)
            if f.name == "host_activation_cycles_per_element":
                for key in ACTIVATION_KEYS:
                    lines.append(f"transfer.host_cycles.{key}={value[key]!r}")
            else:
                lines.append(f"transfer.{f.name}={value!r}")
        for f in fields(SidebarLayout):
            lines.append(f"layout.{f.name}={getattr(self.layout, f.name)!r}")
        for name in sorted(self.accelerators):
            s = self.accelerators[name]
            lines.append(
                f"accelerator.{name}={s.activation!r},{s.cycles!r},"
                f"{s.energy_pj!r},{s.area_um2!r}"
            )
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.blake2b(
            self.canonical_text().encode("utf-8"), digest_size=8
        ).hexdigest()

    # -- file round trip -----------------------------------------------------

    def to_file(self, path) -> None:
        parser = configparser.ConfigParser()
        parser["transfer"] = {}
        for f in fields(TransferParams):
            if f.name == "host_activation_cycles_per_element":
                continue
            parser["transfer"][f.name] = repr(getattr(self.transfer, f.name))
        parser["host_activation_cycles_per_element"] = {
            key: repr(self.transfer.host_activation_cycles_per_element[key])
            for key in ACTIVATION_KEYS
        }
        parser["sidebar_layout"] = {
            f.name: repr(getattr(self.layout, f.name))
            for f in fields(SidebarLayout)
        }
        for name in sorted(self.accelerators):
            if (
                name in SHIPPED_ACCELERATORS
                and self.accelerators[name] == SHIPPED_ACCELERATORS[name]
            ):
                continue
            s = self.accelerators[name]
            parser[f"accelerator:{name}"] = {
                "activation": s.activation or "",
                "cycles": repr(s.cycles),
                "energy_pj": repr(s.energy_pj),
                "area_um2": repr(s.area_um2),
            }
        with open(path, "w", encoding="utf-8") as handle:
            parser.write(handle)

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigurationError(f"config file not found: {path}")
        known = {"transfer", "host_activation_cycles_per_element", "sidebar_layout"}
        for section in parser.sections():
            if section not in known and not section.startswith("accelerator:"):
                raise ConfigurationError(f"unknown config section [{section}]")

        transfer_kwargs = {}
        field_types = {f.name: f.type for f in fields(TransferParams)}
        if parser.has_section("transfer"):
            for key, raw in parser.items("transfer"):
                if key not in field_types or key == "host_activation_cycles_per_element":
                    raise ConfigurationError(f"unknown transfer key '{key}'")
                transfer_kwargs[key] = _parse_number(key, raw, field_types[key])
        if parser.has_section("host_activation_cycles_per_element"):
            table = dict(_default_host_cycles())
            for key, raw in parser.items("host_activation_cycles_per_element"):
                if key not in ACTIVATION_KEYS:
                    raise ConfigurationError(f"unknown activation '{key}'")
                table[key] = _parse_number(key, raw, "float")
            transfer_kwargs["host_activation_cycles_per_element"] = table
        transfer = TransferParams(**transfer_kwargs)

        layout_kwargs = {}
        if parser.has_section("sidebar_layout"):
            layout_fields = {f.name for f in fields(SidebarLayout)}
            for key, raw in parser.items("sidebar_layout"):
                if key not in layout_fields:
                    raise ConfigurationError(f"unknown layout key '{key}'")
                layout_kwargs[key] = _parse_number(key, raw, "int")
        layout = SidebarLayout(**layout_kwargs)

        accelerators = dict(SHIPPED_ACCELERATORS)
        for section in parser.sections():
            if not section.startswith("accelerator:"):
                continue
            name = section.split(":", 1)[1]
            if not name:
                raise ConfigurationError("accelerator section needs a name")
            activation = parser.get(section, "activation", fallback="") or None
            try:
                spec = AcceleratorSpec(
                    name=name,
                    activation=activation,
                    cycles=parser.getint(section, "cycles"),
                    energy_pj=parser.getint(section, "energy_pj"),
                    area_um2=parser.getfloat(section, "area_um2"),
                )
            except (configparser.NoOptionError, ValueError) as exc:
                raise ConfigurationError(
                    f"bad accelerator section [{section}]: {exc}"
                ) from None
            accelerators[name] = spec

        config = cls(transfer=transfer, layout=layout, accelerators=accelerators)
        config.validate()
        return config

    def with_transfer(self, **overrides) -> "SimConfig":
        return replace(self, transfer=replace(self.transfer, **overrides))


def _parse_number(key: str, raw: str, type_name: str):
    type_name = str(type_name)
    try:
        if "int" in type_name:
            return int(raw, 0)
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"bad numeric value for '{key}': {raw!r}") from None
