"""The three execution scenarios for one inference.

* monolithic: one fused accelerator runs the whole network; the host DMAs the
  input and parameters in, the logits out.
* flexible: five activation-free pipeline stages; at every activation site
  the intermediate streams over the DMA bus to the host, the host applies the
  activation (demand-filling the data through its cache), and the result
  streams back.
* sidebar: the same five stages, but activation sites are serviced through
  the shared low-latency buffer with the full ownership and flag protocol.

All three run the identical float64 functional math, so their logits agree
bit for bit; only the schedule and the movement costs differ.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .costmodel import (
    SimConfig,
    accelerator_cost,
    dma_cost,
    dma_stream_cost,
    host_activation_cost,
    host_fill_cost,
    monolithic_spec,
    sidebar_control_cost,
    sidebar_cost,
    sidebar_load_cost,
    stage_specs,
)
from .errors import CapacityExceededError, SimulationError, UsageError
from .protocol import FunctionTable, Owner, SidebarBuffer
from .simcore import EventKind, RunMetrics, SimEvent, Simulator, trace_digest
from .workload import (
    ActivationKind,
    Model,
    NetworkParams,
    apply_activation,
    build_model,
    init_params,
    make_input,
    run_network,
    run_stage,
)

SCENARIO_NAMES = ("monolithic", "flexible", "sidebar")


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    activation: ActivationKind
    seed: int
    metrics: RunMetrics
    digest: str
    logits: np.ndarray
    events: tuple[SimEvent, ...]


@dataclass(frozen=True)
class _Workload:
    model: Model
    params: NetworkParams
    x: np.ndarray
    input_bytes: int
    param_bytes: int
    output_bytes: int


@functools.lru_cache(maxsize=16)
def _cached_workload(seed: int) -> tuple[Model, NetworkParams, np.ndarray]:
    model = build_model()
    return model, init_params(model, seed), make_input(seed)


def _setup(config: SimConfig, seed: int) -> _Workload:
    model, params, x = _cached_workload(seed)
    wire = config.transfer.wire_bytes
    return _Workload(
        model=model,
        params=params,
        x=x,
        input_bytes=wire(int(np.prod(model.input_shape))),
        param_bytes=wire(model.param_count),
        output_bytes=wire(model.output_elements),
    )


def run_monolithic(
    config: SimConfig, kind: ActivationKind, seed: int, elu_alpha: float = 1.0
) -> ScenarioResult:
    work = _setup(config, seed)
    spec = monolithic_spec(config.accelerators, kind.key)
    sim = Simulator(config)
    transfer = config.transfer

    in_bytes = work.input_bytes + work.param_bytes
    sim.run(
        EventKind.DMA_LOAD,
        dma_cost(transfer, in_bytes),
        payload_bytes=in_bytes,
        detail="input+parameters",
    )
    sim.run(EventKind.KERNEL, accelerator_cost(spec), detail=spec.name)
    logits = _forward(work, kind, elu_alpha)[0]
    sim.run(
        EventKind.DMA_STORE,
        dma_cost(transfer, work.output_bytes),
        payload_bytes=work.output_bytes,
        detail="logits",
    )
    return _finish("monolithic", sim, kind, seed, logits)


def run_flexible(
    config: SimConfig, kind: ActivationKind, seed: int, elu_alpha: float = 1.0
) -> ScenarioResult:
    work = _setup(config, seed)
    stages = stage_specs(config.accelerators)
    sim = Simulator(config)
    transfer = config.transfer
    model = work.model

    for spec, count in zip(stages, model.stage_param_counts()):
        nbytes = transfer.wire_bytes(count)
        sim.run(
            EventKind.DMA_LOAD,
            dma_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"parameters:{spec.name}",
        )
    sim.run(
        EventKind.DMA_LOAD,
        dma_cost(transfer, work.input_bytes),
        payload_bytes=work.input_bytes,
        detail="input",
    )

    x = work.x
    last = len(stages) - 1
    for index, spec in enumerate(stages):
        sim.run(EventKind.KERNEL, accelerator_cost(spec), detail=spec.name)
        x = run_stage(model, work.params, index, x)
        if index == last:
            break
        nbytes = transfer.wire_bytes(x.size)
        sim.run(
            EventKind.DMA_STORE,
            dma_stream_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"intermediate:{spec.name}:to_host",
        )
        quote = host_activation_cost(transfer, kind.key, x.size) + host_fill_cost(
            transfer, nbytes
        )
        sim.run(
            EventKind.HOST_COMPUTE,
            quote,
            payload_bytes=nbytes,
            detail=f"activation:{kind.key}",
        )
        x = apply_activation(kind, x, elu_alpha=elu_alpha)
        sim.run(
            EventKind.DMA_LOAD,
            dma_stream_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"intermediate:{spec.name}:to_accel",
        )

    sim.run(
        EventKind.DMA_STORE,
        dma_cost(transfer, work.output_bytes),
        payload_bytes=work.output_bytes,
        detail="logits",
    )
    _check_logits(work, kind, elu_alpha, x)
    return _finish("flexible", sim, kind, seed, x)


def run_sidebar(
    config: SimConfig, kind: ActivationKind, seed: int, elu_alpha: float = 1.0
) -> ScenarioResult:
    work = _setup(config, seed)
    stages = stage_specs(config.accelerators)
    sim = Simulator(config)
    transfer = config.transfer
    model = work.model
    wire_dtype = np.dtype(f"<f{transfer.wire_bytes_per_element}")

    buffer = SidebarBuffer(config.layout, owner=Owner.ACCELERATOR)
    table = FunctionTable.from_kinds(list(ActivationKind), describe=lambda k: k.key)

    in_bytes = work.input_bytes + work.param_bytes
    sim.run(
        EventKind.DMA_LOAD,
        dma_cost(transfer, in_bytes),
        payload_bytes=in_bytes,
        detail="input+parameters",
    )

    x = work.x
    last = len(stages) - 1
    for index, spec in enumerate(stages):
        sim.run(EventKind.KERNEL, accelerator_cost(spec), detail=spec.name)
        x = run_stage(model, work.params, index, x)
        if index == last:
            break

        nbytes = transfer.wire_bytes(x.size)
        if nbytes > config.layout.data_capacity:
            raise CapacityExceededError(
                f"intermediate of {nbytes} bytes exceeds buffer data capacity "
                f"{config.layout.data_capacity}"
            )
        wire_out = np.ascontiguousarray(x, dtype=wire_dtype).tobytes()

        ev = sim.run(
            EventKind.SB_WRITE,
            sidebar_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"data:{spec.name}",
        )
        buffer.sb_store(
            Owner.ACCELERATOR, config.layout.data_offset, wire_out, ev.end_cycle
        )

        ctrl = sidebar_control_cost(transfer)
        ev = sim.run(
            EventKind.SB_WRITE,
            ctrl + ctrl + ctrl,
            detail="control:invoke",
        )
        buffer.invoke_host(table, table.id_of(kind), x.size, ev.end_cycle)
        sim.mark(EventKind.FLAG_RAISE, detail=f"function:{kind.key}")
        sim.mark(EventKind.OWNERSHIP_TRANSFER, detail="accelerator->host")

        sim.wait_for_poll()
        ev = sim.run(EventKind.SB_READ, ctrl + ctrl, detail="control:decode")
        served_kind, served_count = buffer.host_service(table, ev.end_cycle)
        if served_kind is not kind or served_count != x.size:
            raise SimulationError(
                f"decoded call ({served_kind}, {served_count}) does not match "
                f"the published ({kind}, {x.size})"
            )

        sim.run(
            EventKind.SB_READ,
            sidebar_load_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"data:{spec.name}",
        )
        seen = buffer.sb_load(Owner.HOST, config.layout.data_offset, nbytes)
        if seen != wire_out:
            raise SimulationError(f"buffer corrupted the {spec.name} intermediate")

        sim.run(
            EventKind.HOST_COMPUTE,
            host_activation_cost(transfer, kind.key, x.size),
            detail=f"activation:{kind.key}",
        )
        x = apply_activation(kind, x, elu_alpha=elu_alpha)
        wire_back = np.ascontiguousarray(x, dtype=wire_dtype).tobytes()

        ev = sim.run(
            EventKind.SB_WRITE,
            sidebar_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"data:{spec.name}:result",
        )
        buffer.sb_store(Owner.HOST, config.layout.data_offset, wire_back, ev.end_cycle)

        ev = sim.run(EventKind.SB_WRITE, ctrl, detail="control:complete")
        buffer.lower_flag(ev.end_cycle)
        buffer.release_ownership(Owner.HOST, ev.end_cycle)
        sim.mark(EventKind.OWNERSHIP_TRANSFER, detail="host->accelerator")

        sim.run(
            EventKind.SB_READ,
            sidebar_load_cost(transfer, nbytes),
            payload_bytes=nbytes,
            detail=f"data:{spec.name}:result",
        )
        seen = buffer.sb_load(Owner.ACCELERATOR, config.layout.data_offset, nbytes)
        if seen != wire_back:
            raise SimulationError(f"buffer corrupted the {spec.name} result")

    sim.run(
        EventKind.DMA_STORE,
        dma_cost(transfer, work.output_bytes),
        payload_bytes=work.output_bytes,
        detail="logits",
    )
    _check_logits(work, kind, elu_alpha, x)
    return _finish("sidebar", sim, kind, seed, x)


_RUNNERS = {
    "monolithic": run_monolithic,
    "flexible": run_flexible,
    "sidebar": run_sidebar,
}


def run_scenario(
    config: SimConfig,
    scenario: str,
    kind: ActivationKind,
    seed: int,
    elu_alpha: float = 1.0,
) -> ScenarioResult:
    try:
        runner = _RUNNERS[scenario]
    except KeyError:
        raise UsageError(
            f"unknown scenario '{scenario}'; known: {', '.join(SCENARIO_NAMES)}"
        ) from None
    return runner(config, kind, seed, elu_alpha=elu_alpha)


def run_all(
    config: SimConfig, kind: ActivationKind, seed: int, elu_alpha: float = 1.0
) -> dict[str, ScenarioResult]:
    return {
        name: run_scenario(config, name, kind, seed, elu_alpha=elu_alpha)
        for name in SCENARIO_NAMES
    }


@dataclass(frozen=True)
class RelativeMetrics:
    """Ratios of a scenario's totals to the monolithic baseline."""

    scenario: str
    latency_ratio: float
    data_energy_ratio: float
    edp_ratio: float


def relative_to_monolithic(
    results: dict[str, ScenarioResult], clock_hz: float
) -> dict[str, RelativeMetrics]:
    base = results["monolithic"].metrics
    base_edp = base.edp_joule_seconds(clock_hz)
    out = {}
    for name, result in results.items():
        m = result.metrics
        out[name] = RelativeMetrics(
            scenario=name,
            latency_ratio=m.latency_cycles / base.latency_cycles,
            data_energy_ratio=m.data_energy_pj / base.data_energy_pj,
            edp_ratio=m.edp_joule_seconds(clock_hz) / base_edp,
        )
    return out


def _forward(work: _Workload, kind: ActivationKind, elu_alpha: float):
    return run_network(work.model, work.params, work.x, kind, elu_alpha=elu_alpha)


def _check_logits(
    work: _Workload, kind: ActivationKind, elu_alpha: float, logits: np.ndarray
) -> None:
    expected = _forward(work, kind, elu_alpha)[0]
    if not np.array_equal(expected, logits):
        raise SimulationError("staged execution diverged from the fused forward")


def _finish(
    name: str,
    sim: Simulator,
    kind: ActivationKind,
    seed: int,
    logits: np.ndarray,
) -> ScenarioResult:
    return ScenarioResult(
        scenario=name,
        activation=kind,
        seed=seed,
        metrics=sim.metrics(),
        digest=trace_digest(sim.events, sim.config),
        logits=np.asarray(logits, dtype=np.float64),
        events=tuple(sim.events),
    )
