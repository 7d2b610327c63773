"""Randomized multi-epoch driver for the shared-buffer protocol.

Each session interleaves well-formed epochs with injected faults: rogue
accesses by the party that does not own the buffer, out-of-bounds accesses,
and reordered writes whose completion lands after the publishing flag. The
driver tracks a shadow copy of the buffer and counts every injected fault
and every exception the protocol raised, so a test can assert that detection
is exact: no missed breach and no false positive on well-ordered traffic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from sidebarsim import (
    ActivationKind,
    FenceViolationError,
    FlagNotRaisedError,
    FunctionTable,
    NotOwnerError,
    OutOfBoundsError,
    Owner,
    SidebarBuffer,
    SidebarLayout,
)


@dataclass
class FuzzStats:
    epochs: int = 0
    rogue_injected: int = 0
    rogue_caught: int = 0
    oob_injected: int = 0
    oob_caught: int = 0
    reorder_injected: int = 0
    reorder_caught: int = 0
    premature_service_injected: int = 0
    premature_service_caught: int = 0
    clean_ops: int = 0
    silent_corruptions: int = 0

    def __iadd__(self, other: "FuzzStats") -> "FuzzStats":
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


def run_session(seed: int) -> FuzzStats:
    rng = random.Random(seed)
    layout = SidebarLayout()
    table = FunctionTable.from_kinds(list(ActivationKind), describe=lambda k: k.key)
    buf = SidebarBuffer(layout, owner=Owner.ACCELERATOR)
    shadow = bytearray(layout.capacity_bytes)
    stats = FuzzStats()
    cycle = 0

    def shadow_store(offset: int, data: bytes) -> None:
        shadow[offset : offset + len(data)] = data

    def check_shadow() -> None:
        if bytes(buf.memory) != bytes(shadow):
            stats.silent_corruptions += 1

    def rogue_access() -> None:
        intruder = buf.owner.counterparty
        stats.rogue_injected += 1
        payload = bytes([rng.randrange(256)])
        try:
            if rng.random() < 0.5:
                buf.sb_store(intruder, layout.data_offset, payload, cycle)
            else:
                buf.sb_load(intruder, layout.data_offset, 1)
        except NotOwnerError:
            stats.rogue_caught += 1
        check_shadow()

    def oob_access() -> None:
        stats.oob_injected += 1
        try:
            buf.sb_store(
                buf.owner, layout.capacity_bytes - 2, b"\x01\x02\x03", cycle
            )
        except OutOfBoundsError:
            stats.oob_caught += 1
        check_shadow()

    for _ in range(rng.randint(1, 4)):
        stats.epochs += 1
        kind = rng.choice(list(ActivationKind))
        count = rng.randint(1, 64)
        payload = bytes(rng.randrange(256) for _ in range(count))

        if rng.random() < 0.35:
            rogue_access()
        if rng.random() < 0.15:
            oob_access()

        cycle += rng.randint(1, 20)
        buf.sb_store(Owner.ACCELERATOR, layout.data_offset, payload, cycle)
        shadow_store(layout.data_offset, payload)
        stats.clean_ops += 1
        check_shadow()

        if rng.random() < 0.35:
            # reordered write: flag completion earlier than the data write
            stats.reorder_injected += 1
            try:
                buf.invoke_host(table, table.id_of(kind), count, cycle - 1)
            except FenceViolationError:
                stats.reorder_caught += 1
            check_shadow()

        cycle += rng.randint(0, 20)
        record = buf.invoke_host(table, table.id_of(kind), count, cycle)
        for region_offset, value in (
            (layout.function_id_offset, table.id_of(kind)),
            (layout.arg_block_offset, count),
            (layout.flag_offset, 1),
        ):
            shadow_store(region_offset, value.to_bytes(8, "little"))
        stats.clean_ops += 1
        check_shadow()
        assert buf.owner is Owner.HOST and buf.flag_raised
        assert record.flag_raised_at == cycle

        if rng.random() < 0.35:
            rogue_access()

        cycle += rng.randint(1, 100)
        served_kind, served_count = buf.host_service(table, cycle)
        stats.clean_ops += 1
        assert served_kind is kind and served_count == count

        result = bytes(rng.randrange(256) for _ in range(count))
        cycle += rng.randint(1, 20)
        buf.sb_store(Owner.HOST, layout.data_offset, result, cycle)
        shadow_store(layout.data_offset, result)
        stats.clean_ops += 1
        check_shadow()

        cycle += rng.randint(1, 20)
        buf.lower_flag(cycle)
        shadow_store(layout.flag_offset, (0).to_bytes(8, "little"))
        buf.release_ownership(Owner.HOST, cycle)
        stats.clean_ops += 1
        check_shadow()
        assert buf.owner is Owner.ACCELERATOR and not buf.flag_raised

        if rng.random() < 0.2:
            # ownership handed over without an invocation: flag stays low
            stats.premature_service_injected += 1
            buf.release_ownership(Owner.ACCELERATOR, cycle)
            try:
                buf.host_service(table, cycle)
            except FlagNotRaisedError:
                stats.premature_service_caught += 1
            buf.release_ownership(Owner.HOST, cycle)
            check_shadow()

    return stats
