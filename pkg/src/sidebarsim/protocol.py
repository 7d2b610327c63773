"""Ownership and signaling protocol for the shared low-latency buffer.

The buffer ("sidebar") is a small SRAM mapped into both the host and the
accelerator fabric. Exactly one party owns it at a time; the owner may store
and load, the other party must wait for an ownership transfer. A call is
published by writing a function id and argument block, then raising a flag
word. The flag write must be the last write of the epoch: any data-region
write that completes after it is a fence violation.

This module is purely functional state; cycle accounting lives in `simcore`
and `scenarios`. Completion cycles are passed in by the caller so that write
ordering can be audited after the fact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ConfigurationError,
    FenceViolationError,
    FlagNotRaisedError,
    NotOwnerError,
    OutOfBoundsError,
    UnknownFunctionError,
)

_U64 = struct.Struct("<Q")

FLAG_BYTES = 8
FUNCTION_ID_BYTES = 8


class Owner(Enum):
    HOST = "host"
    ACCELERATOR = "accelerator"

    @property
    def counterparty(self) -> "Owner":
        return Owner.HOST if self is Owner.ACCELERATOR else Owner.ACCELERATOR


@dataclass(frozen=True)
class SidebarLayout:
    """Fixed region map inside the buffer, offsets in bytes."""

    capacity_bytes: int = 32768
    flag_offset: int = 0
    function_id_offset: int = 8
    arg_block_offset: int = 16
    arg_block_len: int = 64
    data_offset: int = 128

    def validate(self) -> None:
        regions = [
            ("flag", self.flag_offset, FLAG_BYTES),
            ("function_id", self.function_id_offset, FUNCTION_ID_BYTES),
            ("arg_block", self.arg_block_offset, self.arg_block_len),
        ]
        if self.capacity_bytes <= 0:
            raise ConfigurationError("capacity_bytes must be > 0")
        for name, off, ln in regions:
            if off < 0 or ln <= 0 or off + ln > self.capacity_bytes:
                raise ConfigurationError(
                    f"{name} region [{off}, {off + ln}) outside capacity "
                    f"{self.capacity_bytes}"
                )
        if not self.data_offset < self.capacity_bytes:
            raise ConfigurationError(
                "data_offset must satisfy data_offset < capacity_bytes"
            )
        spans = sorted(regions, key=lambda r: r[1])
        for (na, oa, la), (nb, ob, _) in zip(spans, spans[1:]):
            if oa + la > ob:
                raise ConfigurationError(f"{na} region overlaps {nb} region")
        last = spans[-1]
        if last[1] + last[2] > self.data_offset:
            raise ConfigurationError(
                f"{last[0]} region overlaps data region at {self.data_offset}"
            )

    @property
    def data_capacity(self) -> int:
        return self.capacity_bytes - self.data_offset


@dataclass(frozen=True)
class FunctionEntry:
    kind: object  # opaque payload, an ActivationKind in practice
    description: str


class FunctionTable:
    """Dense id -> callable-description map shared by host and accelerator.

    Ids start at 0 with no holes so they can double as an index; the table
    replaces raw host function pointers, which have no meaning to a device.
    """

    def __init__(self, entries: dict[int, FunctionEntry]):
        if sorted(entries) != list(range(len(entries))):
            raise ConfigurationError("function ids must be dense from 0")
        self._entries = dict(entries)

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, function_id: int) -> FunctionEntry:
        try:
            return self._entries[function_id]
        except KeyError:
            raise UnknownFunctionError(
                f"function id {function_id} not in table of {len(self)}"
            ) from None

    def id_of(self, kind: object) -> int:
        for fid, entry in self._entries.items():
            if entry.kind == kind:
                return fid
        raise UnknownFunctionError(f"no function id registered for {kind!r}")

    @classmethod
    def from_kinds(cls, kinds, describe=str) -> "FunctionTable":
        return cls(
            {i: FunctionEntry(k, describe(k)) for i, k in enumerate(kinds)}
        )


@dataclass(frozen=True)
class WriteRecord:
    offset: int
    length: int
    completion_cycle: int


@dataclass
class InvocationRecord:
    function_id: int
    element_count: int
    flag_raised_at: int
    serviced_at: int | None = None
    flag_lowered_at: int | None = None


@dataclass
class Epoch:
    owner: Owner
    writes: tuple[WriteRecord, ...]
    released_at: int


class SidebarBuffer:
    """Byte-addressable shared buffer with single-owner semantics.

    Memory starts zeroed. Every store is logged with its completion cycle;
    the log is folded into `epoch_history` when ownership is released, which
    is what makes post-hoc fence and exclusivity audits possible.
    """

    def __init__(self, layout: SidebarLayout | None = None,
                 owner: Owner = Owner.ACCELERATOR):
        self.layout = layout or SidebarLayout()
        self.layout.validate()
        self.memory = bytearray(self.layout.capacity_bytes)
        self.owner = owner
        self.write_log: list[WriteRecord] = []
        self.epoch_history: list[Epoch] = []
        self.invocations: list[InvocationRecord] = []

    # -- raw access --------------------------------------------------------

    def _check_owner(self, caller: Owner, action: str) -> None:
        if caller is not self.owner:
            raise NotOwnerError(
                f"{caller.value} attempted {action} while "
                f"{self.owner.value} owns the buffer"
            )

    def _check_bounds(self, offset: int, length: int) -> None:
        if offset < 0 or length < 0 or offset + length > self.layout.capacity_bytes:
            raise OutOfBoundsError(
                f"access [{offset}, {offset + length}) outside capacity "
                f"{self.layout.capacity_bytes}"
            )

    def sb_store(self, caller: Owner, offset: int, data: bytes,
                 at_cycle: int) -> None:
        self._check_owner(caller, "store")
        self._check_bounds(offset, len(data))
        self.memory[offset:offset + len(data)] = data
        self.write_log.append(WriteRecord(offset, len(data), at_cycle))

    def sb_load(self, caller: Owner, offset: int, length: int) -> bytes:
        self._check_owner(caller, "load")
        self._check_bounds(offset, length)
        return bytes(self.memory[offset:offset + length])

    def release_ownership(self, caller: Owner, at_cycle: int) -> Owner:
        """Flip ownership to the counterparty and archive this epoch's writes."""
        self._check_owner(caller, "release")
        self.epoch_history.append(
            Epoch(self.owner, tuple(self.write_log), at_cycle)
        )
        self.write_log = []
        self.owner = self.owner.counterparty
        return self.owner

    # -- call protocol ------------------------------------------------------

    @property
    def flag_raised(self) -> bool:
        off = self.layout.flag_offset
        return any(self.memory[off:off + FLAG_BYTES])

    def _data_writes(self) -> list[WriteRecord]:
        return [w for w in self.write_log if w.offset >= self.layout.data_offset]

    def invoke_host(self, table: FunctionTable, function_id: int,
                    element_count: int, at_cycle: int) -> InvocationRecord:
        """Publish a host call: write id and args, raise the flag, hand off.

        `at_cycle` is the completion cycle of the flag write. Raises
        FenceViolationError if any data-region write of the current epoch
        completed after it, since the host could then observe the flag before
        the data is in place.
        """
        self._check_owner(Owner.ACCELERATOR, "invoke")
        table.lookup(function_id)
        late = [w for w in self._data_writes() if w.completion_cycle > at_cycle]
        if late:
            worst = max(w.completion_cycle for w in late)
            raise FenceViolationError(
                f"data write completes at cycle {worst}, after the flag "
                f"write at cycle {at_cycle}"
            )
        lay = self.layout
        self.sb_store(Owner.ACCELERATOR, lay.function_id_offset,
                      _U64.pack(function_id), at_cycle)
        self.sb_store(Owner.ACCELERATOR, lay.arg_block_offset,
                      _U64.pack(element_count), at_cycle)
        self.sb_store(Owner.ACCELERATOR, lay.flag_offset, _U64.pack(1), at_cycle)
        record = InvocationRecord(function_id, element_count, at_cycle)
        self.invocations.append(record)
        self.release_ownership(Owner.ACCELERATOR, at_cycle)
        return record

    def host_service(self, table: FunctionTable, at_cycle: int):
        """Decode the pending invocation. Returns (kind, element_count)."""
        self._check_owner(Owner.HOST, "service")
        if not self.flag_raised:
            raise FlagNotRaisedError(
                f"host_service at cycle {at_cycle} with the flag low"
            )
        lay = self.layout
        (function_id,) = _U64.unpack(
            self.memory[lay.function_id_offset:lay.function_id_offset + 8]
        )
        (element_count,) = _U64.unpack(
            self.memory[lay.arg_block_offset:lay.arg_block_offset + 8]
        )
        entry = table.lookup(function_id)
        for rec in reversed(self.invocations):
            if rec.serviced_at is None:
                rec.serviced_at = at_cycle
                break
        return entry.kind, element_count

    def lower_flag(self, at_cycle: int) -> None:
        """Host-side completion signal: zero the flag word."""
        self.sb_store(Owner.HOST, self.layout.flag_offset,
                      _U64.pack(0), at_cycle)
        for rec in reversed(self.invocations):
            if rec.flag_lowered_at is None:
                rec.flag_lowered_at = at_cycle
                break
