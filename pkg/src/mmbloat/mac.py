"""Base-station MAC: round-robin slot scheduling, DCI grants and link service.

The radio link is lossless from the transport's point of view (link-layer
retransmissions are abstracted away); packets leave a UE queue only by being
delivered or by being dropped by the queue discipline itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .aqm import QueuedPacket
from .channel import CapacityTrace
from .engine import Simulator, to_ticks

DEFAULT_SLOT = 100e-6
DEFAULT_AIR_DELAY = 0.001


@dataclass(frozen=True, slots=True)
class DciGrant:
    ue_id: Any
    slot_start: float
    tb_bits: int


@dataclass
class SlotConfig:
    slot_duration: float = DEFAULT_SLOT

    def __post_init__(self):
        if not self.slot_duration > 0:
            raise ValueError("slot_duration must be positive")


class UeContext:
    """Per-UE state held at the base station."""

    def __init__(self, ue_id: Any, queue, trace: CapacityTrace, active: bool = True):
        self.ue_id = ue_id
        self.queue = queue
        self.trace = trace
        self.active = active
        # SDU being segmented across grants, with bits still to send
        self.partial: Optional[QueuedPacket] = None
        self.partial_bits = 0
        self.delivered_bits = 0
        self.granted_bits = 0
        # bits carried over the air, counting segments of unfinished SDUs
        self.served_bits = 0
        # sojourn extremes of dequeued packets since the last reset
        self.min_sojourn = math.inf
        self.max_sojourn = 0.0

    @property
    def backlogged(self) -> bool:
        return self.partial is not None or len(self.queue) > 0

    def __repr__(self):
        return f"UeContext({self.ue_id!r}, active={self.active}, queued={len(self.queue)})"


class RoundRobinScheduler:
    """Whole-slot round robin over active, backlogged UEs (work conserving)."""

    def __init__(self, slot: SlotConfig | None = None, overhead: float = 0.0):
        self.slot = slot or SlotConfig()
        if not 0.0 <= overhead < 1.0:
            raise ValueError("overhead must be in [0, 1)")
        self.overhead = overhead
        self._last: Any = None

    def tb_bits(self, ue: UeContext, slot_start: float, share: float = 1.0) -> int:
        cap = ue.trace.capacity_at(slot_start) * (1.0 - self.overhead)
        return int(share * self.slot.slot_duration * cap)

    def allocate(self, ues: list[UeContext], slot_start: float) -> list[DciGrant]:
        eligible = [u for u in ues if u.active and u.backlogged]
        if not eligible:
            return []
        order = [u.ue_id for u in ues]
        start = 0
        if self._last in order:
            start = order.index(self._last) + 1
        n = len(ues)
        for k in range(n):
            ue = ues[(start + k) % n]
            if ue.active and ue.backlogged:
                self._last = ue.ue_id
                return [DciGrant(ue.ue_id, slot_start, self.tb_bits(ue, slot_start))]
        return []


def round_robin_allocate(ues: list[UeContext], slot_start: float,
                         scheduler: RoundRobinScheduler | None = None) -> list[DciGrant]:
    if scheduler is None:
        scheduler = RoundRobinScheduler()
    return scheduler.allocate(ues, slot_start)


def serve_slot(ue: UeContext, grant: DciGrant, now: float) -> list[QueuedPacket]:
    """Spend ``grant.tb_bits`` on the UE's queue and return delivered packets.

    Unused bits are discarded. An SDU larger than the whole grant is segmented
    and completes in a later slot; otherwise packets go whole.
    """
    if grant.ue_id != ue.ue_id:
        raise ValueError("grant addressed to a different UE")
    tb = grant.tb_bits
    bits = tb
    out: list[QueuedPacket] = []
    if ue.partial is not None:
        if ue.partial_bits <= bits:
            bits -= ue.partial_bits
            out.append(ue.partial)
            ue.partial = None
            ue.partial_bits = 0
        else:
            ue.partial_bits -= bits
            bits = 0
    q = ue.queue
    while bits > 0:
        head = q.peek()
        if head is None:
            break
        size = head.bytes * 8
        if bits < size <= tb:
            break
        pkt = q.dequeue(now)
        if pkt is None:
            break
        sj = now - pkt.enqueue_time
        if sj < ue.min_sojourn:
            ue.min_sojourn = sj
        if sj > ue.max_sojourn:
            ue.max_sojourn = sj
        size = pkt.bytes * 8
        if size <= bits:
            bits -= size
            out.append(pkt)
        else:
            ue.partial = pkt
            ue.partial_bits = size - bits
            bits = 0
    ue.granted_bits += tb
    ue.served_bits += tb - bits
    ue.delivered_bits += sum(p.bytes for p in out) * 8
    return out


class Cell:
    """Wires UEs, scheduler and simulator; ticks slots while anyone is backlogged."""

    def __init__(self, sim: Simulator, slot: SlotConfig | None = None,
                 air_delay: float = DEFAULT_AIR_DELAY, overhead: float = 0.0):
        self.sim = sim
        self.slot = slot or SlotConfig()
        self.scheduler = RoundRobinScheduler(self.slot, overhead)
        self.air_delay = air_delay
        self.ues: list[UeContext] = []
        self._by_id: dict[Any, UeContext] = {}
        self._slot_ticks = to_ticks(self.slot.slot_duration)
        self._tick_pending = False
        self.grant_observers: dict[Any, list[Callable[[DciGrant], None]]] = {}
        self.grant_log: list[tuple[float, Any, int]] = []
        self.deliver: Callable[[Any, list[QueuedPacket]], None] = lambda ue_id, pkts: None
        self.slots_served = 0

    def add_ue(self, ue: UeContext) -> UeContext:
        if ue.ue_id in self._by_id:
            raise ValueError(f"duplicate UE id {ue.ue_id!r}")
        self.ues.append(ue)
        self._by_id[ue.ue_id] = ue
        return ue

    def ue(self, ue_id: Any) -> UeContext:
        return self._by_id[ue_id]

    def observe_grants(self, ue_id: Any, fn: Callable[[DciGrant], None]) -> None:
        self.grant_observers.setdefault(ue_id, []).append(fn)

    def attach_ue(self, ue_id: Any) -> None:
        ue = self._by_id[ue_id]
        if ue.active:
            raise ValueError(f"UE {ue_id!r} already attached")
        ue.active = True
        self.kick()

    def detach_ue(self, ue_id: Any) -> None:
        ue = self._by_id[ue_id]
        if not ue.active:
            raise ValueError(f"UE {ue_id!r} already detached")
        ue.active = False

    def schedule_attach(self, ue_id: Any, t: float):
        return self.sim.schedule_at_ticks(to_ticks(t), self.attach_ue, ue_id)

    def schedule_detach(self, ue_id: Any, t: float):
        return self.sim.schedule_at_ticks(to_ticks(t), self.detach_ue, ue_id)

    def enqueue(self, ue_id: Any, pkts: Iterable[QueuedPacket]) -> int:
        ue = self._by_id[ue_id]
        now = self.sim.now
        accepted = 0
        enq = ue.queue.enqueue
        for p in pkts:
            if enq(p, now):
                accepted += 1
        if accepted and ue.active:
            self.kick()
        return accepted

    def kick(self) -> None:
        if self._tick_pending:
            return
        st = self._slot_ticks
        now = self.sim.now_ticks
        nxt = -(-now // st) * st
        self._tick_pending = True
        self.sim.schedule_at_ticks(nxt, self._on_slot)

    def _on_slot(self) -> None:
        self._tick_pending = False
        sim = self.sim
        now = sim.now
        grants = self.scheduler.allocate(self.ues, now)
        self.slots_served += 1
        for g in grants:
            self.grant_log.append((now, g.ue_id, g.tb_bits))
            for fn in self.grant_observers.get(g.ue_id, ()):
                fn(g)
            pkts = serve_slot(self._by_id[g.ue_id], g, now)
            if pkts:
                sim.schedule(self.air_delay, self.deliver, g.ue_id, pkts)
        if any(u.active and u.backlogged for u in self.ues):
            self._tick_pending = True
            sim.schedule_at_ticks(sim.now_ticks + self._slot_ticks, self._on_slot)
