"""Base-station queue disciplines: Drop-tail FIFO and CoDel.

Both queues share one surface: ``enqueue(pkt, now) -> bool``,
``dequeue(now) -> QueuedPacket | None``, ``peek()``, ``len()`` and a
``byte_count``. CoDel drops happen inside ``dequeue``; every drop is counted
and reported through the optional ``on_drop(pkt, now, reason)`` callback.
"""
from __future__ import annotations

import math
from collections import deque
from typing import Any, Callable, Optional

DEFAULT_CAPACITY_PACKETS = 50_000
CODEL_TARGET = 0.005
CODEL_INTERVAL = 0.100
DEFAULT_MAXPACKET = 1500

ACCEPTED = True
DROPPED = False


class QueuedPacket:
    __slots__ = ("bytes", "enqueue_time", "flow_id", "seq", "payload")

    def __init__(self, nbytes: int, flow_id: Any = 0, seq: int = 0,
                 enqueue_time: float = 0.0, payload: Any = None):
        self.bytes = nbytes
        self.flow_id = flow_id
        self.seq = seq
        self.enqueue_time = enqueue_time
        self.payload = payload

    def __repr__(self):
        return (f"QueuedPacket(bytes={self.bytes}, flow_id={self.flow_id!r}, "
                f"seq={self.seq}, enqueue_time={self.enqueue_time})")


DropCallback = Callable[[QueuedPacket, float, str], None]


class _FifoBase:
    kind = "fifo"

    def __init__(self, capacity_packets: int = DEFAULT_CAPACITY_PACKETS,
                 on_drop: Optional[DropCallback] = None):
        if capacity_packets < 1:
            raise ValueError("capacity_packets must be >= 1")
        self.capacity_packets = capacity_packets
        self.buffer: deque[QueuedPacket] = deque()
        self.byte_count = 0
        self.drops = 0
        self.tail_drops = 0
        self.on_drop = on_drop
        # sojourn of the last packet handed to the link
        self.last_sojourn = 0.0

    def __len__(self) -> int:
        return len(self.buffer)

    def peek(self) -> Optional[QueuedPacket]:
        return self.buffer[0] if self.buffer else None

    def head_sojourn(self, now: float) -> float:
        return now - self.buffer[0].enqueue_time if self.buffer else 0.0

    def _drop(self, pkt: QueuedPacket, now: float, reason: str) -> None:
        self.drops += 1
        if self.on_drop is not None:
            self.on_drop(pkt, now, reason)

    def enqueue(self, pkt: QueuedPacket, now: float) -> bool:
        if len(self.buffer) >= self.capacity_packets:
            self.tail_drops += 1
            self._drop(pkt, now, "tail")
            return DROPPED
        pkt.enqueue_time = now
        self.buffer.append(pkt)
        self.byte_count += pkt.bytes
        return ACCEPTED

    def _pop(self) -> Optional[QueuedPacket]:
        if not self.buffer:
            return None
        pkt = self.buffer.popleft()
        self.byte_count -= pkt.bytes
        return pkt


class DropTailQueue(_FifoBase):
    kind = "droptail"

    def dequeue(self, now: float) -> Optional[QueuedPacket]:
        pkt = self._pop()
        if pkt is not None:
            self.last_sojourn = now - pkt.enqueue_time
        return pkt


class CoDelQueue(_FifoBase):
    """CoDel controlled-delay queue (Nichols/Jacobson control law).

    State follows the reference pseudocode: ``first_above_time`` of 0 means
    unset, ``count``/``lastcount`` drive the interval/sqrt(count) schedule.
    """

    kind = "codel"

    def __init__(self, capacity_packets: int = DEFAULT_CAPACITY_PACKETS,
                 target: float = CODEL_TARGET, interval: float = CODEL_INTERVAL,
                 maxpacket: int = DEFAULT_MAXPACKET,
                 on_drop: Optional[DropCallback] = None):
        super().__init__(capacity_packets, on_drop)
        if not (target > 0 and interval > 0):
            raise ValueError("target and interval must be positive")
        self.target = target
        self.interval = interval
        self.maxpacket = maxpacket
        self.first_above_time = 0.0
        self.dropping = False
        self.drop_count = 0
        self.lastcount = 0
        self.drop_next = 0.0
        self.codel_drops = 0

    def control_law(self, t: float, count: int) -> float:
        return t + self.interval / math.sqrt(count)

    def _dodequeue(self, now: float) -> tuple[Optional[QueuedPacket], bool]:
        pkt = self._pop()
        if pkt is None:
            self.first_above_time = 0.0
            return None, False
        sojourn = now - pkt.enqueue_time
        ok_to_drop = False
        if sojourn < self.target or self.byte_count <= self.maxpacket:
            self.first_above_time = 0.0
        elif self.first_above_time == 0.0:
            self.first_above_time = now + self.interval
        elif now >= self.first_above_time:
            ok_to_drop = True
        return pkt, ok_to_drop

    def _codel_drop(self, pkt: QueuedPacket, now: float) -> None:
        self.codel_drops += 1
        self._drop(pkt, now, "codel")

    def dequeue(self, now: float) -> Optional[QueuedPacket]:
        pkt, ok_to_drop = self._dodequeue(now)
        if pkt is None:
            self.dropping = False
            return None
        if self.dropping:
            if not ok_to_drop:
                self.dropping = False
            while self.dropping and now >= self.drop_next:
                self._codel_drop(pkt, now)
                self.drop_count += 1
                pkt, ok_to_drop = self._dodequeue(now)
                if not ok_to_drop:
                    self.dropping = False
                else:
                    self.drop_next = self.control_law(self.drop_next, self.drop_count)
        elif ok_to_drop:
            self._codel_drop(pkt, now)
            pkt, _ = self._dodequeue(now)
            self.dropping = True
            delta = self.drop_count - self.lastcount
            self.drop_count = 1
            if delta > 1 and now - self.drop_next < 16 * self.interval:
                self.drop_count = delta
            self.drop_next = self.control_law(now, self.drop_count)
            self.lastcount = self.drop_count
        if pkt is not None:
            self.last_sojourn = now - pkt.enqueue_time
        return pkt


def droptail_enqueue(q: DropTailQueue, p: QueuedPacket, now: float = 0.0) -> bool:
    return q.enqueue(p, now)


def codel_enqueue(q: CoDelQueue, p: QueuedPacket, now: float) -> bool:
    return q.enqueue(p, now)


def codel_dequeue(q: CoDelQueue, now: float) -> Optional[QueuedPacket]:
    return q.dequeue(now)


def make_queue(kind: str, capacity_packets: int = DEFAULT_CAPACITY_PACKETS,
               target: float = CODEL_TARGET, interval: float = CODEL_INTERVAL,
               on_drop: Optional[DropCallback] = None):
    if kind == "droptail":
        return DropTailQueue(capacity_packets, on_drop=on_drop)
    if kind == "codel":
        return CoDelQueue(capacity_packets, target, interval, on_drop=on_drop)
    raise ValueError(f"unknown queue discipline {kind!r}")
