"""Deterministic discrete-event core.

Simulated time is held as integer nanosecond ticks so that ordering and
equality are exact; callers work in float seconds at the API boundary.
"""
from __future__ import annotations

import heapq
from typing import Any, Callable

TICKS_PER_SECOND = 1_000_000_000


def to_ticks(seconds: float) -> int:
    return int(round(seconds * TICKS_PER_SECOND))


def to_seconds(ticks: int) -> float:
    return ticks / TICKS_PER_SECOND


class SimulationError(RuntimeError):
    pass


class EventHandle:
    """Returned by :meth:`Simulator.schedule`; cancel() tombstones the event."""

    __slots__ = ("fire_tick", "sequence", "action", "args", "cancelled")

    def __init__(self, fire_tick: int, sequence: int, action: Callable, args: tuple):
        self.fire_tick = fire_tick
        self.sequence = sequence
        self.action = action
        self.args = args
        self.cancelled = False

    @property
    def fire_time(self) -> float:
        return to_seconds(self.fire_tick)

    def cancel(self) -> None:
        self.cancelled = True

    def __lt__(self, other: "EventHandle") -> bool:
        if self.fire_tick != other.fire_tick:
            return self.fire_tick < other.fire_tick
        return self.sequence < other.sequence


class Simulator:
    """Single-threaded event loop with a (fire_time, sequence) ordered queue."""

    def __init__(self) -> None:
        self._heap: list[tuple[int, int, EventHandle]] = []
        self._seq = 0
        self._now = 0
        self.dispatched = 0
        self.terminated = False

    @property
    def now(self) -> float:
        return self._now / TICKS_PER_SECOND

    @property
    def now_ticks(self) -> int:
        return self._now

    def schedule(self, delay: float, action: Callable[..., Any], *args: Any) -> EventHandle:
        if delay < 0:
            raise SimulationError(f"negative delay {delay!r}")
        return self.schedule_at_ticks(self._now + to_ticks(delay), action, *args)

    def schedule_at_ticks(self, tick: int, action: Callable[..., Any], *args: Any) -> EventHandle:
        if self.terminated:
            raise SimulationError("simulation already terminated")
        if tick < self._now:
            raise SimulationError(f"cannot schedule in the past ({tick} < {self._now})")
        handle = EventHandle(tick, self._seq, action, args)
        heapq.heappush(self._heap, (tick, self._seq, handle))
        self._seq += 1
        return handle

    def pending(self) -> int:
        return sum(1 for _, _, h in self._heap if not h.cancelled)

    def run_until(self, t_end: float) -> float:
        end = to_ticks(t_end)
        if end < self._now:
            raise SimulationError(f"run_until({t_end}) is before now ({self.now})")
        heap = self._heap
        pop = heapq.heappop
        while heap and heap[0][0] <= end:
            tick, _, handle = pop(heap)
            if handle.cancelled:
                continue
            self._now = tick
            self.dispatched += 1
            handle.action(*handle.args)
        self._now = end
        return self.now

    def terminate(self) -> None:
        self.terminated = True
        self._heap.clear()
