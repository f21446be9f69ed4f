"""Parametric capacity traces for intermittent radio links.

Blockages are modelled as attenuation ramps in the dB domain: capacity falls
from its unblocked value along a linear-in-dB ramp, holds at full depth, and
recovers along a second ramp. Capacity maps from attenuation as
``base * 10 ** (-A / 10)``.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

DEFAULT_FLOOR_BPS = 1e6

HUMAN_RAMP_DOWN = 0.2
HUMAN_HOLD = 0.3
HUMAN_RAMP_UP = 0.2
HUMAN_DEPTH_DB = 25.0
BUILDING_RAMP = 0.05


@dataclass(frozen=True)
class BlockageEvent:
    start: float
    ramp_down: float
    hold: float
    ramp_up: float
    depth_db: float

    def __post_init__(self):
        for name in ("start", "ramp_down", "hold", "ramp_up", "depth_db"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"BlockageEvent.{name} must be >= 0, got {value!r}")

    @property
    def end(self) -> float:
        return self.start + self.ramp_down + self.hold + self.ramp_up

    def attenuation_db(self, t: float) -> float:
        """Attenuation (dB) contributed by this event at time ``t``."""
        if t < self.start:
            return 0.0
        dt = t - self.start
        if dt < self.ramp_down:
            return self.depth_db * dt / self.ramp_down
        dt -= self.ramp_down
        if dt < self.hold:
            return self.depth_db
        dt -= self.hold
        if dt < self.ramp_up:
            return self.depth_db * (1.0 - dt / self.ramp_up)
        return 0.0


@dataclass
class CapacityTrace:
    base_capacity: float
    events: list[BlockageEvent] = field(default_factory=list)
    nlos_capacity: Optional[float] = None
    floor: float = DEFAULT_FLOOR_BPS
    breakpoints: list[tuple[float, float]] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.base_capacity > 0:
            raise ValueError("base_capacity must be positive")
        self.events = sorted(self.events, key=lambda e: e.start)
        for prev, nxt in zip(self.events, self.events[1:]):
            if nxt.start < prev.end:
                raise ValueError(
                    f"blockage events overlap: [{prev.start}, {prev.end}) and start {nxt.start}")
        self.floor = min(self.floor, self.base_capacity)
        self.breakpoints = self._build_breakpoints()
        self._bp_times = [t for t, _ in self.breakpoints]
        self._memo_t = -1.0
        self._memo_c = self.base_capacity

    def _build_breakpoints(self) -> list[tuple[float, float]]:
        # (time, attenuation dB); linear interpolation between consecutive points
        pts: list[tuple[float, float]] = [(0.0, 0.0)]
        for ev in self.events:
            t = ev.start
            pts.append((t, 0.0))
            t += ev.ramp_down
            pts.append((t, ev.depth_db))
            if math.isinf(ev.hold):
                break
            t += ev.hold
            pts.append((t, ev.depth_db))
            t += ev.ramp_up
            pts.append((t, 0.0))
        # zero-length ramps become steps: keep the first and last value at a time
        out: list[tuple[float, float]] = []
        for p in pts:
            if out and p == out[-1]:
                continue
            if len(out) >= 2 and p[0] == out[-1][0] == out[-2][0]:
                out[-1] = p
            else:
                out.append(p)
        return out

    def attenuation_at(self, t: float) -> float:
        times = self._bp_times
        i = bisect.bisect_right(times, t) - 1
        if i < 0:
            return 0.0
        t0, a0 = self.breakpoints[i]
        if i + 1 >= len(times):
            return a0
        t1, a1 = self.breakpoints[i + 1]
        if a0 == a1:
            return a0
        return a0 + (a1 - a0) * (t - t0) / (t1 - t0)

    def capacity_at(self, t: float) -> float:
        if t == self._memo_t:
            return self._memo_c
        if t < 0:
            raise ValueError("t must be >= 0")
        att = self.attenuation_at(t)
        if att == 0.0:
            c = self.base_capacity
        else:
            c = max(self.floor, self.base_capacity * 10.0 ** (-att / 10.0))
        self._memo_t = t
        self._memo_c = c
        return c

    def blocked_intervals(self) -> list[tuple[float, float]]:
        return [(e.start, e.end) for e in self.events]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "capacity_bps"])
            for t, _ in self.breakpoints:
                w.writerow([f"{t:.9f}", f"{self.capacity_at(t):.3f}"])


def capacity_at(trace: CapacityTrace, t: float) -> float:
    return trace.capacity_at(t)


def constant_trace(base: float) -> CapacityTrace:
    return CapacityTrace(base_capacity=base)


def human_blockage_trace(base: float, event_starts: Iterable[float], *,
                         ramp_down: float = HUMAN_RAMP_DOWN, hold: float = HUMAN_HOLD,
                         ramp_up: float = HUMAN_RAMP_UP,
                         depth_db: float = HUMAN_DEPTH_DB) -> CapacityTrace:
    """Slow fade, short outage: one event per start time."""
    if not base > 0:
        raise ValueError("base must be positive")
    events = [BlockageEvent(s, ramp_down, hold, ramp_up, depth_db) for s in event_starts]
    return CapacityTrace(base_capacity=base, events=events)


def building_blockage_trace(base_los: float, base_nlos: float, start: float, duration: float,
                            *, ramp: float = BUILDING_RAMP) -> CapacityTrace:
    """LoS -> NLoS -> LoS with a sharp transition and ``duration`` seconds at NLoS."""
    if not base_los > base_nlos > 0:
        raise ValueError("require base_los > base_nlos > 0")
    if not duration > 0:
        raise ValueError("duration must be positive")
    depth = 10.0 * math.log10(base_los / base_nlos)
    ev = BlockageEvent(start, ramp, duration, ramp, depth)
    return CapacityTrace(base_capacity=base_los, events=[ev], nlos_capacity=base_nlos,
                         floor=min(DEFAULT_FLOOR_BPS, base_nlos))


def multi_building_trace(base_los: float, base_nlos: float,
                         windows: Sequence[tuple[float, float]], *,
                         ramp: float = BUILDING_RAMP) -> CapacityTrace:
    """Several LoS-NLoS-LoS transitions given as (start, duration) pairs."""
    if not base_los > base_nlos > 0:
        raise ValueError("require base_los > base_nlos > 0")
    depth = 10.0 * math.log10(base_los / base_nlos)
    events = []
    for start, duration in windows:
        if not duration > 0:
            raise ValueError("duration must be positive")
        events.append(BlockageEvent(start, ramp, duration, ramp, depth))
    return CapacityTrace(base_capacity=base_los, events=events, nlos_capacity=base_nlos,
                         floor=min(DEFAULT_FLOOR_BPS, base_nlos))
