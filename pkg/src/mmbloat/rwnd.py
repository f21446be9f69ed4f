"""Receiver-side advertised-window controllers.

``DRW`` advertises a bandwidth-delay product built from the minimum observed
RTT and a reference bandwidth: the full link data rate while the recent RTT
sits inside ``[rtt_min, rtt_min + delta]``, the DCI-derived allocated rate
otherwise. ``ABRWDA`` always uses the full rate; ``Static`` is a constant.
"""
from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .engine import TICKS_PER_SECOND, to_ticks
from .mac import DciGrant

DEFAULT_DELTA = 0.010
DEFAULT_GRANT_WINDOW = 0.100
DEFAULT_SMOOTHING = 5
DEFAULT_RWND_CAP = 1 << 30

STATIC = "static"
ABRWDA = "abrwda"
DRW = "drw"
POLICIES = (STATIC, ABRWDA, DRW)


@dataclass(frozen=True)
class RttSample:
    value: float
    taken_at: float
    method: str = "timestamp-echo"

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"RTT sample must be positive, got {self.value!r}")


def bdp_bytes(bandwidth_bps: float, rtt: float) -> int:
    """Bandwidth-delay product in bytes, computed on integer bits and nanoseconds."""
    return int(round(bandwidth_bps)) * to_ticks(rtt) // (8 * TICKS_PER_SECOND)


# (now, rtt_min, smoothed_rtt, bw_alloc, bw_total, advertised, in_region)
Observer = Callable[[float, float, float, float, float, int, bool], None]


class RwndState:
    """Advertised-window controller attached 1:1 to a TCP receiver."""

    def __init__(self, policy: str = DRW, *, bw_total: Union[float, Callable[[float], float]] = 0.0,
                 delta: float = DEFAULT_DELTA, grant_window: float = DEFAULT_GRANT_WINDOW,
                 mss: int = 1400, static_window: int = 64 * 1024,
                 cap: int = DEFAULT_RWND_CAP, smoothing: int = DEFAULT_SMOOTHING):
        if policy not in POLICIES:
            raise ValueError(f"unknown rwnd policy {policy!r}")
        if not grant_window > 0:
            raise ValueError("grant_window must be positive")
        self.policy = policy
        self._bw_total = bw_total if callable(bw_total) else (lambda now, v=float(bw_total): v)
        self.delta = delta
        self.grant_window = grant_window
        self.mss = mss
        self.static_window = static_window
        self.cap = cap
        self.rtt_min: Optional[float] = None
        self.last_rtt: Optional[float] = None
        self._recent: deque[float] = deque(maxlen=max(1, smoothing))
        self._smoothed: Optional[float] = None
        self._grants: deque[tuple[float, int]] = deque()
        self._grant_bits = 0
        self.advertised = static_window if policy == STATIC else min(max(static_window, mss), cap)
        self.in_region = True
        self.last_bw_total = 0.0
        self.last_bw_alloc = 0.0
        self.observer: Optional[Observer] = None

    # -- inputs -------------------------------------------------------------
    def update_rtt_min(self, sample: RttSample | float, now: float | None = None) -> None:
        value = sample.value if isinstance(sample, RttSample) else float(sample)
        if not value > 0:
            raise ValueError(f"RTT sample must be positive, got {value!r}")
        if self.rtt_min is None or value < self.rtt_min:
            self.rtt_min = value
        self.last_rtt = value
        self._recent.append(value)
        self._smoothed = None

    def on_rtt_sample(self, value: float, now: float) -> None:
        self.update_rtt_min(value, now)

    def observe_grant(self, g: DciGrant) -> None:
        self._grants.append((g.slot_start, g.tb_bits))
        self._grant_bits += g.tb_bits
        self._evict(g.slot_start)

    def _evict(self, now: float) -> None:
        horizon = now - self.grant_window
        grants = self._grants
        while grants and grants[0][0] <= horizon:
            self._grant_bits -= grants.popleft()[1]

    # -- estimates ----------------------------------------------------------
    def bw_total(self, now: float) -> float:
        return self._bw_total(now)

    def bw_alloc(self, now: float) -> float:
        self._evict(now)
        return min(self._grant_bits / self.grant_window, self._bw_total(now))

    def smoothed_rtt(self) -> Optional[float]:
        if self._smoothed is None and self._recent:
            self._smoothed = float(statistics.median(self._recent))
        return self._smoothed

    def compute_rw(self, now: float) -> int:
        if self.policy == STATIC or self.rtt_min is None:
            return self.static_window if self.policy == STATIC else self.advertised
        total = self._bw_total(now)
        self._evict(now)
        alloc = min(self._grant_bits / self.grant_window, total)
        rtt = self.smoothed_rtt()
        self.last_bw_total = total
        self.last_bw_alloc = alloc
        if self.policy == ABRWDA:
            self.in_region = True
            ref = total
        else:
            self.in_region = rtt <= self.rtt_min + self.delta
            ref = total if self.in_region else alloc
        return min(max(bdp_bytes(ref, self.rtt_min), self.mss), self.cap)

    def advertise(self, now: float) -> int:
        """Window placed in the next outgoing ACK."""
        self.advertised = self.compute_rw(now)
        if self.observer is not None and self.rtt_min is not None:
            self.observer(now, self.rtt_min, self.smoothed_rtt(), self.last_bw_alloc,
                          self.last_bw_total, self.advertised, self.in_region)
        return self.advertised


def update_rtt_min(st: RwndState, sample: RttSample) -> RwndState:
    st.update_rtt_min(sample)
    return st


def observe_grant(st: RwndState, g: DciGrant) -> RwndState:
    st.observe_grant(g)
    return st


def compute_rw(st: RwndState, now: float = 0.0) -> int:
    return st.compute_rw(now)


def advertised_window_hook(st: RwndState, now: float) -> int:
    return st.advertise(now)
