"""Post-run measurements used by the demos and the acceptance checks.

Everything here reads a finished :class:`MetricsLog` or records receiver-window
advertisements through the ``Flow.rwnd_hooks`` observer list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .metrics import MetricsLog


def rtt_percentile(log: MetricsLog, flow_id: str, q: float = 95.0, sampled: bool = True) -> float:
    """RTT percentile; ``sampled`` weights by time (1 value per sampling tick) instead of per ACK."""
    if sampled:
        v = log.sampled_rtt(flow_id)
    else:
        v = log.flows[flow_id].rtt_values
    return float(np.percentile(v, q)) if v.size else math.nan


def empty_buffer_rtt(log: MetricsLog, flow_id: str) -> float:
    v = log.flows[flow_id].rtt_values
    return float(v.min()) if v.size else math.nan


def peak_rtt(log: MetricsLog, flow_id: str, t0: float = -math.inf, t1: float = math.inf) -> float:
    return log.flows[flow_id].rtt_stats(t0, t1)["max"]


def steady_min_sojourn(log: MetricsLog, ue_id: str, interval: float = 0.1,
                       warmup: float = 1.5, settle: float = 0.5) -> float:
    """Worst per-interval minimum sojourn outside blockage.

    Each ``interval`` bucket contributes the smallest sojourn of any packet dequeued
    in it. Buckets overlapping ``[start, end + settle]`` of a blocked stretch, or the
    first ``warmup`` seconds, are excluded. Returns the largest bucket minimum, i.e.
    the bound holds in every steady-state interval.
    """
    t = log.queue_array(ue_id, "time_s")
    mins = log.queue_array(ue_id, "min_sojourn_s")
    keep = (t > warmup) & ~np.isnan(mins)
    for start, end in log.blocked.get(ue_id, []):
        keep &= ~((t >= start) & (t <= end + settle))
    if not keep.any():
        return math.nan
    buckets = np.floor(t[keep] / interval).astype(np.int64)
    vals = mins[keep]
    worst = 0.0
    for b in np.unique(buckets):
        worst = max(worst, float(vals[buckets == b].min()))
    return worst


def crossing_time(log: MetricsLog, flow_id: str, column: str, threshold: float) -> float:
    """First sampling instant at which ``column`` reaches ``threshold`` (nan if never)."""
    t = log.flow_array(flow_id, column="time_s")
    v = log.flow_array(flow_id, column)
    hit = np.nonzero(v >= threshold)[0]
    return float(t[hit[0]]) if hit.size else math.nan


@dataclass
class RwndRecorder:
    """Keeps every advertisement of one flow (time, rtt_min, rtt, bw_alloc, bw_total, adv)."""

    flow_id: str
    rows: list[tuple] = field(default_factory=list)

    def __call__(self, now, rtt_min, rtt, bw_alloc, bw_total, advertised, in_region) -> None:
        self.rows.append((now, rtt_min, rtt, bw_alloc, bw_total, advertised))

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, 6)


def attach_recorders(simulation) -> dict[str, RwndRecorder]:
    """Hook a recorder onto every flow that has a dynamic receive-window controller."""
    recs = {}
    for fid, flow in simulation.flows.items():
        if flow.rwnd is not None:
            rec = RwndRecorder(fid)
            flow.rwnd_hooks.append(rec)
            recs[fid] = rec
    return recs


def bound_violations(rec: RwndRecorder, mss: int, slack: float = 1.0) -> int:
    """Advertisements outside [max(rtt_min*bw_alloc/8, mss), rtt_min*bw_total/8]."""
    a = rec.array()
    if a.size == 0:
        return 0
    rtt_min, bw_alloc, bw_total, adv = a[:, 1], a[:, 3], a[:, 4], a[:, 5]
    lower = np.maximum(rtt_min * bw_alloc / 8.0, mss)
    upper = np.maximum(rtt_min * bw_total / 8.0, mss)
    return int(np.count_nonzero((adv < lower - slack) | (adv > upper + slack)))


@dataclass
class DepartureResponse:
    flow_id: str
    departure: float
    remaining: int
    rtt_before: float
    time_to_upper: Optional[float]
    settle_median_ratio: float
    settle_in_band: float

    def reaches_upper(self, rtts: float = 2.0) -> bool:
        return self.time_to_upper is not None and self.time_to_upper <= rtts * self.rtt_before

    def settled(self, band: float = 0.10, share: float = 0.5) -> bool:
        return abs(self.settle_median_ratio - 1.0) <= band and self.settle_in_band >= share


def departure_response(rec: RwndRecorder, departure: float, remaining: int, until: float,
                       settle: float = 0.3, band: float = 0.10,
                       slack: float = 1.0) -> Optional[DepartureResponse]:
    """How one flow's advertisement reacts when another UE leaves at ``departure``.

    ``time_to_upper`` is the delay until the first advertisement at the upper bound.
    Settling is judged on ``[departure + settle, until)`` against the new lower bound
    rtt_min * bw_total / remaining / 8: the median ratio and the time share within
    ``band`` of it.
    """
    a = rec.array()
    if a.size == 0 or a[-1, 0] <= departure or a[0, 0] >= departure:
        return None
    t, rtt_min, rtt, bw_total, adv = a[:, 0], a[:, 1], a[:, 2], a[:, 4], a[:, 5]
    i = int(np.searchsorted(t, departure))
    rtt_before = float(rtt[i - 1])
    after = t >= departure
    hit = np.nonzero(after & (adv >= rtt_min * bw_total / 8.0 - slack))[0]
    to_upper = float(t[hit[0]] - departure) if hit.size else None
    m = (t >= departure + settle) & (t < until)
    if not m.any():
        return DepartureResponse(rec.flow_id, departure, remaining, rtt_before, to_upper,
                                 math.nan, math.nan)
    target = rtt_min[m] * bw_total[m] / remaining / 8.0
    ratio = float(np.median(adv[m] / target))
    inside = np.abs(adv[m] - target) <= band * target
    # each advertisement holds until the next one
    tt = t[m]
    dt = np.diff(np.append(tt, until))
    share = float(np.sum(dt * inside) / np.sum(dt)) if np.sum(dt) > 0 else math.nan
    return DepartureResponse(rec.flow_id, departure, remaining, rtt_before, to_upper, ratio,
                             share)


def window_delivery_spread(samples: np.ndarray) -> float:
    """Max over rows of (max - min) across columns; rows are windows, columns UEs."""
    if samples.size == 0:
        return 0.0
    return float(np.max(samples.max(axis=1) - samples.min(axis=1)))
