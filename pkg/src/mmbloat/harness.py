"""Topology wiring and scenario execution.

cellular: sender -> core pipe -> per-UE base-station queue -> round-robin MAC
-> air delay -> receiver; ACKs return over air + core delay uncongested.
pipe: sender -> fixed one-way delay -> receiver (no bottleneck).
"""
from __future__ import annotations

import logging
import random
from collections import deque
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .aqm import make_queue
from .config import ScenarioConfig
from .engine import Simulator, to_ticks
from .mac import Cell, SlotConfig, UeContext
from .metrics import FlowRecord, MetricsLog, emit_csv
from .rwnd import STATIC, RwndState
from .transport import TcpReceiver, TcpSender

log = logging.getLogger(__name__)


class Flow:
    def __init__(self, flow_id: str, ue_id: str, kind: str, start: float,
                 size: Optional[int]):
        self.flow_id = flow_id
        self.ue_id = ue_id
        self.kind = kind
        self.start = start
        self.size = size
        self.sender: TcpSender = None  # type: ignore[assignment]
        self.receiver: TcpReceiver = None  # type: ignore[assignment]
        self.rwnd: Optional[RwndState] = None
        self.started = False
        self.end: Optional[float] = None
        self.goodput_hist: deque[int] = deque()
        self.latest_rwnd: Optional[tuple] = None
        self.rwnd_hooks: list[Callable[..., None]] = []

    @property
    def active(self) -> bool:
        return self.started and self.end is None

    def _on_advertise(self, now, rtt_min, rtt, bw_alloc, bw_total, advertised, in_region):
        self.latest_rwnd = (now, self.flow_id, rtt_min, rtt, bw_alloc, bw_total, advertised,
                            in_region)
        for hook in self.rwnd_hooks:
            hook(now, rtt_min, rtt, bw_alloc, bw_total, advertised, in_region)


class Simulation:
    """One scenario instance; build on construction, execute with :meth:`run`."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg.validate()
        self.sim = Simulator()
        self.log = MetricsLog(cfg.name, cfg.to_dict())
        self.cell = Cell(self.sim, SlotConfig(cfg.slot_duration), cfg.air_delay, cfg.overhead)
        self.cell.deliver = self._deliver
        self.flows: dict[str, Flow] = {}
        self.ue_specs = {u.id: u for u in cfg.ues}
        self.traces = {}
        self._goodput_depth = max(1, int(round(0.1 / cfg.sample_interval)))
        self._build_ues()
        self._build_flows()

    # -- construction -------------------------------------------------------
    def _build_ues(self) -> None:
        cfg = self.cfg
        for spec in cfg.ues:
            trace = spec.trace.build()
            self.traces[spec.id] = trace
            self.log.blocked[spec.id] = trace.blocked_intervals()
            queue = make_queue(spec.queue, cfg.queue_capacity, cfg.codel_target,
                               cfg.codel_interval, on_drop=self._drop_logger(spec.id))
            ue = UeContext(spec.id, queue, trace, active=spec.attach <= 0)
            self.cell.add_ue(ue)
            if spec.attach > 0:
                self.cell.schedule_attach(spec.id, spec.attach)
            if spec.detach is not None and spec.detach < cfg.duration:
                self.cell.schedule_detach(spec.id, spec.detach)
                self.sim.schedule_at_ticks(to_ticks(spec.detach), self._stop_ue_flows, spec.id)
        if cfg.log_grants:
            self.log.grants = self.cell.grant_log
        else:
            self.cell.grant_log = _NullList()

    def _drop_logger(self, ue_id: str):
        drops = self.log.drops

        def on_drop(pkt, now, reason):
            drops.append((now, ue_id, pkt.flow_id, pkt.seq, reason))
        return on_drop

    def _bw_total_fn(self, ue_id: str) -> Callable[[float], float]:
        trace = self.traces[ue_id]
        scale = 1.0 - self.cfg.overhead
        if self.cfg.bw_total_source == "nominal":
            nominal = trace.base_capacity * scale
            return lambda now: nominal
        return lambda now: trace.capacity_at(now) * scale

    def _build_flows(self) -> None:
        cfg = self.cfg
        specs = [(f"f{i}", fs.ue, fs.type, fs.start, fs.size) for i, fs in enumerate(cfg.flows)]
        rng = random.Random(cfg.seed)
        n = 0
        for sf in cfg.short_flows:
            until = sf.until if sf.until is not None else cfg.duration
            t = sf.first
            while True:
                t += rng.expovariate(1.0 / sf.mean_interarrival)
                if t >= until:
                    break
                specs.append((f"s{n}", sf.ue, "short", round(t, 6), sf.size))
                n += 1
        for fid, ue_id, kind, start, size in specs:
            spec = self.ue_specs[ue_id]
            start = max(start, spec.attach)
            flow = Flow(fid, ue_id, kind, start, size if kind == "short" else None)
            self._wire_flow(flow, spec)
            self.flows[fid] = flow
            if start < cfg.duration and (spec.detach is None or start < spec.detach):
                self.sim.schedule_at_ticks(to_ticks(start), self._start_flow, flow)

    def _wire_flow(self, flow: Flow, spec) -> None:
        cfg = self.cfg
        if spec.rwnd == STATIC:
            window = cfg.static_rwnd
        else:
            rw = RwndState(spec.rwnd, bw_total=self._bw_total_fn(spec.id), delta=cfg.delta,
                           grant_window=cfg.grant_window, mss=cfg.mss,
                           static_window=cfg.static_rwnd, cap=cfg.rwnd_cap,
                           smoothing=cfg.rtt_smoothing)
            rw.observer = flow._on_advertise
            self.cell.observe_grants(spec.id, rw.observe_grant)
            flow.rwnd = rw
            window = rw
        flow.receiver = TcpReceiver(flow.flow_id, window)
        ssthresh = cfg.initial_ssthresh if cfg.initial_ssthresh is not None else float("inf")
        flow.sender = TcpSender(self.sim, flow.flow_id, self._transmitter(flow),
                                controller=cfg.controller, mss=cfg.mss, size=flow.size,
                                initial_cwnd=cfg.initial_cwnd, initial_ssthresh=ssthresh,
                                initial_rwnd=cfg.static_rwnd if spec.rwnd == STATIC
                                else min(cfg.static_rwnd, cfg.rwnd_cap),
                                gso=cfg.gso, min_rto=cfg.min_rto)
        flow.sender.on_complete = lambda s, f=flow: self._finish(f, s.completed_at)

    def _transmitter(self, flow: Flow):
        sim = self.sim
        delay = self.cfg.core_one_way_delay
        if self.cfg.topology == "pipe":
            return lambda segs: sim.schedule(delay, self._pipe_deliver, flow, segs)
        enqueue = self.cell.enqueue
        ue_id = flow.ue_id
        return lambda segs: sim.schedule(delay, enqueue, ue_id, segs)

    # -- runtime ------------------------------------------------------------
    def _start_flow(self, flow: Flow) -> None:
        flow.started = True
        flow.sender.start()

    def _finish(self, flow: Flow, t: float) -> None:
        if flow.end is None:
            flow.end = t

    def _stop_ue_flows(self, ue_id: str) -> None:
        now = self.sim.now
        for flow in self.flows.values():
            if flow.ue_id == ue_id and flow.end is None:
                flow.sender.stop()
                flow.end = now if flow.started else flow.start

    def _deliver(self, ue_id: str, pkts: list) -> None:
        now = self.sim.now
        flows = self.flows
        batches: dict[str, list] = {}
        for p in pkts:
            flow = flows[p.flow_id]
            ack = flow.receiver.receiver_on_segment(p, now)
            b = batches.get(p.flow_id)
            if b is None:
                batches[p.flow_id] = [ack]
            else:
                b.append(ack)
        back = self.cfg.air_delay + self.cfg.core_one_way_delay
        for fid, acks in batches.items():
            self.sim.schedule(back, flows[fid].sender.on_acks, acks)

    def _pipe_deliver(self, flow: Flow, segs: list) -> None:
        now = self.sim.now
        on_seg = flow.receiver.receiver_on_segment
        acks = [on_seg(s, now) for s in segs]
        self.sim.schedule(self.cfg.core_one_way_delay, flow.sender.on_acks, acks)

    def _sample(self) -> None:
        now = self.sim.now
        lg = self.log
        depth = self._goodput_depth
        span = depth * self.cfg.sample_interval
        for flow in self.flows.values():
            if not flow.started or (flow.end is not None and flow.end < now):
                continue
            s = flow.sender
            delivered = flow.receiver.delivered
            hist = flow.goodput_hist
            hist.append(delivered)
            if len(hist) > depth + 1:
                hist.popleft()
            goodput = (delivered - hist[0]) * 8.0 / (span if len(hist) > depth else
                                                     max(len(hist) - 1, 1) * self.cfg.sample_interval)
            lg.flow_series.append((now, flow.flow_id, s.cwnd, s.rwnd_advertised, s.in_flight,
                                   s.srtt if s.srtt is not None else 0.0,
                                   s.last_rtt if s.last_rtt is not None else 0.0, goodput,
                                   delivered, s.retransmissions, len(s.loss_events)))
            if flow.latest_rwnd is not None:
                lg.rwnd_series.append(flow.latest_rwnd)
                flow.latest_rwnd = None
        if self.cfg.topology == "cellular":
            for ue in self.cell.ues:
                q = ue.queue
                mn = ue.min_sojourn
                lg.queue_series.append((now, ue.ue_id, len(q), q.byte_count, q.head_sojourn(now),
                                        mn if mn != float("inf") else None, ue.max_sojourn,
                                        q.drops, ue.trace.capacity_at(now)))
                ue.min_sojourn = float("inf")
                ue.max_sojourn = 0.0
        if now + self.cfg.sample_interval <= self.cfg.duration + 1e-12:
            self.sim.schedule(self.cfg.sample_interval, self._sample)

    def run(self) -> MetricsLog:
        cfg = self.cfg
        self.sim.schedule(cfg.sample_interval, self._sample)
        self.sim.run_until(cfg.duration)
        self.sim.terminate()
        losses = []
        for flow in self.flows.values():
            s = flow.sender
            end = flow.end if flow.end is not None else cfg.duration
            if not flow.started:
                end = flow.start
            rec = FlowRecord(flow.flow_id, flow.ue_id, flow.kind, flow.start, flow.size,
                             end=end, delivered=flow.receiver.delivered,
                             losses=len(s.loss_events), retransmissions=s.retransmissions,
                             completion=s.completed_at,
                             rtt_times=np.frombuffer(s.rtt_times, dtype=float).copy(),
                             rtt_values=np.frombuffer(s.rtt_values, dtype=float).copy())
            self.log.flows[flow.flow_id] = rec
            losses.extend((t, flow.flow_id, kind) for t, kind in s.loss_events)
        losses.sort(key=lambda r: (r[0], r[1]))
        self.log.losses = losses
        log.info("%s: %d events dispatched", cfg.name, self.sim.dispatched)
        return self.log


class _NullList(list):
    def append(self, item) -> None:
        pass


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> MetricsLog:
    """Execute ``cfg`` to completion; persist CSVs when ``out_dir`` is given."""
    result = Simulation(cfg).run()
    if out_dir is not None:
        emit_csv(result, out_dir)
    return result
