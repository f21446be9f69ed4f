"""End-to-end TCP: Reno/CUBIC senders with NewReno recovery, and an
immediate-ACK receiver that carries timestamps and an advertised window.

Windows are in bytes. The sender may aggregate up to ``gso`` MSS-sized
segments into one wire segment; congestion control always counts bytes.
"""
from __future__ import annotations

import math
from array import array
from collections import deque
from typing import Any, Callable, Optional, Protocol

from .aqm import QueuedPacket
from .engine import Simulator, to_ticks

DEFAULT_MSS = 1400
INITIAL_CWND_SEGMENTS = 10
MIN_RTO = 0.200
MAX_RTO = 60.0
INITIAL_RTO = 1.0
DUPACK_THRESHOLD = 3

CUBIC_C = 0.4
CUBIC_BETA = 0.7
RENO_BETA = 0.5

SLOW_START = "slow-start"
CONGESTION_AVOIDANCE = "congestion-avoidance"
FAST_RECOVERY = "fast-recovery"


class Segment(QueuedPacket):
    """A data segment; doubles as the packet object held in base-station queues."""

    __slots__ = ("len", "ts_val", "ts_ecr", "retx")

    def __init__(self, flow_id: Any, seq: int, length: int, ts_val: float,
                 ts_ecr: Optional[float] = None, retx: bool = False):
        QueuedPacket.__init__(self, length, flow_id, seq)
        self.len = length
        self.ts_val = ts_val
        self.ts_ecr = ts_ecr
        self.retx = retx

    @property
    def end(self) -> int:
        return self.seq + self.len

    def __repr__(self):
        return f"Segment(flow={self.flow_id!r}, seq={self.seq}, len={self.len}, retx={self.retx})"


class Ack:
    __slots__ = ("flow_id", "ack", "rwnd", "ts_val", "ts_ecr", "dup")

    def __init__(self, flow_id: Any, ack: int, rwnd: int, ts_val: float,
                 ts_ecr: float, dup: bool = False):
        self.flow_id = flow_id
        self.ack = ack
        self.rwnd = rwnd
        self.ts_val = ts_val
        self.ts_ecr = ts_ecr
        self.dup = dup

    def __repr__(self):
        return f"Ack(flow={self.flow_id!r}, ack={self.ack}, rwnd={self.rwnd}, dup={self.dup})"


def cubic_k(w_max: float, beta: float = CUBIC_BETA, c: float = CUBIC_C) -> float:
    """Time (s) for the cubic curve to climb back to ``w_max`` segments."""
    return math.copysign(abs(w_max * (1.0 - beta) / c) ** (1.0 / 3.0), w_max * (1.0 - beta))


def cubic_window(t: float, w_max: float, k: float, c: float = CUBIC_C) -> float:
    """CUBIC window (segments) ``t`` seconds after the epoch start."""
    return w_max + c * (t - k) ** 3


class CongestionController:
    name = "base"
    beta = RENO_BETA

    def __init__(self, mss: int):
        self.mss = mss

    def on_ack(self, s: "TcpSender", acked: int, now: float) -> None:
        raise NotImplementedError

    def on_loss(self, s: "TcpSender", kind: str, now: float) -> None:
        raise NotImplementedError


class Reno(CongestionController):
    name = "reno"
    beta = RENO_BETA

    def on_ack(self, s, acked, now):
        if s.cwnd < s.ssthresh:
            grow = min(acked, s.ssthresh - s.cwnd)
            s.cwnd += grow
            acked -= grow
            if acked <= 0:
                return
        s.cwnd += self.mss * acked / s.cwnd

    def on_loss(self, s, kind, now):
        s.ssthresh = max(s.cwnd * self.beta, 2 * self.mss)


class Cubic(CongestionController):
    """Standard CUBIC with the TCP-friendly region; window math in segments."""

    name = "cubic"

    def __init__(self, mss: int, c: float = CUBIC_C, beta: float = CUBIC_BETA,
                 fast_convergence: bool = False):
        super().__init__(mss)
        self.c = c
        self.beta = beta
        self.fast_convergence = fast_convergence
        self.w_max = 0.0
        self.epoch_start: Optional[float] = None
        self.k = 0.0
        self.w_est = 0.0
        self.origin = 0.0

    def on_ack(self, s, acked, now):
        mss = self.mss
        if s.cwnd < s.ssthresh:
            grow = min(acked, s.ssthresh - s.cwnd)
            s.cwnd += grow
            acked -= grow
            if acked <= 0:
                return
        cwnd_seg = s.cwnd / mss
        if self.epoch_start is None:
            self.epoch_start = now
            if cwnd_seg < self.w_max:
                self.k = ((self.w_max - cwnd_seg) / self.c) ** (1.0 / 3.0)
                self.origin = self.w_max
            else:
                self.k = 0.0
                self.origin = cwnd_seg
            self.w_est = cwnd_seg
        rtt = s.srtt if s.srtt is not None else 0.0
        t = now - self.epoch_start
        target = cubic_window(t + rtt, self.origin, self.k, self.c)
        target = min(max(target, cwnd_seg), 1.5 * cwnd_seg)
        segs = acked / mss
        alpha = 3.0 * (1.0 - self.beta) / (1.0 + self.beta)
        self.w_est += alpha * segs / cwnd_seg
        if cubic_window(t, self.origin, self.k, self.c) < self.w_est:
            target = max(target, self.w_est)
        if target > cwnd_seg:
            s.cwnd = min(s.cwnd + mss * segs * (target - cwnd_seg) / cwnd_seg, target * mss)

    def on_loss(self, s, kind, now):
        cwnd_seg = s.cwnd / self.mss
        if self.fast_convergence and cwnd_seg < self.w_max:
            self.w_max = cwnd_seg * (1.0 + self.beta) / 2.0
        else:
            self.w_max = cwnd_seg
        self.epoch_start = None
        s.ssthresh = max(s.cwnd * self.beta, 2 * self.mss)


def make_controller(name: str, mss: int) -> CongestionController:
    if name == "reno":
        return Reno(mss)
    if name == "cubic":
        return Cubic(mss)
    raise ValueError(f"unknown congestion controller {name!r}")


class TcpSender:
    """Bulk or finite-size sender with a min(cwnd, rwnd) send gate."""

    def __init__(self, sim: Simulator, flow_id: Any, transmit: Callable[[list[Segment]], None],
                 *, controller: str = "cubic", mss: int = DEFAULT_MSS,
                 size: Optional[int] = None, initial_cwnd: Optional[float] = None,
                 initial_ssthresh: float = math.inf, initial_rwnd: float = 65535,
                 gso: int = 1, min_rto: float = MIN_RTO, record_rtt: bool = True):
        self.sim = sim
        self.flow_id = flow_id
        self.transmit = transmit
        self.mss = mss
        self.size = size
        self.gso = max(1, int(gso))
        self.cc = make_controller(controller, mss)
        self.cwnd = float(initial_cwnd if initial_cwnd is not None else INITIAL_CWND_SEGMENTS * mss)
        self.ssthresh = initial_ssthresh
        self.rwnd_advertised = initial_rwnd
        self.cwnd_blocked = False
        self.snd_una = 0
        self.snd_nxt = 0
        self.high_tx = 0
        self.recover = -1
        self.in_recovery = False
        self.dupacks = 0
        self.outstanding: deque[list] = deque()  # [seq, len]
        self.srtt: Optional[float] = None
        self.rttvar = 0.0
        self.rto = INITIAL_RTO
        self.min_rto = min_rto
        self._timer = None
        self._deadline: Optional[int] = None
        self.ts_recent: Optional[float] = None
        self.retransmissions = 0
        self.loss_events: list[tuple[float, str]] = []
        self.started = False
        self.stopped = False
        self.completed_at: Optional[float] = None
        self.on_complete: Optional[Callable[["TcpSender"], None]] = None
        self.record_rtt = record_rtt
        self.rtt_times = array("d")
        self.rtt_values = array("d")
        self.last_rtt: Optional[float] = None

    # -- state views -------------------------------------------------------
    @property
    def in_flight(self) -> int:
        return self.snd_nxt - self.snd_una

    @property
    def phase(self) -> str:
        if self.in_recovery:
            return FAST_RECOVERY
        return SLOW_START if self.cwnd < self.ssthresh else CONGESTION_AVOIDANCE

    @property
    def send_gate(self) -> float:
        return min(self.cwnd, self.rwnd_advertised)

    def _app_limit(self) -> float:
        return math.inf if self.size is None else self.size

    # -- sending -----------------------------------------------------------
    def start(self) -> None:
        self.started = True
        self.transmit_now(self.maybe_send(self.sim.now))

    def stop(self) -> None:
        self.stopped = True
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None

    def transmit_now(self, segs: list[Segment]) -> None:
        if segs:
            self.transmit(segs)

    def maybe_send(self, now: float) -> list[Segment]:
        if self.stopped:
            return []
        out: list[Segment] = []
        mss = self.mss
        gate = min(self.cwnd, self.rwnd_advertised)
        limit = self._app_limit()
        while self.snd_nxt < limit:
            room = gate - (self.snd_nxt - self.snd_una)
            if room <= 0:
                break
            nseg = min(self.gso, max(1, math.ceil(room / mss)))
            length = nseg * mss
            if self.snd_nxt + length > limit:
                length = int(limit - self.snd_nxt)
            retx = self.snd_nxt < self.high_tx
            seg = Segment(self.flow_id, self.snd_nxt, length, now, self.ts_recent, retx)
            if retx:
                self.retransmissions += 1
            out.append(seg)
            self.outstanding.append([self.snd_nxt, length])
            self.snd_nxt += length
            if self.snd_nxt > self.high_tx:
                self.high_tx = self.snd_nxt
        # blocked by cwnd rather than by rwnd or the application
        self.cwnd_blocked = self.snd_nxt < limit and self.cwnd <= self.rwnd_advertised
        if out and self._deadline is None:
            self._arm_timer()
        return out

    def _retransmit_head(self, now: float) -> None:
        if not self.outstanding:
            return
        seq, length = self.outstanding[0]
        self.retransmissions += 1
        self.transmit([Segment(self.flow_id, seq, length, now, self.ts_recent, True)])

    # -- timers ------------------------------------------------------------
    def _arm_timer(self) -> None:
        # one pending event; moving the deadline later only re-arms on expiry
        sim = self.sim
        self._deadline = sim.now_ticks + to_ticks(self.rto)
        if self._timer is not None:
            if self._timer.fire_tick <= self._deadline:
                return
            self._timer.cancel()
        self._timer = sim.schedule_at_ticks(self._deadline, self._on_timer)

    def _disarm_timer(self) -> None:
        self._deadline = None

    def _update_rtt(self, sample: float) -> None:
        if self.srtt is None:
            self.srtt = sample
            self.rttvar = sample / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto = min(MAX_RTO, max(self.min_rto, self.srtt + 4.0 * self.rttvar))

    def _on_timer(self) -> None:
        self._timer = None
        if self.stopped or self._deadline is None or self.in_flight == 0:
            return
        if self.sim.now_ticks < self._deadline:
            self._timer = self.sim.schedule_at_ticks(self._deadline, self._on_timer)
            return
        self._deadline = None
        now = self.sim.now
        self.on_loss("rto", now)
        self.transmit_now(self.maybe_send(now))

    # -- loss handling -----------------------------------------------------
    def on_loss(self, kind: str, now: float) -> None:
        """React to a detected loss: ``kind`` is 'triple-dupack' or 'rto'."""
        self.loss_events.append((now, kind))
        self.cc.on_loss(self, kind, now)
        if kind == "triple-dupack":
            self.in_recovery = True
            self.recover = self.high_tx
            self.cwnd = self.ssthresh + DUPACK_THRESHOLD * self.mss
            self._retransmit_head(now)
            self._arm_timer()
        elif kind == "rto":
            self.in_recovery = False
            self.recover = self.high_tx
            self.dupacks = 0
            self.cwnd = float(self.mss)
            # go back N: resend everything from snd_una
            self.snd_nxt = self.snd_una
            self.outstanding.clear()
            self.rto = min(MAX_RTO, self.rto * 2.0)
        else:
            raise ValueError(f"unknown loss kind {kind!r}")

    # -- ACK processing ----------------------------------------------------
    def on_ack(self, ack: Ack) -> None:
        if self.stopped:
            return
        self._process_ack(ack, self.sim.now)
        self.transmit_now(self.maybe_send(self.sim.now))

    def on_acks(self, acks: list[Ack]) -> None:
        if self.stopped:
            return
        now = self.sim.now
        for a in acks:
            self._process_ack(a, now)
        self.transmit_now(self.maybe_send(now))

    def _process_ack(self, ack: Ack, now: float) -> None:
        self.rwnd_advertised = ack.rwnd
        self.ts_recent = ack.ts_val
        sample = now - ack.ts_ecr
        if sample > 0:
            self._update_rtt(sample)
            self.last_rtt = sample
            if self.record_rtt:
                self.rtt_times.append(now)
                self.rtt_values.append(sample)
        if ack.ack > self.snd_una:
            in_flight_before = self.snd_nxt - self.snd_una
            acked = ack.ack - self.snd_una
            self.snd_una = ack.ack
            if self.snd_nxt < self.snd_una:
                self.snd_nxt = self.snd_una
            out = self.outstanding
            while out and out[0][0] + out[0][1] <= ack.ack:
                out.popleft()
            if out and out[0][0] < ack.ack:
                out[0][1] -= ack.ack - out[0][0]
                out[0][0] = ack.ack
            if self.in_recovery:
                if ack.ack >= self.recover:
                    self.in_recovery = False
                    self.dupacks = 0
                    self.cwnd = max(float(self.ssthresh), float(self.mss))
                else:
                    # NewReno partial ACK: retransmit next hole, deflate
                    self._retransmit_head(now)
                    self.cwnd = max(float(self.mss), self.cwnd - acked + self.mss)
            else:
                self.dupacks = 0
                if self._cwnd_limited(in_flight_before):
                    self.cc.on_ack(self, acked, now)
            if self.size is not None and self.snd_una >= self.size and self.completed_at is None:
                self.completed_at = now
                self.stop()
                if self.on_complete is not None:
                    self.on_complete(self)
                return
            if self.in_flight > 0:
                self._arm_timer()
            else:
                self._disarm_timer()
        elif ack.ack == self.snd_una and self.in_flight > 0:
            self.dupacks += 1
            if self.in_recovery:
                self.cwnd += self.mss
            elif self.dupacks == DUPACK_THRESHOLD and self.snd_una > self.recover:
                self.on_loss("triple-dupack", now)

    def _cwnd_limited(self, in_flight: int) -> bool:
        # ACKs of one batch share the send decision that preceded them
        if self.cwnd_blocked:
            return True
        if self.cwnd < self.ssthresh:
            return self.cwnd < 2 * in_flight + self.mss
        return in_flight + self.mss * self.gso >= self.cwnd


class WindowSource(Protocol):
    def advertise(self, now: float) -> int: ...

    def on_rtt_sample(self, value: float, now: float) -> None: ...


class StaticWindow:
    def __init__(self, window: int):
        self.window = int(window)

    def advertise(self, now: float) -> int:
        return self.window

    def on_rtt_sample(self, value: float, now: float) -> None:
        pass


class TcpReceiver:
    """Cumulative-ACK receiver with immediate ACKs (delayed ACK off)."""

    def __init__(self, flow_id: Any, window: WindowSource | int = 64 * 1024,
                 on_data: Optional[Callable[[int, float], None]] = None):
        self.flow_id = flow_id
        self.window = StaticWindow(window) if isinstance(window, int) else window
        self.rcv_next = 0
        self.ooo: dict[int, int] = {}
        self.delivered = 0
        self.on_data = on_data
        self.dupacks_sent = 0
        self.rtt_samples = 0

    def receiver_on_segment(self, seg: Segment, now: float) -> Ack:
        if seg.ts_ecr is not None and not seg.retx:
            sample = now - seg.ts_ecr
            if sample > 0:
                self.rtt_samples += 1
                self.window.on_rtt_sample(sample, now)
        before = self.rcv_next
        if seg.seq == self.rcv_next:
            self.rcv_next = seg.seq + seg.len
            ooo = self.ooo
            while self.rcv_next in ooo:
                self.rcv_next += ooo.pop(self.rcv_next)
        elif seg.seq > self.rcv_next:
            self.ooo.setdefault(seg.seq, seg.len)
        advanced = self.rcv_next - before
        if advanced:
            self.delivered += advanced
            if self.on_data is not None:
                self.on_data(advanced, now)
        else:
            self.dupacks_sent += 1
        return Ack(self.flow_id, self.rcv_next, self.window.advertise(now), now,
                   seg.ts_val, dup=not advanced)

    on_segment = receiver_on_segment


def maybe_send(s: TcpSender, now: float) -> list[Segment]:
    return s.maybe_send(now)


def reno_on_ack(s: TcpSender, acked_bytes: int, now: float) -> None:
    Reno(s.mss).on_ack(s, acked_bytes, now)


def cubic_on_ack(s: TcpSender, acked_bytes: int, now: float) -> None:
    s.cc.on_ack(s, acked_bytes, now)


def on_loss(s: TcpSender, kind: str, now: float) -> None:
    s.on_loss(kind, now)


def receiver_on_segment(r: TcpReceiver, seg: Segment, now: float) -> Ack:
    return r.receiver_on_segment(seg, now)
