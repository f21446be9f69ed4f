"""Metric series collected during a run, summary statistics and CSV output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

SCHEMA_VERSION = 1

FLOW_COLUMNS = ["time_s", "flow_id", "cwnd_bytes", "rwnd_bytes", "in_flight_bytes", "srtt_s",
                "rtt_s", "goodput_bps", "delivered_bytes", "retransmissions", "losses"]
QUEUE_COLUMNS = ["time_s", "ue_id", "length_pkts", "bytes", "head_sojourn_s", "min_sojourn_s",
                 "max_sojourn_s", "drops", "capacity_bps"]
RWND_COLUMNS = ["time_s", "flow_id", "rtt_min_s", "rtt_s", "bw_alloc_bps", "bw_total_bps",
                "advertised_bytes", "in_region"]
GRANT_COLUMNS = ["time_s", "ue_id", "tb_bits"]
DROP_COLUMNS = ["time_s", "ue_id", "flow_id", "seq", "reason"]
LOSS_COLUMNS = ["time_s", "flow_id", "kind"]
SUMMARY_COLUMNS = ["flow_id", "ue_id", "type", "start_s", "end_s", "delivered_bytes",
                   "mean_goodput_bps", "mean_rtt_s", "p95_rtt_s", "max_rtt_s", "p95_rtt_sampled_s", "losses",
                   "retransmissions", "completion_s"]


@dataclass
class FlowRecord:
    flow_id: str
    ue_id: str
    type: str
    start: float
    size: Optional[int]
    end: float = 0.0
    delivered: int = 0
    losses: int = 0
    retransmissions: int = 0
    completion: Optional[float] = None
    rtt_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rtt_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def mean_goodput(self) -> float:
        end = self.completion if self.completion is not None else self.end
        span = end - self.start
        return self.delivered * 8.0 / span if span > 0 else 0.0

    def rtt_stats(self, t0: float = -math.inf, t1: float = math.inf) -> dict[str, float]:
        mask = (self.rtt_times >= t0) & (self.rtt_times <= t1)
        v = self.rtt_values[mask]
        if v.size == 0:
            return {"mean": math.nan, "p95": math.nan, "max": math.nan, "min": math.nan}
        return {"mean": float(v.mean()), "p95": float(np.percentile(v, 95)),
                "max": float(v.max()), "min": float(v.min())}


@dataclass
class MetricsLog:
    scenario: str
    config: dict[str, Any] = field(default_factory=dict)
    flow_series: list[tuple] = field(default_factory=list)
    queue_series: list[tuple] = field(default_factory=list)
    rwnd_series: list[tuple] = field(default_factory=list)
    grants: list[tuple] = field(default_factory=list)
    drops: list[tuple] = field(default_factory=list)
    losses: list[tuple] = field(default_factory=list)
    flows: dict[str, FlowRecord] = field(default_factory=dict)
    blocked: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    # -- array views --------------------------------------------------------
    def flow_array(self, flow_id: str, column: str) -> np.ndarray:
        idx = FLOW_COLUMNS.index(column)
        return np.array([r[idx] for r in self.flow_series if r[1] == flow_id], dtype=float)

    def queue_array(self, ue_id: str, column: str) -> np.ndarray:
        idx = QUEUE_COLUMNS.index(column)
        return np.array([r[idx] for r in self.queue_series if r[1] == ue_id], dtype=float)

    def rwnd_array(self, flow_id: str, column: str) -> np.ndarray:
        idx = RWND_COLUMNS.index(column)
        return np.array([r[idx] for r in self.rwnd_series if r[1] == flow_id], dtype=float)

    def sampled_rtt(self, flow_id: str) -> np.ndarray:
        """Latest RTT sample at every sampling instant: a time-weighted RTT view."""
        v = self.flow_array(flow_id, "rtt_s")
        return v[v > 0]

    def summary_rows(self) -> list[tuple]:
        rows = []
        for rec in self.flows.values():
            st = rec.rtt_stats()
            sampled = self.sampled_rtt(rec.flow_id)
            p95_sampled = float(np.percentile(sampled, 95)) if sampled.size else math.nan
            rows.append((rec.flow_id, rec.ue_id, rec.type, rec.start, rec.end, rec.delivered,
                         rec.mean_goodput(), st["mean"], st["p95"], st["max"], p95_sampled,
                         rec.losses, rec.retransmissions, rec.completion))
        return rows

    def sender_losses(self, flow_id: Optional[str] = None) -> int:
        return sum(1 for r in self.losses if flow_id is None or r[1] == flow_id)


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".9g")
    return str(v)


def _write(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def emit_csv(log: MetricsLog, out_dir: str | Path) -> list[Path]:
    """Write one CSV per series plus summary.csv and meta.json into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    files = {
        "flows.csv": (FLOW_COLUMNS, log.flow_series),
        "queues.csv": (QUEUE_COLUMNS, log.queue_series),
        "rwnd.csv": (RWND_COLUMNS, log.rwnd_series),
        "grants.csv": (GRANT_COLUMNS, log.grants),
        "drops.csv": (DROP_COLUMNS, log.drops),
        "losses.csv": (LOSS_COLUMNS, log.losses),
        "summary.csv": (SUMMARY_COLUMNS, log.summary_rows()),
    }
    written = []
    for name, (header, rows) in files.items():
        p = out / name
        _write(p, header, rows)
        written.append(p)
    meta = out / "meta.json"
    meta.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "scenario": log.scenario,
                                "config": _clean(log.config)}, indent=2, sort_keys=True) + "\n")
    written.append(meta)
    return written


def _clean(obj: Any) -> Any:
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj
