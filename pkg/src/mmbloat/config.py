"""Scenario configuration: dataclasses, validation and JSON round-trip."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import channel
from .aqm import CODEL_INTERVAL, CODEL_TARGET, DEFAULT_CAPACITY_PACKETS
from .rwnd import DEFAULT_DELTA, DEFAULT_GRANT_WINDOW, DEFAULT_RWND_CAP, POLICIES

TRACE_KINDS = ("constant", "human", "building")
QUEUE_KINDS = ("droptail", "codel")
CONTROLLERS = ("reno", "cubic")
TOPOLOGIES = ("cellular", "pipe")
BW_TOTAL_SOURCES = ("channel", "nominal")


class ConfigError(ValueError):
    """Validation failure; ``field`` names the offending config path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class TraceSpec:
    kind: str = "constant"
    base: float = 3e9
    nlos: Optional[float] = None
    # human: blockage start times
    starts: list[float] = field(default_factory=list)
    ramp_down: float = channel.HUMAN_RAMP_DOWN
    hold: float = channel.HUMAN_HOLD
    ramp_up: float = channel.HUMAN_RAMP_UP
    depth_db: float = channel.HUMAN_DEPTH_DB
    # building: [start, duration] pairs
    windows: list[list[float]] = field(default_factory=list)
    ramp: float = channel.BUILDING_RAMP

    def build(self) -> channel.CapacityTrace:
        if self.kind == "constant":
            return channel.constant_trace(self.base)
        if self.kind == "human":
            return channel.human_blockage_trace(self.base, self.starts, ramp_down=self.ramp_down,
                                                hold=self.hold, ramp_up=self.ramp_up,
                                                depth_db=self.depth_db)
        if len(self.windows) == 1:
            start, duration = self.windows[0]
            return channel.building_blockage_trace(self.base, self.nlos, start, duration,
                                                   ramp=self.ramp)
        return channel.multi_building_trace(self.base, self.nlos,
                                            [tuple(w) for w in self.windows], ramp=self.ramp)


@dataclass
class UeSpec:
    id: str
    trace: TraceSpec = field(default_factory=TraceSpec)
    queue: str = "droptail"
    rwnd: str = "static"
    attach: float = 0.0
    detach: Optional[float] = None


@dataclass
class FlowSpec:
    ue: str
    type: str = "long"
    start: float = 0.0
    size: Optional[int] = None


@dataclass
class ShortFlowSpec:
    """Random short transfers: exponential inter-arrivals drawn from the seed."""

    ue: str
    size: int = 500_000
    mean_interarrival: float = 2.0
    first: float = 0.0
    until: Optional[float] = None


@dataclass
class ScenarioConfig:
    name: str
    duration: float
    ues: list[UeSpec] = field(default_factory=list)
    flows: list[FlowSpec] = field(default_factory=list)
    short_flows: list[ShortFlowSpec] = field(default_factory=list)
    topology: str = "cellular"
    controller: str = "cubic"
    mss: int = 1400
    gso: int = 1
    initial_cwnd: Optional[float] = None
    initial_ssthresh: Optional[float] = None
    min_rto: float = 0.200
    core_one_way_delay: float = 0.020
    air_delay: float = 0.001
    slot_duration: float = 100e-6
    overhead: float = 0.0
    queue_capacity: int = DEFAULT_CAPACITY_PACKETS
    codel_target: float = CODEL_TARGET
    codel_interval: float = CODEL_INTERVAL
    delta: float = DEFAULT_DELTA
    grant_window: float = DEFAULT_GRANT_WINDOW
    rtt_smoothing: int = 5
    static_rwnd: int = 32_000_000
    rwnd_cap: int = DEFAULT_RWND_CAP
    bw_total_source: str = "channel"
    sample_interval: float = 0.001
    log_grants: bool = True
    seed: int = 1
    description: str = ""

    # -- validation ---------------------------------------------------------
    def validate(self) -> "ScenarioConfig":
        def need(cond: bool, path: str, msg: str):
            if not cond:
                raise ConfigError(path, msg)

        need(isinstance(self.name, str) and bool(self.name), "name", "must be a non-empty string")
        need(self.duration > 0, "duration", "must be > 0")
        need(self.topology in TOPOLOGIES, "topology", f"must be one of {TOPOLOGIES}")
        need(self.controller in CONTROLLERS, "controller", f"must be one of {CONTROLLERS}")
        need(self.mss > 0, "mss", "must be > 0")
        need(self.gso >= 1, "gso", "must be >= 1")
        need(self.core_one_way_delay >= 0, "core_one_way_delay", "must be >= 0")
        need(self.air_delay >= 0, "air_delay", "must be >= 0")
        need(self.slot_duration > 0, "slot_duration", "must be > 0")
        need(0 <= self.overhead < 1, "overhead", "must be in [0, 1)")
        need(self.queue_capacity >= 1, "queue_capacity", "must be >= 1")
        need(self.codel_target > 0, "codel_target", "must be > 0")
        need(self.codel_interval > 0, "codel_interval", "must be > 0")
        need(self.delta >= 0, "delta", "must be >= 0")
        need(self.grant_window > 0, "grant_window", "must be > 0")
        need(self.rtt_smoothing >= 1, "rtt_smoothing", "must be >= 1")
        need(self.static_rwnd >= self.mss, "static_rwnd", "must be >= mss")
        need(self.rwnd_cap >= self.mss, "rwnd_cap", "must be >= mss")
        need(self.bw_total_source in BW_TOTAL_SOURCES, "bw_total_source",
             f"must be one of {BW_TOTAL_SOURCES}")
        need(self.sample_interval > 0, "sample_interval", "must be > 0")
        ids = set()
        for i, ue in enumerate(self.ues):
            p = f"ues.{i}"
            need(isinstance(ue.id, str) and bool(ue.id), f"{p}.id", "must be a non-empty string")
            need(ue.id not in ids, f"{p}.id", f"duplicate UE id {ue.id!r}")
            ids.add(ue.id)
            need(ue.queue in QUEUE_KINDS, f"{p}.queue", f"must be one of {QUEUE_KINDS}")
            need(ue.rwnd in POLICIES, f"{p}.rwnd", f"must be one of {POLICIES}")
            need(ue.attach >= 0, f"{p}.attach", "must be >= 0")
            need(ue.detach is None or ue.detach > ue.attach, f"{p}.detach", "must be > attach")
            t = ue.trace
            need(t.kind in TRACE_KINDS, f"{p}.trace.kind", f"must be one of {TRACE_KINDS}")
            need(t.base > 0, f"{p}.trace.base", "must be > 0")
            if t.kind == "building":
                need(t.nlos is not None and 0 < t.nlos < t.base, f"{p}.trace.nlos",
                     "must satisfy 0 < nlos < base")
                need(len(t.windows) >= 1, f"{p}.trace.windows", "needs at least one window")
                for j, w in enumerate(t.windows):
                    need(len(w) == 2 and w[0] >= 0 and w[1] > 0, f"{p}.trace.windows.{j}",
                         "must be [start >= 0, duration > 0]")
            try:
                t.build()
            except ValueError as exc:
                raise ConfigError(f"{p}.trace", str(exc)) from None
        for i, fl in enumerate(self.flows):
            p = f"flows.{i}"
            need(fl.ue in ids, f"{p}.ue", f"references unknown UE {fl.ue!r}")
            need(fl.type in ("long", "short"), f"{p}.type", "must be 'long' or 'short'")
            need(fl.start >= 0, f"{p}.start", "must be >= 0")
            if fl.type == "short":
                need(fl.size is not None and fl.size > 0, f"{p}.size", "short flows need size > 0")
        for i, sf in enumerate(self.short_flows):
            p = f"short_flows.{i}"
            need(sf.ue in ids, f"{p}.ue", f"references unknown UE {sf.ue!r}")
            need(sf.size > 0, f"{p}.size", "must be > 0")
            need(sf.mean_interarrival > 0, f"{p}.mean_interarrival", "must be > 0")
        return self

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        return _build(cls, data, "")

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def with_overrides(self, assignments: list[str]) -> "ScenarioConfig":
        data = self.to_dict()
        for item in assignments:
            set_path(data, item)
        return ScenarioConfig.from_dict(data)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    return obj


_STRING_FIELDS = {"name", "description", "id", "ue", "kind", "queue", "rwnd", "type",
                  "topology", "controller", "bw_total_source"}
_NESTED = {"ues": UeSpec, "flows": FlowSpec, "short_flows": ShortFlowSpec, "trace": TraceSpec}


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", "expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        p = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(p, "unknown field")
        if value == "inf" and key not in _STRING_FIELDS:
            value = math.inf
        sub = _NESTED.get(key)
        if sub is TraceSpec:
            value = _build(sub, value, p)
        elif sub is not None:
            if not isinstance(value, list):
                raise ConfigError(p, "expected a list")
            value = [_build(sub, v, f"{p}.{i}") for i, v in enumerate(value)]
        kwargs[key] = value
    missing = [f.name for f in known.values()
               if f.name not in kwargs and f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING]
    if missing:
        raise ConfigError(f"{path}.{missing[0]}" if path else missing[0], "required field missing")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(path or "<root>", str(exc)) from None


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_path(data: dict, assignment: str) -> None:
    """Apply ``a.b.0.c=value`` to a nested dict/list structure in place."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key.path=value")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    node: Any = data
    for i, part in enumerate(parts[:-1]):
        node = _step(node, part, ".".join(parts[: i + 1]))
    last = parts[-1]
    value = _parse_value(raw)
    if isinstance(node, list):
        idx = _index(node, last, key)
        node[idx] = value
    elif isinstance(node, dict):
        if last not in node:
            raise ConfigError(key, "unknown field")
        node[last] = value
    else:
        raise ConfigError(key, "cannot assign into a scalar")


def _index(node: list, part: str, path: str) -> int:
    try:
        idx = int(part)
    except ValueError:
        raise ConfigError(path, "list index must be an integer") from None
    if not -len(node) <= idx < len(node):
        raise ConfigError(path, "list index out of range")
    return idx


def _step(node: Any, part: str, path: str) -> Any:
    if isinstance(node, list):
        if not part.isdigit():
            for item in node:
                if isinstance(item, dict) and item.get("id") == part:
                    return item
        return node[_index(node, part, path)]
    if isinstance(node, dict):
        if part not in node:
            raise ConfigError(path, "unknown field")
        return node[part]
    raise ConfigError(path, "cannot descend into a scalar")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    return ScenarioConfig.from_json(text).validate()


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(cfg.to_json() + "\n")
