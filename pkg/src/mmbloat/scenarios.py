"""Builtin scenarios: single-UE blockage, short flows, four UEs, UE churn, window ramp.

Capacities are configuration, not measured ground truth: 3 Gbps LoS for the
far (300 m) walker, 2 Gbps for the near (150 m) one, 50 Mbps behind a
building.
"""
from __future__ import annotations

from .config import FlowSpec, ScenarioConfig, ShortFlowSpec, TraceSpec, UeSpec

DISCIPLINES = {
    "droptail": ("droptail", "static"),
    "codel": ("codel", "static"),
    "drw": ("droptail", "drw"),
}

HUMAN_BASE = 3e9
HUMAN_STARTS = [0.8, 4.0, 6.7]
BUILDING_LOS = 2e9
BUILDING_NLOS = 50e6
BUILDING_START = 2.0
BUILDING_DURATION = 2.0
CELL_BASE = 3e9


def _human_trace() -> TraceSpec:
    return TraceSpec(kind="human", base=HUMAN_BASE, starts=list(HUMAN_STARTS))


def _building_trace(windows=None, base=BUILDING_LOS) -> TraceSpec:
    return TraceSpec(kind="building", base=base, nlos=BUILDING_NLOS,
                     windows=windows or [[BUILDING_START, BUILDING_DURATION]])


def human_blockage(variant: str) -> ScenarioConfig:
    queue, rwnd = DISCIPLINES[variant]
    return ScenarioConfig(
        name=f"human-{variant}", duration=9.0,
        description="single UE at 300 m, three human blockages, long Cubic download",
        ues=[UeSpec("ue0", _human_trace(), queue, rwnd)],
        flows=[FlowSpec("ue0")])


def building_blockage(variant: str) -> ScenarioConfig:
    queue, rwnd = DISCIPLINES[variant]
    return ScenarioConfig(
        name=f"building-{variant}", duration=8.0,
        description="single UE at 150 m, 2 s LoS-NLoS-LoS building transition",
        ues=[UeSpec("ue0", _building_trace(), queue, rwnd)],
        flows=[FlowSpec("ue0")])


def short_flows(variant: str) -> ScenarioConfig:
    queue, rwnd = DISCIPLINES[variant]
    return ScenarioConfig(
        name=f"short-flows-{variant}", duration=10.0,
        description="long download plus randomly arriving 500 KB transfers on one UE",
        ues=[UeSpec("ue0", _human_trace(), queue, rwnd)],
        flows=[FlowSpec("ue0")],
        short_flows=[ShortFlowSpec("ue0", size=500_000, mean_interarrival=2.0,
                                   first=0.5, until=9.0)])


def four_ue(variant: str) -> ScenarioConfig:
    queue, rwnd = DISCIPLINES[variant]
    los = TraceSpec(kind="constant", base=CELL_BASE)
    ues = [
        UeSpec("ue0", los, queue, rwnd),
        UeSpec("ue1", TraceSpec(kind="constant", base=CELL_BASE), queue, rwnd),
        UeSpec("ue2", _building_trace([[3.0, 2.0]], base=CELL_BASE), queue, rwnd),
        UeSpec("ue3", _building_trace([[5.0, 2.0]], base=CELL_BASE), queue, rwnd),
    ]
    return ScenarioConfig(
        name=f"four-ue-{variant}", duration=10.0,
        description="4 UEs round-robin scheduled: 2 always LoS, 2 LoS-NLoS-LoS",
        ues=ues, flows=[FlowSpec(u.id) for u in ues])


def ue_churn() -> ScenarioConfig:
    attach = [0.0, 1.0, 2.0, 3.0]
    detach = [None, 7.0, 8.0, 9.0]
    ues = [UeSpec(f"ue{i}", TraceSpec(kind="constant", base=CELL_BASE), "droptail", "drw",
                  attach=a, detach=d) for i, (a, d) in enumerate(zip(attach, detach))]
    return ScenarioConfig(
        name="ue-churn-drw", duration=10.0,
        description="UE 0 stays; UEs 1-3 join at 1, 2, 3 s and leave at 7, 8, 9 s",
        ues=ues, flows=[FlowSpec(u.id, start=u.attach) for u in ues])


def reno_ramp() -> ScenarioConfig:
    return ScenarioConfig(
        name="reno-ramp", duration=210.0, topology="pipe", controller="reno",
        description="lossless 40 ms pipe, cwnd starts at 10 MB in congestion avoidance",
        mss=1000, gso=250, initial_cwnd=10_000_000, initial_ssthresh=10_000_000,
        static_rwnd=1 << 30, log_grants=False, sample_interval=0.040,
        ues=[UeSpec("ue0", TraceSpec(kind="constant", base=1e12), "droptail", "static")],
        flows=[FlowSpec("ue0")])


def builtin_scenarios() -> list[ScenarioConfig]:
    out: list[ScenarioConfig] = []
    for make in (human_blockage, building_blockage, short_flows, four_ue):
        for variant in DISCIPLINES:
            out.append(make(variant))
    out.append(ue_churn())
    out.append(reno_ramp())
    return out


def get_scenario(name: str) -> ScenarioConfig:
    for cfg in builtin_scenarios():
        if cfg.name == name:
            return cfg
    raise KeyError(name)


def scenario_names() -> list[str]:
    return [c.name for c in builtin_scenarios()]
