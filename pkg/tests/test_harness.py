import filecmp

import numpy as np
import pytest

from mmbloat import emit_csv, get_scenario, run_scenario
from mmbloat.analysis import peak_rtt
from mmbloat.config import ConfigError, FlowSpec, ScenarioConfig, TraceSpec, UeSpec
from mmbloat.harness import Simulation
from mmbloat.metrics import FLOW_COLUMNS, SUMMARY_COLUMNS, MetricsLog
from mmbloat.scenarios import builtin_scenarios, scenario_names
from scenario_cache import run_builtin

EXPECTED = {f"{fam}-{v}" for fam in ("human", "building", "short-flows", "four-ue")
            for v in ("droptail", "codel", "drw")} | {"ue-churn-drw", "reno-ramp"}


def test_builtin_catalogue():
    assert set(scenario_names()) == EXPECTED
    assert len(scenario_names()) == len(EXPECTED)


def test_four_ue_traces():
    cfg = get_scenario("four-ue-codel")
    kinds = [u.trace.kind for u in cfg.ues]
    assert kinds == ["constant", "constant", "building", "building"]


def test_churn_detach_times():
    cfg = get_scenario("ue-churn-drw")
    assert sorted(u.detach for u in cfg.ues if u.detach is not None) == [7.0, 8.0, 9.0]


def test_reno_ramp_parameters():
    cfg = get_scenario("reno-ramp")
    assert (cfg.mss, cfg.initial_cwnd, cfg.topology, cfg.controller) == \
        (1000, 10_000_000, "pipe", "reno")


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_every_builtin_runs_briefly(name):
    cfg = get_scenario(name).with_overrides(["duration=0.3"])
    log = run_scenario(cfg)
    assert log.flow_series
    if cfg.topology == "cellular":
        assert log.queue_series
    # timestamps strictly increase within each per-entity series
    for fid in {r[1] for r in log.flow_series}:
        t = log.flow_array(fid, "time_s")
        assert np.all(np.diff(t) > 0)


def test_zero_flow_scenario(tmp_path):
    cfg = ScenarioConfig(name="idle", duration=0.05, ues=[UeSpec("ue0")])
    log = run_scenario(cfg, tmp_path)
    assert log.flow_series == [] and log.flows == {}
    assert (tmp_path / "flows.csv").read_text() == ",".join(FLOW_COLUMNS) + "\n"


def test_empty_log_headers_only(tmp_path):
    files = emit_csv(MetricsLog("empty"), tmp_path)
    for p in files:
        if p.suffix == ".csv":
            assert len(p.read_text().splitlines()) == 1
    assert (tmp_path / "summary.csv").read_text().startswith(",".join(SUMMARY_COLUMNS))


def test_unwritable_output_reported(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_csv(MetricsLog("x"), blocker / "sub")


def test_invalid_config_rejected():
    with pytest.raises(ConfigError):
        Simulation(ScenarioConfig(name="x", duration=-1))


def test_four_ue_summary_rows(tmp_path):
    cfg = get_scenario("four-ue-drw").with_overrides(["duration=0.2"])
    run_scenario(cfg, tmp_path)
    rows = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(rows) == 5


def test_same_seed_same_bytes(tmp_path):
    cfg = get_scenario("short-flows-codel").with_overrides(["duration=1.5",
                                                            "short_flows.0.mean_interarrival=0.3"])
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    names = [p.name for p in (tmp_path / "a").iterdir()]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names,
                                               shallow=False)
    assert not mismatch and not errors and len(match) == 8


def test_seed_changes_short_flow_arrivals():
    a = Simulation(get_scenario("short-flows-drw"))
    b = Simulation(get_scenario("short-flows-drw").with_overrides(["seed=7"]))
    starts = lambda s: [f.start for f in s.flows.values() if f.kind == "short"]
    assert starts(a) != starts(b)


def test_short_flows_finish_with_exact_size():
    cfg = get_scenario("short-flows-drw").with_overrides(["duration=3",
                                                          "short_flows.0.mean_interarrival=0.5"])
    log = run_scenario(cfg)
    shorts = [r for r in log.flows.values() if r.type == "short" and r.start < 2.0]
    assert shorts
    for r in shorts:
        assert r.completion is not None and r.delivered == 500_000


def test_single_ue_allocated_matches_total():
    cfg = ScenarioConfig(name="sat", duration=2.0, flows=[FlowSpec("ue0")],
                         ues=[UeSpec("ue0", TraceSpec(base=3e9), "droptail", "drw")])
    log = run_scenario(cfg)
    t = log.rwnd_array("f0", "time_s")
    alloc = log.rwnd_array("f0", "bw_alloc_bps")
    total = log.rwnd_array("f0", "bw_total_bps")
    for w0 in (0.8, 0.9, 1.0):
        m = (t >= w0) & (t < w0 + 1.0)
        assert alloc[m].mean() == pytest.approx(total[m].mean(), rel=0.05)


def test_empty_buffer_rtt_is_core_plus_air():
    cfg = ScenarioConfig(name="e", duration=0.5, flows=[FlowSpec("ue0")],
                         ues=[UeSpec("ue0", TraceSpec(base=3e9), "droptail", "drw")])
    sim = Simulation(cfg)
    sim.run()
    rw = sim.flows["f0"].rwnd
    # 2 x 20 ms core + 2 x 1 ms air, plus at most one slot of scheduling wait
    assert 0.042 - 1e-9 <= rw.rtt_min <= 0.042 + 2e-4


@pytest.mark.slow
def test_human_droptail_sender_sees_no_loss():
    cfg, log, _ = run_builtin("human-droptail")
    assert log.sender_losses() == 0
    q = log.queue_array("ue0", "length_pkts")
    t = log.queue_array("ue0", "time_s")
    for start, end in log.blocked["ue0"]:
        before = q[np.searchsorted(t, start) - 1]
        during = q[(t >= start) & (t <= end)].max()
        assert during > 1.8 * before


@pytest.mark.slow
def test_building_codel_drops_and_depressed_goodput():
    cfg, log, _ = run_builtin("building-codel")
    drops = [r for r in log.drops if 2.0 <= r[0] <= 4.5]
    assert len(drops) > 1
    _, dt, _ = run_builtin("building-droptail")
    after = lambda lg: lg.flow_array("f0", "goodput_bps")[
        (lg.flow_array("f0", "time_s") > 4.2) & (lg.flow_array("f0", "time_s") < 6.0)].mean()
    assert after(log) < after(dt)
    assert peak_rtt(log, "f0") < peak_rtt(dt, "f0")


@pytest.mark.slow
@pytest.mark.parametrize("name", ["human-droptail", "human-codel", "human-drw",
                                  "building-droptail", "building-codel", "building-drw"])
def test_goodput_bounded_by_capacity(name):
    cfg, log, _ = run_builtin(name)
    t = log.queue_array("ue0", "time_s")
    cap = log.queue_array("ue0", "capacity_bps")
    carried = np.sum(cap) * cfg.sample_interval
    assert log.flows["f0"].delivered * 8 <= carried * 1.01
