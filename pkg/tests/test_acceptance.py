"""The nine acceptance criteria, one test each, with a PASS/FAIL line per criterion."""
import filecmp
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mmbloat import get_scenario, run_scenario
from mmbloat.analysis import (bound_violations, crossing_time, departure_response,
                              empty_buffer_rtt, peak_rtt, rtt_percentile, steady_min_sojourn,
                              window_delivery_spread)
from mmbloat.aqm import DropTailQueue, QueuedPacket
from mmbloat.channel import constant_trace
from mmbloat.engine import Simulator
from mmbloat.mac import Cell, RoundRobinScheduler, UeContext, serve_slot
from mmbloat.rwnd import DRW, RwndState
from scenario_cache import run_builtin
from test_aqm import random_trace, run_ours, run_ref

FAMILIES = ("human", "building")


def test_c1_bdp_identity(report):
    st_ = RwndState(DRW, bw_total=3e9)
    for v in (0.040, 0.045, 0.045, 0.045, 0.045):
        st_.update_rtt_min(v)
    w = st_.compute_rw(0.0)
    ok = st_.in_region and w == 15_000_000 and isinstance(w, int)
    assert report(1, "BDP identity", ok, f"compute_rw={w} bytes, in_region={st_.in_region}")


@pytest.mark.slow
def test_c2_reno_ramp_time(report):
    cfg, log, _ = run_builtin("reno-ramp")
    t = crossing_time(log, "f0", "cwnd_bytes", 15_000_000)
    ok = abs(t - 200.0) <= 0.02 * 200.0
    assert report(2, "Reno ramp 10 MB -> 15 MB", ok, f"crossed at {t:.2f} s, target 200 s +/- 2%")


def test_c3_codel_conformance(report):
    rng = random.Random(8289)
    mismatches = drops = 0
    for _ in range(10_000):
        ops = random_trace(rng, 100)
        ours, ref = run_ours(ops), run_ref(ops)
        mismatches += ours != ref
        drops += len(ref[1])
    ok = mismatches == 0 and drops > 0
    assert report(3, "CoDel matches reference", ok,
                  f"10000 traces, {mismatches} mismatches, {drops} reference drops")


@pytest.mark.slow
def test_c4_droptail_bufferbloat(report):
    cfg, log, _ = run_builtin("building-droptail")
    start, end = log.blocked["ue0"][0]
    losses = log.sender_losses()
    base = empty_buffer_rtt(log, "f0")
    peak = peak_rtt(log, "f0", start, end)
    ok = losses == 0 and peak >= 10 * base
    assert report(4, "Drop-tail bufferbloat", ok,
                  f"losses={losses}, peak RTT {peak * 1e3:.0f} ms vs empty {base * 1e3:.1f} ms "
                  f"({peak / base:.1f}x)")


@pytest.mark.slow
def test_c5_codel_vs_droptail(report):
    parts, ok = [], True
    for fam in FAMILIES:
        ccfg, codel, _ = run_builtin(f"{fam}-codel")
        _, drop, _ = run_builtin(f"{fam}-droptail")
        pc, pd = rtt_percentile(codel, "f0"), rtt_percentile(drop, "f0")
        smin = steady_min_sojourn(codel, "ue0")
        ok &= pc < pd and smin <= 2 * ccfg.codel_target
        parts.append(f"{fam}: p95 {pc * 1e3:.0f} < {pd * 1e3:.0f} ms, "
                     f"steady min sojourn {smin * 1e3:.2f} ms")
    assert report(5, "CoDel vs Drop-tail latency", ok, "; ".join(parts))


@pytest.mark.slow
def test_c6_drw_dominance(report):
    parts, ok = [], True
    for fam in FAMILIES:
        _, codel, _ = run_builtin(f"{fam}-codel")
        _, drw, _ = run_builtin(f"{fam}-drw")
        gc, gd = codel.flows["f0"].mean_goodput(), drw.flows["f0"].mean_goodput()
        pc, pd = rtt_percentile(codel, "f0"), rtt_percentile(drw, "f0")
        ok &= gd >= gc and pd <= 1.2 * pc
        parts.append(f"{fam}: goodput {gd / 1e9:.2f} >= {gc / 1e9:.2f} Gbps, "
                     f"p95 {pd * 1e3:.0f} <= 1.2 x {pc * 1e3:.0f} ms")
    assert report(6, "DRW dominance", ok, "; ".join(parts))


def _departures(cfg):
    out = []
    for ue in cfg.ues:
        if ue.detach is None or ue.detach >= cfg.duration:
            continue
        t = ue.detach
        remaining = [u.id for u in cfg.ues
                     if u.attach <= t and (u.detach is None or u.detach > t)]
        later = [u.detach for u in cfg.ues if u.detach is not None and u.detach > t]
        out.append((t, ue.id, remaining, min(later + [cfg.duration])))
    return sorted(out)


@pytest.mark.slow
def test_c7_rw_bounds(report):
    parts, ok = [], True
    for name in ("four-ue-drw", "ue-churn-drw"):
        cfg, log, recs = run_builtin(name, record=True)
        ue_of = {fid: rec for fid, rec in recs.items()}
        flow_ue = {fid: log.flows[fid].ue_id for fid in recs}
        adverts = sum(len(r.rows) for r in recs.values())
        bad = sum(bound_violations(r, cfg.mss) for r in recs.values())
        ok &= bad == 0 and adverts > 0
        parts.append(f"{name}: {bad}/{adverts} outside bounds")
        for t, gone, remaining, until in _departures(cfg):
            for fid, rec in ue_of.items():
                if flow_ue[fid] not in remaining:
                    continue
                resp = departure_response(rec, t, len(remaining), until)
                fine = resp is not None and resp.reaches_upper(2.0) and resp.settled(0.10)
                ok &= fine
                parts.append(f"{gone}@{t:g}s {fid}: upper after "
                             f"{resp.time_to_upper * 1e3:.0f} ms "
                             f"(2 RTT = {2 * resp.rtt_before * 1e3:.0f} ms), "
                             f"median/lower {resp.settle_median_ratio:.3f}, "
                             f"in band {resp.settle_in_band:.2f}")
    assert report(7, "RW bounds and departure response", ok, "; ".join(parts))


_fairness = {"e2e": 0, "e2e_worst": 0.0, "air": 0, "air_worst": 0.0}


@settings(max_examples=25, deadline=None)
@given(st.floats(1e8, 3e9), st.sampled_from([1000, 1400, 1500, 9000]), st.floats(0.0, 0.4))
def _fair_delivered(cap, size, w0):
    """Packets delivered to the UEs through the cell, in grants that fit whole packets."""
    grant = int(100e-6 * cap)
    assume(8 * size <= grant)
    sim = Simulator()
    cell = Cell(sim)
    for i in range(4):
        cell.add_ue(UeContext(i, DropTailQueue(10**6), constant_trace(cap)))
    rows = []
    cell.deliver = lambda u, pkts: rows.append((sim.now, u, 8 * sum(p.bytes for p in pkts)))
    n = int(cap * 0.6 / (8 * size) / 4) + 10
    for i in range(4):
        cell.enqueue(i, [QueuedPacket(size, seq=k) for k in range(n)])
    sim.run_until(w0 + 0.1 + 0.002)
    a = np.array(rows, dtype=float)
    m = (a[:, 0] >= w0) & (a[:, 0] < w0 + 0.1)
    per_ue = [a[m & (a[:, 1] == i), 2].sum() for i in range(4)]
    spread = (max(per_ue) - min(per_ue)) / grant
    _fairness["e2e"] += 1
    _fairness["e2e_worst"] = max(_fairness["e2e_worst"], spread)
    assert spread <= 1.0


@settings(max_examples=15, deadline=None)
@given(st.floats(1e7, 3e9), st.sampled_from([64, 1000, 1400, 1500, 9000]))
def _fair_airtime(cap, size):
    """Bits carried over the air per UE, any grant size, every 100 ms window start."""
    sched = RoundRobinScheduler()
    ues = [UeContext(i, DropTailQueue(10**6), constant_trace(cap)) for i in range(4)]
    slots = 3000
    need = int(cap * slots * 100e-6 / (8 * size) / 4) + 10
    for ue in ues:
        for k in range(need):
            ue.queue.enqueue(QueuedPacket(size, seq=k), 0.0)
    served = np.zeros((slots, 4))
    for k in range(slots):
        t = k * 100e-6
        for g in sched.allocate(ues, t):
            ue = ues[g.ue_id]
            before = ue.served_bits
            serve_slot(ue, g, t)
            served[k, g.ue_id] = ue.served_bits - before
    csum = np.vstack([np.zeros(4), np.cumsum(served, axis=0)])
    windows = csum[1000:] - csum[:-1000]
    spread = window_delivery_spread(windows) / int(100e-6 * cap)
    _fairness["air"] += 1
    _fairness["air_worst"] = max(_fairness["air_worst"], spread)
    assert spread <= 1.0


def test_c8_round_robin_fairness(report):
    ok = True
    for case in (_fair_delivered, _fair_airtime):
        try:
            case()
        except AssertionError:
            ok = False
    assert report(8, "round-robin fairness", ok,
                  f"delivered packets: {_fairness['e2e']} cases, worst 100 ms spread "
                  f"{_fairness['e2e_worst']:.2f} grants; air bits: {_fairness['air']} cases, "
                  f"worst over all window starts {_fairness['air_worst']:.2f} grants")


@pytest.mark.slow
@pytest.mark.parametrize("name", ["short-flows-codel"])
def test_c9_determinism(name, tmp_path, report):
    cfg = get_scenario(name)
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names,
                                               shallow=False)
    ok = not mismatch and not errors and len(match) == len(names) > 0
    assert report(9, "determinism", ok,
                  f"{name}: {len(match)}/{len(names)} files byte-identical")
