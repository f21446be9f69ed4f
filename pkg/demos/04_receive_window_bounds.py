"""DRW advertisements as UEs leave a shared cell.

Each remaining UE's window bounces between rtt_min x total rate (upper) and
rtt_min x its allocated share (lower). When a neighbour leaves, the window
jumps to the upper bound and then falls back to the new, larger lower bound.

Run: python demos/04_receive_window_bounds.py
"""
from mmbloat import get_scenario
from mmbloat.analysis import attach_recorders, bound_violations, departure_response
from mmbloat.harness import Simulation

cfg = get_scenario("ue-churn-drw")
sim = Simulation(cfg)
recs = attach_recorders(sim)
log = sim.run()

for fid, rec in recs.items():
    print(f"{fid}: {len(rec.rows):,} adverts, {bound_violations(rec, cfg.mss)} outside bounds")

for leave, who, nxt in ((7.0, "ue1", 8.0), (8.0, "ue2", 9.0), (9.0, "ue3", cfg.duration)):
    remaining = [u.id for u in cfg.ues if u.attach <= leave and (u.detach or 1e9) > leave]
    print(f"\n{who} leaves at {leave:g} s, {len(remaining)} UE(s) remain")
    for fid, rec in recs.items():
        if log.flows[fid].ue_id not in remaining:
            continue
        r = departure_response(rec, leave, len(remaining), nxt)
        print(f"  {fid}: upper bound after {r.time_to_upper * 1e3:.0f} ms, "
              f"median / new lower bound {r.settle_median_ratio:.3f}, "
              f"{r.settle_in_band:.0%} of the time within 10%")
