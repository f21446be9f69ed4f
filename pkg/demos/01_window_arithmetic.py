"""Why a 3 Gbps, 40 ms path needs a 15 MB window, and how slowly Reno gets there.

Run: python demos/01_window_arithmetic.py
"""
from mmbloat import get_scenario, run_scenario
from mmbloat.analysis import crossing_time
from mmbloat.rwnd import DRW, RwndState, bdp_bytes

print(f"BDP at 3 Gbps x 40 ms: {bdp_bytes(3e9, 0.040):,} bytes")

# a receiver that has seen a 40 ms floor and is currently 5 ms above it
rw = RwndState(DRW, bw_total=3e9)
for rtt in (0.040, 0.045, 0.045, 0.045, 0.045):
    rw.update_rtt_min(rtt)
print(f"DRW advertises {rw.compute_rw(0.0):,} bytes (in low-latency region: {rw.in_region})")

# after a halving from 15 MB, additive increase adds one 1 KB segment per RTT
cfg = get_scenario("reno-ramp")
log = run_scenario(cfg)
t = crossing_time(log, "f0", "cwnd_bytes", 15_000_000)
print(f"Reno, 1 KB segments, 40 ms RTT: 10 MB -> 15 MB took {t:.1f} s of simulated time")
print(f"closed form: 5,000 segments x 40 ms = {5000 * 0.040:.0f} s")
