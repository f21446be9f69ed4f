"""Drop-tail, CoDel and DRW on the same building blockage.

Drop-tail keeps every packet and lets the base-station queue absorb the whole
window, so the RTT explodes during NLoS. CoDel cuts the delay by dropping, and
the sender's recovery collapses the rate. DRW shrinks the advertised window
instead of dropping.

Run: python demos/03_queue_disciplines.py [human|building]
"""
import sys

from mmbloat import get_scenario, run_scenario
from mmbloat.analysis import empty_buffer_rtt, peak_rtt, rtt_percentile

family = sys.argv[1] if len(sys.argv) > 1 else "building"
print(f"{'scenario':<20} {'goodput':>10} {'p95 RTT':>9} {'peak RTT':>9} {'losses':>7}")
for variant in ("droptail", "codel", "drw"):
    log = run_scenario(get_scenario(f"{family}-{variant}"))
    rec = log.flows["f0"]
    print(f"{log.scenario:<20} {rec.mean_goodput() / 1e9:7.2f} Gb/s "
          f"{rtt_percentile(log, 'f0') * 1e3:6.0f} ms {peak_rtt(log, 'f0') * 1e3:6.0f} ms "
          f"{log.sender_losses():7d}")
print(f"empty-buffer RTT: {empty_buffer_rtt(log, 'f0') * 1e3:.1f} ms")
