"""500 KB transfers arriving beside a long download, per queue discipline.

Run: python demos/06_short_flows.py
"""
import numpy as np

from mmbloat import get_scenario, run_scenario

for variant in ("droptail", "codel", "drw"):
    log = run_scenario(get_scenario(f"short-flows-{variant}"))
    fct = [r.completion - r.start for r in log.flows.values()
           if r.type == "short" and r.completion is not None]
    long = log.flows["f0"]
    print(f"{log.scenario:<20} long flow {long.mean_goodput() / 1e9:5.2f} Gb/s; "
          f"{len(fct)} short flows, median completion {np.median(fct) * 1e3:6.0f} ms, "
          f"worst {max(fct) * 1e3:6.0f} ms")
