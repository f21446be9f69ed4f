"""Capacity seen by a UE when a person walks past, and when a building cuts LoS.

Run: python demos/02_blockage_traces.py [out.csv]
"""
import sys

from mmbloat.channel import building_blockage_trace, human_blockage_trace

human = human_blockage_trace(3e9, [0.8, 4.0, 6.7])
building = building_blockage_trace(2e9, 50e6, 2.0, 2.0)

print(" time   human (Mbps)  building (Mbps)")
for t in (0.0, 0.8, 0.9, 1.0, 1.2, 1.4, 1.6, 2.0, 3.0, 4.0, 4.2, 5.0):
    print(f"{t:5.1f}  {human.capacity_at(t) / 1e6:12.1f}  {building.capacity_at(t) / 1e6:15.1f}")

print("human blocked intervals:", [(round(a, 2), round(b, 2)) for a, b in human.blocked_intervals()])
if len(sys.argv) > 1:
    human.to_csv(sys.argv[1])
    print("breakpoints written to", sys.argv[1])
