"""Whole-slot round robin: equal airtime for backlogged UEs, none for idle ones.

Run: python demos/05_round_robin.py
"""
from collections import Counter

from mmbloat.aqm import DropTailQueue, QueuedPacket
from mmbloat.channel import constant_trace
from mmbloat.mac import DciGrant, RoundRobinScheduler, UeContext, serve_slot

ues = [UeContext(f"ue{i}", DropTailQueue(10**6), constant_trace(3e9)) for i in range(4)]
for ue in ues[:2]:
    for k in range(140_000):
        ue.queue.enqueue(QueuedPacket(1400, seq=k), 0.0)

sched = RoundRobinScheduler()
bits = Counter()
for k in range(10_000):
    for g in sched.allocate(ues, k * 100e-6):
        serve_slot(ues[int(g.ue_id[2:])], g, k * 100e-6)
        bits[g.ue_id] += g.tb_bits
print("1 s, 2 of 4 UEs backlogged:", {u: f"{b / 1e9:.2f} Gb" for u, b in sorted(bits.items())})

# a 12,000-bit grant carries one 1,400-byte packet; the other 800 bits are lost
ue = UeContext("x", DropTailQueue(), constant_trace(1e9))
for k in range(3):
    ue.queue.enqueue(QueuedPacket(1400, seq=k), 0.0)
out = serve_slot(ue, DciGrant("x", 0.0, 12_000), 0.0)
print(f"12,000-bit grant: {len(out)} packet, {ue.granted_bits - ue.delivered_bits} bits unused")
