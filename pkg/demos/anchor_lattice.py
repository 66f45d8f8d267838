"""
How many box sizes can a rate-coded detector regress?
=====================================================

A detector head predicts ``w = anchor * exp(v)`` and ``h = anchor * exp(-v)``
from a rate ``v``. With rates restricted to a lattice, only a handful of
sizes are reachable.
"""

from spikeconv import IF, TDIF, anchor_lattice_demo

for T in range(1, 9):
    counts = [anchor_lattice_demo(T, kind=kind).cardinality for kind in (IF, TDIF)]
    print(f"T={T}: IF {counts[0]:>3} sizes, tdIF {counts[1]:>3} sizes")

for w, h in anchor_lattice_demo(4, anchor_w=32, anchor_h=32).sizes:
    print(f"  {w:6.2f} x {h:6.2f}")
