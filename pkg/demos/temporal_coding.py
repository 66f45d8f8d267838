"""
Binary-weighted spike trains
============================

A tdIF neuron scales step ``t`` by ``2**(T - t)``, so a train of ``T``
spikes spells out a ``T``-bit number. With the same number of steps it
resolves ``2**T`` levels where an IF neuron resolves ``T + 1``.
"""

import itertools

from spikeconv import TDIF, IF, delay_spike_run, weighted_rate

T = 3
for kind in (IF, TDIF):
    rates = sorted({weighted_rate(list(bits), kind).item() for bits in itertools.product((0, 1), repeat=T)})
    print(f"{kind:>4} at T={T}: {len(rates)} rates", [round(r, 3) for r in rates])

# Greedy firing against thresholds 4, 2, 1 writes the accumulated drive in binary.
for drive in (0, 3, 5, 6.5, 9):
    spikes, residual = delay_spike_run(TDIF, 1.0, T, T, [[drive / 7]] * T)
    bits = "".join(str(int(s)) for s in spikes[:, 0])
    print(f"drive {drive:>4}: spikes {bits}, residual {round(residual.item(), 9) + 0.0:.2f}")
