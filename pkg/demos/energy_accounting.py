"""
Instruction-level energy of one inference
=========================================

Each incoming spike costs one accumulate per target neuron, and every
hidden neuron pays one fire phase per step whether it spikes or not.
"""

import numpy as np

from spikeconv import IF, TDIF, convert, energy_report, phase_cost, run_snn, tally_inference
from spikeconv.fixtures import random_ann

for kind in (IF, TDIF):
    print(f"{kind:>4}: accumulate {phase_cost(kind, 'accumulate')} pJ, "
          f"fire {phase_cost(kind, 'fire', True)} pJ with a spike, {phase_cost(kind, 'fire', False)} pJ without")

rng = np.random.default_rng(3)
T = 5
ann, x = random_ann(rng, L=T)

ledgers = {}
for kind in (IF, TDIF):
    snn = convert(ann, T, kind)
    ledgers[kind] = tally_inference(run_snn(snn, x), snn)

###############################################################################
# The same network converted both ways, with the IF run as the reference.

for kind, ledger in ledgers.items():
    report = energy_report(ledger, ann.metadata["architecture"], ledgers[IF], "IF")
    print(f"\n{kind}: {report['synaptic_events']} synaptic events, spiking rate "
          f"{report['average_spiking_rate']:.3f}, {report['total_pj']:.1f} pJ, ratio {report['energy_ratio']:.2f}")
