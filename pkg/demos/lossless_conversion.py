"""
Lossless conversion of a random quant-clip network
==================================================

Draw a small conv/pool/fc network with batch norm, fold everything into an
SNN and check that the spike rates reproduce the ANN activations.
"""

import numpy as np

from spikeconv import ann_forward, convert, run_snn
from spikeconv.fixtures import random_ann

rng = np.random.default_rng(0)
T = 6
ann, x = random_ann(rng, L=T, template=("conv", "pool", "fc", "out"))
print("architecture:", ann.metadata["architecture"])

# The ANN is quantized with L = T levels, the IF lattice size.
snn = convert(ann, T=T, kind="IF", T_delay=T)
trace = run_snn(snn, x)
reference = ann_forward(ann, x)

for layer, rate in zip(snn.hidden_layers, trace.rates):
    act = reference.activations[layer.source_index]
    err = np.abs(rate * layer.scale - act).max()
    print(f"layer {layer.source_index} ({layer.op}): {rate.size} neurons, max |rate*lambda - a| = {err:.1e}")

print("ANN output:", np.round(reference.output, 6))
print("SNN output:", np.round(trace.output, 6))

###############################################################################
# Neurons with non-negative total drive end with a residual in [0, 1),
# because lambda was calibrated above the largest pre-activation. Neurons
# with negative drive never fire and simply keep that drive.

for res, drive in zip(trace.residuals, trace.drives):
    active = res[drive >= 0]
    print(f"{active.size} driven neurons, residual range [{active.min():.3f}, {active.max():.3f}]")
