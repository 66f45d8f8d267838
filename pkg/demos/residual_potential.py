"""
Spike order and the residual membrane potential
===============================================

One IF neuron receives three input trains with rates 0.6, 0.4 and 0.4
through weights 1, 0.5 and -1. Its ANN counterpart outputs 0.4, so five
time-steps should carry exactly two output spikes.

A plain IF neuron fires as soon as its potential crosses the threshold, so
the count depends on where the input spikes sit in time. Here we search
every placement and then repeat the run with the full delay.
"""

from spikeconv import find_irregular_patterns, pattern_outcomes
from spikeconv.fixtures import TOY_RATES, TOY_WEIGHTS

found = find_irregular_patterns(TOY_RATES, TOY_WEIGHTS, theta=1.0, T=5)
print(f"target rate {found.target_rate}, {found.n_patterns} placements searched")

# Three witnesses: the lossless case, an overflow and a negative residual.
for label, w in (("zero residual", found.uniform), ("overflow", found.overflow), ("negative", found.negative)):
    print(f"\n{label}: rate {w.rate:.1f}, residual {w.residual:+.2f}")
    for i, row in enumerate(w.inputs.values.T.astype(int)):
        print(f"  input {i}: {row.tolist()}")
    print(f"  output : {w.output.values.astype(int).tolist()}")

###############################################################################
# Accumulating all five steps before firing removes the order dependence.

_, outputs, residuals = pattern_outcomes(TOY_RATES, TOY_WEIGHTS, 1.0, 5, T_delay=5)
print("\nwith T_delay=5:")
print("  distinct rates    :", sorted(set(outputs.mean(axis=1).round(12).tolist())))
print("  largest |residual|:", abs(residuals).max())
