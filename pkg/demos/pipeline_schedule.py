"""
Layer pipelining with a firing delay
====================================

Every layer waits ``T_delay`` steps before it starts to fire, and the next
layer starts accumulating at the same moment. Three samples flow through a
three-layer network below.
"""

from spikeconv import build_schedule, gantt, summarize, validate_schedule

schedule = build_schedule(n_layers=3, T=8, T_delay=4, n_samples=3)
print("\n".join(gantt(schedule)))

summary = summarize(schedule)
print("\nfirst sample done at", summary["latency_first_sample"], "(T + n * T_delay = 8 + 3 * 4)")
print("then one sample every", summary["steady_throughput_period"], "steps")
print("conflicts:", validate_schedule(schedule))

# With T_delay = T the latency grows to T * (n + 1).
for T_delay in (0, 2, 8):
    s = summarize(build_schedule(3, 8, T_delay))
    print(f"T_delay={T_delay}: latency {s['latency_first_sample']}")
