"""Step-level timing model of the delay-spike inference pipeline.

Each layer owns two unit resources, an accumulate phase and a fire phase,
each busy for ``T`` steps per sample. A layer starts firing ``T_delay``
steps after it starts accumulating, and its spikes go straight into the
next layer, which starts accumulating at that moment. A new sample enters
layer 1 every ``T`` steps. Intervals are half-open ``[start, end)``.

With ``n`` layers the first sample completes at ``T + n * T_delay`` and
later samples follow every ``T`` steps.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

ACCUMULATE = "accumulate"
FIRE = "fire"


@dataclass(frozen=True)
class Entry:
    sample: int
    layer: int
    phase: str
    start: int
    end: int


@dataclass
class Conflict:
    kind: str
    layer: int
    samples: tuple[int, ...]
    detail: str


@dataclass
class PipelineSchedule:
    n_layers: int
    T: int
    T_delay: int
    n_samples: int
    entries: list[Entry] = field(default_factory=list)

    def phase(self, sample: int, layer: int, phase: str) -> Entry:
        for e in self.entries:
            if (e.sample, e.layer, e.phase) == (sample, layer, phase):
                return e
        raise KeyError((sample, layer, phase))

    def completion(self, sample: int) -> int:
        return max(e.end for e in self.entries if e.sample == sample)

    @property
    def makespan(self) -> int:
        return max((e.end for e in self.entries), default=0)


def build_schedule(n_layers: int, T: int, T_delay: int, n_samples: int = 1) -> PipelineSchedule:
    if n_layers < 1 or T < 1 or n_samples < 1:
        raise ValueError("n_layers, T and n_samples must all be >= 1")
    if not 0 <= T_delay <= T:
        raise ValueError(f"T_delay must lie in [0, T={T}], got {T_delay}")
    entries = []
    for k in range(1, n_samples + 1):
        acc_start = (k - 1) * T
        for layer in range(1, n_layers + 1):
            fire_start = acc_start + T_delay
            entries.append(Entry(k, layer, ACCUMULATE, acc_start, acc_start + T))
            entries.append(Entry(k, layer, FIRE, fire_start, fire_start + T))
            acc_start = fire_start
    return PipelineSchedule(n_layers, T, T_delay, n_samples, entries)


def validate_schedule(schedule: PipelineSchedule) -> list[Conflict]:
    """Return every violated timing invariant; empty means the schedule is sound.

    Phase-offset violations are reported per (sample, layer). Double booking
    is reported once per layer and pair of samples, naming the phases that
    collide.
    """
    conflicts = []
    T, T_delay = schedule.T, schedule.T_delay
    by_unit = defaultdict(list)
    phases = defaultdict(dict)
    for e in schedule.entries:
        by_unit[(e.layer, e.phase)].append(e)
        phases[(e.sample, e.layer)][e.phase] = e

    for (sample, layer), ph in sorted(phases.items()):
        problems = []
        for name in (ACCUMULATE, FIRE):
            if name not in ph:
                problems.append(f"missing {name} phase")
            elif ph[name].end - ph[name].start != T:
                problems.append(f"{name} spans {ph[name].end - ph[name].start} steps, expected {T}")
        if not problems and ph[FIRE].start != ph[ACCUMULATE].start + T_delay:
            problems.append(f"fire starts at {ph[FIRE].start}, expected {ph[ACCUMULATE].start + T_delay}")
        if problems:
            conflicts.append(Conflict("phase-offset", layer, (sample,), "; ".join(problems)))

    clashes = defaultdict(list)
    for (layer, phase), entries in sorted(by_unit.items()):
        entries = sorted(entries, key=lambda e: (e.start, e.sample))
        for i, a in enumerate(entries):
            for b in entries[i + 1:]:
                if b.start >= a.end:
                    break
                if a.sample != b.sample:
                    pair = tuple(sorted((a.sample, b.sample)))
                    clashes[(layer, pair)].append(f"{phase} [{max(a.start, b.start)}, {min(a.end, b.end)})")
    for (layer, pair), details in sorted(clashes.items()):
        conflicts.append(Conflict("double-booked", layer, pair, ", ".join(details)))
    return conflicts


def summarize(schedule: PipelineSchedule) -> dict:
    completions = [schedule.completion(k) for k in range(1, schedule.n_samples + 1)]
    gaps = [b - a for a, b in zip(completions, completions[1:])]
    return {
        "n_layers": schedule.n_layers,
        "T": schedule.T,
        "T_delay": schedule.T_delay,
        "n_samples": schedule.n_samples,
        "latency_first_sample": completions[0],
        "steady_throughput_period": gaps[-1] if gaps else None,
        "completions": completions,
        "makespan": schedule.makespan,
    }


def _sample_symbol(sample: int) -> str:
    return "0123456789abcdefghijklmnopqrstuvwxyz"[sample % 36]


def gantt(schedule: PipelineSchedule) -> list[str]:
    """Text Gantt chart: two rows per layer, one column per step, cells show the sample id."""
    width = schedule.makespan
    label_width = len(f"L{schedule.n_layers} fire")
    rows = [" " * (label_width + 1) + "".join(str(t % 10) for t in range(width))]
    for layer in range(1, schedule.n_layers + 1):
        for phase, tag in ((ACCUMULATE, "acc"), (FIRE, "fire")):
            cells = ["."] * width
            for e in schedule.entries:
                if e.layer == layer and e.phase == phase:
                    for t in range(e.start, e.end):
                        cells[t] = "#" if cells[t] != "." else _sample_symbol(e.sample)
            rows.append(f"{f'L{layer} {tag}':<{label_width}} " + "".join(cells))
    return rows
