"""Failure/repair traces: loading, synthesis and the statistics built on them.

Times are float seconds.  An outage ``(node, down_start, down_end)`` makes
the node unavailable on the half-open interval ``[down_start, down_end)``.

Trace CSV layout::

    nodes=4,horizon=86400
    0,1200.5,1800
    0,50000,50600
    2,300,900

Rows are sorted by ``(node_id, down_start)``.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InsufficientHistoryError, TraceFormatError


class Outage(NamedTuple):
    node: int
    start: float
    end: float


class RateEstimate(NamedTuple):
    lam: float
    theta: float
    mttf: float
    mttr: float

    def to_dict(self):
        return {"lambda": self.lam, "theta": self.theta, "mttf": self.mttf, "mttr": self.mttr}


class ExecutionSegment(NamedTuple):
    start: float
    dur: float

    @property
    def end(self):
        return self.start + self.dur


@dataclass(frozen=True)
class FailureTrace:
    node_count: int
    horizon: float
    outages: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "outages", tuple(
            Outage(int(n), float(a), float(b)) for n, a, b in self.outages))
        _validate(self.node_count, self.horizon, self.outages)

    @cached_property
    def _arrays(self):
        if not self.outages:
            return np.zeros(0, dtype=int), np.zeros(0), np.zeros(0)
        nodes, starts, ends = zip(*self.outages)
        return np.array(nodes, dtype=int), np.array(starts, float), np.array(ends, float)

    @property
    def nodes(self):
        return self._arrays[0]

    @property
    def starts(self):
        return self._arrays[1]

    @property
    def ends(self):
        return self._arrays[2]

    @cached_property
    def per_node(self):
        """``per_node[k]`` is a ``(starts, ends)`` pair of arrays for node ``k``."""
        out = []
        for k in range(self.node_count):
            mask = self.nodes == k
            out.append((self.starts[mask], self.ends[mask]))
        return tuple(out)

    def is_up(self, node, t):
        starts, ends = self.per_node[node]
        i = np.searchsorted(starts, t, side="right") - 1
        return i < 0 or t >= ends[i]

    def next_failure(self, node, t):
        """First outage start of ``node`` strictly after ``t`` (inf if none)."""
        starts, _ = self.per_node[node]
        i = np.searchsorted(starts, t, side="right")
        return starts[i] if i < len(starts) else np.inf


def _validate(node_count, horizon, outages, linenos=None):
    if node_count < 1:
        raise TraceFormatError("node count must be positive", linenos and linenos[0])
    if not horizon > 0:
        raise TraceFormatError("horizon must be positive", linenos and linenos[0])
    prev = None
    for k, (node, start, end) in enumerate(outages):
        line = linenos[k + 1] if linenos else None
        if not 0 <= node < node_count:
            raise TraceFormatError(f"node id {node} outside 0..{node_count - 1}", line)
        if not end > start:
            raise TraceFormatError(f"down_end {end} <= down_start {start}", line)
        if start < 0 or end > horizon:
            raise TraceFormatError(f"outage [{start}, {end}) outside [0, {horizon}]", line)
        if prev is not None:
            if node < prev.node:
                raise TraceFormatError("rows not sorted by node id", line)
            if node == prev.node and start < prev.end:
                raise TraceFormatError(
                    f"outage starting at {start} overlaps previous outage of node {node}", line)
        prev = Outage(node, start, end)


def parse_trace(text):
    """Parse trace CSV content; errors carry the offending line number."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise TraceFormatError("missing header", 1)
    header = {}
    for part in lines[0].split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise TraceFormatError(f"bad header field {part!r}", 1)
        header[key.strip()] = value.strip()
    try:
        node_count = int(header["nodes"])
        horizon = float(header["horizon"])
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"header needs nodes=<int>,horizon=<seconds> ({exc})", 1) from None

    outages, linenos = [], [1]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise TraceFormatError(f"expected 3 fields, got {len(fields)}", lineno)
        try:
            outages.append(Outage(int(fields[0]), float(fields[1]), float(fields[2])))
        except ValueError as exc:
            raise TraceFormatError(str(exc), lineno) from None
        linenos.append(lineno)
    _validate(node_count, horizon, outages, linenos)
    return FailureTrace(node_count, horizon, outages)


def format_trace(trace):
    rows = [f"nodes={trace.node_count},horizon={trace.horizon!r}"]
    rows += [f"{o.node},{o.start!r},{o.end!r}" for o in trace.outages]
    return "\n".join(rows) + "\n"


def estimate_rates(trace, at, method="between_starts"):
    """Failure and repair rates from the history before ``at``.

    Per node, MTTF is the mean gap between consecutive failure starts (the
    first gap is measured from time 0) and MTTR is the mean length of the
    outages that have ended by ``at``.  Nodes without samples are skipped;
    ``lam`` and ``theta`` are reciprocals of the across-node means.

    ``method="uptime"`` measures MTTF as the mean up-time before each
    failure (gap from the previous repair instead of the previous failure),
    which is the quantity the exponential model's per-processor failure
    rate actually describes.
    """
    if at > trace.horizon:
        raise ValueError(f"at={at} beyond trace horizon {trace.horizon}")
    if method not in ("between_starts", "uptime"):
        raise ValueError(f"unknown method {method!r}")
    mttfs, mttrs = [], []
    for starts, ends in trace.per_node:
        seen = starts < at
        if seen.any():
            s = starts[seen]
            if method == "between_starts":
                prev = np.concatenate(([0.0], s[:-1]))
            else:
                prev = np.concatenate(([0.0], ends[seen][:-1]))
            mttfs.append(np.mean(s - prev))
        done = ends <= at
        if done.any():
            mttrs.append(np.mean(ends[done] - starts[done]))
    if not mttfs or not mttrs:
        raise InsufficientHistoryError(
            f"no complete failure/repair history before t={at}; widen the window")
    mttf = float(np.mean(mttfs))
    mttr = float(np.mean(mttrs))
    if mttf <= 0:
        raise InsufficientHistoryError(f"zero mean time to failure before t={at}")
    return RateEstimate(1.0 / mttf, 1.0 / mttr, mttf, mttr)


def functional_count(trace, t):
    active = np.count_nonzero((trace.starts <= t) & (t < trace.ends))
    return trace.node_count - int(active)


def sample_segment(trace, min_dur, max_dur, rng):
    if not 0 < min_dur <= max_dur <= trace.horizon:
        raise ValueError("need 0 < min_dur <= max_dur <= horizon")
    dur = min_dur if min_dur == max_dur else rng.uniform(min_dur, max_dur)
    start = rng.uniform(0.0, trace.horizon - dur)
    return ExecutionSegment(float(start), float(dur))


def _failure_events(trace, before=None):
    """Per node, the set of distinct failure timestamps (optionally < before)."""
    events = []
    for starts, _ in trace.per_node:
        if before is not None:
            starts = starts[starts < before]
        events.append(starts)
    return events


def _count_events(events, chosen):
    if len(chosen) == 0:
        return 0
    return len(np.unique(np.concatenate([events[k] for k in chosen])))


def avg_failures(trace, n, trials=50, seed=0, before=None):
    """Average failures per processor over random ``n``-subsets of nodes.

    Failure starts that coincide in time across the chosen nodes count as
    a single event.  Trial ``k`` draws from its own substream keyed on
    ``(seed, n, k)``, so trials can be evaluated in any order.
    """
    if not 1 <= n <= trace.node_count:
        raise ValueError(f"n={n} outside 1..{trace.node_count}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    events = _failure_events(trace, before)
    total = 0.0
    for k in range(trials):
        rng = np.random.default_rng([seed, n, k])
        chosen = rng.choice(trace.node_count, size=n, replace=False)
        total += _count_events(events, chosen) / n
    return total / trials


def avg_failures_exhaustive(trace, n, before=None):
    """Same quantity averaged over every ``n``-subset (small traces only)."""
    from itertools import combinations

    events = _failure_events(trace, before)
    vals = [_count_events(events, c) / n for c in combinations(range(trace.node_count), n)]
    return float(np.mean(vals))


def synth_trace(n, lam, theta, horizon, rng):
    """Independent exponential up/down alternation per node, cut at ``horizon``.

    Every node starts up.  An outage that would run past the horizon is
    truncated to end there.
    """
    if n < 1 or not (lam > 0 and theta > 0 and horizon > 0):
        raise ValueError("need n >= 1 and positive rates and horizon")
    outages = []
    for node in range(n):
        t = 0.0
        while True:
            t += rng.exponential(1.0 / lam)
            if t >= horizon:
                break
            end = min(t + rng.exponential(1.0 / theta), horizon)
            outages.append(Outage(node, t, end))
            t = end
    return FailureTrace(n, float(horizon), outages)
