"""Trace-driven replay of malleable execution and model-efficiency scoring.

:func:`simulate` replays one execution segment against a failure trace:
the application runs on ``rp[f]`` of the ``f`` functional nodes (lowest
ids first), alternates ``I`` seconds of computation with a ``C_a`` second
checkpoint, and when one of its nodes fails it rolls back to the last
checkpoint, reconfigures and pays the recovery cost ``R_{k,l}``.  Only work
covered by a completed checkpoint counts.

:func:`mc_chain_oracle` samples the analytic model's execution rules
directly (exponential failures, independent spare processors) and is used
to cross-check :func:`mallckpt.chain.uwt`.
"""
import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .chain import build_chain
from .errors import InsufficientHistoryError, SimulationError
from .trace import ExecutionSegment, estimate_rates, sample_segment


class TimelineEvent(NamedTuple):
    t: float
    event: str      # start, checkpoint, failure, recover, wait, end
    procs: int


class SimulationReport(NamedTuple):
    uw: float
    timeline: list
    segment: ExecutionSegment
    interval: float

    def to_dict(self):
        return {"uw": self.uw, "interval_s": self.interval,
                "segment": {"start": self.segment.start, "dur": self.segment.dur},
                "events": len(self.timeline)}


class SegmentEfficiency(NamedTuple):
    segment: ExecutionSegment
    i_model: float
    uw_model: float
    i_sim: float
    uw_highest: float
    pd: float

    @property
    def efficiency(self):
        return 100.0 - self.pd


class EfficiencyReport(NamedTuple):
    segments: list
    mean_pd: float
    min_pd: float
    max_pd: float

    @property
    def efficiency(self):
        return 100.0 - self.mean_pd

    def to_dict(self):
        rows = [{"start": s.segment.start, "dur": s.segment.dur, "i_model": s.i_model,
                 "uw_model": s.uw_model, "i_sim": s.i_sim, "uw_highest": s.uw_highest,
                 "pd": s.pd, "efficiency": s.efficiency} for s in self.segments]
        return {"segments": rows,
                "summary": {"mean_pd": self.mean_pd, "min_pd": self.min_pd,
                            "max_pd": self.max_pd, "mean_efficiency": self.efficiency,
                            "count": len(rows)}}


def _first_repair(trace, t, pool):
    """Earliest end among outages of nodes ``< pool`` covering ``t``."""
    covering = (trace.nodes < pool) & (trace.starts <= t) & (trace.ends > t)
    return float(trace.ends[covering].min())


def simulate(trace, segment, profile, rp, interval, timeline=False):
    """Replay ``segment`` with checkpoint interval ``interval``.

    Events of the replay are recorded only when ``timeline`` is true, since
    a long segment with a short interval produces many checkpoints.
    Events are ordered by time; a failure and the reconfiguration it
    triggers share a timestamp.
    """
    segment = ExecutionSegment(float(segment[0]), float(segment[1]))
    if segment.start < 0 or segment.dur < 0 or segment.end > trace.horizon:
        raise SimulationError(f"segment [{segment.start}, {segment.end}] outside "
                              f"trace horizon {trace.horizon}")
    if not interval > 0:
        raise SimulationError("interval must be positive")
    if rp.n > trace.node_count or rp.n > profile.n_max:
        raise SimulationError("rp covers more processors than the trace or profile")

    events = []
    note = events.append if timeline else (lambda ev: None)
    t, end = segment.start, segment.end
    uw = 0.0
    k = None      # processor count of the latest completed checkpoint
    nodes = range(rp.n)      # the first rp.n nodes form the pool

    while t < end:
        up = [v for v in nodes if trace.is_up(v, t)]
        if not up:
            note(TimelineEvent(t, "wait", 0))
            t = min(_first_repair(trace, t, rp.n), end)
            continue
        a = rp[len(up)]
        fail_at = min(trace.next_failure(v, t) for v in up[:a])
        stop = min(fail_at, end)
        if k is None:
            k = a
            note(TimelineEvent(t, "start", a))
        else:
            note(TimelineEvent(t, "recover", a))
            t += profile.recov_cost(k, a)
            if t >= stop:
                if fail_at < end:
                    note(TimelineEvent(fail_at, "failure", a))
                t = stop
                continue
        cycle = interval + profile.ckpt_cost(a)
        done = math.floor((stop - t) / cycle)
        if done > 0:
            uw += profile.work_rate(a) * interval * done
            k = a
            if timeline:
                events.extend(TimelineEvent(t + j * cycle, "checkpoint", a)
                              for j in range(1, done + 1))
        if fail_at < end:
            note(TimelineEvent(fail_at, "failure", a))
        t = stop
    note(TimelineEvent(end, "end", 0))
    return SimulationReport(uw, events, segment, float(interval))


def timeline_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_s", "event", "procs"])
    for ev in report.timeline:
        writer.writerow([repr(float(ev.t)), ev.event, ev.procs])
    return buf.getvalue()


def best_interval_by_sim(trace, segment, profile, rp, candidates):
    """Candidate interval with the highest replayed UW; ties go to the smaller."""
    if len(candidates) == 0:
        raise SimulationError("no candidate intervals")
    best = None
    for interval in sorted(set(float(c) for c in candidates)):
        uw = simulate(trace, segment, profile, rp, interval).uw
        if best is None or uw > best[1]:
            best = (interval, uw)
    return best


def percent_difference(uw_highest, uw_model):
    if uw_highest <= 0:
        return 0.0
    return max(100.0 * (uw_highest - uw_model) / uw_highest, 0.0)


def segment_efficiency(trace, segment, profile, rp, i_model, candidate_grid):
    """Score one segment; ``i_model`` is always added to the candidates."""
    candidates = sorted(set(float(c) for c in candidate_grid) | {float(i_model)})
    uw_model = simulate(trace, segment, profile, rp, i_model).uw
    i_sim, uw_highest = best_interval_by_sim(trace, segment, profile, rp, candidates)
    return SegmentEfficiency(ExecutionSegment(*segment), float(i_model), uw_model, i_sim,
                             uw_highest, percent_difference(uw_highest, uw_model))


def summarize(rows):
    if not rows:
        raise SimulationError("no segments to summarize")
    rows = sorted(rows, key=lambda r: r.segment.start)
    pds = [r.pd for r in rows]
    return EfficiencyReport(rows, float(np.mean(pds)), min(pds), max(pds))


def model_efficiency(trace, segments, profile, rp, recommendation, candidate_grid):
    """Percent of replayed work lost by using the model's interval.

    ``recommendation`` is a single recommendation (or ``i_model`` value)
    used for every segment, or a sequence with one entry per segment.
    """
    if not segments:
        raise SimulationError("empty segment list")
    recs = recommendation if isinstance(recommendation, (list, tuple)) else \
        [recommendation] * len(segments)
    if len(recs) != len(segments):
        raise SimulationError("need one recommendation per segment")
    rows = [segment_efficiency(trace, seg, profile, rp, getattr(r, "i_model", r),
                               candidate_grid)
            for seg, r in zip(segments, recs)]
    return summarize(rows)


def default_grid(i_min=300.0, steps_per_doubling=4, doublings=10):
    """Geometric candidate intervals ``i_min * 2**(k / steps_per_doubling)``."""
    ks = np.arange(steps_per_doubling * doublings + 1)
    return (i_min * 2.0 ** (ks / steps_per_doubling)).tolist()


def draw_segments(trace, count, dur_min, dur_max, rng, max_tries=None):
    """Sample ``count`` segments whose start has usable failure history.

    Segments starting before any rate estimate is possible are redrawn
    from the same stream, so the result depends only on the seed.
    """
    max_tries = max_tries or 100 * count
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        seg = sample_segment(trace, dur_min, dur_max, rng)
        try:
            rates = estimate_rates(trace, seg.start)
        except InsufficientHistoryError:
            continue
        out.append((seg, rates))
    if len(out) < count:
        raise InsufficientHistoryError(
            f"only {len(out)} of {count} segments have failure history")
    return out


def run_efficiency(trace, profile, rp, segments, recommend, candidate_grid, threads=1):
    """Recommend an interval per segment from its rates and score it.

    ``segments`` is a list of ``(segment, RateEstimate)`` (see
    :func:`draw_segments`); ``recommend(rates)`` returns a recommendation.
    Segments are independent and may run on ``threads`` workers.
    """
    def one(item):
        seg, rates = item
        rec = recommend(rates)
        return segment_efficiency(trace, seg, profile, rp, rec.i_model, candidate_grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, segments))
    else:
        rows = [one(item) for item in segments]
    return summarize(rows)


def efficiency_json(report, meta=None):
    data = report.to_dict()
    data["meta"] = dict(meta or {})
    return json.dumps(data, separators=(",", ":"))


# Monte Carlo oracles --------------------------------------------------------

def random_walk_uwt(p, u, d, w, transitions, rng, start=0):
    """Empirical UWT of a random walk on ``p`` accumulating fixed weights."""
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = 1.0
    draws = rng.random(transitions)
    i = start
    work = busy = 0.0
    for x in draws:
        j = int(np.searchsorted(cum[i], x, side="right"))
        work += w[i, j]
        busy += u[i, j] + d[i, j]
        i = j
    return work / busy


def _spares_after(s, s_cap, lam, theta, tau, rng):
    """Functional spares after ``tau`` seconds, spares failing and repairing independently."""
    total = lam + theta
    decay = math.exp(-total * tau)
    stay_up = theta / total + lam / total * decay
    come_up = theta / total * (1.0 - decay)
    return int(rng.binomial(s, stay_up)) + int(rng.binomial(s_cap - s, come_up))


def mc_chain_oracle(n, rp, profile, lam, theta, interval, transitions, rng,
                    delta_policy="mean_in", mode="event"):
    """Empirical UWT of the analytic model's execution rules.

    ``mode="event"`` samples every transition from first principles:
    Exponential failure and repair times, spares evolved as independent
    two-state processors and checkpoint cycles counted along the sampled
    sojourn.  It shares no matrices with :mod:`mallckpt.chain`.
    ``mode="chain"`` walks the assembled transition matrix instead.
    """
    if mode == "chain":
        ch = build_chain(n, rp, profile, lam, theta, interval, delta_policy)
        return random_walk_uwt(ch.p, ch.u, ch.d, ch.w, transitions, rng)
    if mode != "event":
        raise ValueError(f"unknown mode {mode!r}")

    def target(a, s2):
        total = a - 1 + s2
        return ("down", 0, 0) if total == 0 else ("rec", rp[total], total - rp[total])

    state = ("down", 0, 0)
    work = busy = 0.0
    for _ in range(transitions):
        kind, a, s = state
        if kind == "down":
            busy += rng.exponential(1.0 / (n * theta))
            state = ("rec", rp[1], 1 - rp[1])
            continue
        s_cap, rho = n - a, a * lam
        ckpt, rate = profile.ckpt_cost(a), profile.work_rate(a)
        tau = rng.exponential(1.0 / rho)
        if kind == "rec":
            rbar = profile.representative_recovery(a, delta_policy)
            delta = rbar + interval + ckpt
            if tau >= delta:
                work += rate * interval
                busy += delta
                state = ("up", a, _spares_after(s, s_cap, lam, theta, delta, rng))
            else:
                busy += tau
                state = target(a, _spares_after(s, s_cap, lam, theta, tau, rng))
        else:
            cycles = math.floor(tau / (interval + ckpt))
            work += rate * interval * cycles
            busy += tau
            state = target(a, _spares_after(s, s_cap, lam, theta, tau, rng))
    return work / busy
