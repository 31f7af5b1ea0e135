"""Choose a checkpoint interval from the model's UWT curve.

The search doubles the interval from ``i_min`` until UWT drops, refines
around the best values with a few bisection probes, and returns the mean
of every evaluated interval whose UWT is within ``band_pct`` of the best.
"""
import csv
import io
import json
from dataclasses import dataclass, field
from typing import NamedTuple

from .chain import DEFAULT_THRES, build_chain, eliminate_states, stationary, uwt
from .errors import MallckptError, SearchError

MAX_DOUBLINGS = 30


class SweepPoint(NamedTuple):
    interval: float
    uwt: float


@dataclass(frozen=True)
class Recommendation:
    i_model: float
    band: tuple
    sweep: tuple
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"i_model_s": self.i_model,
                "band": [list(p) for p in self.band],
                "sweep": [list(p) for p in self.sweep],
                "meta": self.meta}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def sweep_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["interval_s", "uwt"])
        for p in self.sweep:
            writer.writerow([repr(p.interval), repr(p.uwt)])
        return buf.getvalue()


def _ranked(points):
    """Intervals by decreasing UWT, smaller interval first on ties."""
    return sorted(points, key=lambda i: (-points[i], i))


def search_interval(evaluate, i_min=300.0, band_pct=0.08, refine_steps=6,
                    max_doublings=MAX_DOUBLINGS):
    """Run the three-phase search with ``evaluate(interval) -> uwt``.

    Returns a :class:`Recommendation` whose ``meta`` holds the number of
    evaluations and whether the doubling cap was hit.
    """
    if not i_min > 0:
        raise SearchError("i_min must be positive")
    if not 0 <= band_pct < 1:
        raise SearchError("band_pct must be in [0, 1)")
    points = {}

    def probe(interval):
        try:
            value = float(evaluate(interval))
        except MallckptError as exc:
            raise SearchError(str(exc), interval) from exc
        points[interval] = value
        return value

    # phase 1: doubling until UWT decreases
    interval, prev = float(i_min), probe(float(i_min))
    cap_hit = True
    for _ in range(max_doublings):
        interval *= 2.0
        cur = probe(interval)
        if cur < prev:
            cap_hit = False
            break
        prev = cur

    # phase 2: bisect the larger gap next to the best point, inside the top-3 hull
    for _ in range(refine_steps):
        top = _ranked(points)[:3]
        lo, hi = min(top), max(top)
        inside = sorted(i for i in points if lo <= i <= hi)
        best = top[0]
        k = inside.index(best)
        gaps = []
        if k > 0:
            gaps.append((best - inside[k - 1], inside[k - 1], best))
        if k + 1 < len(inside):
            gaps.append((inside[k + 1] - best, best, inside[k + 1]))
        if not gaps:
            break
        width, left, right = max(gaps, key=lambda g: g[0])
        mid = 0.5 * (left + right)
        if mid in points or not left < mid < right:
            break
        probe(mid)

    # phase 3: acceptance band
    peak = max(points.values())
    cut = peak - band_pct * abs(peak)
    band = tuple(SweepPoint(i, points[i]) for i in sorted(points) if points[i] >= cut)
    i_model = sum(p.interval for p in band) / len(band)
    sweep = tuple(SweepPoint(i, points[i]) for i in sorted(points))
    meta = {"evaluations": len(points), "doubling_cap_hit": cap_hit,
            "i_min": float(i_min), "band_pct": band_pct, "refine_steps": refine_steps}
    return Recommendation(i_model, band, sweep, meta)


def recommend_interval(n, rp, profile, lam, theta, i_min=300.0, band_pct=0.08,
                       thres=DEFAULT_THRES, delta_policy="mean_in", refine_steps=6,
                       threads=1):
    """Recommended checkpoint interval for the malleable model.

    Every evaluation builds the chain, eliminates rarely entered up states
    with ``thres`` and solves for the stationary distribution.
    """
    elims = {}

    def evaluate(interval):
        chain = build_chain(n, rp, profile, lam, theta, interval, delta_policy, threads)
        if thres > 0:
            chain = eliminate_states(chain, thres)
        elims[interval] = chain.elims
        return uwt(chain, stationary(chain))

    rec = search_interval(evaluate, i_min, band_pct, refine_steps)
    best = max(rec.sweep, key=lambda p: (p.uwt, -p.interval))
    meta = {**rec.meta, "lambda": float(lam), "theta": float(theta), "n": n,
            "rp": list(rp.rp), "thres": thres, "delta_policy": delta_policy,
            "elims": elims[best.interval], "up_count": n * (n + 1) // 2}
    return Recommendation(rec.i_model, rec.band, rec.sweep, meta)
