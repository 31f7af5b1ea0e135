"""
Checking the model against a failure trace
==========================================

A synthetic trace stands in for cluster failure logs.  For random execution
segments the model recommends an interval from the rates seen before the
segment; replaying the segment shows how much work that interval loses
compared with the best interval on a grid.
"""
import numpy as np

from mallckpt import build_rp, estimate_rates, synth_trace
from mallckpt.fixtures import table_profile
from mallckpt.search import recommend_interval
from mallckpt.simulator import default_grid, draw_segments, run_efficiency, simulate

DAY = 86400.0
n = 16
trace = synth_trace(n, 1 / (5 * DAY), 1 / 3000, 365 * DAY, np.random.default_rng(0))
profile = table_profile("QR", n)
rp = build_rp("greedy", n)

rates = estimate_rates(trace, at=180 * DAY)
print(f"{len(trace.outages)} outages; at day 180: MTTF {rates.mttf / DAY:.2f} d, "
      f"MTTR {rates.mttr / 60:.1f} min")

###############################################################################
# One replay, with its event timeline.
rep = simulate(trace, (180 * DAY, 10 * DAY), profile, rp, 3600.0, timeline=True)
kinds = [e.event for e in rep.timeline]
print(f"10-day replay at I=1h: UW={rep.uw:.0f}, {kinds.count('checkpoint')} checkpoints, "
      f"{kinds.count('failure')} failures")

###############################################################################
# Model efficiency over 10 segments of 30-80 days.
segments = draw_segments(trace, 10, 30 * DAY, 80 * DAY, np.random.default_rng(1))
report = run_efficiency(trace, profile, rp, segments,
                        lambda r: recommend_interval(n, rp, profile, r.lam, r.theta),
                        default_grid(300.0))
for row in report.segments:
    print(f"start day {row.segment.start / DAY:6.1f}: I_model {row.i_model / 3600:5.2f} h, "
          f"I_sim {row.i_sim / 3600:5.2f} h, efficiency {row.efficiency:6.2f}%")
print(f"mean efficiency {report.efficiency:.2f}%")
