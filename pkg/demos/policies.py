"""
Rescheduling policies
=====================

After a failure the application restarts on some of the functional
processors.  ``greedy`` uses all of them, ``pb`` the count with the best
work rate, ``ab`` the count whose processors have failed least often.
"""
import numpy as np

from mallckpt import AppProfile, build_rp, synth_trace
from mallckpt.fixtures import table_profile
from mallckpt.search import recommend_interval

n = 12
base = table_profile("QR", n)
a = np.arange(1, n + 1)
# a code that stops scaling beyond 8 processors
work = 0.07 * np.minimum(a, 8) ** 0.8 - 0.002 * np.maximum(a - 8, 0)
profile = AppProfile(n, work, base.ckpt, base.recov)

lam, theta = 1 / (10 * 86400), 1 / 3600
trace = synth_trace(n, lam, theta, 200 * 86400, np.random.default_rng(3))

for kind in ("greedy", "pb", "ab"):
    rp = build_rp(kind, n, profile=profile, trace=trace, seed=1)
    rec = recommend_interval(n, rp, profile, lam, theta)
    best = max(p.uwt for p in rec.sweep)
    print(f"{kind:6s} rp={list(rp.rp)}")
    print(f"       I_model {rec.i_model / 3600:.2f} h, best UWT {best:.5f}")
