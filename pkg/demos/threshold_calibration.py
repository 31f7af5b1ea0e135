"""
Choosing the elimination threshold
==================================

Dropping rarely entered up states shrinks the chain.  The score trades
model error (weight 0.7) against the fraction of up states removed
(weight 0.3).
"""
from mallckpt import build_chain, build_rp, eliminate_states, stationary, threshold_score, uwt
from mallckpt.fixtures import table_profile

n = 16
profile = table_profile("CG", n)
rp = build_rp("greedy", n)
chain = build_chain(n, rp, profile, 1 / (30 * 86400), 1 / 7200, 3600.0)
full = uwt(chain, stationary(chain))
up_count = n * (n + 1) // 2

print("   thres   error      elim%   score")
for thres in (0.0, 1e-5, 1e-4, 3e-4, 6e-4, 1e-3, 3e-3, 1e-2, 3e-2):
    red = eliminate_states(chain, thres)
    value = uwt(red, stationary(red))
    score = threshold_score(full, value, red.elims, up_count)
    print(f"{thres:8.0e}  {abs(full - value) / full:.2e}  {100 * red.elims / up_count:6.1f}"
          f"   {score:.4f}")
