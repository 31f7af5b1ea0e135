"""
The pool of spare processors
============================

While the application runs on ``a`` processors, the other ``S = n - a``
fail and get repaired on their own.  The number of functional spares is a
birth-death process; three matrices derived from its generator tell the
model how many spares are left when the next event happens.
"""
import numpy as np

from mallckpt import spares

np.set_printoptions(precision=4, suppress=True)

# Three spares, each failing about once a day and repaired in about an hour.
lam, theta = 1 / 86400, 1 / 3600
g = spares.build_generator(3, lam, theta)
print("generator (row i holds S - i functional spares):")
print(g.q)

# The spectrum is known exactly: 0, -(lam + theta), -2(lam + theta), ...
print("eigenvalues / (lam + theta):", spares.generator_eigenvalues(g) / (lam + theta))

###############################################################################
# After ten minutes most spares are where they started; after a day the
# pool has forgotten its starting point.
for tau in (600.0, 86400.0):
    print(f"\ntransient probabilities after {tau:.0f} s")
    print(spares.transient_probs(g, tau).m)

###############################################################################
# When the active set of 8 processors fails (rate 8 * lam), the spare count
# at that moment averages over an exponential waiting time.  Conditioning the
# failure to happen within a recovery window of 30 minutes changes little
# here, because the window is short compared to the spares' dynamics.
rate = 8 * lam
print("\nspares at the next active failure:")
print(spares.failure_weighted_probs(g, rate).m)
print("\n... given it happens within 1800 s:")
print(spares.conditioned_probs(g, rate, 1800.0).m)
