"""Reference application profiles for tests and demos.

Checkpoint and recovery overheads follow the measured min/avg/max seconds
reported for three applications on a 48-core cluster: a ScaLAPACK QR
solver, a PETSc conjugate-gradient solver and a molecular-dynamics code.
The work-rate curves are stand-ins (``w1 * a**b``) with the qualitative
ordering MD > QR > CG in scalability; they are not measurements.
"""
import numpy as np

from .profile import AppProfile

TABLE_I = {
    "QR": {"ckpt": (91.90, 99.19, 117.28), "recov": (8.74, 17.21, 32.97)},
    "CG": {"ckpt": (8.96, 9.55, 9.75), "recov": (8.89, 12.56, 15.12)},
    "MD": {"ckpt": (1.35, 1.84, 2.70), "recov": (8.27, 14.12, 17.05)},
}

WORK_CURVES = {"QR": (0.07, 0.8), "CG": (0.04, 0.5), "MD": (0.055, 0.95)}


def _spread(x, lo, avg, hi):
    """Map x in [0, 1] onto [lo, hi] with a power shape whose mean is ~avg."""
    if hi <= lo:
        return np.full_like(x, avg)
    p = max((hi - lo) / (avg - lo) - 1.0, 1e-3)
    return lo + (hi - lo) * x ** p


def table_profile(app, n):
    """Profile for ``n`` processors shaped after the tabulated overheads."""
    c_lo, c_avg, c_hi = TABLE_I[app]["ckpt"]
    r_lo, r_avg, r_hi = TABLE_I[app]["recov"]
    w1, b = WORK_CURVES[app]
    a = np.arange(1, n + 1, dtype=float)
    work = w1 * a ** b
    if n == 1:
        return AppProfile(1, work, [c_avg], [[r_avg]])
    ckpt = _spread((a - 1) / (n - 1), c_lo, c_avg, c_hi)
    ksum = (a[:, None] + a[None, :] - 2) / (2 * n - 2)
    recov = _spread(ksum, r_lo, r_avg, r_hi)
    return AppProfile(n, work, ckpt, recov)
