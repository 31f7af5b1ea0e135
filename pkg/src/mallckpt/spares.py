"""Birth-death machinery for the pool of spare processors.

A pool with capacity ``S`` holds ``s`` functional spares and ``S - s``
processors under repair.  Each functional spare fails at rate ``lam`` and
each broken one is repaired at rate ``theta``.  Matrices are indexed the
same way throughout the package: row/column ``i`` holds ``S - i`` functional
spares, so index 0 is "all spares functional" and index ``S`` is "none".
Use :func:`spare_index` rather than doing that arithmetic by hand.

Three probability matrices are derived from the generator:

* ``transient``:    ``expm(q * tau)``
* ``up_weighted``:  ``int_0^inf expm(q t) r e^{-r t} dt``
* ``rec_weighted``: the same integral restricted to ``[0, delta]`` and
  renormalised by ``1 - e^{-r delta}``

where ``r`` is the failure rate of the active set.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import eigvalsh_tridiagonal
from scipy.stats import binom

from .errors import SpareMatrixError

#: negative entries above this are floating point noise and get clipped
CLIP_TOL = 1e-12
ROW_SUM_TOL = 1e-9

# below this value of ||q - rate I|| * delta the conditioned integral is taken
# from the augmented-matrix exponential instead of the resolvent formula
_VAN_LOAN_CUTOFF = 1.0


@dataclass(frozen=True)
class SpareGenerator:
    s_cap: int
    lam: float
    theta: float
    q: np.ndarray

    @property
    def size(self):
        return self.s_cap + 1


@dataclass(frozen=True)
class SpareMatrix:
    m: np.ndarray
    tag: str

    def prob(self, s_from, s_to):
        """Probability of going from ``s_from`` to ``s_to`` functional spares."""
        s_cap = self.m.shape[0] - 1
        return self.m[spare_index(s_cap, s_from), spare_index(s_cap, s_to)]


def spare_index(s_cap, s):
    if not 0 <= s <= s_cap:
        raise IndexError(f"spare count {s} outside 0..{s_cap}")
    return s_cap - s


def build_generator(s_cap, lam, theta):
    """Tridiagonal rate matrix of the spare pool.

    >>> build_generator(1, 0.5, 2.0).q
    array([[-0.5,  0.5],
           [ 2. , -2. ]])
    """
    if s_cap < 0:
        raise ValueError("s_cap must be >= 0")
    if not (lam > 0 and theta > 0):
        raise ValueError("rates must be positive")
    size = s_cap + 1
    q = np.zeros((size, size))
    for i in range(size):
        s = s_cap - i
        if s > 0:
            q[i, i + 1] = s * lam
        if s < s_cap:
            q[i, i - 1] = (s_cap - s) * theta
        q[i, i] = -(q[i].sum())
    return SpareGenerator(s_cap, float(lam), float(theta), q)


def generator_eigenvalues(g):
    """Eigenvalues of ``g.q`` (all real and <= 0), ascending.

    Detailed balance makes the generator similar to a symmetric tridiagonal
    matrix whose off-diagonal is ``sqrt(q[i, i+1] * q[i+1, i])``.
    """
    diag = np.diag(g.q).copy()
    if g.s_cap == 0:
        return diag
    off = np.sqrt(np.diag(g.q, 1) * np.diag(g.q, -1))
    return eigvalsh_tridiagonal(diag, off)


def _finalize(m, tag):
    if not np.all(np.isfinite(m)):
        raise SpareMatrixError(f"{tag}: non-finite entries")
    worst = m.min()
    if worst < -CLIP_TOL:
        raise SpareMatrixError(f"{tag}: negative probability {worst:.3e}")
    m = np.clip(m, 0.0, None)
    sums = m.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > 1e-6:
        raise SpareMatrixError(f"{tag}: row sums drift to {sums}")
    m = m / sums[:, None]
    return SpareMatrix(m, tag)


def transient_probs(g, tau):
    """``expm(q * tau)``: spare-count distribution after ``tau`` seconds."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return SpareMatrix(np.eye(g.size), "transient")
    return _finalize(scipy.linalg.expm(g.q * tau), "transient")


def _stationary_projector(g):
    """``1 pi^T`` for the spare chain's stationary (binomial) distribution.

    The generator's zero mode decays at the active-set failure rate alone,
    which may be orders of magnitude slower than the rest of the spectrum;
    handling it analytically avoids losing precision to it.
    """
    s = g.s_cap - np.arange(g.size)      # spares held at each index
    pi = binom.pmf(s, g.s_cap, g.theta / (g.lam + g.theta))
    return np.outer(np.ones(g.size), pi)


def failure_weighted_probs(g, a_lambda):
    """Spare distribution at the first failure of the active set.

    The failure time is Exponential(``a_lambda``), so the defining integral
    collapses to the resolvent ``a_lambda * (a_lambda I - q)^{-1}``.
    """
    if not a_lambda > 0:
        raise ValueError("a_lambda must be positive")
    eye = np.eye(g.size)
    proj = _stationary_projector(g)
    comp = eye - proj
    try:
        fast = scipy.linalg.solve(a_lambda * eye - g.q, comp)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - M-matrix
        raise SpareMatrixError(f"up_weighted: {exc}") from exc
    return _finalize(proj + a_lambda * (comp @ fast), "up_weighted")


def conditioned_probs(g, a_lambda, delta):
    """Spare distribution at a failure known to occur within ``delta`` seconds."""
    if not a_lambda > 0:
        raise ValueError("a_lambda must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")
    size = g.size
    eye = np.eye(size)
    x = a_lambda * delta
    shifted = g.q - a_lambda * eye
    norm = a_lambda / -np.expm1(-x)
    if np.abs(shifted).sum(axis=1).max() * delta < _VAN_LOAN_CUTOFF:
        # int_0^delta expm(shifted t) dt is the upper-right block of the
        # exponential of [[shifted, I], [0, 0]] * delta (no cancellation)
        aug = np.zeros((2 * size, 2 * size))
        aug[:size, :size] = shifted
        aug[:size, size:] = eye
        integral = scipy.linalg.expm(aug * delta)[:size, size:]
        return _finalize(integral * norm, "rec_weighted")
    # stationary mode in closed form; the rest decays at least at lam + theta
    proj = _stationary_projector(g)
    comp = eye - proj
    decay = scipy.linalg.expm(shifted * delta)
    fast = comp @ scipy.linalg.solve(-shifted, comp @ (eye - decay) @ comp)
    return _finalize(proj + norm * fast, "rec_weighted")
