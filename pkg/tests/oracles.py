"""Independent reference computations used only by the test-suite."""
import numpy as np
import scipy.linalg
from scipy.integrate import quad_vec
from scipy.stats import binom


def two_state_stay_prob(lam, theta, tau):
    """P(all-spares state -> all-spares state) for a single spare (S=1)."""
    total = lam + theta
    return theta / total + (lam / total) * np.exp(-total * tau)


def binomial_transient(s_cap, lam, theta, tau):
    """Transient matrix built from S independent on/off processors.

    Row/column indexing follows the package convention (index i <-> S-i spares).
    """
    total = lam + theta
    p_uu = theta / total + lam / total * np.exp(-total * tau)
    p_du = theta / total * (1.0 - np.exp(-total * tau))
    m = np.zeros((s_cap + 1, s_cap + 1))
    for s in range(s_cap + 1):
        up = binom.pmf(np.arange(s + 1), s, p_uu)
        down = binom.pmf(np.arange(s_cap - s + 1), s_cap - s, p_du)
        dist = np.convolve(up, down)
        for s2, p in enumerate(dist):
            m[s_cap - s, s_cap - s2] = p
    return m


def _breakpoints(q, end):
    """Geometric breakpoints so fast transients inside long windows are resolved."""
    fastest = np.abs(np.diag(q)).max()
    if fastest == 0:
        return [0.0, end]
    pts = 10.0 ** np.arange(-2, 40) / fastest
    return [0.0] + [p for p in pts if p < end] + [end]


def _quad_pieces(f, edges):
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, _ = quad_vec(f, a, b, epsabs=1e-14, epsrel=1e-11, limit=2000)
        total = total + val
    return total


def quad_up_weighted(q, rate):
    f = lambda t: scipy.linalg.expm(q * t) * rate * np.exp(-rate * t)
    tail = 50.0 / rate
    edges = _breakpoints(q, tail)
    rest, _ = quad_vec(f, tail, np.inf, epsabs=1e-14, epsrel=1e-11, limit=2000)
    return _quad_pieces(f, edges) + rest


def quad_rec_weighted(q, rate, delta):
    norm = -np.expm1(-rate * delta)
    f = lambda t: scipy.linalg.expm(q * t) * rate * np.exp(-rate * t) / norm
    return _quad_pieces(f, _breakpoints(q, delta))


def power_iteration(p, steps=100_000, tol=1e-15):
    """Stationary vector of the lazy chain (P + I)/2, which shares P's."""
    n = p.shape[0]
    lazy = 0.5 * (p + np.eye(n))
    pi = np.full(n, 1.0 / n)
    for _ in range(steps):
        nxt = pi @ lazy
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    return pi
