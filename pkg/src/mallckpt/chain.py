"""Markov chain of a malleable application's execution.

States
------
``up (a, s)``
    running on ``a`` processors with ``s`` functional spares, for
    ``1 <= a <= n`` and ``0 <= s <= n - a``.
``rec (a, s)``
    recovering; one per total functional count ``T = a + s`` with
    ``a = rp[T]``.  Recovery lasts ``delta = R_a + I + C_a`` (restore, redo
    one interval, write a checkpoint).
``down``
    every processor has failed.

Each transition ``i -> j`` carries its probability ``p[i, j]`` and the
expected useful time ``u``, non-useful time ``d`` and useful work ``w``
spent in state ``i`` before taking it.  The long-run useful work per unit
time is

    UWT = sum_ij pi_i p_ij w_ij / sum_ij pi_i p_ij (u_ij + d_ij)

with ``pi`` the stationary distribution of ``p``.

Transition rules, with ``rho = a * lam`` and ``S = n - a``:

* rec -> up (a, s2): no active failure within ``delta``, probability
  ``exp(-rho delta) * transient(delta)[s -> s2]``; ``u = I``, ``d = R_a + C_a``.
* rec -> rec/down: an active failure first, spares drawn from the
  conditioned matrix; ``u = 0``, ``d`` = mean failure time given a failure
  within ``delta``.
* up -> rec/down: spares drawn from the failure-weighted matrix; the
  sojourn is Exponential(rho) and ``u = I / (exp(rho (I + C_a)) - 1)`` is
  ``I`` times the expected number of completed interval+checkpoint cycles,
  ``d = 1/rho - u``.
* down -> rec(T=1): certain; ``d = 1 / (n theta)``.

After a failure leaving ``T`` functional processors the target is the
recovery state for ``T`` (or ``down`` when ``T = 0``).
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import spares
from .errors import ChainError
from .profile import DELTA_POLICIES

DEFAULT_THRES = 0.0006
ROW_SUM_TOL = 1e-9
RESIDUAL_TOL = 1e-9


class State(NamedTuple):
    kind: str    # "down", "rec" or "up"
    a: int
    s: int

    @property
    def total(self):
        return self.a + self.s

    def label(self):
        if self.kind == "down":
            return "D"
        return f"{self.kind[0].upper()}:{self.a},{self.s}"


DOWN = State("down", 0, 0)


@dataclass(frozen=True)
class StateSpace:
    n: int
    states: tuple

    @property
    def index(self):
        return {st: i for i, st in enumerate(self.states)}

    @property
    def down_state(self):
        return DOWN

    @property
    def up_states(self):
        return [st for st in self.states if st.kind == "up"]

    @property
    def rec_states(self):
        return [st for st in self.states if st.kind == "rec"]

    def __len__(self):
        return len(self.states)


def enumerate_states(n, rp):
    """Down state, then recovery states by total, then up states by (a, s)."""
    if rp.n != n:
        raise ChainError(f"rp is for {rp.n} processors, chain for {n}")
    states = [DOWN]
    states += [State("rec", rp[t], t - rp[t]) for t in range(1, n + 1)]
    states += [State("up", a, s) for a in range(1, n + 1) for s in range(n - a + 1)]
    return StateSpace(n, tuple(states))


@dataclass(frozen=True, eq=False)
class MalleableChain:
    space: StateSpace
    p: np.ndarray
    u: np.ndarray
    d: np.ndarray
    w: np.ndarray
    interval: float
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.space)

    @property
    def elims(self):
        return self.meta.get("elims", 0)


def _recovery_fail_downtime(rho, delta):
    """Mean failure time given an Exponential(rho) failure within delta."""
    x = rho * delta
    if x < 1e-4:
        return delta * (0.5 - x / 12.0)
    if x > 700.0:
        return 1.0 / rho
    return delta * (1.0 / x - 1.0 / math.expm1(x))


def _up_weights(rho, interval, ckpt):
    """(useful, non-useful) expected time in an up state."""
    y = rho * (interval + ckpt)
    useful = 0.0 if y > 700.0 else interval / math.expm1(y)
    return useful, max(1.0 / rho - useful, 0.0)


def _block_for_active(a, n, rp, profile, lam, theta, interval, delta_policy, rec_totals):
    """Transition entries for every state whose active count is ``a``.

    Returns ``(rec_rows, up_rows)``; each row is a list of
    ``(target_state, p, u, d)``.  Independent of every other ``a``.
    """
    s_cap = n - a
    rho = a * lam
    ckpt = profile.ckpt_cost(a)
    g = spares.build_generator(s_cap, lam, theta)

    def failure_target(s2):
        total = a - 1 + s2
        return DOWN if total == 0 else State("rec", rp[total], total - rp[total])

    rec_rows = {}
    if rec_totals:
        rbar = profile.representative_recovery(a, delta_policy)
        delta = rbar + interval + ckpt
        p_ok = math.exp(-rho * delta)
        p_fail = -math.expm1(-rho * delta)
        trans = spares.transient_probs(g, delta)
        cond = spares.conditioned_probs(g, rho, delta)
        d_fail = _recovery_fail_downtime(rho, delta)
        for total in rec_totals:
            s = total - a
            i = spares.spare_index(s_cap, s)
            row = []
            for s2 in range(s_cap + 1):
                j = spares.spare_index(s_cap, s2)
                row.append((State("up", a, s2), p_ok * trans.m[i, j], interval, rbar + ckpt))
            for s2 in range(s_cap + 1):
                j = spares.spare_index(s_cap, s2)
                row.append((failure_target(s2), p_fail * cond.m[i, j], 0.0, d_fail))
            rec_rows[total] = row

    fw = spares.failure_weighted_probs(g, rho)
    u_up, d_up = _up_weights(rho, interval, ckpt)
    up_rows = {}
    for s in range(s_cap + 1):
        i = spares.spare_index(s_cap, s)
        up_rows[s] = [(failure_target(s2), fw.m[i, spares.spare_index(s_cap, s2)], u_up, d_up)
                      for s2 in range(s_cap + 1)]
    return rec_rows, up_rows


def build_chain(n, rp, profile, lam, theta, interval, delta_policy="mean_in", threads=1):
    """Assemble ``p``, ``u``, ``d`` and ``w`` for checkpoint interval ``interval``.

    The per-active-count blocks are independent and may be computed on
    ``threads`` worker threads; results are written in a fixed order, so
    the output does not depend on the thread count.
    """
    if not interval > 0:
        raise ChainError("interval must be positive")
    if not (lam > 0 and theta > 0):
        raise ChainError("rates must be positive")
    if delta_policy not in DELTA_POLICIES:
        raise ChainError(f"unknown delta policy {delta_policy!r}")
    if profile.n_max < n:
        raise ChainError(f"profile covers {profile.n_max} processors, need {n}")
    space = enumerate_states(n, rp)
    index = space.index
    size = len(space)

    rec_totals = {a: [] for a in range(1, n + 1)}
    for t in range(1, n + 1):
        rec_totals[rp[t]].append(t)

    def work(a):
        return _block_for_active(a, n, rp, profile, lam, theta, interval, delta_policy,
                                 rec_totals[a])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(work, range(1, n + 1)))
    else:
        blocks = [work(a) for a in range(1, n + 1)]

    p = np.zeros((size, size))
    u = np.zeros((size, size))
    d = np.zeros((size, size))
    w = np.zeros((size, size))

    def put(src, row, rate):
        i = index[src]
        for tgt, prob, up, dn in row:
            j = index[tgt]
            p[i, j] += prob
            u[i, j] = up
            d[i, j] = dn
            w[i, j] = rate * up

    for a, (rec_rows, up_rows) in zip(range(1, n + 1), blocks):
        rate = profile.work_rate(a)
        for total, row in rec_rows.items():
            put(State("rec", a, total - a), row, rate)
        for s, row in up_rows.items():
            put(State("up", a, s), row, rate)
    put(DOWN, [(State("rec", rp[1], 1 - rp[1]), 1.0, 0.0, 1.0 / (n * theta))], 0.0)

    _check_rows(p)
    meta = {"lambda": float(lam), "theta": float(theta), "delta_policy": delta_policy,
            "rp": list(rp.rp), "up_count": n * (n + 1) // 2, "elims": 0}
    return MalleableChain(space, p, u, d, w, float(interval), meta)


def _check_rows(p):
    if p.min() < 0:
        raise ChainError("negative transition probability")
    drift = np.abs(p.sum(axis=1) - 1.0).max()
    if drift > ROW_SUM_TOL:
        raise ChainError(f"row sums drift from 1 by {drift:.3e}")


def eliminate_states(chain, thres=DEFAULT_THRES):
    """Drop up states whose every incoming probability is below ``thres``.

    Outgoing mass that pointed at a dropped state is spread over the
    row's remaining targets in proportion to their probabilities.
    Recovery and down states are never dropped.
    """
    if not 0 <= thres < 1:
        raise ChainError("thres must be in [0, 1)")
    states = chain.space.states
    incoming = chain.p.max(axis=0)
    drop = np.array([st.kind == "up" and incoming[j] < thres for j, st in enumerate(states)])
    if not drop.any():
        return replace(chain, meta={**chain.meta, "elims": chain.elims})
    keep = np.flatnonzero(~drop)
    p = chain.p[np.ix_(keep, keep)]
    mass = p.sum(axis=1)
    if mass.min() <= 0:
        lost = states[keep[np.argmin(mass)]]
        raise ChainError(f"thres={thres} removes every target of state {lost.label()}")
    p = p / mass[:, None]
    _check_rows(p)
    space = StateSpace(chain.space.n, tuple(states[k] for k in keep))
    sub = np.ix_(keep, keep)
    meta = {**chain.meta, "elims": chain.elims + int(drop.sum()), "thres": thres}
    return MalleableChain(space, p, chain.u[sub], chain.d[sub], chain.w[sub],
                          chain.interval, meta)


def stationary(chain):
    """Solve ``pi = pi P``, ``sum(pi) = 1`` by dense LU."""
    p = chain.p if isinstance(chain, MalleableChain) else np.asarray(chain)
    size = p.shape[0]
    a = p.T - np.eye(size)
    a[0, :] = 1.0
    b = np.zeros(size)
    b[0] = 1.0
    try:
        pi = scipy.linalg.solve(a, b)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ChainError(f"stationary system is singular: {exc}") from None
    if not np.all(np.isfinite(pi)) or pi.min() < -1e-12:
        raise ChainError("stationary solve produced an invalid distribution")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.abs(pi @ p - pi).sum()
    if residual > RESIDUAL_TOL:
        raise ChainError(f"stationary residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return pi


def uwt(chain, pi):
    flow = pi[:, None] * chain.p
    den = float((flow * (chain.u + chain.d)).sum())
    if not den > 0:
        raise ChainError("zero mean time per transition")
    return float((flow * chain.w).sum()) / den


def model_uwt(n, rp, profile, lam, theta, interval, delta_policy="mean_in",
              thres=DEFAULT_THRES, threads=1):
    """Build, reduce and solve; returns ``(uwt, elims)``."""
    chain = build_chain(n, rp, profile, lam, theta, interval, delta_policy, threads)
    if thres > 0:
        chain = eliminate_states(chain, thres)
    return uwt(chain, stationary(chain)), chain.elims


def threshold_score(full_uwt, reduced_uwt, elims, up_count, alpha=0.7, beta=0.3):
    """Weighted trade-off between model error and the fraction of up states removed."""
    if not full_uwt > 0:
        raise ValueError("full_uwt must be positive")
    if up_count <= 0 or alpha < 0 or beta < 0:
        raise ValueError("need up_count > 0 and non-negative weights")
    err = min(max(abs(full_uwt - reduced_uwt) / full_uwt, 0.0), 1.0)
    return alpha * (1.0 - err) + beta * (elims / up_count)


def dump_chain(chain):
    """Full-precision JSON dump for cross-checking against other tools."""
    return json.dumps({
        "interval": chain.interval,
        "meta": chain.meta,
        "states": [st.label() for st in chain.space.states],
        "p": chain.p.tolist(), "u": chain.u.tolist(),
        "d": chain.d.tolist(), "w": chain.w.tolist(),
    })
