"""Per-configuration application characteristics.

An :class:`AppProfile` stores, for ``a = 1..n_max`` processors, the work
rate ``work[a-1]`` (application units per second), the checkpoint overhead
``ckpt[a-1]`` (seconds) and the recovery cost ``recov[k-1, l-1]`` (seconds
to restart a ``k``-processor checkpoint on ``l`` processors).  Checkpoint
latency is taken to be equal to the overhead.

Profiles are usually measured on a handful of configurations and
extrapolated with :func:`fit_profile`.
"""
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ProfileError

DELTA_POLICIES = ("mean_in", "max_in")


@dataclass(frozen=True, eq=False)
class AppProfile:
    n_max: int
    work: np.ndarray
    ckpt: np.ndarray
    recov: np.ndarray

    def __post_init__(self):
        n = self.n_max
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ProfileError(f"n_max must be a positive integer, got {n!r}")
        work = np.array(self.work, dtype=float)
        ckpt = np.array(self.ckpt, dtype=float)
        recov = np.array(self.recov, dtype=float)
        if work.shape != (n,):
            raise ProfileError(f"work has length {work.size}, expected {n}")
        if ckpt.shape != (n,):
            raise ProfileError(f"ckpt has length {ckpt.size}, expected {n}")
        if recov.shape != (n, n):
            raise ProfileError(f"recov has shape {recov.shape}, expected ({n}, {n})")
        for name, arr in (("work", work), ("ckpt", ckpt), ("recov", recov)):
            if not np.all(np.isfinite(arr)):
                raise ProfileError(f"{name} has non-finite entries")
            if arr.min() < 0:
                raise ProfileError(f"{name} has negative entries")
        if work.min() <= 0:
            raise ProfileError("work rates must be positive")
        for name, arr in (("work", work), ("ckpt", ckpt), ("recov", recov)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n_max", int(n))

    def __eq__(self, other):
        if not isinstance(other, AppProfile):
            return NotImplemented
        return (self.n_max == other.n_max and np.array_equal(self.work, other.work)
                and np.array_equal(self.ckpt, other.ckpt)
                and np.array_equal(self.recov, other.recov))

    def work_rate(self, a):
        return float(self.work[a - 1])

    def ckpt_cost(self, a):
        return float(self.ckpt[a - 1])

    def recov_cost(self, k, l):
        return float(self.recov[k - 1, l - 1])

    def representative_recovery(self, a, policy="mean_in"):
        """Single recovery cost onto ``a`` processors, over all source sizes."""
        col = self.recov[:, a - 1]
        if policy == "mean_in":
            return float(col.mean())
        if policy == "max_in":
            return float(col.max())
        raise ValueError(f"unknown delta policy {policy!r}")

    def to_dict(self):
        return {"n_max": self.n_max, "work": self.work.tolist(),
                "ckpt": self.ckpt.tolist(), "recov": self.recov.tolist()}


class BenchmarkPoint(NamedTuple):
    kind: str              # "work", "ckpt" or "recov"
    config: object         # a, or (k, l) for recov
    value: float


def save_profile(profile):
    return json.dumps(profile.to_dict())


def load_profile(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ProfileError("profile JSON must be an object")
    missing = [k for k in ("n_max", "work", "ckpt", "recov") if k not in data]
    if missing:
        raise ProfileError(f"missing field(s): {', '.join(missing)}")
    try:
        return AppProfile(data["n_max"], data["work"], data["ckpt"], data["recov"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ProfileError):
            raise
        raise ProfileError(str(exc)) from None


def _power_law(x, y):
    """Least-squares ``y = c x^b`` in log space; returns ``(c, b)``."""
    b, log_c = np.polyfit(np.log(x), np.log(y), 1)
    return float(np.exp(log_c)), float(b)


def _nearest_fill(configs, values, n_max):
    out = np.empty(n_max)
    for a in range(1, n_max + 1):
        # argmin returns the first hit, so ties go to the smaller config
        out[a - 1] = values[np.argmin(np.abs(configs - a))]
    return out


def _grouped(points):
    """Average repeated measurements of the same configuration."""
    sums = {}
    for p in points:
        s, c = sums.get(p.config, (0.0, 0))
        sums[p.config] = (s + float(p.value), c + 1)
    keys = sorted(sums)
    return keys, np.array([sums[k][0] / sums[k][1] for k in keys])


def _fill_vector(points, n_max, model):
    keys, vals = _grouped(points)
    configs = np.array(keys, dtype=float)
    if model == "power_law" and len(keys) >= 2 and vals.min() > 0:
        c, b = _power_law(configs, vals)
        out = c * np.arange(1, n_max + 1, dtype=float) ** b
    else:
        out = _nearest_fill(configs, vals, n_max)
    for k, v in zip(keys, vals):
        out[k - 1] = v
    return out


def fit_profile(points, n_max, model="power_law", recov_default=None):
    """Extrapolate benchmark measurements to a full :class:`AppProfile`.

    ``model`` selects how the work and checkpoint vectors are filled:
    ``"power_law"`` fits ``v(a) = c a^b`` by linear least squares on
    ``log v`` vs ``log a``; ``"constant_fill"`` copies the value measured at
    the nearest configuration.  A power-law fit that is degenerate (a single
    distinct configuration, or a zero value) falls back to constant fill.

    Recovery costs are fitted as ``R(k, l) = c (k + l)^b`` when at least two
    usable points exist, otherwise set to the mean of the supplied points,
    otherwise to ``recov_default``.  Measured points are kept verbatim.
    """
    if model not in ("power_law", "constant_fill"):
        raise ProfileError(f"unknown model {model!r}")
    by_kind = {"work": [], "ckpt": [], "recov": []}
    for p in points:
        p = BenchmarkPoint(*p)
        if p.kind not in by_kind:
            raise ProfileError(f"unknown benchmark kind {p.kind!r}")
        cfg = tuple(p.config) if p.kind == "recov" else (p.config,)
        if not all(1 <= int(c) <= n_max for c in cfg):
            raise ProfileError(f"config {p.config} outside 1..{n_max}")
        if not p.value >= 0:
            raise ProfileError(f"negative value in {p}")
        if p.kind == "work" and p.value <= 0:
            raise ProfileError(f"work rate must be positive: {p}")
        config = tuple(int(c) for c in cfg) if p.kind == "recov" else int(p.config)
        by_kind[p.kind].append(BenchmarkPoint(p.kind, config, float(p.value)))

    if len(by_kind["work"]) < 2:
        raise ProfileError("need at least 2 work points")
    if not by_kind["ckpt"]:
        raise ProfileError("need at least 1 checkpoint point")

    work = _fill_vector(by_kind["work"], n_max, model)
    ckpt = _fill_vector(by_kind["ckpt"], n_max, model)

    keys, vals = _grouped(by_kind["recov"])
    kl = np.arange(1, n_max + 1)
    sums = (kl[:, None] + kl[None, :]).astype(float)
    distinct_sums = {k + l for k, l in keys}
    if len(keys) >= 2 and len(distinct_sums) >= 2 and vals.min() > 0:
        c, b = _power_law(np.array([k + l for k, l in keys], float), vals)
        recov = c * sums ** b
    elif keys:
        recov = np.full((n_max, n_max), float(vals.mean()))
    elif recov_default is not None:
        recov = np.full((n_max, n_max), float(recov_default))
    else:
        raise ProfileError("no recovery points and no recov_default")
    for (k, l), v in zip(keys, vals):
        recov[k - 1, l - 1] = v
    return AppProfile(n_max, work, ckpt, recov)
