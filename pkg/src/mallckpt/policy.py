"""Rescheduling policies: how many processors to use given how many work.

``rp[i - 1]`` is the processor count chosen when ``i`` processors are
functional.  Three policies are provided:

greedy
    use every functional processor.
pb (performance based)
    use the count with the highest work rate among ``1..i``, i.e. the
    shortest failure-free run time.
ab (availability based)
    use the count whose random subsets see the fewest failures per
    processor in a trace.

Ties always go to the smaller processor count.
"""
import json
from dataclasses import dataclass

import numpy as np

from .errors import PolicyError
from .trace import avg_failures, avg_failures_exhaustive

KINDS = ("greedy", "pb", "ab")

# relative slack under which two scores count as a tie
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class RpVector:
    n: int
    rp: tuple

    def __post_init__(self):
        rp = tuple(int(r) for r in self.rp)
        object.__setattr__(self, "rp", rp)
        if self.n < 1 or len(rp) != self.n:
            raise PolicyError(f"rp must have length n={self.n}, got {len(rp)}")
        for i, r in enumerate(rp, start=1):
            if not 1 <= r <= i:
                raise PolicyError(f"rp[{i}] = {r} outside 1..{i}")

    def __getitem__(self, total):
        """Processor count chosen when ``total`` (1-based) are functional."""
        if not 1 <= total <= self.n:
            raise IndexError(f"total {total} outside 1..{self.n}")
        return self.rp[total - 1]

    def to_dict(self):
        return {"n": self.n, "rp": list(self.rp)}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
            return cls(int(data["n"]), data["rp"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, PolicyError):
                raise
            raise PolicyError(f"bad RpVector JSON: {exc}") from None


def _prefix_best(scores, better):
    """rp[i] = best index among the first i scores (1-based result)."""
    rp = []
    best = 0
    for i in range(len(scores)):
        if better(scores[i], scores[best]):
            best = i
        rp.append(best + 1)
    return rp


def _strictly_greater(x, y):
    return x > y and not np.isclose(x, y, rtol=_TIE_RTOL, atol=0.0)


def build_rp(kind, n, profile=None, trace=None, trials=50, seed=0, before=None,
             exhaustive=False):
    """Build the rescheduling vector for policy ``kind``.

    ``ab`` scores each count with :func:`~mallckpt.trace.avg_failures`
    (``trials`` random subsets, seeded per count and trial).  With
    ``exhaustive=True`` every subset is enumerated instead, which is only
    practical for small ``n``.  ``before`` restricts the failure history to
    events strictly before that time.
    """
    if kind not in KINDS:
        raise PolicyError(f"unknown policy {kind!r}; expected one of {KINDS}")
    if n < 1:
        raise PolicyError("n must be >= 1")
    if kind == "greedy":
        return RpVector(n, range(1, n + 1))
    if kind == "pb":
        if profile is None:
            raise PolicyError("pb policy needs an application profile")
        if profile.n_max < n:
            raise PolicyError(f"profile covers {profile.n_max} processors, need {n}")
        work = [profile.work_rate(a) for a in range(1, n + 1)]
        return RpVector(n, _prefix_best(work, _strictly_greater))

    if trace is None:
        raise PolicyError("ab policy needs a failure trace")
    if trace.node_count < n:
        raise PolicyError(f"trace has {trace.node_count} nodes, need {n}")
    if exhaustive:
        fails = [avg_failures_exhaustive(trace, m, before=before) for m in range(1, n + 1)]
    else:
        fails = [avg_failures(trace, m, trials, seed, before=before) for m in range(1, n + 1)]
    return RpVector(n, _prefix_best(fails, lambda x, y: _strictly_greater(y, x)))
