"""Checkpoint-interval selection for malleable parallel applications.

A Markov model of execution on a failure-prone pool of processors gives the
useful work per unit time (UWT) for a checkpoint interval; the interval that
maximizes it is recommended and checked against trace-driven simulation.
"""
from .chain import (build_chain, eliminate_states, enumerate_states, model_uwt,
                    stationary, threshold_score, uwt)
from .errors import MallckptError
from .policy import RpVector, build_rp
from .profile import AppProfile, fit_profile, load_profile, save_profile
from .trace import FailureTrace, estimate_rates, parse_trace, synth_trace

__version__ = "0.1.0"
