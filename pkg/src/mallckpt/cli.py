"""Command-line front end: ``mallckpt <subcommand> [flags]``.

Structured results are JSON (stdout, or ``--out``); tables are CSV.  Runs
are deterministic: all randomness comes from ``--seed`` (default 42),
which is echoed in the output metadata.  Errors are reported on stderr as
``{"error": ..., "message": ...}`` with exit status 1 for bad data or model
failures and 2 for bad usage.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import chain as chain_mod
from .errors import MallckptError
from .policy import KINDS, RpVector, build_rp
from .profile import DELTA_POLICIES, load_profile
from .search import recommend_interval
from .simulator import (default_grid, draw_segments, efficiency_json, run_efficiency,
                        simulate, timeline_csv)
from .trace import estimate_rates, format_trace, parse_trace, synth_trace

DEFAULT_SEED = 42
DEFAULT_THRES_GRID = "0,1e-5,1e-4,3e-4,6e-4,1e-3,3e-3,1e-2"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dumps(obj):
    return json.dumps(obj, separators=(",", ":"))


def _write(args, text, suffix=None):
    """Main output to ``--out`` (or stdout); side tables next to ``--out``."""
    if suffix is None:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    if args.out:
        out = Path(args.out)
        out.with_name(out.stem + suffix).write_text(text)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _load_trace(path):
    return parse_trace(Path(path).read_text())


def _load_profile(path):
    return load_profile(Path(path).read_text())


def _rates(args, trace):
    if args.lam is not None or args.theta is not None:
        if args.lam is None or args.theta is None:
            raise UsageError("--lambda and --theta must be given together")
        return args.lam, args.theta
    if trace is None:
        raise UsageError("need --trace or both --lambda and --theta")
    at = trace.horizon if args.at is None else args.at
    est = estimate_rates(trace, at)
    return est.lam, est.theta


def _resolve_rp(args, profile, trace, n):
    if args.rp:
        rp = RpVector.from_json(Path(args.rp).read_text())
        if rp.n != n:
            raise UsageError(f"--rp is for {rp.n} processors, expected {n}")
        return rp
    return build_rp(args.kind, n, profile=profile, trace=trace, trials=args.trials,
                    seed=args.seed)


def _processor_count(args, profile, trace):
    if args.n is not None:
        return args.n
    if args.rp:
        return RpVector.from_json(Path(args.rp).read_text()).n
    if trace is not None:
        return min(trace.node_count, profile.n_max)
    return profile.n_max


def cmd_rates(args):
    trace = _load_trace(args.trace)
    est = estimate_rates(trace, args.at, method=args.method)
    _write(args, _dumps(est.to_dict()))


def cmd_synth_trace(args):
    rng = np.random.default_rng(args.seed)
    _write(args, format_trace(synth_trace(args.n, args.lam, args.theta, args.horizon, rng)))


def cmd_policy(args):
    profile = _load_profile(args.profile) if args.profile else None
    trace = _load_trace(args.trace) if args.trace else None
    rp = build_rp(args.kind, args.n, profile=profile, trace=trace, trials=args.trials,
                  seed=args.seed, before=args.at)
    _write(args, _dumps(rp.to_dict()))


def _search_meta(args):
    return {"seed": args.seed, "i_min": args.i_min, "band_pct": args.band_pct,
            "thres": args.thres, "delta_policy": args.delta_policy}


def cmd_recommend(args):
    profile = _load_profile(args.profile)
    trace = _load_trace(args.trace) if args.trace else None
    lam, theta = _rates(args, trace)
    n = _processor_count(args, profile, trace)
    rp = _resolve_rp(args, profile, trace, n)
    rec = recommend_interval(n, rp, profile, lam, theta, i_min=args.i_min,
                             band_pct=args.band_pct, thres=args.thres,
                             delta_policy=args.delta_policy, threads=args.threads)
    data = rec.to_dict()
    data["meta"]["seed"] = args.seed
    _write(args, _dumps(data))
    _write(args, rec.sweep_csv(), ".sweep.csv")


def cmd_simulate(args):
    profile = _load_profile(args.profile)
    trace = _load_trace(args.trace)
    n = _processor_count(args, profile, trace)
    rp = _resolve_rp(args, profile, trace, n)
    rep = simulate(trace, (args.start, args.dur), profile, rp, args.interval, timeline=True)
    data = rep.to_dict()
    data["meta"] = {"seed": args.seed, "rp": list(rp.rp)}
    _write(args, _dumps(data))
    _write(args, timeline_csv(rep), ".timeline.csv")


def cmd_efficiency(args):
    profile = _load_profile(args.profile)
    trace = _load_trace(args.trace)
    n = _processor_count(args, profile, trace)
    rp = _resolve_rp(args, profile, trace, n)
    grid = _floats(args.grid) if args.grid else default_grid(args.i_min)
    dur_max = trace.horizon if args.dur_max is None else args.dur_max
    dur_min = dur_max if args.dur_min is None else args.dur_min
    rng = np.random.default_rng(args.seed)
    segments = draw_segments(trace, args.segments, dur_min, dur_max, rng)

    def recommend(rates):
        return recommend_interval(n, rp, profile, rates.lam, rates.theta, i_min=args.i_min,
                                  band_pct=args.band_pct, thres=args.thres,
                                  delta_policy=args.delta_policy)

    report = run_efficiency(trace, profile, rp, segments, recommend, grid, args.threads)
    meta = {**_search_meta(args), "rp": list(rp.rp), "grid": grid,
            "dur_min": dur_min, "dur_max": dur_max}
    _write(args, efficiency_json(report, meta))


def cmd_calibrate_thres(args):
    profile = _load_profile(args.profile)
    trace = _load_trace(args.trace) if args.trace else None
    lam, theta = _rates(args, trace)
    n = _processor_count(args, profile, trace)
    rp = _resolve_rp(args, profile, trace, n)
    full = chain_mod.build_chain(n, rp, profile, lam, theta, args.interval,
                                 args.delta_policy, args.threads)
    full_uwt = chain_mod.uwt(full, chain_mod.stationary(full))
    up_count = n * (n + 1) // 2
    rows = ["thres,threserror,elims_fraction,score"]
    for thres in _floats(args.thres_grid):
        red = chain_mod.eliminate_states(full, thres)
        red_uwt = chain_mod.uwt(red, chain_mod.stationary(red))
        err = min(abs(full_uwt - red_uwt) / full_uwt, 1.0)
        score = chain_mod.threshold_score(full_uwt, red_uwt, red.elims, up_count,
                                          args.alpha, args.beta)
        rows.append(f"{thres!r},{err!r},{red.elims / up_count!r},{score!r}")
    _write(args, "\n".join(rows) + "\n")


def build_parser():
    parser = _Parser(prog="mallckpt", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, threads=False):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"random seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="output file (default stdout); CSV side tables "
                       "are written next to it")
        if threads:
            p.add_argument("--threads", type=int, default=1,
                           help="worker threads; results do not depend on it (default 1)")

    def model_opts(p):
        p.add_argument("--i-min", type=float, default=300.0,
                       help="first interval tried, seconds (default 300)")
        p.add_argument("--thres", type=float, default=chain_mod.DEFAULT_THRES,
                       help="up-state elimination threshold, probability (default 0.0006)")
        p.add_argument("--band-pct", type=float, default=0.08,
                       help="relative UWT band averaged into i_model, fraction (default 0.08)")
        p.add_argument("--delta-policy", choices=DELTA_POLICIES, default="mean_in",
                       help="representative recovery cost per processor count")

    def rp_opts(p):
        p.add_argument("--rp", help="RpVector JSON file")
        p.add_argument("--kind", choices=KINDS, default="greedy",
                       help="policy to build when --rp is absent (default greedy)")
        p.add_argument("--n", type=int, help="processor count")
        p.add_argument("--trials", type=int, default=50,
                       help="random subsets per count for the ab policy (default 50)")

    def rate_opts(p):
        p.add_argument("--lambda", dest="lam", type=float,
                       help="per-processor failure rate, 1/s")
        p.add_argument("--theta", type=float, help="per-processor repair rate, 1/s")
        p.add_argument("--at", type=float,
                       help="estimate rates from history before this time, s "
                       "(default trace horizon)")

    p = sub.add_parser("rates", help="estimate failure and repair rates from a trace")
    p.add_argument("--trace", required=True, help="trace CSV file")
    p.add_argument("--at", type=float, required=True, help="use history before this time, s")
    p.add_argument("--method", choices=("between_starts", "uptime"), default="between_starts",
                   help="MTTF estimator")
    common(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("synth-trace", help="generate an exponential failure trace")
    p.add_argument("--n", type=int, required=True, help="node count")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="failure rate, 1/s")
    p.add_argument("--theta", type=float, required=True, help="repair rate, 1/s")
    p.add_argument("--horizon", type=float, required=True, help="trace length, s")
    common(p)
    p.set_defaults(func=cmd_synth_trace)

    p = sub.add_parser("policy", help="build a rescheduling policy vector")
    p.add_argument("--kind", choices=KINDS, required=True, help="policy kind")
    p.add_argument("--n", type=int, required=True, help="processor count")
    p.add_argument("--profile", help="profile JSON file (pb)")
    p.add_argument("--trace", help="trace CSV file (ab)")
    p.add_argument("--trials", type=int, default=50,
                   help="random subsets per count for ab (default 50)")
    p.add_argument("--at", type=float, help="ab: only failures before this time, s")
    common(p)
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("recommend", help="recommend a checkpoint interval")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--trace", help="trace CSV file (rates source, ab policy)")
    rate_opts(p)
    rp_opts(p)
    model_opts(p)
    common(p, threads=True)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("simulate", help="replay one execution segment")
    p.add_argument("--trace", required=True, help="trace CSV file")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--interval", type=float, required=True, help="checkpoint interval, s")
    p.add_argument("--start", type=float, required=True, help="segment start, s")
    p.add_argument("--dur", type=float, required=True, help="segment duration, s")
    rp_opts(p)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("efficiency", help="model efficiency over random segments")
    p.add_argument("--trace", required=True, help="trace CSV file")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--segments", type=int, default=20, help="segment count (default 20)")
    p.add_argument("--dur-min", type=float, help="shortest segment, s (default --dur-max)")
    p.add_argument("--dur-max", type=float, help="longest segment, s (default horizon)")
    p.add_argument("--grid", help="candidate intervals, comma-separated seconds "
                   "(default i_min * 2^(k/4), k = 0..40)")
    rp_opts(p)
    model_opts(p)
    common(p, threads=True)
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("calibrate-thres", help="error/size trade-off of elimination thresholds")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--trace", help="trace CSV file (rates source)")
    p.add_argument("--interval", type=float, default=3600.0,
                   help="checkpoint interval, s (default 3600)")
    p.add_argument("--thres-grid", default=DEFAULT_THRES_GRID,
                   help=f"thresholds, comma-separated probabilities (default {DEFAULT_THRES_GRID})")
    p.add_argument("--alpha", type=float, default=0.7, help="weight of model error (default 0.7)")
    p.add_argument("--beta", type=float, default=0.3,
                   help="weight of eliminated fraction (default 0.3)")
    p.add_argument("--delta-policy", choices=DELTA_POLICIES, default="mean_in",
                   help="representative recovery cost per processor count")
    rate_opts(p)
    rp_opts(p)
    common(p, threads=True)
    p.set_defaults(func=cmd_calibrate_thres)
    return parser


def _fail(kind, message, status):
    sys.stderr.write(_dumps({"error": kind, "message": message}) + "\n")
    return status


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    except (MallckptError, ValueError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
