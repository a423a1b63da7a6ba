"""Command-line entry point: ``risdof <subcommand> [flags]``.

Exit codes: 0 success, 1 run dominated by stalled solver trials, 2 invalid
input or configuration.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import dof as dofmod
from . import harness
from .channel import RisChannel
from .numerics import Rng, decode_complex, encode_complex
from .optimizer import DEFAULT_DELTA, AlmParams
from .precoding import (
    DEFAULT_RESTARTS,
    Constellation,
    SlpProblem,
    ml_decode,
    solve,
)

EXIT_OK, EXIT_STALLED, EXIT_CONFIG = 0, 1, 2

_TERM_LABELS = {
    0: ("transmit+RIS-limited", "M+N/2-1/2", "M+N/2"),
    1: ("RIS-limited", "N", "N+r"),
    2: ("receiver-limited", "K", "K"),
}


class ConfigError(Exception):
    pass


def _log_config(name, d):
    print(f"# effective {name} config: {json.dumps(d, sort_keys=True)}", file=sys.stderr)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# -- dof / region ---------------------------------------------------------------

def binding_label(spec):
    """Name of the binding term; ties go to the receiver, then the RIS."""
    idx = max(dofmod.binding_terms(spec))
    name, expr0, expr1 = _TERM_LABELS[idx]
    return f"{name}: {expr1 if spec.r else expr0}"


def cmd_dof(args):
    spec = dofmod.DofSpec(args.m, args.n, args.k, args.rank_r)
    _log_config("dof", {"m": spec.m, "n": spec.n, "k": spec.k, "rank_r": spec.r})
    value = dofmod.dof_joint(spec)
    print(f"{dofmod.format_half(value)} ({binding_label(spec)})")
    return EXIT_OK


def cmd_region(args):
    spec = dofmod.DofSpec(args.m, args.n, args.k, args.rank_r)
    _log_config("region", {"m": spec.m, "n": spec.n, "k": spec.k, "rank_r": spec.r})
    region = dofmod.dof_region(spec)
    print(f"shape: {region.shape}")
    for name, c in zip(("dof_x", "dof_theta", "sum"), region.constraints):
        print(f"{name} <= {dofmod.format_half(c.c)}")
    print("vertices:")
    for x, y in region.vertices:
        print(f"({dofmod.format_half(x)},{dofmod.format_half(y)})")
    if args.out:
        out = _out_dir(args.out)
        with open(os.path.join(out, "region.json"), "w") as fh:
            fh.write(region.to_json() + "\n")
        with open(os.path.join(out, "region.csv"), "w") as fh:
            fh.write(region.to_csv())
    return EXIT_OK


# -- precode / decode ----------------------------------------------------------

def _problem_from_args(args):
    if args.config:
        try:
            return SlpProblem.from_dict(_load_json(args.config))
        except (KeyError, ValueError) as e:
            raise ConfigError(f"bad problem file {args.config}: {e}") from e
    from .channel import sample_channel

    rng = Rng(args.seed, (0,))
    ch = sample_channel(rng.spawn(0), args.m, args.n, args.k, args.direct,
                        args.p, args.sigma2)
    target = np.exp(1j * rng.spawn(1).uniform_phase(args.k))
    return SlpProblem(ch, target)


def cmd_precode(args):
    problem = _problem_from_args(args)
    _log_config("precode", {"config": args.config, "seed": args.seed,
                             "restarts": args.restarts, "delta": args.delta,
                             "m": problem.channel.m, "n": problem.channel.n,
                             "k": problem.channel.k, "p": problem.channel.p,
                             "mode": problem.mode})
    sol = solve(problem, AlmParams(), args.restarts, Rng(args.seed, (1,)), args.delta)
    print(f"residual {sol.residual:.6g} feasible {str(sol.feasible).lower()} "
          f"|X|^2 {float(np.real(np.vdot(sol.x, sol.x))):.6g} "
          f"outer {sol.outer_iters} inner {sol.inner_iters} stop {sol.stop_reason}")
    if args.out:
        out = _out_dir(args.out)
        with open(os.path.join(out, "problem.json"), "w") as fh:
            json.dump(problem.to_dict(), fh)
        with open(os.path.join(out, "solution.json"), "w") as fh:
            json.dump(sol.to_dict(), fh, indent=2)
        with open(os.path.join(out, "trace.jsonl"), "w") as fh:
            for rec in sol.history:
                fh.write(json.dumps(rec) + "\n")
    return EXIT_STALLED if sol.stalled else EXIT_OK


def cmd_decode(args):
    if not args.config:
        raise ConfigError("decode needs --config with channel, y and candidates")
    d = _load_json(args.config)
    try:
        ch = RisChannel.from_dict(d)
        y = decode_complex(d["y"], (ch.k,))
        xs = [decode_complex(x, (ch.m,)) for x in d["x_candidates"]]
        if "psk_order" in d:
            const = Constellation.psk_product(xs, ch.n, int(d["psk_order"]))
        else:
            from .channel import PhaseVector

            const = Constellation.product(xs, [PhaseVector(t) for t in d["theta_candidates"]])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad decode file {args.config}: {e}") from e
    _log_config("decode", {"config": args.config, "candidates": len(const)})
    res = ml_decode(ch, y, const)
    print(json.dumps({
        "index": res.index,
        "metric": res.metric,
        "tie": res.tie,
        "x": encode_complex(res.x),
        "theta": [float(t) for t in np.angle(res.phi)],
    }))
    return EXIT_OK


# -- experiments ---------------------------------------------------------------

_EXPERIMENT_FLAGS = ("m", "n", "k", "k_list", "n_min", "n_max", "p", "sigma2", "seed",
                     "trials", "delta", "restarts", "threads", "grid_res",
                     "grid_extent", "direct", "levels")


def experiment_config(kind, args):
    d = {}
    if args.config:
        d.update(_load_json(args.config))
    d["kind"] = kind
    for name in _EXPERIMENT_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    try:
        return harness.ExperimentConfig.from_dict(d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {kind} configuration: {e}") from e


def _stall_exit(stalled, total):
    return EXIT_STALLED if total and stalled / total > 0.5 else EXIT_OK


def cmd_feasgrid(args):
    cfg = experiment_config(harness.FEASGRID, args)
    _log_config("feasgrid", cfg.to_dict())
    params = AlmParams()
    out = _out_dir(args.out)
    with harness.Stopwatch() as sw:
        res = harness.run_feasgrid(cfg, params)
    harness.write_csv(os.path.join(out, "feasgrid.csv"), harness.FEASGRID_HEADER, res.rows)
    harness.write_metadata(os.path.join(out, "feasgrid.meta.json"), cfg, params, sw.elapsed,
                           channel_seed=cfg.seed, stalled=res.stalled,
                           feasible_fraction=res.feasible_fraction())
    if args.svg:
        from .plotting import plot_feasgrid

        plot_feasgrid(res, os.path.join(out, "feasgrid.svg"))
    print(f"feasible fraction {res.feasible_fraction():.4f} over {len(res.rows)} points")
    return _stall_exit(res.stalled, len(res.rows))


def _transition(cfg, out, params, svg):
    with harness.Stopwatch() as sw:
        res = harness.run_transition(cfg, params)
    harness.write_csv(os.path.join(out, "transition.csv"), harness.TRANSITION_HEADER,
                      harness.transition_rows(res))
    harness.write_metadata(os.path.join(out, "transition.meta.json"), cfg, params, sw.elapsed,
                           stalled=res.stalled)
    if svg:
        from .plotting import plot_transition

        plot_transition(res, os.path.join(out, "transition.svg"))
    return res


def cmd_transition(args):
    cfg = experiment_config(harness.TRANSITION, args)
    _log_config("transition", cfg.to_dict())
    res = _transition(cfg, _out_dir(args.out), AlmParams(), args.svg)
    for row in res.rows:
        print(f"K={row.k} N={row.n} prob={row.prob:.3f}")
    return _stall_exit(res.stalled, res.total_trials)


def cmd_percentiles(args):
    cfg = experiment_config(harness.PERCENTILES, args)
    _log_config("percentiles", cfg.to_dict())
    out = _out_dir(args.out)
    params = AlmParams()
    if args.input:
        try:
            res = harness.read_transition_csv(args.input)
        except OSError as e:
            raise ConfigError(f"cannot read {args.input}: {e.strerror}") from e
    else:
        res = _transition(cfg, out, params, args.svg)
    try:
        table = harness.percentile_table(res, cfg.levels)
    except harness.RangeError as e:
        raise ConfigError(str(e)) from e
    harness.write_csv(os.path.join(out, "percentiles.csv"), harness.PERCENTILE_HEADER, table)
    if args.svg:
        from .plotting import plot_percentiles

        direct = res.rows[0].direct if res.rows else False
        plot_percentiles(table, os.path.join(out, "percentiles.svg"), cfg.m, direct)
    for k, level, n_first, n_interp in table:
        print(f"K={k} level={level:g} N={n_first} interp={n_interp:.3f}")
    return _stall_exit(res.stalled, res.total_trials)


# -- parser -------------------------------------------------------------------

def _int_list(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _float_list(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="risdof", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    def dims(p, m=2, n=5, k=4):
        p.add_argument("--m", type=int, default=m, help="transmit antennas")
        p.add_argument("--n", type=int, default=n, help="RIS elements")
        p.add_argument("--k", type=int, default=k, help="receive antennas")

    p = sub.add_parser("dof", help="joint-transmission DoF", formatter_class=fmt)
    dims(p)
    p.add_argument("--rank-r", type=int, default=0, help="direct-path rank")
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("region", help="multiple-access DoF region", formatter_class=fmt)
    dims(p)
    p.add_argument("--rank-r", type=int, default=0, help="direct-path rank")
    p.add_argument("--out", default=None, help="directory for region.json / region.csv")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("precode", help="solve one symbol-level precoding problem",
                       formatter_class=fmt)
    dims(p)
    p.add_argument("--p", type=float, default=10.0, help="transmit power")
    p.add_argument("--sigma2", type=float, default=1.0, help="noise variance")
    p.add_argument("--direct", action="store_true", default=False, help="include direct path")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS, help="random restarts")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="feasibility threshold")
    p.add_argument("--config", default=None, help="problem JSON (overrides sampling)")
    p.add_argument("--out", default=None, help="directory for problem/solution/trace")
    p.set_defaults(func=cmd_precode)

    p = sub.add_parser("decode", help="exhaustive ML decoding", formatter_class=fmt)
    p.add_argument("--config", default=None,
                   help="JSON with channel fields, y, x_candidates and psk_order "
                        "or theta_candidates")
    p.set_defaults(func=cmd_decode)

    defaults = harness.ExperimentConfig()
    for kind, func in ((harness.FEASGRID, cmd_feasgrid),
                       (harness.TRANSITION, cmd_transition),
                       (harness.PERCENTILES, cmd_percentiles)):
        p = sub.add_parser(kind, help=f"run the {kind} experiment",
                           formatter_class=argparse.RawDescriptionHelpFormatter)

        def opt(flag, typ, default, text, _p=p):
            _p.add_argument(flag, type=typ, default=None,
                            help=f"{text} (default: {default})")

        opt("--m", int, defaults.m, "transmit antennas")
        opt("--n", int, defaults.n, "RIS elements (feasgrid)")
        opt("--k", int, defaults.k, "receive antennas (feasgrid)")
        opt("--k-list", _int_list, "4", "receive antenna counts, comma separated")
        opt("--n-min", int, defaults.n_min, "smallest RIS size")
        opt("--n-max", int, defaults.n_max, "largest RIS size")
        opt("--p", float, "1 for feasgrid, 10 otherwise", "transmit power")
        opt("--sigma2", float, defaults.sigma2, "noise variance")
        opt("--seed", int, defaults.seed, "master seed")
        opt("--trials", int, defaults.trials, "trials per (K, N)")
        opt("--delta", float, defaults.delta, "feasibility threshold")
        opt("--restarts", int, defaults.restarts, "random restarts per problem")
        opt("--threads", int, defaults.threads, "worker processes")
        opt("--grid-res", int, defaults.grid_res, "grid points per axis")
        opt("--grid-extent", float, defaults.grid_extent, "grid half-width")
        opt("--levels", _float_list, "0.2,0.5,0.8", "success levels (percentiles)")
        p.add_argument("--direct", action="store_const", const=True, default=None,
                       help="include a direct path (default: off)")
        p.add_argument("--config", default=None, help="experiment JSON (default: none)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--svg", action="store_true", help="also render SVG figures "
                                                          "(default: off)")
        if kind == harness.PERCENTILES:
            p.add_argument("--input", default=None,
                           help="existing transition.csv instead of a new run (default: none)")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
