"""Command-line entry point: simulate, grover, optimize, figure, cascade."""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import io
from .cascade import CascadeSpec, NsgModel, plan_cascade
from .fock_dynamics import SubspaceState, cached_propagator
from .grover import (GroverConfig, PerIteration, SingleCrystal, angle_from_amplitude,
                     efficiency_mu_n, run_pipeline)
from .optimizer import (GridSpec, figure1_data, figure2_data, grover_schedule,
                        optimize_conventional, optimize_per_iteration, optimize_single_crystal,
                        resolve_workers)

FIG1_COLUMNS = ["n", "eff_conventional", "eff_updc", "tau0", "tau1", "M",
                "fn_sq_conventional", "fn_sq_updc"]
FIG2_COLUMNS = ["sqrt_n", "runtime", "n", "M", "tau1"]

# defaults applied after flags and config are merged
DEFAULTS = {
    "simulate": {"allow_large_n": False},
    "grover": {"M": None, "tau1": None, "schedule": None},
    "optimize": {"mode": "single-crystal", "step": 1e-3, "tau_max": 2 * math.pi, "M_max": None,
                 "mu_tol": 5e-4, "tie_tol": 1e-6, "threads": None, "prefilter": False},
    "figure": {"step": 1e-3, "tau_max": 2 * math.pi, "M_max": None, "mu_tol": 5e-4, "tie_tol": 1e-6,
               "threads": None, "prefilter_from": 0, "ns": None, "dat": None},
    "cascade": {"nsg_p": None, "ancillae": None, "max_levels": 30},
}
NON_CONFIG = {"command", "config", "out"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def _add_common(p):
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--config", help="JSON file of option values; flags take precedence")


def _add_grid(p):
    p.add_argument("--step", type=float, help="crystal time quantum (default 1e-3)")
    p.add_argument("--tau-max", dest="tau_max", type=float, help="largest crystal time (default 2 pi)")
    p.add_argument("--M-max", dest="M_max", type=int, help="iteration cap (default 4 ceil(sqrt n) + 4)")
    p.add_argument("--mu-tol", dest="mu_tol", type=float,
                   help="keep the fewest iterations within this of the best efficiency")
    p.add_argument("--tie-tol", dest="tie_tol", type=float,
                   help="efficiencies this close count as ties; the shortest crystals win")
    p.add_argument("--threads", type=int, help="worker threads (default: UPDC_THREADS or all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="updc", description="Fock-state down-conversion with sign-gate amplification")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="amplitudes and efficiency over time")
    p.add_argument("--n", type=int)
    p.add_argument("--tau", help="comma-separated times")
    p.add_argument("--tau-range", dest="tau_range", help="start:stop:step, inclusive")
    p.add_argument("--initial", help="comma-separated initial amplitudes (default |0,0,n>)")
    p.add_argument("--allow-large-n", dest="allow_large_n", action="store_true", default=None)
    _add_common(p)

    p = sub.add_parser("grover", help="per-stage trace of the amplification pipeline")
    p.add_argument("--n", type=int)
    p.add_argument("--tau0", type=float)
    p.add_argument("--tau1", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--schedule", help="JSON file with tau0 and per-iteration taus")
    _add_common(p)

    p = sub.add_parser("optimize", help="grid-optimize crystal times for one n")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=["conventional", "single-crystal", "per-iteration", "amplification"])
    _add_grid(p)
    p.add_argument("--prefilter", action="store_true", default=None,
                   help="coarse stride-10 pass before the full-resolution scan")
    _add_common(p)

    p = sub.add_parser("figure", help="efficiency table (1) or runtime table (2)")
    p.add_argument("which", type=int, choices=[1, 2])
    _add_grid(p)
    p.add_argument("--prefilter-from", dest="prefilter_from", type=int,
                   help="use the coarse prefilter for n at or above this (default 0: exhaustive for all n)")
    p.add_argument("--ns", help="comma-separated pump photon numbers")
    p.add_argument("--dat", help="also write a whitespace-separated data file here")
    _add_common(p)

    p = sub.add_parser("cascade", help="K-level cascade photon and success bookkeeping")
    p.add_argument("--k", dest="K", type=int)
    p.add_argument("--nsg-p", dest="nsg_p", type=float,
                   help="per-use success probability of a postselected sign gate")
    p.add_argument("--ancillae", type=int, help="ancilla photons per sign-gate use")
    p.add_argument("--max-levels", dest="max_levels", type=int)
    _add_common(p)
    return parser


def _resolve(args) -> argparse.Namespace:
    values = vars(args)
    if args.config:
        allowed = [k for k in values if k not in NON_CONFIG]
        for key, val in io.load_config(args.config, allowed).items():
            if values[key] is None:
                values[key] = val
    for key, val in DEFAULTS.get(args.command, {}).items():
        if values.get(key) is None:
            values[key] = val
    return argparse.Namespace(**values)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValueError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _grid(args) -> GridSpec:
    return GridSpec(step=args.step, tau_max=args.tau_max, M_max=args.M_max, mu_tol=args.mu_tol,
                    tie_tol=args.tie_tol)


def cmd_simulate(args):
    _require(args, "n")
    if (args.tau is None) == (args.tau_range is None):
        raise ValueError("give exactly one of --tau or --tau-range")
    taus = io.parse_float_list(args.tau) if args.tau is not None else io.parse_tau_range(args.tau_range)
    n = args.n
    prop = cached_propagator(n, bool(args.allow_large_n))
    if args.initial is None:
        start = SubspaceState.vacuum(n)
    else:
        start = SubspaceState(n, np.array(io.parse_float_list(args.initial)))
    traj = prop.trajectory(start.amplitudes, taus)
    columns = ["tau"] + [f"f_{k}" for k in range(n + 1)] + ["mu_n", "f_n_sq"]
    rows = []
    for j, tau in enumerate(taus):
        f = traj[:, j]
        row = {"tau": tau, "f_n_sq": float(f[n] ** 2)}
        row.update({f"f_{k}": float(f[k]) for k in range(n + 1)})
        row["mu_n"] = float(np.arange(n + 1) @ f**2) / n if n > 0 else None
        rows.append(row)
    with _output(args.out) as fh:
        io.write_csv(rows, columns, fh)


def cmd_grover(args):
    if args.schedule is not None:
        if args.tau1 is not None or args.M is not None:
            raise ValueError("--schedule conflicts with --tau1/--M")
        sched = io.load_schedule(args.schedule)
        n = args.n if args.n is not None else sched["n"]
        if n is None:
            raise ValueError("missing --n (not given in the schedule file either)")
        if sched["n"] is not None and sched["n"] != n:
            raise ValueError(f"schedule is for n={sched['n']} but --n is {n}")
        tau0 = args.tau0 if args.tau0 is not None else sched["tau0"]
        cfg = GroverConfig(n, tau0, PerIteration(sched["taus"]))
    else:
        _require(args, "n", "tau0")
        M = 0 if args.M is None else args.M
        if M > 0:
            _require(args, "tau1")
            cfg = GroverConfig(args.n, args.tau0, SingleCrystal(args.tau1, M))
        else:
            cfg = GroverConfig(args.n, args.tau0)
    trace = run_pipeline(cfg)
    rows = [{
        "stage": i, "kind": s.kind, "tau": s.tau, "f_n": s.f_n, "f_n_sq": s.f_n_sq,
        "mu_n": efficiency_mu_n(s.state), "theta": angle_from_amplitude(s.f_n),
    } for i, s in enumerate(trace.stages)]
    with _output(args.out) as fh:
        io.write_csv(rows, ["stage", "kind", "tau", "f_n", "f_n_sq", "mu_n", "theta"], fh)


def cmd_optimize(args):
    _require(args, "n")
    grid = _grid(args)
    workers = resolve_workers(args.threads)
    if args.mode == "conventional":
        rep = optimize_conventional(args.n, grid)
    elif args.mode == "single-crystal":
        rep = optimize_single_crystal(args.n, grid, workers=workers, prefilter=bool(args.prefilter))
    elif args.mode == "per-iteration":
        start = optimize_single_crystal(args.n, grid, workers=workers, prefilter=bool(args.prefilter))
        rep = optimize_per_iteration(args.n, grid, start=start)
    else:
        sched = grover_schedule(args.n, grid)
        trace = run_pipeline(sched.config())
        out = {"n": sched.n, "mode": "amplification", "tau0": sched.tau0, "taus": list(sched.taus),
               "theta_g": sched.theta_g, "M_target": sched.M_target, "mu": trace.mu_n,
               "fn_sq": trace.f_n_sq}
        with _output(args.out) as fh:
            fh.write(json.dumps(out, indent=2) + "\n")
        return
    out = {"n": rep.n, "mode": rep.mode, "mu": rep.mu, "fn_sq": rep.fn_sq, "tau0": rep.tau0,
           "taus": list(rep.taus), "M": rep.M, "runtime": rep.runtime, "mu_max": rep.mu_max}
    with _output(args.out) as fh:
        fh.write(json.dumps(out, indent=2) + "\n")


def cmd_figure(args):
    grid = _grid(args)
    workers = resolve_workers(args.threads)
    kwargs = {}
    if args.ns is not None:
        ns = args.ns if isinstance(args.ns, list) else io.parse_float_list(args.ns)
        if any(int(v) != v for v in ns):
            raise ValueError("--ns entries must be integers")
        kwargs["ns"] = tuple(int(v) for v in ns)
    pre = args.prefilter_from if args.prefilter_from > 0 else None
    rows = figure1_data(grid, workers=workers, prefilter_from=pre, **kwargs)
    columns = FIG1_COLUMNS
    if args.which == 2:
        rows, columns = figure2_data(rows), FIG2_COLUMNS
    with _output(args.out) as fh:
        io.write_csv(rows, columns, fh)
    if args.dat:
        with open(args.dat, "w", encoding="utf-8") as fh:
            io.write_dat(rows, columns, fh)


def cmd_cascade(args):
    _require(args, "K")
    if args.nsg_p is None:
        if args.ancillae:
            raise ValueError("--ancillae needs a postselected gate (--nsg-p)")
        nsg = NsgModel()
    else:
        nsg = NsgModel.nondeterministic(args.nsg_p, 2 if args.ancillae is None else args.ancillae)
    report = plan_cascade(CascadeSpec(args.K, nsg, args.max_levels))
    with _output(args.out) as fh:
        fh.write(report.to_json() + "\n")


COMMANDS = {"simulate": cmd_simulate, "grover": cmd_grover, "optimize": cmd_optimize,
            "figure": cmd_figure, "cascade": cmd_cascade}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
        COMMANDS[args.command](args)
    except (ValueError, TypeError, KeyError, OSError, np.linalg.LinAlgError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"updc: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
