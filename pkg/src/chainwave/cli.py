"""Command-line front end: ``chainwave {simulate,sweep,ensemble,verify}``.

Every command writes CSV data plus a ``*.json`` sidecar holding the full
parameter set into ``--out-dir``.  ``--config FILE`` loads a JSON object
whose keys are the long option names (dashes or underscores); explicit
flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .evolve import IntegratorConfig, NormDrift, SectorState, convergence_check, default_dt
from .fidelity import (NoMaximum, NotStationary, first_maximum, simulate,
                       stationary_end, stationary_fidelity)
from .model import (ChainSpec, FermiOff, FermiOn, InstantOn, Noisy, PowerOff, PowerOn, Static,
                    build_hamiltonian)
from .oracle import (MAX_SITES, bloch_average_quadrature, full_space_channel,
                     full_space_fidelity_trace)
from .stochastic import EnsembleAborted, disorder_ensemble, fluctuation_ensemble, noise_track
from .sweep import parse_range, sweep_powerlaw, sweep_tau_tf

log = logging.getLogger("chainwave")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _chain_args(p):
    p.add_argument("--n", type=int, default=10, help="number of qubits")
    p.add_argument("--jxy", type=float, default=1.0)
    p.add_argument("--jz", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=None, help="RK4 step (default from ramp width)")
    p.add_argument("--fidelity", choices=["phase_optimized", "averaged"], default="phase_optimized")


def _common(p):
    p.add_argument("--config", type=Path, help="JSON file with option values")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="fidelity trace of one protocol")
    _common(p)
    _chain_args(p)
    p.add_argument("--static", action="store_true", help="constant couplings")
    p.add_argument("--schedule", choices=["fermi", "power", "instant"], default="fermi")
    p.add_argument("--ti", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=6.2)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.5, help="power-law exponent")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--compare-static", action="store_true")

    p = sub.add_parser("sweep", help="(tau, t_f) grid or power-law scan")
    _common(p)
    _chain_args(p)
    p.add_argument("--tau", default="0.05:2:40", help="lo:hi:count")
    p.add_argument("--tf", default="4:9:40", help="lo:hi:count")
    p.add_argument("--ti", type=float, default=0.0)
    p.add_argument("--quantity", choices=["stationary", "first_max"], default="stationary")
    p.add_argument("--coupling", choices=["fermi", "instant"], default="fermi")
    p.add_argument("--powerlaw", action="store_true")
    p.add_argument("--a", default="0.1:1:10", help="exponents, lo:hi:count")
    p.add_argument("--budget", type=int, default=3)

    p = sub.add_parser("ensemble", help="disorder or coupling-noise Monte Carlo")
    _common(p)
    _chain_args(p)
    p.add_argument("--mode", choices=["disorder", "fluctuation"], default="disorder")
    p.add_argument("--strength", type=float, default=0.07)
    p.add_argument("--max-height", type=float, default=0.02)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None, help="default: $CHAINWAVE_SEED or 0")
    p.add_argument("--ti", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=6.2)
    p.add_argument("--tau", type=float, default=0.325)
    p.add_argument("--bins", type=int, default=40)

    p = sub.add_parser("verify", help="oracle and convergence checks")
    _common(p)
    _chain_args(p)
    p.add_argument("--schedule", choices=["static", "fermi", "power", "noisy"], default="fermi")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--tf", type=float, default=None)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--quadrature", action="store_true", help="closed form vs Bloch quadrature")
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in (argv or sys.argv[1:])
                 if a.startswith("--")}
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            parser.error(f"cannot read config {args.config}: {e}")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if not hasattr(args, key):
                parser.error(f"unknown config key {key!r}")
            if key not in given:
                setattr(args, key, value)
    if getattr(args, "seed", "absent") is None:
        args.seed = int(os.environ.get("CHAINWAVE_SEED", 0))
    return args


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def write_sidecar(path: Path, args, results: dict):
    params = {k: _jsonable(v) for k, v in vars(args).items() if k not in ("config", "verbose")}
    doc = {"version": __version__, "command": args.command, "params": params,
           "results": {k: _jsonable(v) for k, v in results.items()}}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_trace(path: Path, trace):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f_abs", "rel_phase", "f_avg", "f_opt"])
        for row in zip(trace.t, trace.f_abs, trace.rel_phase, trace.f_avg, trace.f_opt):
            w.writerow([repr(float(x)) for x in row])


def write_matrix(path: Path, taus, tfs, values):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau\\t_f"] + [repr(float(x)) for x in tfs])
        for tau, row in zip(taus, values):
            w.writerow([repr(float(tau))] + ["" if np.isnan(v) else repr(float(v)) for v in row])


def _spec(args) -> ChainSpec:
    return ChainSpec(args.n, j_xy=args.jxy, j_z=args.jz, b=args.b)


def _cfg(args, *schedules):
    return IntegratorConfig(dt=args.dt or default_dt(*schedules))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _schedules(args):
    if args.static:
        return Static(), Static()
    if args.schedule == "power":
        return PowerOn(args.tau, args.a), PowerOff(args.tf, args.tau, args.a)
    first = InstantOn(args.ti) if args.schedule == "instant" else FermiOn(args.ti, args.tau)
    return first, FermiOff(args.tf, args.tau)


def _summarise(trace, last, mode):
    out = {}
    try:
        peak = first_maximum(trace, mode)
        out.update(t_first_max=peak.t_first_max, f_first_max=peak.f_first_max,
                   half_width=peak.half_width)
    except NoMaximum:
        out.update(t_first_max=None, f_first_max=None, half_width=None)
    try:
        out["f_stationary"] = stationary_fidelity(trace, last, mode)
    except NotStationary:
        out["f_stationary"] = None
    return out


def cmd_simulate(args) -> int:
    spec = _spec(args)
    first, last = _schedules(args)
    if args.t_end is not None:
        t_end = args.t_end
    elif last.settle_time() is None:
        t_end = 2.0 * args.n
    else:
        t_end = float(stationary_end(last))
    trace = simulate(spec, first, last, t_end, _cfg(args, first, last))
    results = {"dynamic": _summarise(trace, last, args.fidelity)}
    write_trace(args.out_dir / "trace.csv", trace)
    if args.compare_static and not args.static:
        st = simulate(spec, t_end=t_end, cfg=_cfg(args))
        results["static"] = _summarise(st, Static(), args.fidelity)
        write_trace(args.out_dir / "trace_static.csv", st)
    write_sidecar(args.out_dir / "trace.json", args, results)
    for name, r in results.items():
        print(f"{name}: first max {r['f_first_max']} at t={r['t_first_max']}, "
              f"stationary {r['f_stationary']}")
    return 0


def cmd_sweep(args) -> int:
    spec = _spec(args)
    cfg = IntegratorConfig(dt=args.dt) if args.dt else None
    f0 = first_maximum(simulate(spec, t_end=2.0 * args.n), args.fidelity).f_first_max
    if args.powerlaw:
        a_grid = parse_range(args.a)
        pts = sweep_powerlaw(spec, a_grid, args.budget, cfg=cfg, mode=args.fidelity,
                             threads=args.threads)
        with (args.out_dir / "powerlaw.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "best_tau", "best_tf", "f_first_max"])
            for p in pts:
                w.writerow([repr(p.a), repr(p.best_tau), repr(p.best_tf), repr(p.f_first_max)])
        results = {"static_f0": f0, "points": [vars(p) for p in pts],
                   "all_above_static": all(p.f_first_max > f0 for p in pts)}
        write_sidecar(args.out_dir / "powerlaw.json", args, results)
        for p in pts:
            print(f"a={p.a:.3f}  tau={p.best_tau:.3f}  t_f={p.best_tf:.3f}  F={p.f_first_max:.5f}")
        print(f"static F0 = {f0:.5f}")
        return 0

    taus, tfs = parse_range(args.tau), parse_range(args.tf)
    grid = sweep_tau_tf(spec, taus, tfs, args.ti, args.quantity, coupling=args.coupling,
                        cfg=cfg, mode=args.fidelity, threads=args.threads)
    write_matrix(args.out_dir / "sweep.csv", taus, tfs, grid)
    results = {"static_f0": f0, "missing_cells": int(np.isnan(grid).sum())}
    if np.isfinite(grid).any():
        i, j = np.unravel_index(np.nanargmax(grid), grid.shape)
        results.update(best=float(grid[i, j]), best_tau=float(taus[i]), best_tf=float(tfs[j]),
                       improvement=float(grid[i, j] - f0))
        print(f"best {args.quantity} = {grid[i, j]:.5f} at tau={taus[i]:.4f}, t_f={tfs[j]:.4f}; "
              f"static F0 = {f0:.5f}")
    write_sidecar(args.out_dir / "sweep.json", args, results)
    return 0


def cmd_ensemble(args) -> int:
    spec = _spec(args)
    first, last = FermiOn(args.ti, args.tau), FermiOff(args.tf, args.tau)
    cfg = IntegratorConfig(dt=args.dt) if args.dt else None
    if args.mode == "disorder":
        rep = disorder_ensemble(spec, first, last, args.samples, args.strength, args.seed,
                                cfg=cfg, mode=args.fidelity, threads=args.threads)
    else:
        rep = fluctuation_ensemble(spec, first, last, args.samples, args.seed,
                                   max_height=args.max_height, cfg=cfg, mode=args.fidelity,
                                   threads=args.threads)
    rep.bins = args.bins
    with (args.out_dir / "samples.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_index", "seed", "dynamic", "static", "difference", "error"])
        for s in rep.samples:
            w.writerow([s.index, s.seed, repr(s.dynamic), repr(s.static), repr(s.difference),
                        s.error or ""])
    with (args.out_dir / "histogram.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "bin_lo", "bin_hi", "count"])
        for name in ("dynamic", "difference"):
            edges, counts = rep.histogram(name)
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                w.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])
    results = {"dynamic": rep.stats("dynamic"), "difference": rep.stats("difference"),
               "failed": len(rep.failed)}
    if args.mode == "fluctuation":
        results["reference"] = rep.params["reference"]
    write_sidecar(args.out_dir / "ensemble.json", args, results)
    d = results["difference"]
    print(f"{args.mode}: {d['n']} samples, mean difference {d['mean']:.5f} "
          f"(sd {d['std']:.5f}, min {d['min']:.5f}, max {d['max']:.5f}), "
          f"failed {len(rep.failed)}")
    return 0


def cmd_verify(args) -> int:
    if args.n > MAX_SITES:
        raise CliError(f"verify supports at most {MAX_SITES} sites (got {args.n})")
    spec = _spec(args)
    tf = args.tf if args.tf is not None else 0.6 * args.n
    if args.schedule == "static":
        first, last = Static(), Static()
    elif args.schedule == "power":
        first, last = PowerOn(args.tau, args.a), PowerOff(tf, args.tau, args.a)
    else:
        first, last = FermiOn(0.0, args.tau), FermiOff(tf, args.tau)
        if args.schedule == "noisy":
            rng = np.random.default_rng(args.seed)
            horizon = (args.t_end or tf + 4 * args.tau) + 1.0
            first = Noisy(first, noise_track(args.tau, horizon, rng))
            last = Noisy(last, noise_track(args.tau, horizon, rng))
    t_end = args.t_end if args.t_end is not None else tf + 4 * args.tau
    cfg = _cfg(args, first, last)
    checks = []

    trace = simulate(spec, first, last, t_end, cfg)
    grid, f_full, leak = full_space_fidelity_trace(spec, first, last, t_end, cfg.dt)
    dev = float(np.max(np.abs(f_full - trace.f_avg)))
    checks.append(("sector vs full-space averaged fidelity", dev, args.tol))
    checks.append(("full-space excitation leakage", leak, 1e-10))

    h = build_hamiltonian(spec, first, last)
    conv = convergence_check(h, SectorState.excitation_at(spec.n), t_end, cfg)
    checks.append(("step-halving discrepancy", conv, 1e-7))

    if args.quadrature:
        ch = full_space_channel(spec, first, last, t_end, cfg.dt)
        q = bloch_average_quadrature(ch, args.points)
        checks.append((f"closed form vs {args.points}-point quadrature",
                       abs(q - trace.f_avg[-1]), 1e-5))

    ok = True
    for name, value, tol in checks:
        passed = value <= tol
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {value:.3e} (tol {tol:.0e})")
    write_sidecar(args.out_dir / "verify.json", args,
                  {name: value for name, value, _ in checks} | {"passed": ok})
    return 0 if ok else 1


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "ensemble": cmd_ensemble,
            "verify": cmd_verify}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except (CliError, ValueError, NormDrift, EnsembleAborted, NoMaximum, NotStationary) as e:
        print(f"chainwave {args.command}: error: {e}", file=sys.stderr)
        return 2
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
