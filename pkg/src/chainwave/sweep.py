"""Grid scans over ramp parameters and local refinement of the best cell."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .evolve import IntegratorConfig
from .fidelity import Mode
from .model import ChainSpec, FermiOff, FermiOn, InstantOn, PowerOff, PowerOn
from .runs import Protocol, run_protocols

Quantity = Literal["stationary", "first_max"]
Coupling = Literal["fermi", "instant"]

TAU_RANGE = (0.05, 2.0)
TF_RANGE = (4.0, 9.0)


def _check_grid(name, g):
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or len(g) == 0 or np.any(np.diff(g) <= 0):
        raise ValueError(f"{name} grid must be non-empty and strictly increasing")
    return g


def fermi_protocol(spec: ChainSpec, tau: float, t_f: float, t_i: float = 0.0,
                   coupling: Coupling = "fermi") -> Protocol:
    first = FermiOn(t_i, tau) if coupling == "fermi" else InstantOn(t_i)
    return Protocol(spec, first, FermiOff(t_f, tau))


def power_protocol(spec: ChainSpec, tau: float, t_f: float, a: float) -> Protocol:
    return Protocol(spec, PowerOn(tau, a), PowerOff(t_f, tau, a))


def _pick(outcome, quantity):
    s = outcome.summary
    return s.f_stationary if quantity == "stationary" else s.f_first_max


def evaluate(protocols: Sequence[Protocol], quantity: Quantity, *, cfg=None,
             mode: Mode = "phase_optimized", threads: int = 1) -> np.ndarray:
    """Figure of merit of each protocol; NaN where it is undefined."""
    outs = run_protocols(protocols, cfg=cfg, mode=mode, threads=threads,
                         peak=quantity == "first_max", stationary=quantity == "stationary")
    return np.array([_pick(o, quantity) for o in outs], dtype=float)


def scan_tau_tf(spec: ChainSpec, tau_grid, tf_grid, t_i: float = 0.0, *,
                coupling: Coupling = "fermi", cfg: IntegratorConfig | None = None,
                mode: Mode = "phase_optimized", threads: int = 1) -> dict[str, np.ndarray]:
    """Both figures of merit on a ``(tau, t_f)`` grid from one set of runs."""
    taus = _check_grid("tau", tau_grid)
    tfs = _check_grid("t_f", tf_grid)
    protos = [fermi_protocol(spec, tau, tf, t_i, coupling) for tau in taus for tf in tfs]
    outs = run_protocols(protos, cfg=cfg, mode=mode, threads=threads)
    shape = (len(taus), len(tfs))
    return {q: np.array([_pick(o, q) for o in outs], dtype=float).reshape(shape)
            for q in ("first_max", "stationary")}


def sweep_tau_tf(spec: ChainSpec, tau_grid, tf_grid, t_i: float = 0.0,
                 quantity: Quantity = "stationary", *, coupling: Coupling = "fermi",
                 cfg: IntegratorConfig | None = None, mode: Mode = "phase_optimized",
                 threads: int = 1) -> np.ndarray:
    """Fermi-ramp protocol scored on a ``(tau, t_f)`` grid.

    Returns an array of shape ``(len(tau_grid), len(tf_grid))``; cells
    without a maximum or a stationary value are NaN.  ``coupling="instant"``
    switches the first bond on abruptly at ``t_i``.
    """
    taus = _check_grid("tau", tau_grid)
    tfs = _check_grid("t_f", tf_grid)
    protos = [fermi_protocol(spec, tau, tf, t_i, coupling) for tau in taus for tf in tfs]
    return evaluate(protos, quantity, cfg=cfg, mode=mode, threads=threads).reshape(len(taus), len(tfs))


@dataclass(frozen=True)
class Optimum:
    tau: float
    t_f: float
    value: float
    coarse_value: float


def refine(objective: Callable[[np.ndarray], np.ndarray], x0: Sequence[float],
           value0: float, steps: Sequence[float], rounds: int = 2,
           lower: Sequence[float] | None = None) -> tuple[np.ndarray, float]:
    """Coordinate-wise three-point parabolic ascent.

    ``objective`` maps an ``(m, d)`` array of points to ``m`` values.  Each
    round probes ``x +- step`` along every coordinate, jumps to the vertex
    of the fitted parabola (clamped to the probe interval) when that
    improves, and then halves the steps.  The returned value never falls
    below ``value0``.
    """
    x = np.array(x0, dtype=float)
    best = float(value0)
    steps = np.array(steps, dtype=float)
    lo = np.full(len(x), -np.inf) if lower is None else np.asarray(lower, float)
    for _ in range(rounds):
        for d in range(len(x)):
            h = steps[d]
            probes = np.repeat(x[None, :], 2, axis=0)
            probes[0, d] -= h
            probes[1, d] += h
            probes[:, d] = np.maximum(probes[:, d], lo[d])
            ym, yp = objective(probes)
            cands = [(ym, probes[0]), (yp, probes[1])]
            denom = ym - 2 * best + yp
            if np.isfinite(denom) and denom < 0:
                shift = np.clip(0.5 * h * (ym - yp) / denom, -h, h)
                xv = x.copy()
                xv[d] = max(x[d] + shift, lo[d])
                cands.append((objective(xv[None, :])[0], xv))
            for y, p in cands:
                if np.isfinite(y) and y > best:
                    best, x = float(y), p.copy()
        steps = steps / 2
    return x, best


def optimize_fermi(spec: ChainSpec, tau_grid, tf_grid, quantity: Quantity = "first_max", *,
                   coupling: Coupling = "fermi", rounds: int = 2, cfg=None,
                   mode: Mode = "phase_optimized", threads: int = 1) -> tuple[Optimum, np.ndarray]:
    """Best ``(tau, t_f)`` of the Fermi protocol: grid scan plus refinement."""
    taus, tfs = _check_grid("tau", tau_grid), _check_grid("t_f", tf_grid)
    grid = sweep_tau_tf(spec, taus, tfs, 0.0, quantity, coupling=coupling, cfg=cfg,
                        mode=mode, threads=threads)
    i, j = np.unravel_index(np.nanargmax(grid), grid.shape)
    obj = lambda pts: evaluate([fermi_protocol(spec, p[0], p[1], 0.0, coupling) for p in pts],  # noqa: E731
                               quantity, cfg=cfg, mode=mode)
    steps = [_spacing(taus), _spacing(tfs)]
    x, best = refine(obj, [taus[i], tfs[j]], grid[i, j], steps, rounds, lower=[1e-3, 0.0])
    return Optimum(float(x[0]), float(x[1]), best, float(grid[i, j])), grid


def _spacing(g):
    return float(g[1] - g[0]) if len(g) > 1 else max(0.1 * abs(float(g[0])), 0.05)


@dataclass(frozen=True)
class PowerLawPoint:
    a: float
    best_tau: float
    best_tf: float
    f_first_max: float
    coarse_value: float


POWER_TAU = np.linspace(0.5, 5.0, 10)
POWER_TF = np.linspace(1.0, 9.0, 17)


def sweep_powerlaw(spec: ChainSpec, a_grid, per_a_optimizer_budget: int = 3, *,
                   tau_grid=POWER_TAU, tf_grid=POWER_TF, cfg=None,
                   mode: Mode = "phase_optimized", threads: int = 1) -> list[PowerLawPoint]:
    """Optimised first fidelity maximum of the power-law protocol per exponent.

    A budget of 1 is the coarse grid alone; every further unit adds one
    refinement round.
    """
    if per_a_optimizer_budget < 1:
        raise ValueError("budget must be >= 1")
    a_grid = np.atleast_1d(np.asarray(a_grid, dtype=float))
    taus, tfs = _check_grid("tau", tau_grid), _check_grid("t_f", tf_grid)
    out = []
    for a in a_grid:
        protos = [power_protocol(spec, tau, tf, a) for tau in taus for tf in tfs]
        grid = evaluate(protos, "first_max", cfg=cfg, mode=mode, threads=threads)
        grid = grid.reshape(len(taus), len(tfs))
        i, j = np.unravel_index(np.nanargmax(grid), grid.shape)
        obj = lambda pts, a=a: evaluate([power_protocol(spec, p[0], p[1], a) for p in pts],  # noqa: E731
                                        "first_max", cfg=cfg, mode=mode)
        x, best = refine(obj, [taus[i], tfs[j]], grid[i, j], [_spacing(taus), _spacing(tfs)],
                         per_a_optimizer_budget - 1, lower=[1e-3, 0.0])
        out.append(PowerLawPoint(float(a), float(x[0]), float(x[1]), best, float(grid[i, j])))
    return out


def parse_range(text: str) -> np.ndarray:
    """``"lo:hi:count"`` to an inclusive linspace; a bare number is one point."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"range must look like lo:hi:count, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("range count must be >= 1")
    return np.linspace(lo, hi, n)
