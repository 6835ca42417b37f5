"""Bloch-sphere averaged transfer fidelity and trace analysis.

For an input ``alpha|0> + beta|1>`` on the first qubit the last qubit ends
up in::

    rho_00 = 1 - |beta|^2 |f|^2
    rho_11 = |beta|^2 |f|^2
    rho_01 = alpha conj(beta) v conj(f)

with ``f`` the transfer amplitude and ``v`` the vacuum phase.  Averaging
``<psi|rho|psi>`` over the sphere gives

    F = 1/2 + |f|^2 / 6 + |f| cos(arg f - arg v) / 3

and compensating the relative phase gives ``F_opt = 1/2 + |f|^2/6 + |f|/3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .evolve import IntegratorConfig, NormDrift, SectorState, default_dt, make_grid, propagate
from .model import ChainSpec, Schedule, Static, build_hamiltonian

Mode = Literal["averaged", "phase_optimized"]
MAX_THRESHOLD = 0.55


class NoMaximum(ValueError):
    """The fidelity curve has no qualifying local maximum."""


class NotStationary(ValueError):
    """The transfer amplitude is still changing: decoupling is incomplete."""


def averaged_fidelity(f_abs, rel_phase):
    return 0.5 + f_abs ** 2 / 6.0 + f_abs * np.cos(rel_phase) / 3.0


def optimized_fidelity(f_abs):
    return 0.5 + f_abs ** 2 / 6.0 + f_abs / 3.0


def output_density_matrix(vac_phase, f, alpha, beta) -> np.ndarray:
    """Reduced state of the last qubit for input ``alpha|0> + beta|1>``."""
    p1 = abs(beta) ** 2 * abs(f) ** 2
    coh = alpha * np.conj(beta) * vac_phase * np.conj(f)
    return np.array([[1.0 - p1, coh], [np.conj(coh), p1]], dtype=complex)


@dataclass(frozen=True)
class FidelitySample:
    t: float
    f_abs: float
    rel_phase: float
    f_avg: float
    f_opt: float

    def value(self, mode: Mode = "phase_optimized") -> float:
        return self.f_opt if mode == "phase_optimized" else self.f_avg


def fidelity_of_state(s: SectorState, mode: Mode = "phase_optimized",
                      norm_tol: float = 1e-6) -> FidelitySample:
    """Fidelity sample of a single-chain sector state.

    ``mode`` only records which value the caller is after; both fidelities
    are always filled in.
    """
    if mode not in ("averaged", "phase_optimized"):
        raise ValueError(f"unknown fidelity mode {mode!r}")
    if abs(s.norm() - 1.0) > norm_tol:
        raise ValueError(f"state is not normalised (norm {s.norm():.6g})")
    f = complex(s.amp[-1])
    phase = float(np.angle(f * np.conj(s.vac_phase)))
    return FidelitySample(float(s.t), abs(f), phase,
                          float(averaged_fidelity(abs(f), phase)),
                          float(optimized_fidelity(abs(f))))


@dataclass
class FidelityTrace:
    """Fidelity time series stored column-wise."""

    t: np.ndarray
    f_abs: np.ndarray
    rel_phase: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trace times must be strictly increasing")

    @classmethod
    def from_amplitudes(cls, t, last, vac, meta=None):
        last = np.asarray(last)
        return cls(t, np.abs(last), np.angle(last * np.conj(vac)), dict(meta or {}))

    @property
    def f_avg(self):
        return averaged_fidelity(self.f_abs, self.rel_phase)

    @property
    def f_opt(self):
        return optimized_fidelity(self.f_abs)

    def values(self, mode: Mode = "phase_optimized") -> np.ndarray:
        return self.f_opt if mode == "phase_optimized" else self.f_avg

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> FidelitySample:
        return FidelitySample(float(self.t[i]), float(self.f_abs[i]), float(self.rel_phase[i]),
                              float(self.f_avg[i]), float(self.f_opt[i]))


@dataclass(frozen=True)
class TransferSummary:
    t_first_max: float = np.nan
    f_first_max: float = np.nan
    half_width: float = np.nan
    f_stationary: float = np.nan


def _first_peak_index(f):
    # rise into an exactly flat plateau counts as a peak
    ok = (f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:]) & (f[1:-1] > MAX_THRESHOLD)
    idx = np.flatnonzero(ok)
    return int(idx[0]) + 1 if len(idx) else None


def _parabola(t, f, i):
    t0, t1, t2 = t[i - 1:i + 2]
    y0, y1, y2 = f[i - 1:i + 2]
    if y2 == y1:  # plateau onset: a parabola would overshoot the flat part
        return t1, y1
    a, b, c = np.polyfit([t0 - t1, 0.0, t2 - t1], [y0, y1, y2], 2)
    if a >= 0:
        return t1, y1
    x = -b / (2 * a)
    if not (t0 - t1) <= x <= (t2 - t1):
        return t1, y1
    return t1 + x, max(y1, c - b * b / (4 * a))


def _crossing(t, f, level, start, step):
    i = start
    while 0 <= i + step < len(f):
        j = i + step
        if f[j] <= level:
            return t[j] + (level - f[j]) * (t[i] - t[j]) / (f[i] - f[j])
        i = j
    return None


def first_maximum(trace: FidelityTrace, mode: Mode = "phase_optimized") -> TransferSummary:
    """Locate the first fidelity maximum above ``1/2 + 0.05``.

    The peak is refined with a parabola through the three samples around
    it.  ``half_width`` is the full width at the level halfway between
    ``1/2`` and the peak; it is ``inf`` when the curve never falls back to
    that level (a localised state).

    Raises:
        NoMaximum: if no sample qualifies.
    """
    f = trace.values(mode)
    i = _first_peak_index(f)
    if i is None:
        raise NoMaximum("fidelity curve has no local maximum above 0.55")
    t_max, f_max = _parabola(trace.t, f, i)
    level = 0.5 * (f_max + 0.5)
    left = _crossing(trace.t, f, level, i, -1)
    right = _crossing(trace.t, f, level, i, +1)
    if right is None:
        width = np.inf
    else:
        width = right - (trace.t[0] if left is None else left)
    return TransferSummary(float(t_max), float(f_max), float(width))


def stationary_fidelity(trace: FidelityTrace, sched_last: Schedule,
                        mode: Mode = "phase_optimized", tol: float = 1e-6) -> float:
    """Fidelity of the state frozen on the last qubit after decoupling.

    Raises:
        NotStationary: if the schedule never decouples, the trace stops
            before decoupling completes, or ``|f|`` still varies by more
            than ``tol`` over the last 5% of the trace.
    """
    settle = sched_last.settle_time()
    if settle is None:
        raise NotStationary("last bond is never decoupled")
    if np.ndim(settle):
        raise ValueError("expected a single-chain schedule")
    if trace.t[-1] < settle:
        raise NotStationary(f"trace ends at {trace.t[-1]:.4g}, decoupling completes at {settle:.4g}")
    tail = trace.f_abs[trace.t >= trace.t[-1] - 0.05 * (trace.t[-1] - trace.t[0])]
    spread = float(np.ptp(tail))
    if spread > tol:
        raise NotStationary(f"|f| still varies by {spread:.2e} at the end of the trace")
    return float(trace.values(mode)[-1])


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def stationary_end(sched_last: Schedule, pad: float = 1.0):
    """Integration end time for a decoupling run.

    The run is stretched so that the last 5% of it lies after the
    decoupling completes.
    """
    settle = sched_last.settle_time()
    if settle is None:
        raise NotStationary("last bond is never decoupled")
    return np.maximum(settle / 0.95, settle + pad)


def simulate(spec: ChainSpec, first: Schedule | None = None, last: Schedule | None = None,
             t_end: float = 20.0, cfg: IntegratorConfig | None = None,
             t0: float = 0.0) -> FidelityTrace:
    """Inject the excitation on site 1 at ``t0`` and record the fidelity trace."""
    first, last = first or Static(), last or Static()
    h = build_hamiltonian(spec, first, last)
    cfg = cfg or IntegratorConfig(dt=default_dt(first, last))
    run = propagate(h, SectorState.excitation_at(spec.n, t=t0), make_grid(h, t0, t_end, cfg.dt))
    if run.drift.max() > cfg.norm_tol:
        raise NormDrift(f"norm drifted by {run.drift.max():.3e}; reduce dt")
    return FidelityTrace.from_amplitudes(run.t, run.last, run.vac, meta={
        "spec": spec, "first": first, "last": last, "dt": cfg.dt, "t0": t0})


def static_first_maximum(spec: ChainSpec, t_end: float = 20.0, cfg=None,
                         mode: Mode = "phase_optimized") -> TransferSummary:
    """First maximum of the chain with all couplings constant."""
    return first_maximum(simulate(spec, t_end=t_end, cfg=cfg), mode)


def transfer_summary(spec: ChainSpec, first: Schedule, last: Schedule,
                     t_end: float | None = None, cfg=None,
                     mode: Mode = "phase_optimized") -> tuple[TransferSummary, FidelityTrace]:
    """Run a coupling/decoupling protocol and summarise it."""
    t_end = float(stationary_end(last)) if t_end is None else t_end
    trace = simulate(spec, first, last, t_end, cfg)
    try:
        peak = first_maximum(trace, mode)
    except NoMaximum:
        peak = TransferSummary()
    try:
        fd = stationary_fidelity(trace, last, mode)
    except NotStationary:
        fd = np.nan
    return TransferSummary(peak.t_first_max, peak.f_first_max, peak.half_width, fd), trace
