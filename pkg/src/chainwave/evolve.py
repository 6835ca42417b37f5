"""Fixed-step RK4 propagation in the one-excitation sector.

The vacuum ``|0...0>`` is an eigenstate, so its amplitude only picks up the
phase ``exp(-i E_vac t)``; that phase is applied analytically and only the
N one-excitation amplitudes are integrated.

Everything here works on a single chain (``amp`` of shape ``(N,)``) or on a
batch built with :func:`chainwave.model.stack_hamiltonians` (``amp`` of
shape ``(B, N)``), sharing one time grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .model import HamiltonianView

DEFAULT_DT = 0.005


class NormDrift(RuntimeError):
    """The amplitude norm moved by more than the configured tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = DEFAULT_DT
    norm_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.norm_tol > 0:
            raise ValueError("norm_tol must be > 0")


def default_dt(*schedules, noisy_width: float | None = None) -> float:
    """Step size resolving both the hopping dynamics and the ramp profiles.

    Smooth ramps get ten steps per ``tau``; piecewise-constant noise gets
    four steps per noise step.
    """
    dt = DEFAULT_DT
    for s in schedules:
        dt = min(dt, s.min_feature() / 10.0)
    if noisy_width is not None:
        dt = min(dt, noisy_width / 4.0)
    return dt


@dataclass
class SectorState:
    """Vacuum phase plus one-excitation amplitudes at time ``t``."""

    t: float
    vac_phase: complex | np.ndarray
    amp: np.ndarray

    @classmethod
    def excitation_at(cls, n: int, site: int = 0, t: float = 0.0, batch=None):
        """State with the excitation on ``site`` (zero-based)."""
        shape = (n,) if batch is None else (batch, n)
        amp = np.zeros(shape, dtype=complex)
        amp[..., site] = 1.0
        vac = 1.0 + 0j if batch is None else np.ones(batch, dtype=complex)
        return cls(t, vac, amp)

    def norm(self):
        return np.sum(np.abs(self.amp) ** 2, axis=-1)

    @property
    def transfer_amplitude(self):
        return self.amp[..., -1]


def time_grid(t0: float, t1: float, dt: float, breakpoints=()) -> np.ndarray:
    """Uniform grid from ``t0`` to ``t1`` with ``breakpoints`` inserted.

    The last step is shortened to land on ``t1``; points closer than
    ``1e-9 * dt`` are merged.
    """
    n = int(np.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    grid = np.union1d(grid, np.asarray(breakpoints, dtype=float))
    grid = grid[(grid >= t0) & (grid <= t1)]
    if t1 - grid[-1] > 1e-9 * dt:
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1
    keep = np.concatenate([[True], np.diff(grid) > 1e-9 * dt])
    keep[-1] = True
    grid = grid[keep]
    if len(grid) > 2 and grid[-1] - grid[-2] <= 1e-9 * dt:
        grid = np.delete(grid, -2)
    return grid


class Propagation(NamedTuple):
    """Raw result of :func:`propagate`.

    ``last`` holds the transfer amplitude ``amp[..., -1]`` and ``vac`` the
    vacuum phase at every grid time (first axis = time).
    """

    t: np.ndarray
    last: np.ndarray
    vac: np.ndarray
    final: SectorState
    drift: np.ndarray


def _rhs(diag, couplings, c):
    out = diag * c
    out[..., :-1] -= couplings * c[..., 1:]
    out[..., 1:] -= couplings * c[..., :-1]
    return -1j * out


def propagate(h: HamiltonianView, initial: SectorState, grid: np.ndarray,
              observer: Callable[[SectorState], None] | None = None) -> Propagation:
    """Integrate over a prepared time grid without checking the norm."""
    grid = np.asarray(grid, dtype=float)
    c = np.array(initial.amp, dtype=complex)
    if c.shape[-1] != h.n:
        raise ValueError(f"state has {c.shape[-1]} sites, Hamiltonian has {h.n}")
    # a uniform diagonal offset only contributes a global phase; removing it
    # keeps RK4 away from needlessly fast oscillations
    diag = np.asarray(h.diag, dtype=float)
    shift = diag.mean(axis=-1)
    diag = diag - shift[..., None]
    rot = np.exp(-1j * np.multiply.outer(grid - grid[0], shift))
    norm0 = np.sum(np.abs(c) ** 2, axis=-1)
    drift = np.zeros_like(norm0)
    last = np.empty((len(grid),) + c.shape[:-1], dtype=complex)
    last[0] = c[..., -1]  # rot[0] == 1
    e_vac = np.asarray(h.e_vac, dtype=float)
    vac = initial.vac_phase * np.exp(-1j * np.multiply.outer(grid - grid[0], e_vac))

    if observer is not None:
        observer(SectorState(grid[0], vac[0], c.copy()))
    rot_col = rot[..., None]
    for k in range(len(grid) - 1):
        t, dt = grid[k], grid[k + 1] - grid[k]
        # stage times nudged inside the step so piecewise-constant
        # schedules are read on the correct side of a jump
        eps = 1e-9 * dt
        j_lo = h.couplings(t + eps)
        j_mid = h.couplings(t + 0.5 * dt)
        j_hi = h.couplings(t + dt - eps)
        k1 = _rhs(diag, j_lo, c)
        k2 = _rhs(diag, j_mid, c + 0.5 * dt * k1)
        k3 = _rhs(diag, j_mid, c + 0.5 * dt * k2)
        k4 = _rhs(diag, j_hi, c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        last[k + 1] = c[..., -1] * rot[k + 1]
        drift = np.maximum(drift, np.abs(np.sum(np.abs(c) ** 2, axis=-1) - norm0))
        if observer is not None:
            observer(SectorState(grid[k + 1], vac[k + 1], c * rot_col[k + 1]))

    final = SectorState(float(grid[-1]), vac[-1], c * rot_col[-1])
    return Propagation(grid, last, vac, final, drift)


def make_grid(h: HamiltonianView, t0: float, t_end: float, dt: float) -> np.ndarray:
    return time_grid(t0, t_end, dt, h.breakpoints(t0, t_end))


def evolve(h: HamiltonianView, initial: SectorState, t_end: float,
           cfg: IntegratorConfig | None = None,
           observer: Callable[[SectorState], None] | None = None) -> SectorState:
    """Evolve ``initial`` under ``h`` up to ``t_end``.

    The step size is ``cfg.dt``, shortened where needed so that every
    schedule discontinuity falls on a grid point.  ``observer`` is called
    with the state at the start time and after every step.

    Raises:
        NormDrift: if ``sum |c_j|^2`` moves by more than ``cfg.norm_tol``.
    """
    cfg = cfg or IntegratorConfig()
    if t_end < initial.t:
        raise ValueError("t_end lies before the initial time")
    if t_end == initial.t:
        return replace(initial, amp=np.array(initial.amp, dtype=complex))
    grid = make_grid(h, initial.t, t_end, cfg.dt)
    run = propagate(h, initial, grid, observer)
    worst = float(np.max(run.drift))
    if worst > cfg.norm_tol:
        raise NormDrift(f"norm drifted by {worst:.3e} (tolerance {cfg.norm_tol:.1e}); reduce dt")
    return run.final


def convergence_check(h: HamiltonianView, initial: SectorState, t_end: float,
                      cfg: IntegratorConfig | None = None) -> float:
    """Largest amplitude change at ``t_end`` when the step is halved."""
    cfg = cfg or IntegratorConfig()
    coarse = evolve(h, initial, t_end, cfg)
    fine = evolve(h, initial, t_end, replace(cfg, dt=cfg.dt / 2))
    return float(np.max(np.abs(coarse.amp - fine.amp)))


def exact_static(h: HamiltonianView, initial: SectorState, t: float) -> np.ndarray:
    """Amplitudes at ``t`` by diagonalising the frozen ``t = initial.t`` matrix.

    Only meaningful for time-independent schedules.
    """
    w, v = np.linalg.eigh(h.matrix(initial.t))
    phase = np.exp(-1j * w * (t - initial.t))
    return v @ (phase * (v.T @ initial.amp))
