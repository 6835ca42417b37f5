"""Batched protocol runs shared by the sweep and ensemble drivers.

Chains are grouped into chunks of fixed size (by position, never by
completion order), each chunk is stacked into one array-valued Hamiltonian
and integrated on a common grid.  Results therefore depend only on the
inputs and the chunk size, not on the number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .evolve import IntegratorConfig, SectorState, default_dt, propagate, time_grid
from .fidelity import (FidelityTrace, Mode, NoMaximum, NotStationary, TransferSummary,
                       first_maximum, stationary_end, stationary_fidelity)
from .model import ChainSpec, Schedule, Static, build_hamiltonian, stack_hamiltonians

log = logging.getLogger(__name__)

CHUNK = 128


@dataclass(frozen=True)
class Protocol:
    """One chain plus its end schedules and integration window."""

    spec: ChainSpec
    first: Schedule = Static()
    last: Schedule = Static()
    t_end: float | None = None

    def end_time(self) -> float:
        if self.t_end is not None:
            return float(self.t_end)
        return float(stationary_end(self.last))


@dataclass(frozen=True)
class Outcome:
    summary: TransferSummary
    error: str | None = None


def _run_chunk(protocols: Sequence[Protocol], dt, norm_tol, mode, want_peak, want_stationary):
    ends = np.array([p.end_time() for p in protocols])
    t_end = ends.max()
    if dt is None:
        dt = min(default_dt(p.first, p.last) for p in protocols)
    hs = [build_hamiltonian(p.spec, p.first, p.last) for p in protocols]
    bps = np.unique(np.concatenate([h.breakpoints(0.0, t_end) for h in hs]))
    grid = time_grid(0.0, t_end, dt, bps)
    h = stack_hamiltonians(hs)
    run = propagate(h, SectorState.excitation_at(h.n, batch=len(hs)), grid)

    out = []
    for b, p in enumerate(protocols):
        if run.drift[b] > norm_tol:
            out.append(Outcome(TransferSummary(), f"NormDrift: {run.drift[b]:.2e}"))
            continue
        stop = np.searchsorted(grid, ends[b] + 1e-12, side="right")
        trace = FidelityTrace.from_amplitudes(grid[:stop], run.last[:stop, b], run.vac[:stop, b])
        peak, fd, err = TransferSummary(), np.nan, None
        if want_peak:
            try:
                peak = first_maximum(trace, mode)
            except NoMaximum as e:
                err = f"NoMaximum: {e}"
        if want_stationary:
            try:
                fd = stationary_fidelity(trace, p.last, mode)
            except NotStationary as e:
                err = f"NotStationary: {e}"
        out.append(Outcome(TransferSummary(peak.t_first_max, peak.f_first_max,
                                           peak.half_width, fd), err))
    return out


def run_protocols(protocols: Sequence[Protocol], *, cfg: IntegratorConfig | None = None,
                  mode: Mode = "phase_optimized", peak: bool = True, stationary: bool = True,
                  threads: int = 1, chunk: int = CHUNK) -> list[Outcome]:
    """Simulate every protocol from a site-1 excitation at ``t = 0``.

    Per-protocol failures are reported in ``Outcome.error`` with NaN in the
    corresponding summary fields.
    """
    protocols = list(protocols)
    dt = cfg.dt if cfg is not None else None
    norm_tol = cfg.norm_tol if cfg is not None else IntegratorConfig().norm_tol
    chunks = [protocols[i:i + chunk] for i in range(0, len(protocols), chunk)]
    job = lambda c: _run_chunk(c, dt, norm_tol, mode, peak, stationary)  # noqa: E731
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(job, chunks))
    else:
        results = [job(c) for c in chunks]
    flat = [o for r in results for o in r]
    n_err = sum(o.error is not None for o in flat)
    if n_err:
        log.info("%d of %d runs reported errors", n_err, len(flat))
    return flat
