"""Seeded bond disorder, stepwise coupling noise and Monte Carlo ensembles.

Sample ``i`` of an ensemble always uses the generator
``numpy.random.default_rng(seed + i)``, so a report is reproducible
bit for bit and any single sample can be regenerated on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolve import IntegratorConfig
from .fidelity import Mode, stationary_end
from .model import ChainSpec, FermiOff, FermiOn, NoiseTrack, Noisy, Schedule
from .runs import Protocol, run_protocols

NOISE_WIDTH = 0.036
NOISE_MAX = 0.02
MAX_FAIL_FRACTION = 0.01


class EnsembleAborted(RuntimeError):
    """More than 1% of the samples failed."""


def draw_disorder(n: int, strength: float, seed: int) -> np.ndarray:
    """N-1 bond offsets ``r_i`` uniform on ``[0, strength]``."""
    if strength < 0:
        raise ValueError("disorder strength must be >= 0")
    return np.random.default_rng(seed).uniform(0.0, strength, n - 1)


def noise_track(tau: float, t_end: float, rng: np.random.Generator, *,
                max_height: float = NOISE_MAX, width: float = NOISE_WIDTH,
                seed: int | None = None) -> NoiseTrack:
    """Random step track with step width ``width * tau`` covering ``[0, t_end]``."""
    step = width * tau
    k = int(math.ceil(t_end / step)) + 1
    return NoiseTrack(step, rng.uniform(0.0, max_height, k), seed)


@dataclass
class SampleRecord:
    index: int
    seed: int
    dynamic: float
    static: float
    difference: float
    error: str | None = None


@dataclass
class EnsembleReport:
    """Per-sample results with histograms and summary statistics.

    ``static`` holds, for disorder ensembles, the first maximum of the
    unmodulated chain with the same bonds, and for fluctuation ensembles
    the noiseless stationary fidelity.
    """

    kind: str
    samples: list[SampleRecord]
    params: dict = field(default_factory=dict)
    bins: int = 40

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples if s.error is None], dtype=float)

    @property
    def failed(self) -> list[SampleRecord]:
        return [s for s in self.samples if s.error is not None]

    def histogram(self, name: str = "dynamic", bins: int | None = None):
        """``(edges, counts)`` of a column."""
        counts, edges = np.histogram(self.column(name), bins=bins or self.bins)
        return edges, counts

    def stats(self, name: str = "difference") -> dict:
        x = self.column(name)
        return {"n": len(x), "mean": float(np.mean(x)), "std": float(np.std(x, ddof=1)) if len(x) > 1 else 0.0,
                "min": float(np.min(x)), "max": float(np.max(x))}

    def standard_error(self, name: str = "difference") -> float:
        s = self.stats(name)
        return s["std"] / math.sqrt(s["n"])


def _check_failures(records):
    bad = sum(r.error is not None for r in records)
    if bad > MAX_FAIL_FRACTION * len(records):
        raise EnsembleAborted(f"{bad} of {len(records)} samples failed; first: "
                              + next(r.error for r in records if r.error))


def disorder_ensemble(spec: ChainSpec, first: Schedule, last: Schedule, n_samples: int,
                      strength: float, seed: int, *, cfg: IntegratorConfig | None = None,
                      mode: Mode = "phase_optimized", static_t_end: float | None = None,
                      threads: int = 1) -> EnsembleReport:
    """Paired dynamic/static comparison over random bond disorder.

    Each sample draws one disorder vector; the modulated chain is scored by
    its stationary fidelity and the same chain with constant end bonds by
    its first maximum.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    seeds = [seed + i for i in range(n_samples)]
    chains = [spec.with_disorder(draw_disorder(spec.n, strength, s)) for s in seeds]
    t_static = static_t_end if static_t_end is not None else 2.0 * spec.n
    dyn = run_protocols([Protocol(c, first, last) for c in chains], cfg=cfg, mode=mode,
                        peak=False, threads=threads)
    sta = run_protocols([Protocol(c, t_end=t_static) for c in chains], cfg=cfg, mode=mode,
                        stationary=False, threads=threads)
    records = []
    for i, (s, d, st) in enumerate(zip(seeds, dyn, sta)):
        fd, f0 = d.summary.f_stationary, st.summary.f_first_max
        records.append(SampleRecord(i, s, fd, f0, fd - f0, d.error or st.error))
    _check_failures(records)
    return EnsembleReport("disorder", records, {
        "n": spec.n, "strength": strength, "seed": seed, "n_samples": n_samples,
        "first": repr(first), "last": repr(last), "mode": mode})


def _fermi_tau(s: Schedule) -> float:
    if not isinstance(s, (FermiOn, FermiOff)):
        raise TypeError("coupling noise wraps Fermi-type schedules")
    return float(s.tau)


def fluctuation_ensemble(spec: ChainSpec, first: Schedule, last: Schedule, n_samples: int,
                         seed: int, *, max_height: float = NOISE_MAX, width: float = NOISE_WIDTH,
                         cfg: IntegratorConfig | None = None, mode: Mode = "phase_optimized",
                         threads: int = 1) -> EnsembleReport:
    """Stationary fidelity under stepwise noise on both end-bond ramps.

    Every sample draws an independent track for the first and for the
    last bond (in that order from its generator).  ``static`` holds the
    noiseless stationary fidelity and ``difference`` is noisy minus
    noiseless.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tau1, tau2 = _fermi_tau(first), _fermi_tau(last)
    t_end = float(stationary_end(last))
    if cfg is None:
        cfg = IntegratorConfig(dt=min(0.005, width * min(tau1, tau2) / 4.0))
    ref = run_protocols([Protocol(spec, first, last, t_end)], cfg=cfg, mode=mode, peak=False)[0]
    if ref.error:
        raise EnsembleAborted(f"noiseless reference failed: {ref.error}")
    f_ref = ref.summary.f_stationary

    seeds = [seed + i for i in range(n_samples)]
    protos = []
    for s in seeds:
        rng = np.random.default_rng(s)
        n1 = noise_track(tau1, t_end, rng, max_height=max_height, width=width, seed=s)
        n2 = noise_track(tau2, t_end, rng, max_height=max_height, width=width, seed=s)
        protos.append(Protocol(spec, Noisy(first, n1), Noisy(last, n2), t_end))
    outs = run_protocols(protos, cfg=cfg, mode=mode, peak=False, threads=threads)
    records = [SampleRecord(i, s, o.summary.f_stationary, f_ref, o.summary.f_stationary - f_ref, o.error)
               for i, (s, o) in enumerate(zip(seeds, outs))]
    _check_failures(records)
    return EnsembleReport("fluctuation", records, {
        "n": spec.n, "seed": seed, "n_samples": n_samples, "max_height": max_height,
        "width": width, "first": repr(first), "last": repr(last), "mode": mode,
        "reference": f_ref})
