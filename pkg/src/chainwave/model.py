"""Chain parameters, coupling schedules and the single-excitation Hamiltonian.

The XXZ chain conserves the number of excitations, so a state injected on
the first qubit of ``|0...0>`` only ever explores the vacuum plus the N
one-excitation states ``|j>``.  In that basis the Hamiltonian is a real
symmetric tridiagonal matrix whose first and last bonds may be modulated
in time by a :class:`Schedule`.

Schedules are frozen dataclasses whose fields may be scalars or equal-length
numpy arrays.  An array-valued schedule evaluates a whole batch of chains at
once, which is how sweeps and ensembles run; see :func:`stack_schedules`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np
from scipy.special import expit


def _f64(x):
    a = np.asarray(x, dtype=float)
    return a if a.ndim else float(a)


def fermi(x):
    """Logistic ``1 / (1 + exp(x))`` without overflow warnings."""
    out = expit(-np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

class Schedule:
    """Base class for the time-dependent multiplier of an end bond."""

    def value(self, t):
        raise NotImplementedError

    def breakpoints(self, t0: float, t1: float) -> np.ndarray:
        """Times in ``(t0, t1)`` where the multiplier or its slope jumps."""
        return np.empty(0)

    def settle_time(self):
        """Time after which a decoupling schedule is (numerically) zero.

        ``None`` for schedules that never switch the bond off.
        """
        return None

    def min_feature(self) -> float:
        """Shortest time scale of the profile, used to pick a step size."""
        return np.inf

    def __call__(self, t):
        return self.value(t)


def _check_positive(name, v):
    if not np.all(np.asarray(v) > 0):
        raise ValueError(f"{name} must be > 0, got {v!r}")


@dataclass(frozen=True)
class Static(Schedule):
    """Bond kept at full strength."""

    def value(self, t):
        return np.ones_like(np.asarray(t, dtype=float)) + 0.0


@dataclass(frozen=True)
class FermiOn(Schedule):
    """Logistic switch-on ``1 / (1 + exp((t_i - t) / tau))``."""

    t_i: float
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "t_i", _f64(self.t_i))
        object.__setattr__(self, "tau", _f64(self.tau))
        _check_positive("tau", self.tau)

    def value(self, t):
        return fermi((self.t_i - t) / self.tau)

    def min_feature(self):
        return float(np.min(self.tau))


@dataclass(frozen=True)
class FermiOff(Schedule):
    """Logistic switch-off ``1 / (1 + exp((t - t_f) / tau))``."""

    t_f: float
    tau: float
    # below exp(-16) ~ 1e-7 the residual leak moves |f| by well under 1e-6
    settle_taus: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "t_f", _f64(self.t_f))
        object.__setattr__(self, "tau", _f64(self.tau))
        _check_positive("tau", self.tau)

    def value(self, t):
        return fermi((t - self.t_f) / self.tau)

    def settle_time(self):
        return _f64(self.t_f + self.settle_taus * self.tau)

    def min_feature(self):
        return float(np.min(self.tau))


@dataclass(frozen=True)
class InstantOn(Schedule):
    """Step switch-on: 0 before ``t_i``, 1 from ``t_i`` on (the tau = 0 limit)."""

    t_i: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "t_i", _f64(self.t_i))

    def value(self, t):
        return np.where(np.asarray(t) >= self.t_i, 1.0, 0.0)

    def breakpoints(self, t0, t1):
        return _inside(self.t_i, t0, t1)


@dataclass(frozen=True)
class InstantOff(Schedule):
    """Step switch-off: 1 up to and including ``t_f``, 0 afterwards."""

    t_f: float

    def __post_init__(self):
        object.__setattr__(self, "t_f", _f64(self.t_f))

    def value(self, t):
        return np.where(np.asarray(t) <= self.t_f, 1.0, 0.0)

    def breakpoints(self, t0, t1):
        return _inside(self.t_f, t0, t1)

    def settle_time(self):
        return self.t_f


@dataclass(frozen=True)
class PowerOn(Schedule):
    """Power-law switch-on ``(t / tau)**a`` on ``[0, tau]``, 0 before, 1 after."""

    tau: float
    a: float

    def __post_init__(self):
        object.__setattr__(self, "tau", _f64(self.tau))
        object.__setattr__(self, "a", _f64(self.a))
        _check_positive("tau", self.tau)
        _check_positive("a", self.a)

    def value(self, t):
        x = np.clip(np.asarray(t, dtype=float) / self.tau, 0.0, 1.0)
        return x ** self.a

    def breakpoints(self, t0, t1):
        tau = np.ravel(self.tau)
        pts = [0.0 * tau, tau, _graded(0.0 * tau, tau, self.a, +1)]
        return _inside(np.concatenate(pts), t0, t1)

    def min_feature(self):
        return float(np.min(self.tau))


@dataclass(frozen=True)
class PowerOff(Schedule):
    """Power-law switch-off ``((t_f - t) / tau + 1)**a`` on ``[t_f, t_f + tau]``."""

    t_f: float
    tau: float
    a: float

    def __post_init__(self):
        object.__setattr__(self, "t_f", _f64(self.t_f))
        object.__setattr__(self, "tau", _f64(self.tau))
        object.__setattr__(self, "a", _f64(self.a))
        _check_positive("tau", self.tau)
        _check_positive("a", self.a)

    def value(self, t):
        x = np.clip((self.t_f + self.tau - np.asarray(t, dtype=float)) / self.tau, 0.0, 1.0)
        return x ** self.a

    def breakpoints(self, t0, t1):
        end = np.ravel(self.t_f + self.tau)
        pts = [np.ravel(self.t_f) + 0.0 * end, end, _graded(end, np.ravel(self.tau) + 0.0 * end, self.a, -1)]
        return _inside(np.concatenate(pts), t0, t1)

    def settle_time(self):
        return _f64(self.t_f + self.tau)

    def min_feature(self):
        return float(np.min(self.tau))


@dataclass(frozen=True)
class NoiseTrack:
    """Piecewise-constant noise ``r(t)`` with steps of fixed width.

    ``heights`` has shape ``(K,)`` or ``(B, K)`` for a batch of tracks.
    Step ``k`` covers ``[k * step_width, (k + 1) * step_width)``; times
    before 0 use the first step and times past the end use the last.
    """

    step_width: float
    heights: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        _check_positive("step_width", self.step_width)
        object.__setattr__(self, "heights", np.asarray(self.heights, dtype=float))

    def value(self, t):
        k = np.floor(np.asarray(t, dtype=float) / self.step_width).astype(int)
        k = np.clip(k, 0, self.heights.shape[-1] - 1)
        return self.heights[..., k]

    def boundaries(self, t0, t1):
        k0 = max(int(np.floor(t0 / self.step_width)) + 1, 1)
        k1 = min(int(np.ceil(t1 / self.step_width)), self.heights.shape[-1])
        return np.arange(k0, k1) * self.step_width


@dataclass(frozen=True)
class Noisy(Schedule):
    """Multiplies an inner schedule by ``1 + r(t)`` for a stored noise track."""

    inner: Schedule
    noise: NoiseTrack

    def value(self, t):
        return self.inner.value(t) * (1.0 + self.noise.value(t))

    def breakpoints(self, t0, t1):
        return np.union1d(self.inner.breakpoints(t0, t1), self.noise.boundaries(t0, t1))

    def settle_time(self):
        return self.inner.settle_time()

    def min_feature(self):
        return self.inner.min_feature()


def _graded(origin, tau, a, direction, levels=30):
    """Geometric grid ``origin + direction * tau * 2**-k`` around the
    infinite-slope end of ``x**a`` (a < 1); empty otherwise."""
    origin, tau, a = np.ravel(origin), np.ravel(tau), np.ravel(a) + 0.0 * np.ravel(tau)
    k = 2.0 ** -np.arange(1, levels + 1)
    pts = origin[:, None] + direction * tau[:, None] * k[None, :]
    return pts[a < 1].ravel()


def _inside(ts, t0, t1):
    ts = np.unique(np.ravel(ts))
    return ts[(ts > t0) & (ts < t1)]


def stack_schedules(schedules: Sequence[Schedule]) -> Schedule:
    """Merge same-type schedules into one array-valued schedule.

    The result evaluates to an array of shape ``(len(schedules),)`` at any
    scalar time.  All entries must share the schedule type (and, for
    :class:`Noisy`, the noise step width and inner type).
    """
    schedules = list(schedules)
    kind = type(schedules[0])
    if any(type(s) is not kind for s in schedules):
        raise TypeError("cannot stack schedules of different types")
    if kind is Static:
        return _BatchStatic(len(schedules))
    if kind is Noisy:
        widths = {s.noise.step_width for s in schedules}
        if len(widths) != 1:
            raise ValueError("noise tracks must share a step width")
        k = max(s.noise.heights.shape[-1] for s in schedules)
        heights = np.stack([np.pad(s.noise.heights, (0, k - s.noise.heights.shape[-1]), mode="edge")
                            for s in schedules])
        inner = stack_schedules([s.inner for s in schedules])
        return Noisy(inner, NoiseTrack(widths.pop(), heights))
    kw = {}
    for fl in fields(kind):
        kw[fl.name] = np.array([getattr(s, fl.name) for s in schedules], dtype=float)
    if "settle_taus" in kw:
        kw["settle_taus"] = float(kw["settle_taus"][0])
    return kind(**kw)


@dataclass(frozen=True)
class _BatchStatic(Static):
    size: int = 1

    def value(self, t):
        return np.ones(self.size)


def schedule_value(s: Schedule, t):
    """Multiplier ``g(t)`` of schedule ``s``."""
    return s.value(t)


# ---------------------------------------------------------------------------
# chain + Hamiltonian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """Static parameters of an N-qubit XXZ chain.

    Bond ``i`` (between sites i and i+1, zero-based) carries the coupling
    ``j_xy * (1 + bond_disorder[i])``.
    """

    n: int
    j_xy: float = 1.0
    j_z: float = 0.0
    b: float = 0.0
    bond_disorder: tuple = field(default=None)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"chain needs n >= 2 sites, got {self.n}")
        if self.j_xy <= 0:
            raise ValueError("j_xy must be positive")
        r = np.zeros(self.n - 1) if self.bond_disorder is None else np.asarray(self.bond_disorder, float)
        if r.shape != (self.n - 1,):
            raise ValueError(f"bond_disorder needs {self.n - 1} entries, got shape {r.shape}")
        if np.any(1.0 + r <= 0):
            raise ValueError("every bond must keep 1 + r_i > 0")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "bond_disorder", tuple(float(x) for x in r))

    def with_disorder(self, r) -> "ChainSpec":
        return replace(self, bond_disorder=tuple(np.asarray(r, float)))

    @property
    def bonds(self) -> np.ndarray:
        return self.j_xy * (1.0 + np.asarray(self.bond_disorder))

    def site_energies(self) -> np.ndarray:
        """Diagonal of H in the one-excitation basis."""
        nb = np.full(self.n, 2.0)
        nb[0] = nb[-1] = 1.0
        return -self.j_z * (self.n - 1 - 2 * nb) + self.b * (self.n - 2)

    def vacuum_energy(self) -> float:
        return -self.j_z * (self.n - 1) + self.b * self.n


@dataclass(frozen=True)
class HamiltonianView:
    """Time-dependent tridiagonal Hamiltonian of the one-excitation sector.

    ``offdiag(t)`` returns the N-1 off-diagonal entries ``-J_i(t)``.
    """

    diag: np.ndarray
    e_vac: float
    bonds: np.ndarray
    first: Schedule
    last: Schedule

    @property
    def n(self) -> int:
        return np.shape(self.diag)[-1]

    @property
    def batch(self):
        """Batch size, or ``None`` for a single chain."""
        return self.bonds.shape[0] if np.ndim(self.bonds) > 1 else None

    def couplings(self, t) -> np.ndarray:
        """Positive bond couplings ``J_i(t)``."""
        j = np.array(self.bonds, dtype=float)
        if j.shape[-1] == 1:
            j[..., 0] *= self.first.value(t) * self.last.value(t)
        else:
            j[..., 0] *= self.first.value(t)
            j[..., -1] *= self.last.value(t)
        return j

    def offdiag(self, t) -> np.ndarray:
        return -self.couplings(t)

    def matrix(self, t) -> np.ndarray:
        if np.ndim(self.bonds) > 1:
            raise ValueError("matrix() is only defined for a single chain")
        off = self.offdiag(t)
        return np.diag(self.diag) + np.diag(off, 1) + np.diag(off, -1)

    def breakpoints(self, t0, t1) -> np.ndarray:
        return np.union1d(self.first.breakpoints(t0, t1), self.last.breakpoints(t0, t1))


def build_hamiltonian(spec: ChainSpec, sched_first: Schedule | None = None,
                      sched_last: Schedule | None = None) -> HamiltonianView:
    """Assemble the one-excitation Hamiltonian for a chain and its end schedules.

    For N = 2 the single bond is both first and last, so it carries the
    product of the two multipliers.
    """
    if not isinstance(spec, ChainSpec):
        raise TypeError("spec must be a ChainSpec")
    return HamiltonianView(
        diag=spec.site_energies(),
        e_vac=spec.vacuum_energy(),
        bonds=spec.bonds,
        first=sched_first or Static(),
        last=sched_last or Static(),
    )


def stack_hamiltonians(views: Sequence[HamiltonianView]) -> HamiltonianView:
    """Batch several same-size chains into one array-valued view."""
    views = list(views)
    if len({v.n for v in views}) != 1:
        raise ValueError("all chains in a batch must have the same length")
    return HamiltonianView(
        diag=np.stack([v.diag for v in views]),
        e_vac=np.array([v.e_vac for v in views]),
        bonds=np.stack([v.bonds for v in views]),
        first=stack_schedules([v.first for v in views]),
        last=stack_schedules([v.last for v in views]),
    )
