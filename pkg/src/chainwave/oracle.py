"""Brute-force references: full 2^N evolution and Bloch-sphere quadrature.

Nothing in here uses the one-excitation reduction.  The Hamiltonian is
assembled from Kronecker products of Pauli matrices (site 1 is the most
significant qubit, ``|1>`` is spin up with ``sigma_z |1> = +|1>``), the
whole register is integrated with RK4 and the last qubit is traced out.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .evolve import IntegratorConfig, default_dt, make_grid
from .model import ChainSpec, Schedule, Static, build_hamiltonian

MAX_SITES = 12

SP = np.array([[0.0, 0.0], [1.0, 0.0]])  # |0> -> |1>
SM = SP.T
SZ = np.diag([-1.0, 1.0])
I2 = np.eye(2)
PAULI = (np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]]), np.diag([1.0 + 0j, -1.0]))


def site_op(op, site, n):
    return reduce(np.kron, [op if k == site else I2 for k in range(n)])


class FullChain:
    """Dense 2^N Hamiltonian split into a constant part and the two end bonds."""

    def __init__(self, spec: ChainSpec, first: Schedule | None = None, last: Schedule | None = None):
        n = spec.n
        if n > MAX_SITES:
            raise ValueError(f"full-space oracle is capped at {MAX_SITES} sites, got {n}")
        self.spec = spec
        self.view = build_hamiltonian(spec, first or Static(), last or Static())
        sp = [site_op(SP, k, n) for k in range(n)]
        sz = [site_op(SZ, k, n) for k in range(n)]
        self.hops = [sp[k + 1] @ sp[k].T + sp[k + 1].T @ sp[k] for k in range(n - 1)]
        self.mag = sum(sz)
        zz = sum(sz[k] @ sz[k + 1] for k in range(n - 1))
        self.fixed = -spec.j_z * zz - spec.b * self.mag

    def matrix(self, t):
        j = self.view.couplings(t)
        return self.fixed - sum(jk * hk for jk, hk in zip(j, self.hops))

    def initial(self, alpha, beta):
        """``(alpha|0> + beta|1>) (x) |0...0>``."""
        psi = np.zeros(2 ** self.spec.n, dtype=complex)
        psi[0] = alpha
        psi[2 ** (self.spec.n - 1)] = beta
        return psi

    def run(self, psi0, t_end, dt, t0=0.0, observer=None):
        """RK4 on the same grid the sector solver would use; ``psi0`` may be (d, m)."""
        grid = make_grid(self.view, t0, t_end, dt)
        psi = np.array(psi0, dtype=complex)
        rhs = lambda t, y: -1j * (self.matrix(t) @ y)  # noqa: E731
        if observer:
            observer(grid[0], psi)
        for k in range(len(grid) - 1):
            t, h = grid[k], grid[k + 1] - grid[k]
            eps = 1e-9 * h
            k1 = rhs(t + eps, psi)
            k2 = rhs(t + h / 2, psi + h / 2 * k1)
            k3 = rhs(t + h / 2, psi + h / 2 * k2)
            k4 = rhs(t + h - eps, psi + h * k3)
            psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if observer:
                observer(grid[k + 1], psi)
        return grid, psi


def last_qubit_rdm(psi: np.ndarray) -> np.ndarray:
    """Reduced density matrix of the last (least significant) qubit."""
    m = psi.reshape(-1, 2)
    return m.T @ m.conj()


def channel_from_pair(psi0: np.ndarray, psi1: np.ndarray):
    """Map ``(alpha, beta) -> rho_out`` from the evolved |0>- and |1>-inputs."""
    def rho_map(alpha, beta):
        return last_qubit_rdm(alpha * psi0 + beta * psi1)
    return rho_map


def full_space_evolve(spec: ChainSpec, first: Schedule | None, last: Schedule | None,
                      input_state, t_end: float, dt: float | None = None) -> np.ndarray:
    """Last-qubit density matrix after evolving ``|psi_in, 0...0>`` to ``t_end``."""
    alpha, beta = input_state
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-12:
        raise ValueError("input state must be normalised")
    chain = FullChain(spec, first, last)
    dt = dt or default_dt(chain.view.first, chain.view.last)
    _, psi = chain.run(chain.initial(alpha, beta), t_end, dt)
    return last_qubit_rdm(psi)


def full_space_channel(spec: ChainSpec, first: Schedule | None, last: Schedule | None,
                       t_end: float, dt: float | None = None):
    """Channel ``(alpha, beta) -> rho_out`` at ``t_end`` (two evolutions)."""
    chain = FullChain(spec, first, last)
    dt = dt or default_dt(chain.view.first, chain.view.last)
    pair = np.stack([chain.initial(1, 0), chain.initial(0, 1)], axis=1)
    _, psi = chain.run(pair, t_end, dt)
    return channel_from_pair(psi[:, 0], psi[:, 1])


def pauli_average_fidelity(rho_map) -> float:
    """Average fidelity ``1/2 + tr(T)/6`` from the Pauli transfer matrix.

    The channel is probed on the operator basis through the linear
    extension of ``rho_map`` to ``|a><b|``.
    """
    e00 = rho_map(1.0, 0.0)
    e11 = rho_map(0.0, 1.0)
    plus = rho_map(1 / np.sqrt(2), 1 / np.sqrt(2))
    plus_i = rho_map(1 / np.sqrt(2), 1j / np.sqrt(2))
    # |0><1| = |+><+| + i|+i><+i| - (1 + i)/2 (|0><0| + |1><1|)
    e01 = plus + 1j * plus_i - 0.5 * (1 + 1j) * (e00 + e11)
    e10 = e01.conj().T
    basis = {(0, 0): e00, (0, 1): e01, (1, 0): e10, (1, 1): e11}

    def apply(op):
        return sum(op[a, b] * basis[a, b] for a in range(2) for b in range(2))

    tr_t = sum(0.5 * np.trace(p @ apply(p)).real for p in PAULI)
    return 0.5 + tr_t / 6.0


def fibonacci_sphere(n_points: int):
    """Polar and azimuthal angles of an ``n_points`` Fibonacci lattice."""
    k = np.arange(n_points)
    z = 1.0 - (2.0 * k + 1.0) / n_points
    phi = np.pi * (3.0 - np.sqrt(5.0)) * k
    return np.arccos(z), np.mod(phi, 2 * np.pi)


def bloch_average_quadrature(rho_map, n_points: int = 10_000) -> float:
    """Mean of ``<psi|rho_out(psi)|psi>`` over a Fibonacci point set."""
    if n_points < 100:
        raise ValueError("need at least 100 quadrature points")
    theta, phi = fibonacci_sphere(n_points)
    alpha = np.cos(theta / 2)
    beta = np.exp(1j * phi) * np.sin(theta / 2)
    total = 0.0
    for a, b in zip(alpha, beta):
        psi = np.array([a, b])
        total += (psi.conj() @ rho_map(a, b) @ psi).real
    return total / n_points


def full_space_fidelity_trace(spec: ChainSpec, first: Schedule | None, last: Schedule | None,
                              t_end: float, dt: float | None = None, t0: float = 0.0):
    """Times, averaged fidelity and excitation leakage of the full evolution.

    The fidelity comes from the Pauli transfer matrix, so it is independent
    of the closed form used by :mod:`chainwave.fidelity`.  The leakage is
    the largest weight ever found in sectors with two or more excitations;
    the Hamiltonian conserves total magnetisation, so it should stay at
    roundoff level.
    """
    chain = FullChain(spec, first, last)
    dt = dt or IntegratorConfig(dt=default_dt(chain.view.first, chain.view.last)).dt
    pair = np.stack([chain.initial(1, 0), chain.initial(0, 1)], axis=1)
    excitations = np.array([bin(k).count("1") for k in range(2 ** spec.n)])
    outside = excitations >= 2
    fid, leak = [], [0.0]

    def observe(t, psi):
        fid.append(pauli_average_fidelity(channel_from_pair(psi[:, 0], psi[:, 1])))
        leak.append(float(np.sum(np.abs(psi[outside]) ** 2)))

    grid, _ = chain.run(pair, t_end, dt, t0, observe)
    return grid, np.array(fid), max(leak)
