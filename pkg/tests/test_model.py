import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainwave.model import (ChainSpec, FermiOff, FermiOn, InstantOff, InstantOn, NoiseTrack,
                             Noisy, PowerOff, PowerOn, Static, build_hamiltonian, schedule_value,
                             stack_hamiltonians, stack_schedules)
from chainwave.oracle import FullChain


def test_two_site_uniform_matrix():
    h = build_hamiltonian(ChainSpec(2), Static(), Static())
    np.testing.assert_array_equal(h.matrix(0.0), [[0.0, -1.0], [-1.0, 0.0]])


def test_fermi_off_midpoint_on_last_bond():
    h = build_hamiltonian(ChainSpec(10), Static(), FermiOff(6.2, 1.0))
    off = h.offdiag(6.2)
    assert off[-1] == -0.5
    np.testing.assert_array_equal(off[:-1], -1.0)


def brute_force_diagonal(spec):
    # <j|H|j> from the explicit 2^N operator; site j excited = bit (N-1-j)
    mat = FullChain(spec).matrix(0.0)
    idx = [2 ** (spec.n - 1 - j) for j in range(spec.n)]
    return mat[idx, idx], mat[0, 0]


@pytest.mark.parametrize("n,jz,b", [(4, 1.0, 0.0), (5, 0.3, -0.8), (2, 1.5, 0.4), (7, -0.6, 1.1)])
def test_site_energies_match_brute_force(n, jz, b):
    spec = ChainSpec(n, j_z=jz, b=b)
    diag, e_vac = brute_force_diagonal(spec)
    h = build_hamiltonian(spec)
    np.testing.assert_allclose(h.diag, diag, atol=1e-14)
    assert h.e_vac == pytest.approx(e_vac, abs=1e-14)


def test_n4_diagonal_values():
    h = build_hamiltonian(ChainSpec(4, j_z=1.0))
    np.testing.assert_allclose(h.diag, [-1.0, 1.0, 1.0, -1.0])


def test_disorder_and_schedules_on_end_bonds():
    r = [0.01, 0.02, 0.03, 0.04]
    h = build_hamiltonian(ChainSpec(5, j_xy=2.0, bond_disorder=r), FermiOn(0.0, 1.0), FermiOff(3.0, 1.0))
    t = 0.7
    j = h.couplings(t)
    assert j[0] == pytest.approx(2.0 * 1.01 * schedule_value(FermiOn(0.0, 1.0), t))
    assert j[-1] == pytest.approx(2.0 * 1.04 * schedule_value(FermiOff(3.0, 1.0), t))
    np.testing.assert_allclose(j[1:-1], [2.0 * 1.02, 2.0 * 1.03])


@pytest.mark.parametrize("bad", [
    lambda: ChainSpec(1),
    lambda: ChainSpec(4, bond_disorder=[0.0, 0.0]),
    lambda: ChainSpec(3, bond_disorder=[0.0, -1.5]),
    lambda: FermiOn(0.0, 0.0),
    lambda: FermiOff(1.0, -1.0),
    lambda: PowerOn(0.0, 0.5),
    lambda: PowerOff(1.0, 0.0, 0.5),
])
def test_invalid_parameters_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_schedule_examples():
    assert schedule_value(FermiOn(0.0, 1.0), 0.0) == 0.5
    assert schedule_value(PowerOn(2.0, 0.5), 0.5) == pytest.approx(0.5, abs=1e-15)
    tau = 0.325
    expected = float(1 / (1 + mpmath.exp(10)))
    got = schedule_value(FermiOff(6.2, tau), 6.2 + 10 * tau)
    assert got == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(4.54e-5, rel=1e-3)


@given(st.floats(-5, 5), st.floats(0.01, 3), st.lists(st.floats(-20, 20), min_size=2, max_size=30))
def test_fermi_monotone(t_i, tau, ts):
    ts = np.sort(ts)
    on = np.array([FermiOn(t_i, tau).value(t) for t in ts])
    off = np.array([FermiOff(t_i, tau).value(t) for t in ts])
    assert np.all(np.diff(on) >= 0)
    assert np.all(np.diff(off) <= 0)


@pytest.mark.parametrize("t_i,tau", [(0.0, 1.0), (3.0, 0.325), (-2.0, 0.05)])
def test_fermi_limits(t_i, tau):
    assert abs(FermiOn(t_i, tau).value(t_i + 40 * tau) - 1.0) < 1e-15
    assert abs(FermiOn(t_i, tau).value(t_i - 40 * tau)) < 1e-15


@given(st.floats(0.05, 5), st.floats(0.1, 1.0))
def test_power_law_endpoints_and_continuity(tau, a):
    on, off = PowerOn(tau, a), PowerOff(2.0, tau, a)
    assert on.value(0.0) == 0.0 and on.value(tau) == pytest.approx(1.0)
    assert off.value(2.0) == pytest.approx(1.0, abs=1e-15) and off.value(2.0 + tau) == 0.0
    # Hoelder continuity: a jump across an end point is bounded by (d/tau)**a
    d = 1e-6 * tau
    bound = 2 * (d / tau) ** a + 1e-12
    for s, pts in ((on, (0.0, tau)), (off, (2.0, 2.0 + tau))):
        for p in pts:
            assert abs(s.value(p - d) - s.value(p + d)) <= bound
    assert on.value(-1.0) == 0.0 and on.value(tau + 1) == 1.0
    assert off.value(1.0) == 1.0 and off.value(3.0 + tau) == 0.0


def test_instant_steps():
    on, off = InstantOn(1.0), InstantOff(2.0)
    assert on.value(0.999) == 0.0 and on.value(1.0) == 1.0
    assert off.value(2.0) == 1.0 and off.value(2.001) == 0.0
    np.testing.assert_array_equal(on.breakpoints(0, 5), [1.0])


def test_noise_track_lookup():
    tr = NoiseTrack(0.5, [0.01, 0.02, 0.0])
    assert tr.value(-1.0) == 0.01
    assert tr.value(0.0) == 0.01
    assert tr.value(0.5) == 0.02
    assert tr.value(1.2) == 0.0
    assert tr.value(10.0) == 0.0
    np.testing.assert_allclose(tr.boundaries(0.0, 10.0), [0.5, 1.0])


def test_noisy_multiplier_never_below_inner(rng):
    inner = FermiOff(3.0, 0.5)
    s = Noisy(inner, NoiseTrack(0.018, rng.uniform(0, 0.02, 400)))
    ts = np.linspace(0, 7, 1001)
    assert all(s.value(t) >= inner.value(t) for t in ts)


@given(st.integers(2, 12), st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 15))
@settings(max_examples=50)
def test_hamiltonian_symmetric(n, jz, b, t):
    h = build_hamiltonian(ChainSpec(n, j_z=jz, b=b), FermiOn(0.0, 0.7), FermiOff(5.0, 0.7))
    m = h.matrix(t)
    np.testing.assert_array_equal(m, m.T)
    assert np.isrealobj(m)


@pytest.mark.parametrize("n", [2, 5, 10])
def test_mirror_symmetry_static(n):
    m = build_hamiltonian(ChainSpec(n, j_z=0.4, b=0.3)).matrix(0.0)
    flip = np.eye(n)[::-1]
    np.testing.assert_array_equal(flip @ m @ flip, m)


def test_static_clean_end_bonds_equal_bulk():
    j = build_hamiltonian(ChainSpec(6, j_xy=1.7)).couplings(3.3)
    np.testing.assert_array_equal(j, 1.7)


def test_stacked_schedules_match_individual():
    sch = [FermiOff(6.0, 0.3), FermiOff(5.0, 1.0), FermiOff(7.0, 2.0)]
    stacked = stack_schedules(sch)
    for t in (0.0, 5.5, 9.0):
        np.testing.assert_allclose(stacked.value(t), [s.value(t) for s in sch], rtol=0, atol=0)
    with pytest.raises(TypeError):
        stack_schedules([FermiOff(1, 1), FermiOn(0, 1)])


def test_stacked_hamiltonian_couplings():
    specs = [ChainSpec(4, bond_disorder=[0.01 * k, 0, 0.02]) for k in range(3)]
    views = [build_hamiltonian(s, FermiOn(0, 0.5 + k), FermiOff(4, 0.5 + k)) for k, s in enumerate(specs)]
    batch = stack_hamiltonians(views)
    for t in (0.1, 2.0, 4.5):
        np.testing.assert_allclose(batch.couplings(t), [v.couplings(t) for v in views])
