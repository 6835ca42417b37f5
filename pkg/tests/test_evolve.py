import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from chainwave.evolve import (IntegratorConfig, NormDrift, SectorState, convergence_check,
                              evolve, exact_static, time_grid)
from chainwave.model import (ChainSpec, FermiOff, FermiOn, NoiseTrack, Noisy, PowerOff, PowerOn,
                             Static, build_hamiltonian)


def start(n):
    return SectorState.excitation_at(n)


def test_two_site_perfect_transfer():
    h = build_hamiltonian(ChainSpec(2))
    seen = []
    out = evolve(h, start(2), np.pi / 2, IntegratorConfig(dt=0.001), observer=seen.append)
    assert abs(out.amp[1]) == pytest.approx(1.0, abs=1e-8)
    for s in seen[:: len(seen) // 20]:
        assert s.amp[1] == pytest.approx(1j * np.sin(s.t), abs=1e-10)


def test_three_site_transfer_and_amplitude_law():
    h = build_hamiltonian(ChainSpec(3))
    t_end = np.pi / np.sqrt(2)
    seen = []
    out = evolve(h, start(3), t_end, IntegratorConfig(dt=0.001), observer=seen.append)
    assert out.amp[2] == pytest.approx(-1.0, abs=1e-8)
    for s in seen[::50]:
        expected = (np.cos(np.sqrt(2) * s.t) - 1) / 2
        assert s.amp[2] == pytest.approx(expected, abs=1e-9)
        oracle = exact_static(h, start(3), s.t)
        np.testing.assert_allclose(s.amp, oracle, atol=1e-9)


def test_fully_decoupled_two_site_chain_only_rotates_phase():
    spec = ChainSpec(2, j_z=0.7, b=0.2)
    h = build_hamiltonian(spec, FermiOff(-40.0, 0.325), FermiOff(-40.0, 0.325))
    out = evolve(h, start(2), 5.0)
    assert abs(out.amp[0]) == pytest.approx(1.0, abs=1e-12)
    assert abs(out.amp[1]) < 1e-12


def test_vacuum_phase_is_analytic():
    spec = ChainSpec(5, j_z=0.4, b=0.9)
    h = build_hamiltonian(spec)
    out = evolve(h, start(5), 3.0)
    assert out.vac_phase == pytest.approx(np.exp(-1j * spec.vacuum_energy() * 3.0), abs=1e-14)
    assert abs(abs(out.vac_phase) - 1) < 1e-12


@pytest.mark.parametrize("n,jz,b", [(4, 0.0, 0.0), (6, 0.5, 0.3), (8, -0.2, 1.0)])
def test_static_matches_diagonalisation(n, jz, b):
    spec = ChainSpec(n, j_z=jz, b=b, bond_disorder=np.linspace(0, 0.05, n - 1))
    h = build_hamiltonian(spec)
    out = evolve(h, start(n), 7.3)
    np.testing.assert_allclose(out.amp, exact_static(h, start(n), 7.3), atol=1e-8)


def test_norm_conserved_along_fermi_run():
    h = build_hamiltonian(ChainSpec(10), FermiOn(0, 1.0), FermiOff(6.2, 1.0))
    norms = []
    evolve(h, start(10), 20.0, observer=lambda s: norms.append(s.norm()))
    assert max(abs(np.array(norms) - 1)) < 1e-8


def test_norm_drift_raised_for_huge_step():
    h = build_hamiltonian(ChainSpec(6))
    with pytest.raises(NormDrift):
        evolve(h, start(6), 10.0, IntegratorConfig(dt=1.0))


def test_convergence_check_examples():
    assert convergence_check(build_hamiltonian(ChainSpec(10)), start(10), 20.0,
                             IntegratorConfig(dt=0.01)) < 1e-7
    h2 = build_hamiltonian(ChainSpec(2))
    disc = convergence_check(h2, start(2), np.pi / 2, IntegratorConfig(dt=0.001))
    assert disc < 1e-10
    fine = evolve(h2, start(2), np.pi / 2, IntegratorConfig(dt=0.0005))
    assert fine.amp[1] == pytest.approx(1j, abs=1e-12)


def test_single_step_flags_non_convergence():
    h = build_hamiltonian(ChainSpec(3))
    t_end = np.pi / np.sqrt(2)
    cfg = IntegratorConfig(dt=t_end, norm_tol=10.0)
    assert convergence_check(h, start(3), t_end, cfg) > 0.1
    with pytest.raises(NormDrift):
        convergence_check(h, start(3), t_end, IntegratorConfig(dt=t_end))


@pytest.mark.parametrize("first,last", [
    (FermiOn(0, 0.5), FermiOff(4.0, 0.5)),
    (PowerOn(1.5, 1.0), PowerOff(4.0, 1.5, 1.0)),
])
def test_fourth_order_convergence(first, last):
    h = build_hamiltonian(ChainSpec(8), first, last)
    ref = evolve(h, start(8), 8.0, IntegratorConfig(dt=0.1 / 8)).amp
    e1 = np.max(abs(evolve(h, start(8), 8.0, IntegratorConfig(dt=0.1, norm_tol=1e-4)).amp - ref))
    e2 = np.max(abs(evolve(h, start(8), 8.0, IntegratorConfig(dt=0.05, norm_tol=1e-4)).amp - ref))
    assert e1 / e2 >= 8


def test_time_dependent_against_fine_expm_product():
    # midpoint exponential product with a much smaller step is an independent reference
    h = build_hamiltonian(ChainSpec(5, j_z=0.3), FermiOn(0, 0.4), FermiOff(2.5, 0.4))
    out = evolve(h, start(5), 5.0, IntegratorConfig(dt=0.002))
    c = start(5).amp.copy()
    ts = np.linspace(0, 5.0, 20001)
    for a, b in zip(ts[:-1], ts[1:]):
        c = expm(-1j * (b - a) * h.matrix(0.5 * (a + b))) @ c
    np.testing.assert_allclose(out.amp, c, atol=2e-7)


@given(st.complex_numbers(max_magnitude=1), st.complex_numbers(max_magnitude=1))
@settings(max_examples=15, deadline=None)
def test_linearity(alpha, beta):
    h = build_hamiltonian(ChainSpec(6, j_z=0.2), FermiOn(0, 0.5), FermiOff(3.0, 0.5))
    rng = np.random.default_rng(1)
    c0 = rng.normal(size=6) + 1j * rng.normal(size=6)
    c1 = rng.normal(size=6) + 1j * rng.normal(size=6)
    cfg = IntegratorConfig(norm_tol=1e3)
    run = lambda c: evolve(h, SectorState(0.0, 1.0, c), 4.0, cfg).amp  # noqa: E731
    np.testing.assert_allclose(run(alpha * c0 + beta * c1), alpha * run(c0) + beta * run(c1), atol=1e-10)


def test_mirror_symmetric_transfer():
    h = build_hamiltonian(ChainSpec(7))
    fwd = evolve(h, SectorState.excitation_at(7, 0), 5.0)
    back = evolve(h, SectorState.excitation_at(7, 6), 5.0)
    assert fwd.amp[6] == pytest.approx(back.amp[0], abs=1e-12)


def test_grid_contains_breakpoints():
    noise = NoiseTrack(0.0117, np.zeros(100))
    h = build_hamiltonian(ChainSpec(4), Noisy(FermiOn(0, 0.325), noise), Static())
    g = time_grid(0.0, 0.5, 0.003, h.breakpoints(0.0, 0.5))
    for b in noise.boundaries(0.0, 0.5):
        assert np.min(abs(g - b)) < 1e-15
    assert g[0] == 0.0 and g[-1] == 0.5
    assert np.all(np.diff(g) > 0) and np.max(np.diff(g)) <= 0.003 + 1e-15


def test_piecewise_noise_integrated_exactly_per_step():
    # with static inner schedules and constant pieces, each piece is an exact exponential
    heights = np.array([0.0, 0.3, 0.1, 0.5])
    noise = NoiseTrack(0.25, heights)
    first = Noisy(FermiOn(-1e3, 1.0), noise)
    h = build_hamiltonian(ChainSpec(3), first, Static())
    out = evolve(h, start(3), 1.0, IntegratorConfig(dt=0.25 / 64))
    c = start(3).amp.copy()
    for k, r in enumerate(heights):
        m = build_hamiltonian(ChainSpec(3, bond_disorder=[r, 0.0])).matrix(0.0)
        c = expm(-1j * 0.25 * m) @ c
    np.testing.assert_allclose(out.amp, c, atol=1e-9)


def test_rejects_backwards_time():
    with pytest.raises(ValueError):
        evolve(build_hamiltonian(ChainSpec(3)), SectorState.excitation_at(3, t=2.0), 1.0)
