import numpy as np
import pytest

from chainwave import runs
from chainwave.evolve import IntegratorConfig
from chainwave.fidelity import first_maximum, simulate, stationary_end, stationary_fidelity
from chainwave.model import ChainSpec, FermiOff, FermiOn, InstantOn, Noisy
from chainwave.stochastic import (NOISE_WIDTH, EnsembleAborted, draw_disorder,
                                  disorder_ensemble, fluctuation_ensemble, noise_track)

SPEC = ChainSpec(6)
FIRST, LAST = FermiOn(0.0, 0.4), FermiOff(3.5, 0.4)


def test_zero_strength_draws_zeros():
    assert np.array_equal(draw_disorder(10, 0.0, 3), np.zeros(9))


def test_disorder_distribution():
    r = draw_disorder(100_001, 0.07, 11)
    assert r.shape == (100_000,)
    assert r.min() >= 0 and r.max() <= 0.07
    assert r.mean() == pytest.approx(0.035, abs=0.002)


def test_disorder_is_seeded():
    assert np.array_equal(draw_disorder(8, 0.1, 5), draw_disorder(8, 0.1, 5))
    assert not np.array_equal(draw_disorder(8, 0.1, 5), draw_disorder(8, 0.1, 6))
    with pytest.raises(ValueError):
        draw_disorder(8, -0.1, 0)


def test_noise_track_covers_window():
    rng = np.random.default_rng(1)
    track = noise_track(0.5, 10.0, rng)
    assert track.step_width == pytest.approx(NOISE_WIDTH * 0.5)
    assert len(track.heights) * track.step_width > 10.0
    assert track.heights.min() >= 0 and track.heights.max() <= 0.02


def test_zero_strength_ensemble_collapses_to_clean_chain():
    rep = disorder_ensemble(SPEC, FIRST, LAST, 4, 0.0, seed=2)
    d = rep.column("difference")
    assert np.ptp(d) == 0.0
    clean_fd = stationary_fidelity(simulate(SPEC, FIRST, LAST, float(stationary_end(LAST))), LAST)
    clean_f0 = first_maximum(simulate(SPEC, t_end=12.0)).f_first_max
    assert rep.column("dynamic")[0] == pytest.approx(clean_fd, abs=1e-7)
    assert rep.column("static")[0] == pytest.approx(clean_f0, abs=1e-7)


def test_zero_height_noise_reproduces_reference():
    rep = fluctuation_ensemble(SPEC, FIRST, LAST, 3, seed=0, max_height=0.0)
    np.testing.assert_allclose(rep.column("difference"), 0.0, atol=1e-12)


def test_ensembles_are_reproducible_and_thread_independent():
    a = disorder_ensemble(SPEC, FIRST, LAST, 6, 0.1, seed=40)
    b = disorder_ensemble(SPEC, FIRST, LAST, 6, 0.1, seed=40, threads=3)
    assert np.array_equal(a.column("difference"), b.column("difference"))
    c = fluctuation_ensemble(SPEC, FIRST, LAST, 4, seed=9)
    d = fluctuation_ensemble(SPEC, FIRST, LAST, 4, seed=9, threads=2)
    assert np.array_equal(c.column("dynamic"), d.column("dynamic"))


def test_samples_are_paired_on_the_same_bonds():
    rep = disorder_ensemble(SPEC, FIRST, LAST, 3, 0.2, seed=100)
    rec = rep.samples[1]
    assert rec.seed == 101
    chain = SPEC.with_disorder(draw_disorder(SPEC.n, 0.2, rec.seed))
    fd = stationary_fidelity(simulate(chain, FIRST, LAST, float(stationary_end(LAST))), LAST)
    f0 = first_maximum(simulate(chain, t_end=12.0)).f_first_max
    assert rec.dynamic == pytest.approx(fd, abs=1e-7)
    assert rec.static == pytest.approx(f0, abs=1e-7)
    assert rec.difference == pytest.approx(rec.dynamic - rec.static)


def test_fluctuation_sample_regenerates_individually():
    rep = fluctuation_ensemble(SPEC, FIRST, LAST, 3, seed=70)
    rec = rep.samples[2]
    rng = np.random.default_rng(rec.seed)
    t_end = float(stationary_end(LAST))
    n1, n2 = noise_track(0.4, t_end, rng), noise_track(0.4, t_end, rng)
    cfg = IntegratorConfig(dt=min(0.005, NOISE_WIDTH * 0.4 / 4))
    trace = simulate(SPEC, Noisy(FIRST, n1), Noisy(LAST, n2), t_end, cfg)
    assert rec.dynamic == pytest.approx(stationary_fidelity(trace, LAST), abs=1e-9)


def test_spread_shrinks_like_inverse_square_root():
    small = disorder_ensemble(SPEC, FIRST, LAST, 40, 0.1, seed=1000)
    large = disorder_ensemble(SPEC, FIRST, LAST, 160, 0.1, seed=5000)
    se_small, se_large = small.standard_error(), large.standard_error()
    assert se_large == pytest.approx(se_small / 2, rel=0.5)
    gap = abs(small.stats()["mean"] - large.stats()["mean"])
    assert gap < 3 * np.hypot(se_small, se_large)


def test_histogram_counts_every_sample():
    rep = disorder_ensemble(SPEC, FIRST, LAST, 10, 0.1, seed=3)
    rep.bins = 5
    edges, counts = rep.histogram("dynamic")
    assert len(edges) == 6 and counts.sum() == 10


def test_many_failures_abort_the_ensemble():
    # a norm tolerance nobody can meet makes every sample fail
    with pytest.raises(EnsembleAborted):
        disorder_ensemble(SPEC, FIRST, LAST, 3, 0.1, seed=0,
                          cfg=IntegratorConfig(dt=0.05, norm_tol=1e-15))


def test_noise_needs_fermi_ramps():
    with pytest.raises(TypeError):
        fluctuation_ensemble(SPEC, InstantOn(0.0), LAST, 2, seed=0)


def test_invalid_sample_count():
    with pytest.raises(ValueError):
        disorder_ensemble(SPEC, FIRST, LAST, 0, 0.1, seed=0)
    with pytest.raises(ValueError):
        fluctuation_ensemble(SPEC, FIRST, LAST, 0, seed=0)


def test_chunking_and_threads_do_not_change_results():
    chains = [SPEC.with_disorder(draw_disorder(SPEC.n, 0.1, 21 + i)) for i in range(5)]
    protos = [runs.Protocol(c, FIRST, LAST) for c in chains]
    one = runs.run_protocols(protos)
    split = runs.run_protocols(protos, chunk=2, threads=3)
    a = [o.summary.f_stationary for o in one]
    b = [o.summary.f_stationary for o in split]
    np.testing.assert_allclose(a, b, atol=1e-9)
    assert b == [o.summary.f_stationary for o in runs.run_protocols(protos, chunk=2)]
