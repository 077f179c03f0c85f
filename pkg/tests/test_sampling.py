import math

import numpy as np
import pytest

from gr24.energy import LOG, RIESZ2, continuous_energy, expected_dpp_energy_exact
from gr24.errors import InvalidParameter, RejectionBudgetExceeded
from gr24.grassmann import gram_deviation, pairwise_chordal_sq
from gr24.kernel import kernel_dim
from gr24.sampling import (DppOptions, RandomStream, SamplerSpec, close_pair_count, map_ordered,
                           mc_expected_energy, pair_angle_histogram, pair_xi_samples,
                           sample_anisotropic, sample_harmonic_dpp, sample_harmonic_dpp_draw,
                           sample_uniform, triangle_chi_square, worker_count)


def test_stream_determinism():
    a = sample_uniform(RandomStream(7), 5)
    b = sample_uniform(RandomStream(7), 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_uniform(RandomStream(8), 5))
    s = RandomStream(7)
    assert np.array_equal(sample_uniform(s.substream(3)), sample_uniform(RandomStream(7).substream(3)))
    assert not np.array_equal(sample_uniform(s.substream(3)), sample_uniform(s.substream(4)))
    with pytest.raises(InvalidParameter):
        RandomStream(-1)


def test_uniform_frames_are_orthonormal():
    P = sample_uniform(RandomStream(1), 100)
    assert P.shape == (100, 4, 2)
    assert max(gram_deviation(X) for X in P) <= 1e-12
    assert sample_uniform(RandomStream(1)).shape == (4, 2)


def test_mean_squared_chordal_distance():
    xp, xm = pair_xi_samples(100000, RandomStream(2))
    d2 = 1.0 - xp * xm
    se = d2.std(ddof=1) / math.sqrt(len(d2))
    assert abs(d2.mean() - 1.0) <= 4 * se


def test_pair_histogram_uniform_and_reproducible():
    res = pair_angle_histogram(100000, RandomStream(3))
    assert res.dof == 399
    assert res.p_value > 1e-3
    a = pair_angle_histogram(10000, RandomStream(4))
    b = pair_angle_histogram(10000, RandomStream(4))
    assert a.statistic == b.statistic
    with pytest.raises(InvalidParameter):
        pair_angle_histogram(100, RandomStream(4))


def test_pair_histogram_negative_control():
    res = pair_angle_histogram(100000, RandomStream(3), sampler=sample_anisotropic)
    assert res.p_value < 1e-6


def test_chi_square_rejects_point_mass():
    xp = np.full(20000, 0.1)
    xm = np.full(20000, 0.5)
    assert triangle_chi_square(xp, xm).p_value < 1e-6


def test_dpp_draw_basic():
    P = sample_harmonic_dpp(1, RandomStream(5))
    assert P.shape == (10, 4, 2)
    d2 = pairwise_chordal_sq(P)
    assert np.min(d2[~np.eye(10, dtype=bool)]) > 0
    assert np.array_equal(P, sample_harmonic_dpp(1, RandomStream(5)))
    assert sample_harmonic_dpp(2, RandomStream(6)).shape == (kernel_dim(2), 4, 2)


def test_dpp_rejection_budget():
    with pytest.raises(RejectionBudgetExceeded):
        sample_harmonic_dpp(3, RandomStream(5), DppOptions(max_rejections_per_point=1))


def test_dpp_repulsion():
    stream = RandomStream(10)
    dpp = [close_pair_count(sample_harmonic_dpp(1, stream.substream(m))) for m in range(500)]
    uni = [close_pair_count(sample_uniform(stream.substream(1000 + m), 10)) for m in range(500)]
    assert np.mean(dpp) < np.mean(uni)


def test_acceptance_rate_accounting():
    k = 2
    N = kernel_dim(k)
    stream = RandomStream(12)
    draws = [sample_harmonic_dpp_draw(k, stream.substream(m)).proposals for m in range(60)]
    mean = np.mean(draws, axis=0)
    expected = N / (N - np.arange(N))
    # per-point averages are noisy for the last points; check blocks of points
    for lo, hi in ((0, 15), (15, 30), (30, 40), (40, 45)):
        ratio = mean[lo:hi].sum() / expected[lo:hi].sum()
        assert abs(ratio - 1.0) <= 0.2


def test_mc_uniform_pair():
    res = mc_expected_energy(SamplerSpec("uniform", 2), RIESZ2, 100000, RandomStream(13))
    assert abs(res.mean - 2 * continuous_energy(RIESZ2)) <= 4 * res.stderr


def test_mc_dpp_log():
    res = mc_expected_energy(SamplerSpec("dpp", 1), LOG, 2000, RandomStream(14))
    assert abs(res.mean - expected_dpp_energy_exact(1, LOG)) <= 4 * res.stderr


def test_mc_small_m():
    res = mc_expected_energy(SamplerSpec("uniform", 3), RIESZ2, 2, RandomStream(1))
    assert math.isfinite(res.stderr) and res.M == 2
    with pytest.raises(InvalidParameter):
        mc_expected_energy(SamplerSpec("uniform", 3), RIESZ2, 1, RandomStream(1))


def test_threads_do_not_change_results(monkeypatch):
    spec = SamplerSpec("dpp", 1)
    monkeypatch.setenv("GR24_THREADS", "1")
    a = mc_expected_energy(spec, RIESZ2, 20, RandomStream(15))
    monkeypatch.setenv("GR24_THREADS", "4")
    assert worker_count() == 4
    b = mc_expected_energy(spec, RIESZ2, 20, RandomStream(15))
    assert a == b
    assert map_ordered(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    monkeypatch.setenv("GR24_THREADS", "many")
    with pytest.raises(InvalidParameter):
        worker_count()


def test_sampler_spec():
    assert SamplerSpec("dpp", 2).n_points == 45
    assert SamplerSpec("uniform", 7).n_points == 7
    with pytest.raises(InvalidParameter):
        SamplerSpec("other", 3)
