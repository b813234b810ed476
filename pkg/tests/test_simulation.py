import math

import numpy as np
import pytest
from scipy import stats

from fdd2d.analytic import (
    DuplexMode,
    SystemParams,
    interferer_intensity,
    outage_probability,
    spectral_efficiency,
)
from fdd2d.caching import CollaborationProbabilities, ZipfModel, build_caching_profile, collaboration_probabilities
from fdd2d.exceptions import InvalidParameterError
from fdd2d.numerics import integrate_semi_infinite
from fdd2d.simulation import (
    EstimateWithError,
    SimConfig,
    estimate_collaboration,
    estimate_interferer_intensity,
    estimate_outage,
    estimate_spectral_efficiency,
    sample_ppp_disc,
    simulate_sinr_samples,
    simulate_sinr_trial,
    trial_rng,
    truncation_self_test,
)

HD, FD = DuplexMode.HD, DuplexMode.FD
COLLAB = CollaborationProbabilities(p_hd=0.3, p_fd=0.2)


def params(**kw):
    values = dict(lam=1e-3, mu=0.3, alpha=4.0, beta=1e-5, rho_d=0.1, sigma2=0.0, theta_d=10.0, r_d=10.0)
    values.update(kw)
    return SystemParams(**values)


class TestPpp:
    def test_empty_at_zero_intensity(self):
        assert sample_ppp_disc(0.0, 100.0, seed=1).shape == (0, 2)

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidParameterError):
            sample_ppp_disc(-1.0, 10.0)
        with pytest.raises(InvalidParameterError):
            sample_ppp_disc(1.0, 0.0)

    def test_deterministic_given_seed(self):
        np.testing.assert_array_equal(sample_ppp_disc(1e-3, 100.0, 7), sample_ppp_disc(1e-3, 100.0, 7))

    def test_mean_count(self):
        rng = np.random.default_rng(2024)
        counts = np.array([len(sample_ppp_disc(1e-3, 100.0, rng)) for _ in range(10_000)])
        mean = 1e-3 * math.pi * 100.0**2
        assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / counts.size)
        assert counts.var(ddof=1) == pytest.approx(mean, rel=0.1)

    def test_uniform_on_disc(self):
        pts = sample_ppp_disc(1e-2, 100.0, seed=11)
        angles = np.arctan2(pts[:, 1], pts[:, 0])
        observed, _ = np.histogram(angles, bins=16, range=(-math.pi, math.pi))
        assert stats.chisquare(observed).pvalue > 0.01
        r2 = (pts**2).sum(axis=1) / 100.0**2
        assert stats.kstest(r2, "uniform").pvalue > 0.01
        assert np.all(r2 > 0) and np.all(r2 <= 1)


class TestTrialStreams:
    def test_streams_are_distinct(self):
        a = trial_rng(5, 0, 0).random(4)
        assert not np.array_equal(a, trial_rng(5, 1, 0).random(4))
        assert not np.array_equal(a, trial_rng(5, 0, 1).random(4))
        assert not np.array_equal(a, trial_rng(6, 0, 0).random(4))
        np.testing.assert_array_equal(a, trial_rng(5, 0, 0).random(4))


class TestEstimateWithError:
    def test_from_samples(self):
        est = EstimateWithError.from_samples([0, 1, 1, 0])
        assert est.value == 0.5
        assert est.std_error == pytest.approx(np.std([0, 1, 1, 0], ddof=1) / 2)
        assert est.trials == 4

    def test_z_score(self):
        assert EstimateWithError(1.0, 0.5, 10).z_score(0.0) == 2.0
        assert EstimateWithError(0.0, 0.0, 10).z_score(0.0) == 0.0
        assert EstimateWithError(0.0, 0.0, 10).z_score(0.5) == math.inf


class TestSimConfig:
    def test_window_default(self):
        cfg = SimConfig(params(), FD, COLLAB)
        assert cfg.intensity == pytest.approx(6e-5)
        assert cfg.window == pytest.approx(max(200.0, 10 / math.sqrt(6e-5)))
        assert SimConfig(params(lam=0.0), FD, COLLAB).window == 200.0
        assert SimConfig(params(), FD, COLLAB, window_radius=50.0).window == 50.0

    @pytest.mark.parametrize("kwargs", [dict(trials=0), dict(window_radius=-1.0), dict(collab_source="x")])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            SimConfig(params(), HD, COLLAB, **kwargs)

    def test_mode_string(self):
        assert SimConfig(params(), "fd", COLLAB).mode is FD


class TestSinrTrial:
    def test_reproducible_and_positive(self):
        cfg = SimConfig(params(lam=1e-2), FD, COLLAB, master_seed=3)
        a, b = simulate_sinr_trial(cfg, 17), simulate_sinr_trial(cfg, 17)
        np.testing.assert_array_equal(a.interferer_distances, b.interferer_distances)
        assert a.sinr == b.sinr
        assert a.interferer_distances.size > 0
        assert np.all(a.interferer_distances > 0) and np.all(a.fading_gains >= 0)

    def test_noise_only_hand_ratio(self):
        p = params(lam=0.0, sigma2=1e-7)
        real = simulate_sinr_trial(SimConfig(p, HD, COLLAB), 0)
        assert real.interferer_distances.size == 0
        assert real.sinr == pytest.approx(p.rho_d * real.typical_fade * p.r_d**-4 / p.sigma2, rel=1e-15)

    def test_full_self_interference(self):
        p = params(lam=0.0, beta=1.0)
        real = simulate_sinr_trial(SimConfig(p, FD, COLLAB), 4)
        assert real.sinr == pytest.approx(real.typical_fade * p.r_d**-4, rel=1e-15)

    def test_empty_field_without_noise_is_unbounded(self):
        real = simulate_sinr_trial(SimConfig(params(lam=0.0), HD, COLLAB), 0)
        assert real.sinr == math.inf

    def test_sinr_matches_composition(self):
        p = params(lam=1e-2, sigma2=1e-9)
        real = simulate_sinr_trial(SimConfig(p, FD, COLLAB), 9)
        interference = p.rho_d * np.sum(real.fading_gains * real.interferer_distances**-4.0)
        expected = p.rho_d * real.typical_fade * p.r_d**-4 / (p.sigma2 + interference + p.beta * p.rho_d)
        assert real.sinr == pytest.approx(expected, rel=1e-13)

    def test_fading_is_unit_exponential(self):
        cfg = SimConfig(params(lam=1e-2, mu=1.0), HD, CollaborationProbabilities(0.5, 0.0), window_radius=20.0)
        gains, trial = [], 0
        while sum(len(g) for g in gains) < 10_000:
            gains.append(simulate_sinr_trial(cfg, trial).fading_gains)
            trial += 1
        sample = np.concatenate(gains)[:10_000]
        assert stats.kstest(sample, "expon").pvalue > 0.01
        typical = [simulate_sinr_trial(cfg, t).typical_fade for t in range(2000)]
        assert stats.kstest(typical, "expon").pvalue > 0.01

    def test_workers_do_not_change_results(self):
        cfg = SimConfig(params(), HD, COLLAB, trials=5000, master_seed=42)
        a = simulate_sinr_samples(cfg, workers=1)
        b = simulate_sinr_samples(cfg, workers=2)
        np.testing.assert_array_equal(a.sinr, b.sinr)
        np.testing.assert_array_equal(a.interferer_counts, b.interferer_counts)

    def test_trial_order_does_not_matter(self):
        cfg = SimConfig(params(), FD, COLLAB, trials=200, master_seed=8)
        forward = [simulate_sinr_trial(cfg, t).sinr for t in range(200)]
        backward = [simulate_sinr_trial(cfg, t).sinr for t in reversed(range(200))][::-1]
        assert forward == backward
        np.testing.assert_array_equal(simulate_sinr_samples(cfg).sinr, forward)


class TestEstimators:
    def test_minimum_trials(self):
        with pytest.raises(InvalidParameterError):
            estimate_outage(SimConfig(params(), HD, COLLAB, trials=99))

    def test_threshold_limits(self):
        lo = estimate_outage(SimConfig(params(theta_d=1e-12), FD, COLLAB, trials=2000))
        hi = estimate_outage(SimConfig(params(theta_d=1e12), FD, COLLAB, trials=2000))
        assert lo.value == 0.0 and hi.value == 1.0

    @pytest.mark.parametrize("mode", [HD, FD])
    def test_outage_matches_closed_form(self, mode):
        cfg = SimConfig(params(), mode, COLLAB, trials=20_000, master_seed=5)
        est = estimate_outage(cfg)
        assert abs(est.z_score(outage_probability(cfg.params, mode, COLLAB))) <= 3

    def test_interferer_intensity(self):
        cfg = SimConfig(params(lam=1e-2), FD, COLLAB, trials=5000, master_seed=12)
        est = estimate_interferer_intensity(cfg)
        assert abs(est.z_score(interferer_intensity(cfg.params, FD, COLLAB))) <= 3

    def test_noise_only_spectral_efficiency(self):
        p = params(lam=0.0, beta=0.0, sigma2=1e-6)
        c = p.rho_d * p.r_d**-4 / p.sigma2
        # E[log2(1 + c h)] for unit-mean exponential h, by 1-D quadrature
        expected = integrate_semi_infinite(lambda x: np.log2(1 + c * x) * np.exp(-x)).value
        est = estimate_spectral_efficiency(SimConfig(p, HD, COLLAB, trials=20_000, master_seed=2))
        assert abs(est.z_score(expected)) <= 3
        assert spectral_efficiency(p, HD, COLLAB) == pytest.approx(expected, rel=1e-8)

    def test_fd_doubles_hd_on_shared_field(self):
        same = CollaborationProbabilities(0.3, 0.3)
        p = params(beta=0.0)
        hd = estimate_spectral_efficiency(SimConfig(p, HD, same, trials=2000, master_seed=9))
        fd = estimate_spectral_efficiency(SimConfig(p, FD, same, trials=2000, master_seed=9))
        assert fd.value == pytest.approx(2 * hd.value, rel=1e-12)

    def test_truncation_self_test(self):
        check = truncation_self_test(SimConfig(params(), FD, COLLAB, trials=10_000, master_seed=1))
        assert check.passed
        assert check.outage_extended >= check.outage_default


class TestCollaborationEstimator:
    def test_single_user_never_collaborates(self):
        est = estimate_collaboration(ZipfModel(100, 1.2), 5, 0.3, 1e-3, 500.0, trials=1000, n_users=1)
        assert est.p_hd.value == 0.0 and est.p_fd.value == 0.0

    def test_one_user_holds_the_library(self):
        # Whatever the m^2 joint requests, the second user asks user 1, and user 1's own request is local.
        est = estimate_collaboration(ZipfModel(6, 1.0), 6, 0.3, 1e-3, 500.0, trials=1000, n_users=2)
        assert est.p_hd.value == 1.0 and est.p_fd.value == 0.0

    @pytest.mark.parametrize("m,gamma,cache,users", [(5, 1.0, 2, 3), (6, 0.8, 1, 3)])
    def test_matches_proposition_at_fixed_users(self, m, gamma, cache, users):
        exact = collaboration_probabilities(build_caching_profile(ZipfModel(m, gamma), cache, users))
        est = estimate_collaboration(ZipfModel(m, gamma), cache, 0.3, 1e-3, 500.0, trials=20_000,
                                     seed=4, n_users=users)
        assert abs(est.p_hd.z_score(exact.p_hd)) <= 3
        assert abs(est.p_fd.z_score(exact.p_fd)) <= 3

    def test_poisson_users_and_no_demand(self):
        est = estimate_collaboration(ZipfModel(50, 1.0), 5, 0.0, 1e-3, 500.0, trials=500)
        assert est.p_hd.value == 0.0 and est.p_fd.value == 0.0
        est = estimate_collaboration(ZipfModel(50, 1.0), 5, 0.3, 1e-3, 50.0, trials=2000)
        assert 0 < est.p_hd.value + est.p_fd.value < 1

    def test_reproducible_across_workers(self):
        args = (ZipfModel(100, 1.2), 5, 0.3, 1e-3, 100.0)
        a = estimate_collaboration(*args, trials=9000, seed=3, workers=1)
        b = estimate_collaboration(*args, trials=9000, seed=3, workers=2)
        assert a == b

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidParameterError):
            estimate_collaboration(ZipfModel(10, 1.0), 11, 0.3, 1e-3, 100.0, trials=100)
        with pytest.raises(InvalidParameterError):
            estimate_collaboration(ZipfModel(10, 1.0), 2, 0.3, 1e-3, 100.0, trials=10)
