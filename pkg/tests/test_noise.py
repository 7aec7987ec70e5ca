import math

import numpy as np
import pytest

from wdrmin.core import ValueOracle, modular_oracle
from wdrmin.errors import ConfigError, StochasticOracleError
from wdrmin.noise import (
    NoiseSpec,
    draw_xi,
    mean_estimator,
    minimize_noisy,
    plan_budget,
    samples_needed,
    wrap_noisy,
)
from wdrmin.pgm import PgmConfig, minimize
from wdrmin.zoo import path_graph


def const(v, d=2):
    return ValueOracle(lambda m: v if m else 0.0, d)


class TestSpec:
    def test_defaults(self):
        s = NoiseSpec()
        assert s.bound == pytest.approx(1.6) and s.mean == 1.0

    @pytest.mark.parametrize("kw", [dict(kind="x"), dict(distribution="cauchy"), dict(sigma=-1),
                                    dict(mu=0.0), dict(distribution="uniform", lo=1, hi=0), dict(omega=-1)])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            NoiseSpec(**kw)


class TestStreams:
    def test_counter_based(self):
        spec = NoiseSpec(seed=7)
        full = draw_xi(spec, 0, 50)
        np.testing.assert_array_equal(draw_xi(spec, 20, 10), full[20:30])
        assert not np.array_equal(full, draw_xi(NoiseSpec(seed=8), 0, 50))

    def test_truncation(self):
        spec = NoiseSpec(sigma=1.0, omega=1.2)
        xi = draw_xi(spec, 0, 5000)
        assert np.all(np.abs(xi) <= 1.2)

    def test_uniform_range(self):
        xi = draw_xi(NoiseSpec(kind="additive", distribution="uniform", lo=-1, hi=2), 0, 1000)
        assert xi.min() >= -1 and xi.max() < 2

    def test_unbiased(self):
        spec = NoiseSpec(seed=3)
        H = wrap_noisy(const(10.0), spec)
        vals = H.sample_mean([1], [10.0], 1)  # warm the counter once
        xi = draw_xi(spec, 0, 100_000)
        se = xi.std() / math.sqrt(xi.size)
        assert abs(xi.mean() - 1.0) < 3 * se
        assert vals.shape == (1,)

    def test_instances_do_not_interfere(self):
        spec = NoiseSpec(seed=5)
        a, b = wrap_noisy(const(3.0), spec), wrap_noisy(const(3.0), spec)
        first = [a(1) for _ in range(3)]
        b(1)
        a2 = wrap_noisy(const(3.0), spec)
        assert first == [a2(1) for _ in range(3)]

    def test_fresh_draws(self):
        H = wrap_noisy(const(2.0), NoiseSpec(seed=1))
        assert H(1) != H(1)
        assert not H.deterministic

    def test_consistent_mode_memoizes(self):
        H = wrap_noisy(const(2.0), NoiseSpec(seed=1, consistent=True))
        first = H(1)
        assert H(1) == first and H(2) == H(2)
        assert H.call_count == 4

    def test_needs_deterministic_base(self):
        base = ValueOracle(lambda m: 0.0, 2, deterministic=False, seed=0)
        with pytest.raises(StochasticOracleError):
            wrap_noisy(base, NoiseSpec())


class TestIdentityNoise:
    def test_degenerate_gaussian(self):
        H = modular_oracle([1.5, -2.0, 3.0])
        N = wrap_noisy(H, NoiseSpec(sigma=0.0))
        assert all(N(m) == H(m) for m in range(8))

    def test_additive_zero(self):
        H = modular_oracle([1.5, -2.0, 3.0])
        N = wrap_noisy(H, NoiseSpec(kind="additive", mu=0.0, sigma=0.0))
        assert all(N(m) == H(m) for m in range(8))

    def test_zero_noise_run_matches_noiseless(self):
        H = path_graph(5).oracle()
        conf = PgmConfig(T=100, step_rule="fixed_sqrt")
        a = minimize(H, conf)
        b = minimize_noisy(H, NoiseSpec(sigma=0.0), m=7, T=100, config=conf)
        np.testing.assert_array_equal(a.trajectory, b.trajectory)
        assert a.rounded_set == b.rounded_set


class TestMeanEstimator:
    def test_m_one_is_identity(self):
        N = wrap_noisy(const(1.0), NoiseSpec())
        assert mean_estimator(N, 1) is N

    def test_call_accounting(self):
        N = wrap_noisy(modular_oracle([1, 2, 3]), NoiseSpec())
        est = mean_estimator(N, 10)
        est(3)
        assert N.call_count == 10
        est.chain(np.array([0, 1, 2]))
        assert N.call_count == 10 + 40

    def test_concentration(self):
        hits = 0
        for seed in range(100):
            est = mean_estimator(wrap_noisy(const(10.0), NoiseSpec(seed=seed)), 10_000)
            hits += abs(est(1) - 10.0) <= 0.05
        assert hits >= 99

    def test_bad_m(self):
        with pytest.raises(ConfigError):
            mean_estimator(wrap_noisy(const(1.0), NoiseSpec()), 0)


class TestBudget:
    def test_hand_checked(self):
        b = plan_budget(0.8, 0.1, 10, 5.0)
        assert b.eps == 0.01 and b.delta == pytest.approx(2e-5, rel=1e-15) and b.T == 6250
        assert b.m is None

    def test_eps_halved_quadruples_T(self):
        assert plan_budget(0.4, 0.1, 10, 5.0).T == 4 * plan_budget(0.8, 0.1, 10, 5.0).T

    def test_d_one(self):
        assert plan_budget(0.8, 0.1, 1, 1.0).eps == pytest.approx(0.1)

    def test_samples(self):
        assert samples_needed(2, 10, 1, 0.1) == 922

    def test_monotone(self):
        spec = NoiseSpec()
        base = plan_budget(0.5, 0.1, 6, 2.0, spec, 3.0)
        assert plan_budget(0.6, 0.1, 6, 2.0, spec, 3.0).m <= base.m
        assert plan_budget(0.5, 0.1, 7, 2.0, spec, 3.0).m >= base.m
        assert plan_budget(0.5, 0.1, 6, 3.0, spec, 3.0).T >= base.T
        assert plan_budget(0.5, 0.1, 6, 2.0, spec, 4.0).m >= base.m
        assert plan_budget(0.5, 0.1, 6, 2.0, NoiseSpec(sigma=0.2), 3.0).m >= base.m

    def test_domain(self):
        with pytest.raises(ValueError):
            plan_budget(1.0, 0.1, 3, 1.0)
        with pytest.raises(ValueError):
            plan_budget(0.5, 0.1, 3, 0.0)
        with pytest.raises(ValueError):
            plan_budget(0.5, 0.1, 3, 1.0, NoiseSpec(omega=math.inf), 1.0)


class TestMinimizeNoisy:
    def test_modular(self):
        H = modular_oracle([-1, 2, -3])
        good = sum(minimize_noisy(H, NoiseSpec(seed=s), m=100, T=400).diagnostics["true_value"] == -4
                   for s in range(20))
        assert good >= 18

    @pytest.mark.slow
    def test_path_graph(self):
        H = path_graph(6).oracle()
        good = sum(minimize_noisy(H, NoiseSpec(seed=s), m=50, T=400).diagnostics["true_value"] == 0
                   for s in range(20))
        assert good >= 19

    def test_needs_m_and_T(self):
        with pytest.raises(ConfigError):
            minimize_noisy(modular_oracle([1.0]), NoiseSpec(), m=3)

    def test_budget_drives_T_and_L(self):
        b = plan_budget(0.8, 0.1, 2, 1.0)
        res = minimize_noisy(modular_oracle([1.0, -1.0]), NoiseSpec(seed=2), b, m=2)
        assert res.T == b.T and res.L == 1.0 and not res.L_estimated
        assert res.oracle_calls == 2 * (b.T * 3 + 3)
