import math

import numpy as np
import pytest

from hazard_potential.distcore import WienerParams, ig_cdf
from hazard_potential.exceptions import DomainError
from hazard_potential.pathsim import (
    McEstimate,
    PathConfig,
    SamplePath,
    competing_survival_curve,
    hitting_curve,
    mc_dependent_competing_survival,
    mc_exponential_threshold_hitting,
    mc_fixed_threshold_hitting,
    mc_trauma_survival,
    path_rng,
    running_max,
    sample_correlated_bm_pair,
    sample_gamma_path,
    sample_wiener_path,
    trauma_survival_curve,
)

UNIT = WienerParams(1.0, 1.0)


def _sp(values):
    values = np.asarray(values, dtype=float)
    return SamplePath(np.arange(values.size) * 0.1, values)


def _endpoints(sampler, n_paths, n_steps=100, seed=0):
    cfg = PathConfig(dt=1.0 / n_steps, n_steps=n_steps, n_paths=n_paths, seed=seed)
    return np.array([sampler(cfg, i).values[-1] for i in range(n_paths)])


class TestConfig:
    def test_horizon(self):
        cfg = PathConfig.for_horizon(2.0, 1e-3, 10)
        assert cfg.n_steps == 2000
        assert cfg.horizon == pytest.approx(2.0)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(dt=0.0, n_steps=1, n_paths=1),
            dict(dt=0.1, n_steps=0, n_paths=1),
            dict(dt=0.1, n_steps=1, n_paths=0),
            dict(dt=0.1, n_steps=1, n_paths=1, seed=-1),
            dict(dt=0.1, n_steps=1, n_paths=1, seed=2**64),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            PathConfig(**kw)

    def test_step_index_is_exact_on_grid(self):
        cfg = PathConfig(dt=1e-3, n_steps=2000, n_paths=1)
        assert cfg.step_index(1.0) == 1000
        assert cfg.step_index(0.3) == 300
        assert cfg.step_index(2.0) == 2000

    def test_beyond_horizon(self):
        cfg = PathConfig(dt=0.01, n_steps=100, n_paths=10)
        with pytest.raises(DomainError):
            mc_fixed_threshold_hitting(UNIT, 1.0, 1.5, cfg)
        with pytest.raises(DomainError):
            mc_trauma_survival(1.01, math.inf, cfg)

    def test_horizon_equal_to_t_runs(self):
        cfg = PathConfig(dt=0.01, n_steps=100, n_paths=10)
        est = mc_fixed_threshold_hitting(UNIT, 1.0, 1.0, cfg)
        assert isinstance(est, McEstimate) and est.n_paths == 10


class TestWienerPaths:
    def test_shape_and_start(self):
        cfg = PathConfig(dt=0.01, n_steps=50, n_paths=3, seed=9)
        p = sample_wiener_path(UNIT, cfg, 2)
        assert len(p) == 51 and p.values[0] == 0.0 and p.times[0] == 0.0
        assert np.allclose(np.diff(p.times), 0.01)

    def test_deterministic(self):
        cfg = PathConfig(dt=0.01, n_steps=200, n_paths=5, seed=123)
        a = sample_wiener_path(UNIT, cfg, 4).values
        b = sample_wiener_path(UNIT, cfg, 4).values
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_wiener_path(UNIT, cfg, 3).values)

    def test_immutable(self):
        cfg = PathConfig(dt=0.01, n_steps=5, n_paths=1)
        p = sample_wiener_path(UNIT, cfg, 0)
        with pytest.raises(ValueError):
            p.values[1] = 3.0

    def test_index_range(self):
        cfg = PathConfig(dt=0.01, n_steps=5, n_paths=2)
        with pytest.raises(DomainError):
            sample_wiener_path(UNIT, cfg, 2)

    def test_endpoint_moments(self):
        z = _endpoints(lambda c, i: sample_wiener_path(UNIT, c, i), 100_000)
        assert abs(z.mean() - 1.0) <= 0.01
        assert abs(z.var(ddof=1) - 1.0) <= 0.015

    def test_prefix_consistency(self):
        # a longer horizon extends, never changes, a path
        short = sample_wiener_path(UNIT, PathConfig(0.01, 100, 1, seed=4), 0).values
        long = sample_wiener_path(UNIT, PathConfig(0.01, 300, 1, seed=4), 0).values
        assert np.array_equal(short, long[:101])


class TestRunningMax:
    @pytest.mark.parametrize(
        "values, expected",
        [([0, -1, -2], [0, 0, 0]), ([0, 1, 0.5, 2], [0, 1, 1, 2]), ([0, 0, 0], [0, 0, 0])],
    )
    def test_examples(self, values, expected):
        assert running_max(_sp(values)).values.tolist() == expected

    def test_properties_on_random_paths(self):
        cfg = PathConfig(0.01, 300, 20, seed=1)
        for i in range(20):
            p = sample_wiener_path(WienerParams(-0.5, 2.0), cfg, i)
            m = running_max(p).values
            assert np.all(np.diff(m) >= 0)
            assert np.all(m >= np.maximum(p.values, 0))


class TestGammaPaths:
    def test_nondecreasing(self):
        cfg = PathConfig(0.001, 1000, 50, seed=2)
        for i in range(50):
            assert np.all(np.diff(sample_gamma_path(cfg, i).values) >= 0)

    def test_endpoint_moments(self):
        h = _endpoints(sample_gamma_path, 100_000)
        assert abs(h.mean() - 1.0) <= 0.01
        assert abs(h.var(ddof=1) - 1.0) <= 0.02


class TestCorrelatedPairs:
    def test_perfect_correlation_identical(self):
        cfg = PathConfig(0.01, 100, 3, seed=7)
        a, b = sample_correlated_bm_pair(1.0, cfg, 1)
        assert np.array_equal(a.values, b.values)

    def test_perfect_anticorrelation_mirrors(self):
        cfg = PathConfig(0.01, 100, 3, seed=7)
        a, b = sample_correlated_bm_pair(-1.0, cfg, 1)
        assert np.array_equal(a.values, -b.values)

    @pytest.mark.parametrize("rho", [0.0, 0.5])
    def test_sample_correlation_and_marginals(self, rho):
        cfg = PathConfig(0.1, 10, 100_000, seed=3)
        ends = np.array([[p.values[-1] for p in sample_correlated_bm_pair(rho, cfg, i)] for i in range(cfg.n_paths)])
        assert abs(np.corrcoef(ends.T)[0, 1] - rho) <= 0.01
        assert np.all(np.abs(ends.var(axis=0, ddof=1) - 1.0) <= 0.02)

    def test_rho_range(self):
        with pytest.raises(DomainError):
            sample_correlated_bm_pair(1.5, PathConfig(0.1, 10, 1), 0)


class TestEstimators:
    def test_fixed_threshold_against_closed_form(self):
        cfg = PathConfig.for_horizon(1.0, 1e-3, 4000, seed=8)
        est = mc_fixed_threshold_hitting(UNIT, 1.0, 1.0, cfg)
        exact = ig_cdf(1.0, 1.0, UNIT)
        # biased low: allow the discretisation shortfall on one side only
        assert exact - 3 * est.std_err - 0.05 <= est.value <= exact + 3 * est.std_err
        assert est.std_err == pytest.approx(math.sqrt(est.value * (1 - est.value) / 4000))

    def test_unreachable_level(self):
        cfg = PathConfig.for_horizon(1.0, 1e-2, 500)
        assert mc_fixed_threshold_hitting(UNIT, 100.0, 1.0, cfg).value == 0.0

    def test_exponential_threshold_first_step(self):
        cfg = PathConfig.for_horizon(1.0, 1e-3, 2000, seed=5)
        assert mc_exponential_threshold_hitting(UNIT, 1e-3, cfg).value < 0.1

    def test_curves_nondecreasing_in_t(self):
        cfg = PathConfig.for_horizon(2.0, 1e-2, 2000, seed=6)
        ts = [0.1, 0.5, 1.0, 1.5, 2.0]
        for x in (None, 1.0):
            vals = [e.value for e in hitting_curve(UNIT, ts, cfg, x=x)]
            assert np.all(np.diff(vals) >= 0)

    def test_curve_points_match_single_calls(self):
        cfg = PathConfig.for_horizon(2.0, 1e-2, 300, seed=6)
        curve = hitting_curve(UNIT, [2.0, 0.5], cfg, x=None)
        assert curve[1] == mc_exponential_threshold_hitting(UNIT, 0.5, cfg)
        assert curve[0] == mc_exponential_threshold_hitting(UNIT, 2.0, cfg)

    def test_competing_monotone_in_rho(self):
        cfg = PathConfig.for_horizon(1.0, 1e-2, 4000, seed=10)
        vals = [mc_dependent_competing_survival(r, 1.0, cfg).value for r in (-0.5, 0.0, 0.5, 1.0)]
        assert np.all(np.diff(vals) >= 0)

    def test_competing_curve_nonincreasing_in_t(self):
        cfg = PathConfig.for_horizon(1.0, 1e-2, 1000, seed=10)
        vals = [e.value for e in competing_survival_curve(0.3, [0.2, 0.5, 1.0], cfg)]
        assert np.all(np.diff(vals) <= 0)

    def test_trauma_finite_threshold_removes_mass(self):
        cfg = PathConfig.for_horizon(1.0, 1e-3, 2000, seed=12)
        inf = mc_trauma_survival(1.0, math.inf, cfg)
        fin = mc_trauma_survival(1.0, 0.8, cfg)
        assert fin.value <= inf.value

    def test_trauma_curve_nonincreasing(self):
        cfg = PathConfig.for_horizon(2.0, 1e-2, 500, seed=12)
        vals = [e.value for e in trauma_survival_curve([0.5, 1.0, 2.0], math.inf, cfg)]
        assert np.all(np.diff(vals) < 0)

    def test_trauma_threshold_validated(self):
        with pytest.raises(DomainError):
            mc_trauma_survival(1.0, 0.0, PathConfig(0.1, 10, 5))

    def test_invalid_level(self):
        with pytest.raises(DomainError):
            mc_fixed_threshold_hitting(UNIT, -1.0, 1.0, PathConfig(0.1, 10, 5))

    @pytest.mark.parametrize("kind", ["fixed", "exp", "competing", "trauma"])
    def test_worker_count_does_not_change_results(self, kind):
        cfg = PathConfig.for_horizon(1.0, 1e-2, 37, seed=99)
        calls = {
            "fixed": lambda w: hitting_curve(UNIT, [0.5, 1.0], cfg, x=0.8, workers=w),
            "exp": lambda w: hitting_curve(UNIT, [0.5, 1.0], cfg, workers=w),
            "competing": lambda w: competing_survival_curve(0.4, [0.5, 1.0], cfg, workers=w),
            "trauma": lambda w: trauma_survival_curve([0.5, 1.0], 1.5, cfg, workers=w),
        }[kind]
        assert calls(1) == calls(3)

    def test_substreams_are_distinct(self):
        a = path_rng(1, 0, 0).standard_normal(4)
        b = path_rng(1, 0, 1).standard_normal(4)
        c = path_rng(1, 1, 0).standard_normal(4)
        d = path_rng(2, 0, 0).standard_normal(4)
        assert len({tuple(v) for v in (a, b, c, d)}) == 4
