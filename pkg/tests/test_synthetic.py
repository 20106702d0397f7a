import math

import numpy as np
import pytest
from scipy import special

from ensemble_tcl import DecisionConfig, EnsembleError, ModelSpec, analytic_optimal_labels, simulate
from ensemble_tcl.synthetic import SyntheticDataset, gamma_posterior, normal_posterior, unit_rng


def grid_moments(log_density, lo, hi, points=200_001):
    """Mean and variance of an unnormalised density by the trapezoid rule."""
    x = np.linspace(lo, hi, points)
    logw = log_density(x)
    w = np.exp(logw - logw.max())
    z = np.trapezoid(w, x)
    mean = np.trapezoid(x * w, x) / z
    return mean, np.trapezoid((x - mean) ** 2 * w, x) / z


def bisect_gamma_quantile(shape, rate, q, tol=1e-14):
    """Invert the regularised lower incomplete gamma function by bisection."""
    lo, hi = 0.0, 1.0
    while special.gammainc(shape, hi * rate) < q:
        hi *= 2
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if special.gammainc(shape, mid * rate) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_dataset(kind, a, b, S=10) -> SyntheticDataset:
    """Dataset with a single unit whose posterior parameters are given."""
    spec = ModelSpec(kind, 1, seed=0)
    d = simulate(spec, S)
    return SyntheticDataset(spec, d.truth, d.observations, d.posterior, np.array([a]), np.array([b]))


class TestConjugateUpdates:
    def test_normal_example(self):
        mean, var = normal_posterior(0.0, 1.0, 1.0, 2.0)
        assert (mean, var) == (1.0, 0.5)
        g_mean, g_var = grid_moments(lambda t: -0.5 * t**2 - 0.5 * (2.0 - t) ** 2, -12, 12)
        assert g_mean == pytest.approx(mean, abs=1e-8)
        assert g_var == pytest.approx(var, abs=1e-8)

    def test_gamma_example(self):
        shape, rate = gamma_posterior(2.0, 1.0, 1.0, 3.0)
        assert (shape, rate) == (5.0, 2.0)
        # prior θ^(a-1) e^(-bθ) times likelihood (Eθ)^y e^(-Eθ)
        log_post = lambda t: (2.0 - 1) * np.log(t) - t + 3.0 * np.log(t) - t  # noqa: E731
        g_mean, g_var = grid_moments(log_post, 1e-12, 60)
        assert g_mean == pytest.approx(shape / rate, abs=1e-7) == pytest.approx(2.5)
        assert g_var == pytest.approx(shape / rate**2, abs=1e-7)

    def test_complete_shrinkage(self):
        d = simulate(ModelSpec("normal-normal", 20, {"mu0": 3.0, "tau2": 1e-12, "sigma2": 4.0}, 5), 5)
        np.testing.assert_allclose(d.posterior_mean(), 3.0, atol=1e-5)


class TestAnalytic:
    def test_gamma_quantiles_against_bisection(self):
        d = fixed_dataset("poisson-gamma", 5.0, 2.0)
        for q in (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99):
            assert d.analytic_quantile(q)[0] == pytest.approx(bisect_gamma_quantile(5.0, 2.0, q), rel=1e-10)

    def test_normal_quantiles(self):
        d = fixed_dataset("normal-normal", 1.0, 0.5)
        for q in (0.1, 0.5, 0.9):
            z = math.sqrt(2) * special.erfinv(2 * q - 1)
            assert d.analytic_quantile(q)[0] == pytest.approx(1.0 + math.sqrt(0.5) * z, abs=1e-12)

    def test_label_examples(self):
        d = fixed_dataset("normal-normal", 1.0, 0.5)
        assert analytic_optimal_labels(d, DecisionConfig(1.0, 0.5)).tolist() == [False]
        d = fixed_dataset("normal-normal", 0.0, 1.0)
        assert analytic_optimal_labels(d, DecisionConfig(-10.0, 0.5)).tolist() == [True]
        d = fixed_dataset("poisson-gamma", 5.0, 2.0)
        median = bisect_gamma_quantile(5.0, 2.0, 0.5)
        assert median < 2.5  # gamma median sits below the mean
        assert analytic_optimal_labels(d, DecisionConfig(2.5, 0.5)).tolist() == [median > 2.5]

    def test_prob_above(self):
        d = fixed_dataset("poisson-gamma", 5.0, 2.0)
        assert d.analytic_prob_above(bisect_gamma_quantile(5.0, 2.0, 0.3))[0] == pytest.approx(0.7, abs=1e-10)
        assert d.analytic_prob_above(-1.0)[0] == 1.0


class TestSimulate:
    def test_reproducible(self):
        spec = ModelSpec("poisson-gamma", 6, {"shape": 3.0, "rate": 2.0, "exposure": [1, 2, 3, 4, 5, 6]}, 99)
        a, b = simulate(spec, 50), simulate(spec, 50)
        assert a.posterior == b.posterior
        assert np.array_equal(a.truth, b.truth) and np.array_equal(a.observations, b.observations)

    def test_substreams_independent_of_n(self):
        small = simulate(ModelSpec("normal-normal", 3, seed=11), 20)
        large = simulate(ModelSpec("normal-normal", 9, seed=11), 20)
        np.testing.assert_array_equal(small.posterior.draws, large.posterior.draws[:3])
        np.testing.assert_array_equal(small.truth, large.truth[:3])

    def test_parallel_generation_matches(self):
        from concurrent.futures import ThreadPoolExecutor

        def unit(i):
            return unit_rng(42, i).normal(size=5)

        with ThreadPoolExecutor(4) as pool:
            par = list(pool.map(unit, range(8)))
        seq = [unit(i) for i in range(8)]
        assert all(np.array_equal(x, y) for x, y in zip(par, seq))

    def test_seed_changes_output(self):
        a = simulate(ModelSpec("normal-normal", 2, seed=1), 10)
        b = simulate(ModelSpec("normal-normal", 2, seed=2), 10)
        assert a.posterior != b.posterior

    def test_poisson_observations_are_counts(self):
        d = simulate(ModelSpec("poisson-gamma", 30, seed=3), 10)
        assert np.all(d.observations == np.round(d.observations)) and np.all(d.observations >= 0)
        np.testing.assert_array_equal(d.post_a, 2.0 + d.observations)
        np.testing.assert_array_equal(d.post_b, 2.0)

    @pytest.mark.parametrize(
        "kind,n,hyper,S",
        [
            ("normal-normal", 0, {}, 10),
            ("normal-normal", 3, {"tau2": 0.0}, 10),
            ("normal-normal", 3, {"sigma2": [1.0, -1.0, 1.0]}, 10),
            ("normal-normal", 3, {"sigma2": [1.0, 1.0]}, 10),
            ("normal-normal", 3, {"shape": 1.0}, 10),
            ("poisson-gamma", 3, {"rate": -2.0}, 10),
            ("poisson-gamma", 3, {"exposure": 0.0}, 10),
            ("poisson-gamma", 3, {}, 0),
            ("lognormal", 3, {}, 10),
        ],
    )
    def test_invalid(self, kind, n, hyper, S):
        with pytest.raises(EnsembleError):
            simulate(ModelSpec(kind, n, hyper, 1), S)

    def test_empirical_moments(self):
        d = simulate(ModelSpec("poisson-gamma", 4, seed=8), 200_000)
        np.testing.assert_allclose(d.posterior.draws.mean(axis=1), d.posterior_mean(), rtol=0.01)
        np.testing.assert_allclose(d.posterior.draws.std(axis=1), d.posterior_sd(), rtol=0.01)
