import numpy as np
import pytest

from skillcomp.distributions import uniform_weights, zipf_weights
from skillcomp.learner import DivergenceError, StepSizeWarning, random_sign_vector, stability_step_bound
from skillcomp.population import (
    default_num_steps,
    hessian_opnorm_bound,
    pl_ratios,
    population_gd_state,
    population_gd_trajectory,
    population_gradient,
    population_loss,
    weighted_norm_sq,
    weighted_overlap,
)
from skillcomp.rng import make_rng

from oracles import central_difference_gradient, enumerate_population


class TestSufficientStats:
    def test_overlap_values(self):
        p = np.array([2 / 3, 1 / 3])
        wstar = np.ones(2)
        assert weighted_overlap(wstar, wstar, p) == pytest.approx(1.0)
        assert weighted_overlap(np.zeros(2), wstar, p) == 0.0
        assert weighted_overlap(np.array([1.0, 0.0]), wstar, p) == pytest.approx(2 / 3)

    def test_norm_values(self):
        p = np.array([2 / 3, 1 / 3])
        assert weighted_norm_sq(np.array([1.0, -1.0]), p) == pytest.approx(1.0)
        assert weighted_norm_sq(np.zeros(2), p) == 0.0
        assert weighted_norm_sq(np.array([1.0, 0.0]), p) == pytest.approx(2 / 3)

    def test_cauchy_schwarz(self):
        rng = make_rng(0, "cs")
        for _ in range(50):
            d = int(rng.integers(1, 8))
            p = rng.dirichlet(np.ones(d))
            w = rng.normal(size=d)
            wstar = random_sign_vector(d, rng)
            a = weighted_overlap(w, wstar, p)
            assert weighted_norm_sq(w, p) >= a * a - 1e-12


class TestClosedForms:
    def test_loss_examples(self):
        p = np.array([2 / 3, 1 / 3])
        wstar = np.ones(2)
        assert population_loss(wstar, wstar, p, 2) == 0.0
        assert population_loss(np.zeros(2), wstar, p, 2) == 0.5
        assert population_loss(np.array([1.0, 0.0]), wstar, p, 2) == pytest.approx(5 / 18)

    def test_rejects_non_sign_truth(self):
        with pytest.raises(ValueError):
            population_loss(np.ones(2), np.array([1.0, 0.5]), np.array([0.5, 0.5]), 2)

    def test_gradient_examples(self):
        p = np.array([2 / 3, 1 / 3])
        wstar = np.ones(2)
        assert np.all(population_gradient(wstar, wstar, p, 2) == 0.0)
        assert np.all(population_gradient(np.zeros(2), wstar, p, 3) == 0.0)
        np.testing.assert_allclose(
            population_gradient(np.array([1.0, 0.0]), wstar, p, 2), [0.0, -4 / 9], atol=1e-15
        )

    def test_gradient_matches_loss_derivative(self):
        p = zipf_weights(4, 1.0)
        wstar = random_sign_vector(4, make_rng(1, "w"))
        w = make_rng(1, "x").normal(size=4)
        got = population_gradient(w, wstar, p, 3)
        want = central_difference_gradient(lambda v: population_loss(v, wstar, p, 3), w)
        np.testing.assert_allclose(got, want, rtol=1e-7, atol=1e-9)

    def test_matches_enumeration(self):
        rng = make_rng(2, "enum")
        for _ in range(25):
            d = int(rng.integers(2, 7))
            k = int(rng.integers(1, 5))
            p = rng.dirichlet(np.ones(d))
            wstar = random_sign_vector(d, rng)
            w = rng.normal(size=d)
            loss, grad = enumerate_population(w, wstar, p, k)
            assert abs(population_loss(w, wstar, p, k) - loss) <= 1e-10
            np.testing.assert_allclose(population_gradient(w, wstar, p, k), grad, atol=1e-10)


class TestHessianBound:
    def test_universal_cap_value(self):
        p = uniform_weights(4)
        b = hessian_opnorm_bound(np.ones(4) * 0.5, np.ones(4), p, 2)
        assert b.universal == pytest.approx(12 * np.linalg.norm(p))

    def test_explicit_value_at_truth(self):
        p = uniform_weights(4)
        wstar = np.ones(4)
        b = hessian_opnorm_bound(wstar, wstar, p, 2)
        assert b.explicit == pytest.approx(3.5)
        assert b.stable and not b.degenerate

    def test_bound_dominates_exact_hessian(self):
        # numerically diagonalized exact Hessian via finite differences of the gradient
        p = uniform_weights(4)
        wstar = np.ones(4)
        h = 1e-6
        hess = np.empty((4, 4))
        for j in range(4):
            hi, lo = wstar.copy(), wstar.copy()
            hi[j] += h
            lo[j] -= h
            hess[:, j] = (
                population_gradient(hi, wstar, p, 2) - population_gradient(lo, wstar, p, 2)
            ) / (2 * h)
        opnorm = np.abs(np.linalg.eigvalsh(0.5 * (hess + hess.T))).max()
        bound = hessian_opnorm_bound(wstar, wstar, p, 2)
        assert opnorm <= bound.value + 1e-6
        assert bound.value <= bound.universal

    def test_linear_in_weight_factors(self):
        # the explicit expression is degree-1 in the pair (p_max, ||p||^2)
        k, a = 4, 0.8
        term = lambda p_max, p_sq: 2 * k * (2 * k - 1) * p_max * a ** (k - 1) + k * (
            k - 1
        ) * p_sq * a ** (k - 2)
        assert term(0.5, 0.3) * 2 == pytest.approx(term(1.0, 0.6))

    def test_degenerate_flag(self):
        p = uniform_weights(3)
        b = hessian_opnorm_bound(np.zeros(3), np.ones(3), p, 3)
        assert b.degenerate and b.value == b.universal


class TestTrajectory:
    def test_constant_at_truth(self):
        p = zipf_weights(5, 1.0)
        wstar = random_sign_vector(5, make_rng(3, "w"))
        log = population_gd_trajectory(wstar, wstar, p, 3, 0.01, 50)
        assert np.all(log.loss == 0.0)
        np.testing.assert_array_equal(log.final_w, wstar)

    def test_stuck_at_origin(self):
        p = zipf_weights(5, 1.5)
        wstar = np.ones(5)
        log = population_gd_trajectory(np.zeros(5), wstar, p, 4, 0.01, 50)
        assert np.all(log.loss == 0.5)
        assert np.all(log.grad_norm == 0.0)

    def test_monotone_descent_within_stability(self):
        rng = make_rng(4, "mono")
        for _ in range(10):
            d = int(rng.integers(3, 20))
            k = int(rng.integers(2, 5)) * 2
            p = zipf_weights(d, float(rng.uniform(0.5, 2.0)))
            wstar = random_sign_vector(d, rng)
            w0 = 0.3 * rng.standard_normal(d)
            eta = stability_step_bound(k, p)
            log = population_gd_trajectory(w0, wstar, p, k, eta, 300)
            assert np.all(np.diff(log.loss) <= 1e-12)

    def test_overlap_lower_bound_in_stable_regime(self):
        d, k = 50, 4
        p = zipf_weights(d, 1.5)
        wstar = random_sign_vector(d, make_rng(0, "wstar"))
        w0 = 0.1 * make_rng(0, "init").standard_normal(d)
        log = population_gd_trajectory(w0, wstar, p, k, stability_step_bound(k, p) / 2, 20_000)
        floor = 2 ** (-1 / k) * abs(log.overlap[0])
        assert np.all(np.abs(log.overlap) >= floor - 1e-9)

    def test_logged_stats_match_recomputation(self):
        d, k = 12, 3
        p = zipf_weights(d, 1.0)
        wstar = random_sign_vector(d, make_rng(5, "w"))
        w0 = 0.2 * make_rng(5, "init").standard_normal(d)
        log = population_gd_trajectory(
            w0, wstar, p, k, 0.02, 200, checkpoint_every=10, log_every=1
        )
        for step, w in zip(log.checkpoint_steps, log.checkpoints):
            i = int(np.searchsorted(log.step, step))
            assert abs(log.overlap[i] - weighted_overlap(w, wstar, p)) <= 1e-12
            assert abs(log.norm_sq[i] - weighted_norm_sq(w, p)) <= 1e-12
            assert abs(log.loss[i] - population_loss(w, wstar, p, k)) <= 1e-12

    def test_rerun_matches_checkpoints_exactly(self):
        d, k = 10, 4
        p = zipf_weights(d, 1.2)
        wstar = random_sign_vector(d, make_rng(6, "w"))
        w0 = 0.2 * make_rng(6, "init").standard_normal(d)
        eta = stability_step_bound(k, p) / 2
        log = population_gd_trajectory(w0, wstar, p, k, eta, 500, checkpoint_every=100)
        for step, w in zip(log.checkpoint_steps, log.checkpoints):
            np.testing.assert_array_equal(population_gd_state(w0, wstar, p, k, eta, step), w)

    def test_stationary_gradients_exact_zero(self):
        p = zipf_weights(8, 1.5)
        wstar = random_sign_vector(8, make_rng(7, "w"))
        for w in (np.zeros(8), wstar, -wstar):
            assert np.linalg.norm(population_gradient(w, wstar, p, 4)) == 0.0

    def test_step_size_warning(self):
        p = uniform_weights(4)
        with pytest.warns(StepSizeWarning):
            population_gd_trajectory(0.1 * np.ones(4), np.ones(4), p, 2, 10.0, 5)

    @pytest.mark.filterwarnings("ignore::skillcomp.learner.StepSizeWarning")
    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_divergence_reports_step(self):
        p = uniform_weights(3)
        with pytest.raises(DivergenceError) as err:
            population_gd_trajectory(5.0 * np.ones(3), np.ones(3), p, 6, 50.0, 100)
        assert err.value.step >= 1

    def test_targets_and_early_stop(self):
        d, k = 20, 4
        p = zipf_weights(d, 1.5)
        wstar = random_sign_vector(d, make_rng(0, "wstar"))
        w0 = 0.1 * make_rng(0, "init").standard_normal(d)
        log = population_gd_trajectory(
            w0, wstar, p, k, stability_step_bound(k, p) / 2, 200_000,
            loss_target=1e-6, recovery_target=1e-2, stop_at_targets=True,
        )
        assert log.steps_to_loss_target is not None
        assert log.steps_to_recovery_target is not None
        assert log.step[-1] == max(log.steps_to_loss_target, log.steps_to_recovery_target)
        assert log.loss[-1] <= 1e-6 and log.recovery[-1] <= 1e-2


class TestPLRatios:
    def test_floor_skipped(self):
        ratios = pl_ratios(np.array([0.0, 1e-16, 0.1]), np.ones(3), np.full(3, 0.5), 0.1, 2)
        assert np.isnan(ratios[0]) and np.isnan(ratios[1]) and np.isfinite(ratios[2])

    def test_default_num_steps_positive(self):
        p = zipf_weights(10, 1.0)
        t = default_num_steps(0.01, 4, p, a0=0.05, l0=0.5, eps_target=1e-8)
        assert 1 <= t <= 10_000_000
        assert default_num_steps(0.01, 4, p, a0=0.05, l0=1e-9, eps_target=1e-8) == 1
