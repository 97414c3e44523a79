from unittest import mock

import numpy as np
import pytest

from bsca.exceptions import (
    InsufficientDataError,
    NonConvergenceError,
    SeparationError,
    SingularDesignError,
)
from bsca.models.data import Family
from bsca.services import glm_service


def _design(rng, n: int, k: int) -> np.ndarray:
    return np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))])


class TestGaussian:
    """Tests for least-squares fits."""

    def test_noiseless_response_is_recovered_and_flagged(self, rng):
        X = _design(rng, 50, 3)
        coefficients = np.array([1.0, -2.0, 0.5])
        fit = glm_service.fit_gaussian(X @ coefficients, X)
        np.testing.assert_allclose(fit.coefficients, coefficients, atol=1e-10)
        assert fit.degenerate
        assert fit.dispersion == 0.0

    def test_intercept_only_is_the_mean(self, rng):
        y = rng.standard_normal(30) + 4.0
        fit = glm_service.fit_gaussian(y, np.ones((30, 1)))
        assert fit.coefficients[0] == pytest.approx(y.mean(), abs=1e-12)

    def test_matches_normal_equations(self, rng):
        for _ in range(5):
            X = _design(rng, 80, 4)
            y = X @ rng.standard_normal(4) + rng.standard_normal(80)
            fit = glm_service.fit_gaussian(y, X)
            expected = np.linalg.solve(X.T @ X, X.T @ y)
            np.testing.assert_allclose(fit.coefficients, expected, atol=1e-8)
            residuals = y - X @ expected
            assert fit.dispersion == pytest.approx(residuals @ residuals / 80)
            np.testing.assert_allclose(
                fit.covariance, fit.dispersion * np.linalg.inv(X.T @ X), rtol=1e-8
            )

    def test_duplicated_column(self, rng):
        X = _design(rng, 20, 2)
        X = np.column_stack([X, X[:, 1]])
        with pytest.raises(SingularDesignError):
            glm_service.fit_gaussian(rng.standard_normal(20), X)

    def test_too_few_rows(self, rng):
        with pytest.raises(InsufficientDataError):
            glm_service.fit_gaussian(rng.standard_normal(3), _design(rng, 3, 3))


class TestLogistic:
    """Tests for the Newton-Raphson logistic fit."""

    def test_intercept_only_is_the_logit_of_the_share(self):
        y = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0], dtype=float)
        fit = glm_service.fit_logistic(y, np.ones((10, 1)))
        assert fit.coefficients[0] == pytest.approx(np.log(3 / 7), abs=1e-8)
        assert fit.converged

    def test_independent_response_has_small_slope(self, rng):
        X = _design(rng, 5000, 2)
        y = (rng.random(5000) < 0.4).astype(float)
        fit = glm_service.fit_logistic(y, X)
        assert abs(fit.coefficients[1]) < 3 * fit.standard_errors[1]

    def test_separated_response(self):
        x = np.linspace(-1.0, 1.0, 40)
        X = np.column_stack([np.ones(40), x])
        with pytest.raises(SeparationError):
            glm_service.fit_logistic((x > 0).astype(float), X)

    def test_iteration_budget(self, rng):
        X = _design(rng, 200, 3)
        y = (rng.random(200) < 0.5).astype(float)
        with pytest.raises(NonConvergenceError) as error:
            glm_service.fit_logistic(y, X, max_iter=1, tol=1e-300)
        assert len(error.value.trace) == 2
        assert error.value.details() == {"trace": error.value.trace}

    def test_zero_tolerance_is_honoured(self, rng):
        X = _design(rng, 200, 2)
        y = (rng.random(200) < 0.5).astype(float)
        with pytest.raises(NonConvergenceError):
            glm_service.fit_logistic(y, X, max_iter=3, tol=0.0)

    def test_step_halving_without_ascent(self, rng):
        X = _design(rng, 50, 2)
        y = (rng.random(50) < 0.8).astype(float)
        with mock.patch.object(
            glm_service, "_logistic_loglik", side_effect=[0.0] + [-1.0] * 30
        ):
            with pytest.raises(NonConvergenceError) as error:
                glm_service.fit_logistic(y, X)
        assert len(error.value.trace) == 1

    def test_fit_dispatches_on_family(self, rng):
        X = _design(rng, 100, 2)
        y = (rng.random(100) < 0.5).astype(float)
        assert glm_service.fit(y, X, Family.BINOMIAL).family is Family.BINOMIAL
        assert glm_service.fit(y, X, Family.GAUSSIAN).family is Family.GAUSSIAN


class TestLoglik:
    """Tests for log-likelihood evaluation."""

    def test_logistic_at_half(self):
        X = np.ones((4, 1))
        y = np.array([0.0, 1.0, 1.0, 0.0])
        value = glm_service.loglik_at(y, X, np.zeros(1), Family.BINOMIAL)
        assert value == pytest.approx(4 * np.log(0.5))

    @pytest.mark.parametrize("family", [Family.GAUSSIAN, Family.BINOMIAL])
    def test_mle_consistency_and_optimality(self, rng, family):
        X = _design(rng, 300, 3)
        eta = X @ np.array([0.2, 0.8, -0.5])
        if family is Family.BINOMIAL:
            y = (rng.random(300) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
        else:
            y = eta + rng.standard_normal(300)
        fit = glm_service.fit(y, X, family)
        at_mle = glm_service.loglik_at(y, X, fit.coefficients, family)
        assert at_mle == pytest.approx(fit.loglik, abs=1e-8)
        perturbed = fit.coefficients + np.array([0.0, 0.05, 0.0])
        assert glm_service.loglik_at(y, X, perturbed, family) < at_mle

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError):
            glm_service.loglik_at(np.zeros(3), np.ones((3, 2)), np.zeros(1), Family.GAUSSIAN)

    def test_gradient_matches_finite_differences(self, rng):
        step = 1e-6
        for _ in range(20):
            n, k = int(rng.integers(30, 200)), int(rng.integers(1, 5))
            X = _design(rng, n, k)
            y = (rng.random(n) < 0.5).astype(float)
            beta = rng.normal(scale=0.5, size=k)
            numeric = np.array(
                [
                    (
                        glm_service.loglik_at(y, X, beta + step * unit, Family.BINOMIAL)
                        - glm_service.loglik_at(y, X, beta - step * unit, Family.BINOMIAL)
                    )
                    / (2 * step)
                    for unit in np.eye(k)
                ]
            )
            analytic = glm_service.logistic_gradient(y, X, beta)
            error = np.abs(analytic - numeric).max() / max(np.abs(analytic).max(), 1.0)
            assert error < 1e-4


class TestInvariances:
    """Fits do not depend on column order or column scale."""

    @pytest.mark.parametrize("family", [Family.GAUSSIAN, Family.BINOMIAL])
    def test_column_order(self, rng, family):
        X = _design(rng, 400, 4)
        eta = X @ np.array([0.3, 0.7, -0.4, 0.0])
        if family is Family.BINOMIAL:
            y = (rng.random(400) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
        else:
            y = eta + rng.standard_normal(400)
        order = np.array([2, 0, 3, 1])
        fit = glm_service.fit(y, X, family)
        permuted = glm_service.fit(y, X[:, order], family)
        np.testing.assert_allclose(permuted.coefficients, fit.coefficients[order], atol=1e-8)
        np.testing.assert_allclose(
            permuted.covariance, fit.covariance[np.ix_(order, order)], atol=1e-8
        )
        assert permuted.loglik == pytest.approx(fit.loglik, abs=1e-8)

    @pytest.mark.parametrize("family", [Family.GAUSSIAN, Family.BINOMIAL])
    @pytest.mark.parametrize("scale", [0.1, 3.0, 250.0])
    def test_column_rescaling(self, rng, family, scale):
        X = _design(rng, 400, 3)
        eta = X @ np.array([0.2, 0.6, -0.3])
        if family is Family.BINOMIAL:
            y = (rng.random(400) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
        else:
            y = eta + rng.standard_normal(400)
        rescaled = X.copy()
        rescaled[:, 1] *= scale
        fit = glm_service.fit(y, X, family)
        scaled_fit = glm_service.fit(y, rescaled, family)
        assert scaled_fit.coefficients[1] == pytest.approx(fit.coefficients[1] / scale, rel=1e-6)
        np.testing.assert_allclose(scaled_fit.coefficients[[0, 2]], fit.coefficients[[0, 2]])
        assert scaled_fit.loglik == pytest.approx(fit.loglik, abs=1e-8)
