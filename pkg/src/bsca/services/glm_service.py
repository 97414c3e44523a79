"""Maximum-likelihood fitting of Gaussian and logistic regressions."""

import logging

import numpy as np
from scipy import linalg
from scipy.special import expit

from bsca.config import settings
from bsca.exceptions import (
    InsufficientDataError,
    NonConvergenceError,
    SeparationError,
    SingularDesignError,
)
from bsca.models.data import Family
from bsca.models.fit import GlmFit

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


def _check_shape(y: np.ndarray, X: np.ndarray) -> tuple[int, int]:
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"Response of shape {y.shape} does not match {n} design rows")
    if n <= k:
        raise InsufficientDataError(f"{n} rows are not enough for {k} columns")
    return n, k


def _qr_full_rank(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization, rejecting rank-deficient designs."""
    q, r = linalg.qr(X, mode="economic")
    diagonal = np.abs(np.diag(r))
    tolerance = max(X.shape) * np.finfo(float).eps * (diagonal.max() if diagonal.size else 0.0)
    if diagonal.size and diagonal.min() <= tolerance:
        raise SingularDesignError(
            f"Design with {X.shape[1]} columns is not of full column rank"
        )
    return q, r


def fit_gaussian(y: np.ndarray, X: np.ndarray) -> GlmFit:
    """Least-squares fit of a Gaussian linear model.

    The dispersion is the MLE RSS / n, so that the log-likelihood and the EBIC
    are consistent. A zero residual sum of squares is flagged as degenerate.

    Args:
        y: Response vector of length n
        X: n x k design submatrix

    Returns:
        Fit with covariance phi (X'X)^-1

    Raises:
        InsufficientDataError: If n <= k
        SingularDesignError: If X is rank deficient
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = _check_shape(y, X)
    q, r = _qr_full_rank(X)
    coefficients = linalg.solve_triangular(r, q.T @ y)
    residuals = y - X @ coefficients
    rss = float(residuals @ residuals)
    dispersion = rss / n
    r_inverse = linalg.solve_triangular(r, np.eye(k))
    unscaled = r_inverse @ r_inverse.T

    if rss <= n * (1e-10 * max(1.0, float(np.abs(y).max()))) ** 2:
        logger.warning("Gaussian fit has zero residual variance; flagged as degenerate")
        return GlmFit(
            family=Family.GAUSSIAN,
            coefficients=coefficients,
            covariance=np.zeros((k, k)),
            loglik=np.inf,
            dispersion=0.0,
            n=n,
            k=k,
            degenerate=True,
        )

    return GlmFit(
        family=Family.GAUSSIAN,
        coefficients=coefficients,
        covariance=dispersion * unscaled,
        loglik=_gaussian_loglik(rss, n),
        dispersion=dispersion,
        n=n,
        k=k,
    )


def _gaussian_loglik(rss: float, n: int) -> float:
    """Normal log-likelihood profiled at phi = rss / n."""
    return -0.5 * n * (_LOG_2PI + np.log(rss / n) + 1.0)


def _logistic_loglik(y: np.ndarray, eta: np.ndarray) -> float:
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def fit_logistic(
    y: np.ndarray,
    X: np.ndarray,
    max_iter: int | None = None,
    tol: float | None = None,
    separation_threshold: float | None = None,
) -> GlmFit:
    """Logistic regression by Newton-Raphson (IRLS) with step halving.

    Iterates until the gradient max-norm drops below ``tol``. A coefficient
    max-norm above ``separation_threshold`` is treated as complete or
    quasi-complete separation.

    Args:
        y: Binary response
        X: n x k design submatrix
        max_iter: Iteration budget (settings.irls_max_iter)
        tol: Gradient tolerance (settings.irls_tol)
        separation_threshold: Divergence threshold (settings.separation_threshold)

    Returns:
        Fit with covariance equal to the inverse observed information

    Raises:
        InsufficientDataError: If n <= k
        SingularDesignError: If X is rank deficient
        SeparationError: If coefficients diverge
        NonConvergenceError: If the iteration budget is exhausted
    """
    max_iter = settings.irls_max_iter if max_iter is None else max_iter
    tol = settings.irls_tol if tol is None else tol
    separation_threshold = (
        settings.separation_threshold if separation_threshold is None else separation_threshold
    )

    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = _check_shape(y, X)
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("Logistic response must be binary")
    _qr_full_rank(X)

    beta = np.zeros(k)
    eta = X @ beta
    loglik = _logistic_loglik(y, eta)
    trace: list[float] = []

    for iteration in range(1, max_iter + 1):
        prob = expit(eta)
        gradient = X.T @ (y - prob)
        trace.append(float(np.abs(gradient).max()))
        if trace[-1] < tol:
            return _logistic_fit(y, X, beta, eta, loglik, iteration - 1)

        information = (X * (prob * (1.0 - prob))[:, None]).T @ X
        try:
            step = linalg.solve(information, gradient, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as error:
            raise SeparationError(
                "Observed information became singular; fitted probabilities saturated"
            ) from error

        # Halve the step until the log-likelihood does not decrease.
        for _ in range(30):
            candidate = beta + step
            candidate_eta = X @ candidate
            candidate_loglik = _logistic_loglik(y, candidate_eta)
            if candidate_loglik >= loglik - 1e-12 * abs(loglik):
                break
            step = step / 2.0
        else:
            raise NonConvergenceError(
                trace, f"No ascent step found after {len(trace)} IRLS iterations"
            )
        beta, eta, loglik = candidate, candidate_eta, candidate_loglik
        logger.debug(f"IRLS iteration {iteration}: loglik={loglik:.6f}, grad={trace[-1]:.3e}")

        if np.abs(beta).max() > separation_threshold:
            raise SeparationError(
                f"Coefficient max-norm {np.abs(beta).max():.1f} exceeds "
                f"{separation_threshold}; the outcome is separated"
            )

    prob = expit(eta)
    gradient = X.T @ (y - prob)
    if np.abs(gradient).max() < tol:
        return _logistic_fit(y, X, beta, eta, loglik, max_iter)
    trace.append(float(np.abs(gradient).max()))
    raise NonConvergenceError(trace)


def _logistic_fit(y, X, beta, eta, loglik, iterations) -> GlmFit:
    prob = expit(eta)
    information = (X * (prob * (1.0 - prob))[:, None]).T @ X
    try:
        covariance = linalg.inv(information, check_finite=True)
    except linalg.LinAlgError as error:
        raise SeparationError("Observed information is singular at the estimate") from error
    covariance = (covariance + covariance.T) / 2.0
    return GlmFit(
        family=Family.BINOMIAL,
        coefficients=beta,
        covariance=covariance,
        loglik=loglik,
        n=X.shape[0],
        k=X.shape[1],
        converged=True,
        iterations=iterations,
    )


def fit(y: np.ndarray, X: np.ndarray, family: Family) -> GlmFit:
    """Fit the GLM of the given family."""
    if family is Family.BINOMIAL:
        return fit_logistic(y, X)
    return fit_gaussian(y, X)


def loglik_at(
    y: np.ndarray, X: np.ndarray, coefficients: np.ndarray, family: Family
) -> float:
    """Exact log-likelihood at given coefficients.

    For the Gaussian family the dispersion is profiled at its conditional MLE
    (RSS / n at these coefficients).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    coefficients = np.asarray(coefficients, dtype=float)
    if X.shape != (len(y), len(coefficients)):
        raise ValueError(
            f"Design {X.shape} does not match {len(y)} rows and "
            f"{len(coefficients)} coefficients"
        )
    eta = X @ coefficients
    if family is Family.BINOMIAL:
        return _logistic_loglik(y, eta)
    residuals = y - eta
    return float(_gaussian_loglik(float(residuals @ residuals), len(y)))


def logistic_gradient(y: np.ndarray, X: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Analytic score of the logistic log-likelihood."""
    return X.T @ (np.asarray(y, dtype=float) - expit(X @ coefficients))
