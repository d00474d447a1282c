import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import linalg
from scipy.spatial.distance import cdist, pdist, squareform

logger = logging.getLogger(__name__)

# sigma_n^2 >= NOISE_FLOOR * sigma_f^2
NOISE_FLOOR = 1e-8
_LOG_NOISE_FLOOR = float(np.log(NOISE_FLOOR))

JITTER_START = 1e-10
JITTER_MAX = 1e-4


class NumericalConditioningError(np.linalg.LinAlgError):
    """Raised when a covariance matrix stays non-PD after jitter escalation."""


class Hyperparameters(BaseModel):
    """Squared-exponential hyperparameters, stored as logs."""

    model_config = ConfigDict(frozen=True)

    log_lengthscale: float = 0.0
    log_signal_variance: float = 0.0
    log_noise_variance: float = float(np.log(1e-3))

    @model_validator(mode="before")
    @classmethod
    def _apply_noise_floor(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            log_sf = float(data.get("log_signal_variance", 0.0))
            log_sn = float(data.get("log_noise_variance", np.log(1e-3)))
            data["log_noise_variance"] = max(log_sn, log_sf + _LOG_NOISE_FLOOR)
        return data

    @model_validator(mode="after")
    def _check_finite(self):
        for name, value in (
            ("lengthscale", self.lengthscale),
            ("signal_variance", self.signal_variance),
            ("noise_variance", self.noise_variance),
        ):
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        return self

    @property
    def lengthscale(self) -> float:
        return float(np.exp(self.log_lengthscale))

    @property
    def signal_variance(self) -> float:
        return float(np.exp(self.log_signal_variance))

    @property
    def noise_variance(self) -> float:
        return float(np.exp(self.log_noise_variance))

    @property
    def noise_at_floor(self) -> bool:
        return self.log_noise_variance <= self.log_signal_variance + _LOG_NOISE_FLOOR

    def as_vector(self) -> np.ndarray:
        return np.array([self.log_lengthscale, self.log_signal_variance, self.log_noise_variance])

    @classmethod
    def from_vector(cls, theta) -> "Hyperparameters":
        theta = np.asarray(theta, dtype=float)
        return cls(
            log_lengthscale=float(theta[0]),
            log_signal_variance=float(theta[1]),
            log_noise_variance=float(theta[2]),
        )


def as_points(X) -> np.ndarray:
    """Coerce a point list to an (n, d) float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1)
    elif X.ndim != 2:
        raise ValueError(f"Expected a point list of shape (n, d), got shape {X.shape}")
    return X


def se_covariance(x, x_prime, hyper: Hyperparameters, same_point: bool = False) -> float:
    """Squared-exponential covariance between two points, plus noise when same_point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape or x.ndim != 1:
        raise ValueError(f"Dimension mismatch: {x.shape} vs {x_prime.shape}")
    r2 = float(np.sum((x - x_prime) ** 2))
    value = hyper.signal_variance * np.exp(-r2 / (2.0 * hyper.lengthscale**2))
    if same_point:
        value += hyper.noise_variance
    return float(value)


def _squared_distances(X: np.ndarray, X_prime: np.ndarray, same: bool) -> np.ndarray:
    if same:
        # squareform keeps the matrix exactly symmetric with a zero diagonal
        return squareform(pdist(X, "sqeuclidean")) if len(X) > 1 else np.zeros((1, 1))
    return cdist(X, X_prime, "sqeuclidean")


def covariance_matrix(X, X_prime, hyper: Hyperparameters, add_noise: bool = False) -> np.ndarray:
    """Assemble K(X, X'); sigma_n^2 goes on the diagonal only when add_noise."""
    X = as_points(X)
    X_prime = as_points(X_prime)
    if X.shape[1] != X_prime.shape[1]:
        raise ValueError(f"Dimension mismatch: d={X.shape[1]} vs d={X_prime.shape[1]}")
    same = X is X_prime or (X.shape == X_prime.shape and np.array_equal(X, X_prime))
    if add_noise and not same:
        raise ValueError("add_noise is only valid when X and X_prime are the same point set")

    r2 = _squared_distances(X, X_prime, same)
    K = hyper.signal_variance * np.exp(-r2 / (2.0 * hyper.lengthscale**2))
    if add_noise:
        K[np.diag_indices_from(K)] += hyper.noise_variance
    return K


def kernel_gradients(X, hyper: Hyperparameters) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """dK/dtheta for theta = (log l, log sigma_f^2, log sigma_n^2) on the noisy training matrix."""
    X = as_points(X)
    r2 = _squared_distances(X, X, same=True)
    K_signal = hyper.signal_variance * np.exp(-r2 / (2.0 * hyper.lengthscale**2))

    d_lengthscale = K_signal * (r2 / hyper.lengthscale**2)
    d_signal = K_signal.copy()
    d_noise = hyper.noise_variance * np.eye(len(X))
    return d_lengthscale, d_signal, d_noise


def jitter_cholesky(K: np.ndarray) -> np.ndarray:
    """
    Lower Cholesky factor of K. On failure, adds JITTER_START * mean(diag) to the
    diagonal and escalates x10 up to JITTER_MAX * mean(diag).
    """
    K = np.ascontiguousarray(K)
    try:
        return linalg.cholesky(K, lower=True)
    except linalg.LinAlgError:
        pass

    diag_mean = float(np.mean(np.diag(K)))
    if not np.isfinite(diag_mean) or diag_mean <= 0.0:
        raise NumericalConditioningError("not positive definite: non-positive diagonal")

    factor = JITTER_START
    while factor <= JITTER_MAX * (1 + 1e-9):
        jitter = factor * diag_mean
        try:
            L = linalg.cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            logger.warning(f"Added jitter of {jitter:.3e} to a {K.shape[0]}x{K.shape[0]} covariance matrix")
            return L
        except linalg.LinAlgError:
            factor *= 10.0
    raise NumericalConditioningError(
        f"not positive definite, even with jitter {JITTER_MAX:.0e} * mean(diag)"
    )
