import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import linalg, optimize
from scipy.spatial.distance import pdist

from kernel import (
    Hyperparameters,
    NumericalConditioningError,
    as_points,
    covariance_matrix,
    jitter_cholesky,
    kernel_gradients,
)

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 5
MAX_ITERATIONS = 200
GRADIENT_TOLERANCE = 1e-6
START_BOX = 3.0
# keeps exp() of every log-parameter finite during line searches
LOG_BOUNDS = (-20.0, 20.0)
VARIANCE_CLAMP = 1e-10
# noise cap for exactly evaluated benchmark objectives, standardized units
DETERMINISTIC_MAX_NOISE = 1e-6


class OptimizationError(RuntimeError):
    """All optimizer restarts failed; `diagnostics` has one entry per restart."""

    def __init__(self, message: str, diagnostics: List[dict]):
        super().__init__(message)
        self.diagnostics = diagnostics


class Dataset(BaseModel):
    """Training inputs and standardized observations for one objective."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    X: np.ndarray
    y: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0

    @model_validator(mode="after")
    def _check(self):
        if self.X.ndim != 2 or self.y.ndim != 1 or len(self.X) != len(self.y):
            raise ValueError(f"X must be (n, d) and y (n,), got {self.X.shape} and {self.y.shape}")
        if len(self.y) < 1:
            raise ValueError("Dataset needs at least one observation")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("Dataset contains non-finite entries")
        if not (np.isfinite(self.y_std) and self.y_std > 0.0 and np.isfinite(self.y_mean)):
            raise ValueError(f"y_std must be positive and finite, got {self.y_std!r}")
        return self

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_observations(cls, X, y) -> "Dataset":
        """Standardize raw observations to mean 0, std 1."""
        X = as_points(X)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) < 2:
            raise ValueError(f"Need at least 2 observations, got {len(y)}")
        if not np.all(np.isfinite(y)):
            raise ValueError("Observations contain non-finite values")
        y_mean = float(np.mean(y))
        y_std = float(np.std(y))
        if y_std <= 0.0:
            raise ValueError("Observations are constant; cannot standardize")
        return cls(X=X.copy(), y=(y - y_mean) / y_std, y_mean=y_mean, y_std=y_std)

    def restore(self, values: np.ndarray) -> np.ndarray:
        return values * self.y_std + self.y_mean


class FittedGP(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dataset: Dataset
    hyper: Hyperparameters
    chol: np.ndarray
    alpha: np.ndarray
    lml: float = float("nan")


class PredictiveDistribution(BaseModel):
    """Joint predictive distribution over a grid, in original y units."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.variance, 0.0))


def _factorize(dataset: Dataset, hyper: Hyperparameters):
    K_noisy = covariance_matrix(dataset.X, dataset.X, hyper, add_noise=True)
    L = jitter_cholesky(K_noisy)
    alpha = linalg.cho_solve((L, True), dataset.y)
    return L, alpha


def _lml_terms(chol: np.ndarray, alpha: np.ndarray, y: np.ndarray) -> float:
    n = len(y)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * n * np.log(2.0 * np.pi))


def fit(dataset: Dataset, hyper: Hyperparameters) -> FittedGP:
    """Factorize K + sigma_n^2 I and cache alpha and the log marginal likelihood."""
    L, alpha = _factorize(dataset, hyper)
    return FittedGP(
        dataset=dataset,
        hyper=hyper,
        chol=L,
        alpha=alpha,
        lml=_lml_terms(L, alpha, dataset.y),
    )


def log_marginal_likelihood(fitted: FittedGP) -> float:
    return _lml_terms(fitted.chol, fitted.alpha, fitted.dataset.y)


def lml_gradient(fitted: FittedGP) -> np.ndarray:
    """Gradient of the log marginal likelihood w.r.t. the log hyperparameters."""
    n = fitted.dataset.n
    K_inv = linalg.cho_solve((fitted.chol, True), np.eye(n))
    A = np.outer(fitted.alpha, fitted.alpha) - K_inv
    # tr(A dK) = sum(A * dK) since dK is symmetric
    return np.array([0.5 * np.sum(A * dK) for dK in kernel_gradients(fitted.dataset.X, fitted.hyper)])


def _negative_lml(theta: np.ndarray, dataset: Dataset):
    hyper = Hyperparameters.from_vector(theta)
    fitted = fit(dataset, hyper)
    grad = lml_gradient(fitted)
    if hyper.noise_at_floor:
        # noise follows sigma_f^2 while the floor binds
        grad = np.array([grad[0], grad[1] + grad[2], 0.0])
    return -fitted.lml, -grad


def _starting_points(dataset: Dataset, restarts: int, seed: int) -> List[np.ndarray]:
    distances = pdist(dataset.X)
    median = float(np.median(distances)) if distances.size else 1.0
    if not np.isfinite(median) or median <= 0.0:
        median = 1.0
    first = np.array([np.log(median), 0.0, np.log(1e-3)])
    rng = np.random.default_rng(seed)
    starts = [first]
    for _ in range(restarts - 1):
        starts.append(first + rng.uniform(-START_BOX, START_BOX, size=3))
    return starts


def _parameter_bounds(max_noise_variance: Optional[float]) -> List[tuple]:
    if max_noise_variance is None:
        return [LOG_BOUNDS] * 3
    if not np.isfinite(max_noise_variance) or max_noise_variance <= 0.0:
        raise ValueError(f"max_noise_variance must be positive and finite, got {max_noise_variance!r}")
    upper = min(LOG_BOUNDS[1], float(np.log(max_noise_variance)))
    return [LOG_BOUNDS, LOG_BOUNDS, (min(LOG_BOUNDS[0], upper), upper)]


def optimize_hyperparameters(
    dataset: Dataset,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_noise_variance: Optional[float] = None,
) -> Hyperparameters:
    """
    Multi-start L-BFGS-B maximization of the log marginal likelihood.

    Every starting point, clipped into the search box, is itself a candidate, so
    the result is never worse than any start. Deterministic for a given seed.

    max_noise_variance caps sigma_n^2 in standardized units. The relative noise
    floor still takes precedence when sigma_f^2 is very large.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    bounds = _parameter_bounds(max_noise_variance)
    lower, upper = np.array(bounds).T

    best: Optional[Hyperparameters] = None
    best_lml = -np.inf
    diagnostics: List[dict] = []

    for index, start in enumerate(_starting_points(dataset, restarts, seed)):
        start_hyper = Hyperparameters.from_vector(np.clip(start, lower, upper))
        candidates = []
        try:
            candidates.append((start_hyper, fit(dataset, start_hyper).lml))
        except NumericalConditioningError as e:
            logger.debug(f"Restart {index}: start point not factorizable: {e}")

        try:
            result = optimize.minimize(
                _negative_lml,
                np.clip(start_hyper.as_vector(), lower, upper),
                args=(dataset,),
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": MAX_ITERATIONS, "gtol": GRADIENT_TOLERANCE, "ftol": 1e-15},
            )
            found = Hyperparameters.from_vector(result.x)
            candidates.append((found, fit(dataset, found).lml))
            logger.debug(f"Restart {index}: lml={candidates[-1][1]:.6f} after {result.nit} iterations ({result.message})")
            diagnostics.append({"restart": index, "start": start.tolist(), "status": "ok", "message": str(result.message)})
        except (NumericalConditioningError, ValueError, FloatingPointError) as e:
            logger.debug(f"Restart {index} failed: {e}")
            diagnostics.append({"restart": index, "start": start.tolist(), "status": "failed", "message": str(e)})

        for hyper, lml in candidates:
            if np.isfinite(lml) and lml > best_lml:
                best, best_lml = hyper, lml

    if best is None:
        raise OptimizationError(f"All {restarts} optimizer restarts failed", diagnostics)
    logger.info(
        f"Optimized hyperparameters: l={best.lengthscale:.4g}, sf2={best.signal_variance:.4g}, "
        f"sn2={best.noise_variance:.4g}, lml={best_lml:.4f}"
    )
    return best


def predict(fitted: FittedGP, grid) -> PredictiveDistribution:
    """Joint predictive mean and covariance on grid, de-standardized."""
    grid = as_points(grid)
    dataset = fitted.dataset
    if len(grid) == 0:
        raise ValueError("Prediction grid is empty")
    if grid.shape[1] != dataset.dimension:
        raise ValueError(f"Grid dimension {grid.shape[1]} does not match dataset dimension {dataset.dimension}")

    K_star = covariance_matrix(dataset.X, grid, fitted.hyper)
    K_grid = covariance_matrix(grid, grid, fitted.hyper)

    mean = K_star.T @ fitted.alpha
    v = linalg.solve_triangular(fitted.chol, K_star, lower=True)
    cov = K_grid - v.T @ v
    cov = 0.5 * (cov + cov.T)

    diag = np.diag(cov).copy()
    negative = diag < 0.0
    if np.any(diag < -VARIANCE_CLAMP):
        logger.warning(f"Clamping {int(np.sum(diag < -VARIANCE_CLAMP))} predictive variances below -{VARIANCE_CLAMP}")
    if np.any(negative):
        cov[np.diag_indices_from(cov)] = np.where(negative, 0.0, diag)

    return PredictiveDistribution(
        grid=grid,
        mean=dataset.restore(mean),
        cov=cov * dataset.y_std**2,
    )


def training_residual(fitted: FittedGP) -> float:
    """Max absolute standardized residual of the predictive mean at the training inputs."""
    K_train = covariance_matrix(fitted.dataset.X, fitted.dataset.X, fitted.hyper)
    return float(np.max(np.abs(K_train @ fitted.alpha - fitted.dataset.y)))
