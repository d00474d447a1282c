import logging
import math
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gp_core import PredictiveDistribution

logger = logging.getLogger(__name__)

A_MIN = 1e-8


class DegenerateInputError(ValueError):
    """The mean vectors span no range, so a relative distance is undefined."""


class D1Variant(str, Enum):
    AVG_RELATIVE_DISTANCE = "avg_relative_distance"
    P_NORM = "p_norm"
    FRACTION_DIFFERING = "fraction_differing"
    COUNT_DIFFERING = "count_differing"


class D2Variant(str, Enum):
    NONE = "none"
    ENTRYWISE_FROBENIUS = "entrywise_frobenius"
    ENTRYWISE_MAX = "entrywise_max"


class MeasureConfig(BaseModel):
    """Weights and component choices of the weighted-sum distance."""

    model_config = ConfigDict(frozen=True)

    eps1: float = Field(0.25, ge=0.0, le=1.0)
    eps2: float = Field(0.0, ge=0.0, le=1.0)
    delta: float = Field(0.0, ge=0.0)
    d1_variant: D1Variant = D1Variant.AVG_RELATIVE_DISTANCE
    p: float = 2.0
    d2_variant: D2Variant = D2Variant.NONE

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: float) -> float:
        if math.isnan(value) or value < 1.0:
            raise ValueError(f"p must be >= 1, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_weights(self):
        if self.eps1 + self.eps2 > 1.0 + 1e-12:
            raise ValueError(f"eps1 + eps2 must be <= 1, got {self.eps1 + self.eps2}")
        if self.eps2 > 0.0 and self.d2_variant == D2Variant.NONE:
            raise ValueError("eps2 > 0 needs a d2_variant other than 'none'")
        return self

    @property
    def rho_weight(self) -> float:
        return 1.0 - self.eps1 - self.eps2

    @staticmethod
    def parse_d1(text: str) -> dict:
        """'p_norm:2' -> {'d1_variant': 'p_norm', 'p': 2.0}; plain names pass through."""
        name, _, arg = text.strip().partition(":")
        variant = D1Variant(name)
        fields = {"d1_variant": variant}
        if variant == D1Variant.P_NORM and arg:
            fields["p"] = float(arg)
        elif arg:
            raise ValueError(f"d1 variant {name!r} takes no parameter")
        return fields

    def describe_d1(self) -> str:
        if self.d1_variant == D1Variant.P_NORM:
            return f"p_norm:{self.p:g}"
        return self.d1_variant.value


class AffineTransform(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float = Field(gt=0.0)
    b: float
    clamped: bool = False

    def apply(self, mu: np.ndarray) -> np.ndarray:
        return self.a * np.asarray(mu, dtype=float) + self.b


class SimilarityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    transform: AffineTransform
    d1_raw: float
    d2_raw: float
    rho: float
    s1: float
    s2: float
    s3: float
    total: float
    degenerate_rho: bool = False


def _paired_vectors(u, v) -> Tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"Length mismatch: {u.size} vs {v.size}")
    if u.size < 2:
        raise ValueError(f"Need at least 2 points, got {u.size}")
    return u, v


def fit_affine_transform(mu_f, mu_g) -> AffineTransform:
    """Least-squares a*mu_f + b onto mu_g with a > 0 enforced by clamping."""
    mu_f, mu_g = _paired_vectors(mu_f, mu_g)
    mean_f = float(np.mean(mu_f))
    mean_g = float(np.mean(mu_g))
    df = mu_f - mean_f
    dg = mu_g - mean_g
    var_f = float(df @ df)

    a = float(df @ dg) / var_f if var_f > 0.0 else 0.0
    clamped = False
    if not a > 0.0:
        logger.warning(f"Least-squares slope {a:.4g} is not positive; clamping to {A_MIN}")
        a = A_MIN
        clamped = True
    return AffineTransform(a=a, b=mean_g - a * mean_f, clamped=clamped)


def mean_distance_d1(t_mu_f, mu_g, variant: D1Variant, delta: float = 0.0, p: float = 2.0) -> float:
    """Distance between aligned means, over the elements whose residual exceeds delta."""
    t_mu_f, mu_g = _paired_vectors(t_mu_f, mu_g)
    variant = D1Variant(variant)
    residuals = np.abs(t_mu_f - mu_g)
    masked = residuals[residuals > delta]

    if variant == D1Variant.AVG_RELATIVE_DISTANCE:
        both = np.concatenate([t_mu_f, mu_g])
        value_range = float(np.max(both) - np.min(both))
        if value_range == 0.0:
            raise DegenerateInputError("Mean vectors have zero combined range")
        if masked.size == 0:
            return 0.0
        return float(np.mean(masked)) / value_range
    if variant == D1Variant.P_NORM:
        if masked.size == 0:
            return 0.0
        if math.isinf(p):
            return float(np.max(masked))
        return float(np.sum(masked**p) ** (1.0 / p))
    if variant == D1Variant.FRACTION_DIFFERING:
        return masked.size / residuals.size
    return float(masked.size)


def pearson(mu_f, mu_g) -> Tuple[float, bool]:
    """Sample Pearson correlation; (0, True) when either vector is constant."""
    mu_f, mu_g = _paired_vectors(mu_f, mu_g)
    if np.ptp(mu_f) == 0.0 or np.ptp(mu_g) == 0.0:
        return 0.0, True
    df = mu_f - np.mean(mu_f)
    dg = mu_g - np.mean(mu_g)
    norm = math.sqrt(float(df @ df)) * math.sqrt(float(dg @ dg))
    if norm == 0.0:
        return 0.0, True
    rho = float(df @ dg) / norm
    return min(1.0, max(-1.0, rho)), False


def covariance_distance_d2(cov_f, cov_g, variant: D2Variant) -> float:
    cov_f = np.asarray(cov_f, dtype=float)
    cov_g = np.asarray(cov_g, dtype=float)
    if cov_f.shape != cov_g.shape or cov_f.ndim != 2 or cov_f.shape[0] != cov_f.shape[1]:
        raise ValueError(f"Covariance shape mismatch: {cov_f.shape} vs {cov_g.shape}")
    variant = D2Variant(variant)
    diff = cov_f - cov_g
    if variant == D2Variant.ENTRYWISE_FROBENIUS:
        return float(np.sqrt(np.sum(diff**2))) / cov_f.shape[0]
    if variant == D2Variant.ENTRYWISE_MAX:
        return float(np.max(np.abs(diff)))
    raise ValueError("d2 variant 'none' has no distance")


def similarity(pred_f: PredictiveDistribution, pred_g: PredictiveDistribution, config: MeasureConfig) -> SimilarityReport:
    """
    Weighted-sum distance of pred_f to pred_g on their shared grid.

    The transform maps f onto g, so the measure is directional. rho is taken on
    the raw means.
    """
    if pred_f.grid.shape != pred_g.grid.shape or not np.array_equal(pred_f.grid, pred_g.grid):
        raise ValueError("Predictive distributions were evaluated on different grids")

    transform = fit_affine_transform(pred_f.mean, pred_g.mean)
    d1_raw = mean_distance_d1(transform.apply(pred_f.mean), pred_g.mean, config.d1_variant, config.delta, config.p)
    rho, degenerate = pearson(pred_f.mean, pred_g.mean)
    if degenerate:
        logger.warning("A predictive mean is constant on the grid; rho set to 0")
    d2_raw = covariance_distance_d2(pred_f.cov, pred_g.cov, config.d2_variant) if config.eps2 > 0.0 else 0.0

    return assemble_report(transform, d1_raw, d2_raw, rho, config, degenerate)


def assemble_report(
    transform: AffineTransform,
    d1_raw: float,
    d2_raw: float,
    rho: float,
    config: MeasureConfig,
    degenerate_rho: bool = False,
) -> SimilarityReport:
    """Weighted sum of the three components."""
    s1 = config.eps1 * d1_raw
    s2 = config.eps2 * d2_raw
    s3 = config.rho_weight * (1.0 - rho)
    return SimilarityReport(
        transform=transform,
        d1_raw=d1_raw,
        d2_raw=d2_raw,
        rho=rho,
        s1=s1,
        s2=s2,
        s3=s3,
        total=s1 + s2 + s3,
        degenerate_rho=degenerate_rho,
    )
