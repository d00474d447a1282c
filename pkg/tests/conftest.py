import numpy as np
import pytest

from gp_core import Dataset
from kernel import Hyperparameters


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def make_hyper(lengthscale=1.0, signal_variance=1.0, noise_variance=1e-3) -> Hyperparameters:
    return Hyperparameters(
        log_lengthscale=float(np.log(lengthscale)),
        log_signal_variance=float(np.log(signal_variance)),
        log_noise_variance=float(np.log(noise_variance)),
    )


def random_dataset(rng, n: int, d: int) -> Dataset:
    X = rng.uniform(-2.0, 2.0, size=(n, d))
    y = np.sin(X).sum(axis=1) + 0.1 * rng.standard_normal(n)
    return Dataset.from_observations(X, y)


def random_hyper(rng) -> Hyperparameters:
    return Hyperparameters(
        log_lengthscale=float(rng.uniform(-1.0, 1.0)),
        log_signal_variance=float(rng.uniform(-1.0, 1.0)),
        log_noise_variance=float(rng.uniform(-3.0, -1.0)),
    )


SMALL_SUITE = """\
defaults:
  seed: 0
  restarts: 1
  points_per_dim: 6
  measure:
    eps1: 0.25
    d1_variant: avg_relative_distance

experiments:
  - pair_id: parabola_vs_power
    fn_a: "parabola"
    fn_b: "power:k=4"
  - pair_id: broken
    fn_a: "rosenbrock"
    fn_b: "sphere"
  - pair_id: sphere_vs_ellipsoid
    fn_a: "sphere"
    fn_b: "ellipsoid"
    points_per_dim: 5
"""


@pytest.fixture
def small_suite(tmp_path):
    path = tmp_path / "suite.yaml"
    path.write_text(SMALL_SUITE, encoding="utf-8")
    return path
