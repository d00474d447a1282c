"""
Benchmark objectives used to exercise the similarity measure.

Each function has a fixed dimension and a default box domain. Experiments may
rebind a function to a different shared domain with `with_domain`.
"""

import math
import re
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

Interval = Tuple[float, float]

# tolerance for points sitting on a domain edge after linspace round-off
_DOMAIN_SLACK = 1e-9


class FunctionKind(str, Enum):
    MICHALEWICZ = "michalewicz"
    PARABOLA = "parabola"
    POWER = "power"
    STYBLINSKI_TANG = "styblinski_tang"
    ELLIPSOID = "ellipsoid"
    SPHERE = "sphere"
    GRIEWANK = "griewank"
    LEVY = "levy"
    ACKLEY = "ackley"


# kind -> (dimension, default domain per dimension, default parameters)
_CATALOG: Dict[FunctionKind, Tuple[int, Interval, Dict[str, float]]] = {
    FunctionKind.MICHALEWICZ: (1, (0.0, math.pi), {"m": 10.0}),
    FunctionKind.PARABOLA: (1, (-2.0, 2.0), {}),
    FunctionKind.POWER: (1, (-2.0, 2.0), {"k": 6.0}),
    FunctionKind.STYBLINSKI_TANG: (2, (-5.0, 5.0), {}),
    FunctionKind.ELLIPSOID: (2, (-5.0, 5.0), {}),
    FunctionKind.SPHERE: (2, (-5.0, 5.0), {}),
    FunctionKind.GRIEWANK: (2, (-5.0, 5.0), {}),
    FunctionKind.LEVY: (2, (-10.0, 10.0), {}),
    FunctionKind.ACKLEY: (2, (-5.0, 5.0), {"a": 20.0, "b": 0.2, "c": 2.0 * math.pi}),
}


class BenchmarkFunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: FunctionKind
    params: Dict[str, float] = {}
    dimension: int
    domain: List[Interval]

    @field_validator("domain")
    @classmethod
    def _check_domain(cls, value: List[Interval]) -> List[Interval]:
        for lo, hi in value:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"Degenerate interval [{lo}, {hi}]")
        return value

    def with_domain(self, domain) -> "BenchmarkFunction":
        domain = [tuple(map(float, interval)) for interval in domain]
        if len(domain) == 1 and self.dimension > 1:
            domain = domain * self.dimension
        return BenchmarkFunction(kind=self.kind, params=self.params, dimension=self.dimension, domain=domain)

    def describe(self) -> str:
        """Canonical id, e.g. 'ackley:a=70,b=0.2,c=6.28319'."""
        if not self.params:
            return self.kind.value
        args = ",".join(f"{key}={value:g}" for key, value in sorted(self.params.items()))
        return f"{self.kind.value}:{args}"


def make_function(kind, **params) -> BenchmarkFunction:
    kind = FunctionKind(kind)
    dimension, interval, defaults = _CATALOG[kind]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"{kind.value} does not take parameters {sorted(unknown)}")
    merged = {**defaults, **{key: float(value) for key, value in params.items()}}
    return BenchmarkFunction(kind=kind, params=merged, dimension=dimension, domain=[interval] * dimension)


_PI_VALUE = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*$")


def _parse_value(text: str) -> float:
    match = _PI_VALUE.match(text)
    if match:
        factor = match.group(1)
        return (float(factor) if factor not in ("", "+", "-") else float(factor + "1")) * math.pi
    return float(text)


def parse_function(text: str) -> BenchmarkFunction:
    """Parse 'id[:key=value,...]'; values may be written as multiples of pi ('6pi')."""
    name, _, arg_text = text.strip().partition(":")
    params = {}
    if arg_text:
        for item in arg_text.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"Malformed parameter {item!r} in {text!r}")
            params[key.strip()] = _parse_value(value)
    try:
        kind = FunctionKind(name.strip())
    except ValueError:
        raise ValueError(f"Unknown benchmark function {name!r}") from None
    return make_function(kind, **params)


def catalog() -> List[BenchmarkFunction]:
    return [make_function(kind) for kind in FunctionKind]


def _michalewicz(x, m):
    # even power, so abs() only matters for non-integer m
    return -math.sin(x[0]) * abs(math.sin(x[0] ** 2 / math.pi)) ** (2 * m)


def _styblinski_tang(x):
    return 0.5 * float(np.sum(x**4 - 16.0 * x**2 + 5.0 * x))


def _ellipsoid(x):
    return float(np.sum(np.cumsum(x**2)))


def _griewank(x):
    return (x[0] ** 2 + x[1] ** 2) / 4000.0 - math.cos(x[0]) * math.cos(x[1] / math.sqrt(2.0)) + 1.0


def _levy(x):
    w1, w2 = 1.0 + (x - 1.0) / 4.0
    return (
        math.sin(math.pi * w1) ** 2
        + (w1 - 1.0) ** 2 * (1.0 + 10.0 * math.sin(math.pi * w1 + 1.0) ** 2)
        + (w2 - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w2) ** 2)
    )


def _ackley(x, a, b, c):
    d = len(x)
    return (
        -a * math.exp(-b * math.sqrt(float(np.sum(x**2)) / d))
        - math.exp(float(np.sum(np.cos(c * x))) / d)
        + a
        + math.e
    )


def evaluate(fn: BenchmarkFunction, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (fn.dimension,):
        raise ValueError(f"{fn.kind.value} expects a point of dimension {fn.dimension}, got shape {x.shape}")
    for value, (lo, hi) in zip(x, fn.domain):
        if not (lo - _DOMAIN_SLACK <= value <= hi + _DOMAIN_SLACK):
            raise ValueError(f"Point {x.tolist()} lies outside the domain {fn.domain} of {fn.describe()}")

    p = fn.params
    if fn.kind == FunctionKind.MICHALEWICZ:
        return _michalewicz(x, p["m"])
    if fn.kind == FunctionKind.PARABOLA:
        return float(x[0] ** 2)
    if fn.kind == FunctionKind.POWER:
        return float(x[0] ** p["k"])
    if fn.kind == FunctionKind.STYBLINSKI_TANG:
        return _styblinski_tang(x)
    if fn.kind == FunctionKind.ELLIPSOID:
        return _ellipsoid(x)
    if fn.kind == FunctionKind.SPHERE:
        return float(x[0] ** 2 + x[1] ** 2)
    if fn.kind == FunctionKind.GRIEWANK:
        return _griewank(x)
    if fn.kind == FunctionKind.LEVY:
        return _levy(x)
    return _ackley(x, p["a"], p["b"], p["c"])


def evaluate_many(fn: BenchmarkFunction, X) -> np.ndarray:
    X = np.asarray(X, dtype=float).reshape(-1, fn.dimension)
    return np.array([evaluate(fn, x) for x in X])


def grid(domain, points_per_dim: int) -> np.ndarray:
    """Evenly spaced row-major lattice over the box, endpoints included."""
    if points_per_dim < 2:
        raise ValueError(f"points_per_dim must be >= 2, got {points_per_dim}")
    axes = []
    for lo, hi in domain:
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"Degenerate interval [{lo}, {hi}]")
        axes.append(np.linspace(lo, hi, points_per_dim))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=1)
