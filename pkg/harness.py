import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from queue import Queue
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

import output
from benchmarks import BenchmarkFunction, Interval, evaluate_many, grid, parse_function
from gp_core import (
    DETERMINISTIC_MAX_NOISE,
    Dataset,
    PredictiveDistribution,
    fit,
    optimize_hyperparameters,
    predict,
    training_residual,
)
from kernel import Hyperparameters
from settings import Settings
from similarity import MeasureConfig, SimilarityReport, similarity

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """The suite config file is missing or cannot be parsed."""


class ExperimentError(RuntimeError):
    def __init__(self, pair_id: str, stage: str, message: str):
        super().__init__(f"[{pair_id}] {stage}: {message}")
        self.pair_id = pair_id
        self.stage = stage
        self.message = message


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    pair_id: str
    fn_a: BenchmarkFunction
    fn_b: BenchmarkFunction
    domain: Optional[List[Interval]] = None
    points_per_dim: int = Field(ge=2)
    prediction_points_per_dim: Optional[int] = Field(None, ge=2)
    measure: MeasureConfig = MeasureConfig()
    seed: int = 0
    restarts: int = Field(5, ge=1)
    max_noise_variance: Optional[float] = Field(DETERMINISTIC_MAX_NOISE, gt=0)

    @field_validator("fn_a", "fn_b", mode="before")
    @classmethod
    def _parse_function(cls, value):
        if isinstance(value, str):
            return parse_function(value)
        return value

    @model_validator(mode="after")
    def _check_pair(self):
        if self.fn_a.dimension != self.fn_b.dimension:
            raise ValueError(
                f"{self.fn_a.describe()} (d={self.fn_a.dimension}) and "
                f"{self.fn_b.describe()} (d={self.fn_b.dimension}) do not share an input space"
            )
        if self.domain is not None and len(self.domain) not in (1, self.fn_a.dimension):
            raise ValueError(f"domain has {len(self.domain)} intervals for a {self.fn_a.dimension}-D pair")
        return self

    def bound_functions(self) -> Tuple[BenchmarkFunction, BenchmarkFunction]:
        """Both functions rebound to the shared domain (fn_a's own domain by default)."""
        domain = self.domain if self.domain is not None else self.fn_a.domain
        return self.fn_a.with_domain(domain), self.fn_b.with_domain(domain)


class ExperimentResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: ExperimentSpec
    report: SimilarityReport
    hyper_a: Hyperparameters
    hyper_b: Hyperparameters
    lml_a: float
    lml_b: float
    residual_a: float
    residual_b: float
    wall_time_s: float
    grid: np.ndarray
    mean_a: np.ndarray
    mean_b: np.ndarray
    std_a: np.ndarray
    std_b: np.ndarray


class SuiteEntry(BaseModel):
    """One config entry: a valid spec, or the reason it could not be built."""

    pair_id: str
    fn_a: str = ""
    fn_b: str = ""
    spec: Optional[ExperimentSpec] = None
    error: Optional[str] = None


class SuiteOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    entries: List[SuiteEntry]
    results: Dict[str, ExperimentResult] = {}
    failures: Dict[str, ExperimentError] = {}

    @property
    def warning_count(self) -> int:
        return len(self.failures)

    @property
    def exit_code(self) -> int:
        if not self.failures:
            return 0
        return 2 if not self.results else 3


class ScreeningResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    function_ids: List[str]
    distances: np.ndarray
    threshold: float
    redundant_pairs: List[Tuple[str, str, float]]


def _fit_objective(
    fn: BenchmarkFunction, points: np.ndarray, restarts: int, seed: int, max_noise_variance: Optional[float]
):
    dataset = Dataset.from_observations(points, evaluate_many(fn, points))
    hyper = optimize_hyperparameters(dataset, restarts=restarts, seed=seed, max_noise_variance=max_noise_variance)
    return fit(dataset, hyper)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Sample both functions, fit GPs, predict on the shared grid and measure their distance."""
    started = time.perf_counter()
    stage = "sample"
    try:
        fn_a, fn_b = spec.bound_functions()
        train = grid(fn_a.domain, spec.points_per_dim)
        logger.info(f"[{spec.pair_id}] {fn_a.describe()} vs {fn_b.describe()} on {len(train)} points")

        stage = "fit_a"
        fitted_a = _fit_objective(fn_a, train, spec.restarts, spec.seed, spec.max_noise_variance)
        stage = "fit_b"
        fitted_b = _fit_objective(fn_b, train, spec.restarts, spec.seed, spec.max_noise_variance)

        stage = "predict"
        if spec.prediction_points_per_dim is None:
            query = train
        else:
            query = grid(fn_a.domain, spec.prediction_points_per_dim)
        pred_a: PredictiveDistribution = predict(fitted_a, query)
        pred_b: PredictiveDistribution = predict(fitted_b, query)

        stage = "measure"
        report = similarity(pred_a, pred_b, spec.measure)
    except ExperimentError:
        raise
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as e:
        raise ExperimentError(spec.pair_id, stage, str(e)) from e

    result = ExperimentResult(
        spec=spec,
        report=report,
        hyper_a=fitted_a.hyper,
        hyper_b=fitted_b.hyper,
        lml_a=fitted_a.lml,
        lml_b=fitted_b.lml,
        residual_a=training_residual(fitted_a),
        residual_b=training_residual(fitted_b),
        wall_time_s=time.perf_counter() - started,
        grid=pred_a.grid,
        mean_a=pred_a.mean,
        mean_b=pred_b.mean,
        std_a=pred_a.std,
        std_b=pred_b.std,
    )
    logger.info(
        f"[{spec.pair_id}] rho={report.rho:.4f} d1={report.d1_raw:.4f} total={report.total:.4f} "
        f"({result.wall_time_s:.1f}s)"
    )
    return result


def pairwise_distances(
    functions: List[BenchmarkFunction],
    measure: MeasureConfig,
    points_per_dim: int,
    seed: int = 0,
    restarts: int = 5,
    threshold: float = 0.1,
    max_noise_variance: Optional[float] = DETERMINISTIC_MAX_NOISE,
) -> ScreeningResult:
    """
    Distance of every ordered pair of objectives on the first one's domain.
    Pairs at or under `threshold` are reported as redundancy candidates.
    """
    if len(functions) < 2:
        raise ValueError("Screening needs at least two objectives")
    if len({fn.dimension for fn in functions}) != 1:
        raise ValueError("All screened objectives must share an input dimension")

    domain = functions[0].domain
    bound = [fn.with_domain(domain) for fn in functions]
    points = grid(domain, points_per_dim)
    predictions = [predict(_fit_objective(fn, points, restarts, seed, max_noise_variance), points) for fn in bound]

    ids = [fn.describe() for fn in functions]
    distances = np.zeros((len(bound), len(bound)))
    redundant = []
    for i, pred_i in enumerate(predictions):
        for j, pred_j in enumerate(predictions):
            if i == j:
                continue
            distances[i, j] = similarity(pred_i, pred_j, measure).total
            if distances[i, j] <= threshold:
                redundant.append((ids[i], ids[j], float(distances[i, j])))
    return ScreeningResult(function_ids=ids, distances=distances, threshold=threshold, redundant_pairs=redundant)


def _read_config(config_file: Path) -> Dict[str, Any]:
    yaml = YAML(typ="safe")
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            data = yaml.load(f)
    except (OSError, YAMLError) as e:
        raise ConfigError(f"Cannot read suite config {config_file}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict) or not isinstance(data.get("experiments", []), list):
        raise ConfigError(f"Suite config {config_file} must be a mapping with an 'experiments' list")
    return data


def load_suite(
    config_file: Path,
    settings: Settings,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
) -> List[SuiteEntry]:
    """Build one entry per listed experiment; an invalid entry is kept with its error."""
    if restarts is not None and restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    data = _read_config(Path(config_file))
    defaults = data.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise ConfigError("'defaults' must be a mapping")

    entries: List[SuiteEntry] = []
    for index, raw in enumerate(data.get("experiments") or []):
        raw = raw if isinstance(raw, dict) else {}
        pair_id = str(raw.get("pair_id") or f"experiment_{index + 1:02d}")
        fn_a_text, fn_b_text = str(raw.get("fn_a", "")), str(raw.get("fn_b", ""))
        if any(entry.pair_id == pair_id for entry in entries):
            logger.warning(f"[{pair_id}] duplicate pair_id; entry skipped")
            entries.append(SuiteEntry(pair_id=f"{pair_id}__{index + 1}", fn_a=fn_a_text, fn_b=fn_b_text, error=f"duplicate pair_id {pair_id!r}"))
            continue
        try:
            measure = {**(defaults.get("measure") or {}), **(raw.get("measure") or {})}
            if "d1" in measure:
                measure.update(MeasureConfig.parse_d1(str(measure.pop("d1"))))
            fn_a = parse_function(fn_a_text)
            fields = {
                "pair_id": pair_id,
                "fn_a": fn_a,
                "fn_b": fn_b_text,
                "domain": raw.get("domain"),
                "points_per_dim": raw.get("points_per_dim", defaults.get("points_per_dim", settings.points_per_dim(fn_a.dimension))),
                "prediction_points_per_dim": raw.get("prediction_points_per_dim", defaults.get("prediction_points_per_dim")),
                "measure": MeasureConfig(**measure),
                "seed": seed if seed is not None else raw.get("seed", defaults.get("seed", settings.seed)),
                "restarts": restarts if restarts is not None else raw.get("restarts", defaults.get("restarts", settings.restarts)),
                "max_noise_variance": raw.get(
                    "max_noise_variance", defaults.get("max_noise_variance", settings.max_noise_variance)
                ),
            }
            entries.append(SuiteEntry(pair_id=pair_id, fn_a=fn_a_text, fn_b=fn_b_text, spec=ExperimentSpec(**fields)))
        except (ValueError, TypeError) as e:
            message = str(e).splitlines()[0] if not isinstance(e, ValidationError) else _first_error(e)
            logger.warning(f"[{pair_id}] invalid experiment entry: {message}")
            entries.append(SuiteEntry(pair_id=pair_id, fn_a=fn_a_text, fn_b=fn_b_text, error=message))
    return entries


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    return f"{location}: {first.get('msg')}" if location else str(first.get("msg"))


class SuiteRunner:
    """Runs suite entries on a worker pool; results come back through a single queue."""

    def __init__(self, settings: Settings, workers: Optional[int] = None):
        self.settings = settings
        self.workers = max(1, workers if workers is not None else settings.max_inflight)
        self.queue: Queue = Queue()

    def _worker(self, index: int, spec: ExperimentSpec) -> None:
        try:
            outcome: Union[ExperimentResult, ExperimentError] = run_experiment(spec)
        except ExperimentError as e:
            outcome = e
        except Exception as e:
            logger.exception(f"[{spec.pair_id}] unexpected failure")
            outcome = ExperimentError(spec.pair_id, "internal", f"{type(e).__name__}: {e}")
        self.queue.put((index, outcome))

    def run(self, entries: List[SuiteEntry]) -> SuiteOutcome:
        outcome = SuiteOutcome(entries=entries)
        runnable = [(i, entry.spec) for i, entry in enumerate(entries) if entry.spec is not None]
        for entry in entries:
            if entry.spec is None:
                outcome.failures[entry.pair_id] = ExperimentError(entry.pair_id, "spec", entry.error or "invalid entry")

        logger.info(f"Running {len(runnable)} experiments with {self.workers} worker(s)")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for index, spec in runnable:
                pool.submit(self._worker, index, spec)

        collected = {}
        while not self.queue.empty():
            index, item = self.queue.get_nowait()
            collected[index] = item
            self.queue.task_done()

        for index in sorted(collected):
            item = collected[index]
            pair_id = entries[index].pair_id
            if isinstance(item, ExperimentError):
                logger.warning(f"Experiment failed: {item}")
                outcome.failures[pair_id] = item
            else:
                outcome.results[pair_id] = item
        logger.info(f"Suite finished: {len(outcome.results)} succeeded, {len(outcome.failures)} failed")
        return outcome


def run_suite(
    config_file: Path,
    output_dir: Path,
    settings: Optional[Settings] = None,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
    workers: Optional[int] = None,
) -> SuiteOutcome:
    """Run every experiment in the config and write the summary, documents and plot data."""
    settings = settings or Settings()
    entries = load_suite(config_file, settings, seed=seed, restarts=restarts)
    outcome = SuiteRunner(settings, workers).run(entries)
    output.save_suite_output(outcome, Path(output_dir))
    return outcome
