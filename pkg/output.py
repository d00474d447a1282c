import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from jinja2 import BaseLoader, Environment
from ruamel.yaml import YAML

logger = logging.getLogger(__name__)

# Assumed output structure:
# output_dir /
#   summary.csv
#   summary.txt
#   <pair_id>.yaml
#   <pair_id>_plot.csv

SUMMARY_HEADER = [
    "pair_id", "fn_a", "fn_b", "a", "b", "clamped", "d1", "d2",
    "rho", "degenerate_rho", "s1", "s2", "s3", "total",
]


def _float(value) -> str:
    """Shortest round-trip text, so reruns produce identical bytes."""
    return repr(float(value))


def _flag(value: bool) -> str:
    return "true" if value else "false"


def summary_row(result) -> List[str]:
    report = result.report
    spec = result.spec
    return [
        spec.pair_id,
        spec.fn_a.describe(),
        spec.fn_b.describe(),
        _float(report.transform.a),
        _float(report.transform.b),
        _flag(report.transform.clamped),
        _float(report.d1_raw),
        _float(report.d2_raw),
        _float(report.rho),
        _flag(report.degenerate_rho),
        _float(report.s1),
        _float(report.s2),
        _float(report.s3),
        _float(report.total),
    ]


def error_row(pair_id: str, fn_a: str, fn_b: str) -> List[str]:
    return [pair_id, fn_a, fn_b] + [""] * (len(SUMMARY_HEADER) - 3)


def write_summary_csv(path: Path, rows: List[List[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(rows)


def result_document(result) -> Dict[str, Any]:
    """Plain-Python mapping of one experiment, ready for YAML."""
    spec = result.spec
    report = result.report
    measure = spec.measure

    def hyper(h) -> Dict[str, float]:
        return {
            "lengthscale": float(h.lengthscale),
            "signal_variance": float(h.signal_variance),
            "noise_variance": float(h.noise_variance),
        }

    return {
        "pair_id": spec.pair_id,
        "spec": {
            "fn_a": spec.fn_a.describe(),
            "fn_b": spec.fn_b.describe(),
            "domain": [[float(lo), float(hi)] for lo, hi in spec.bound_functions()[0].domain],
            "points_per_dim": spec.points_per_dim,
            "prediction_points_per_dim": spec.prediction_points_per_dim,
            "seed": spec.seed,
            "restarts": spec.restarts,
            "max_noise_variance": spec.max_noise_variance,
            "measure": {
                "eps1": float(measure.eps1),
                "eps2": float(measure.eps2),
                "delta": float(measure.delta),
                "d1": measure.describe_d1(),
                "d2": measure.d2_variant.value,
            },
        },
        "fits": {
            "a": {**hyper(result.hyper_a), "lml": float(result.lml_a), "max_train_residual": float(result.residual_a)},
            "b": {**hyper(result.hyper_b), "lml": float(result.lml_b), "max_train_residual": float(result.residual_b)},
        },
        "report": {
            "a": float(report.transform.a),
            "b": float(report.transform.b),
            "clamped": bool(report.transform.clamped),
            "d1": float(report.d1_raw),
            "d2": float(report.d2_raw),
            "rho": float(report.rho),
            "degenerate_rho": bool(report.degenerate_rho),
            "s1": float(report.s1),
            "s2": float(report.s2),
            "s3": float(report.s3),
            "total": float(report.total),
        },
        "wall_time_s": float(result.wall_time_s),
    }


def _dump_yaml(data: Dict[str, Any], path: Path) -> None:
    yaml = YAML()
    yaml.default_flow_style = False
    with open(path, "w", encoding="utf-8") as yf:
        yaml.dump(data, yf)


def write_result_document(output_dir: Path, result) -> Path:
    path = output_dir / f"{result.spec.pair_id}.yaml"
    _dump_yaml(result_document(result), path)
    return path


def write_error_document(output_dir: Path, pair_id: str, fn_a: str, fn_b: str, error) -> Path:
    path = output_dir / f"{pair_id}.yaml"
    _dump_yaml(
        {
            "pair_id": pair_id,
            "spec": {"fn_a": fn_a, "fn_b": fn_b},
            "error": {"stage": error.stage, "message": error.message},
        },
        path,
    )
    return path


def write_plot_data(output_dir: Path, result) -> Path:
    """One row per grid point: coordinates, both predictive means and std-devs."""
    path = output_dir / f"{result.spec.pair_id}_plot.csv"
    points = np.asarray(result.grid)
    header = [f"x{k + 1}" for k in range(points.shape[1])] + ["mean_a", "mean_b", "std_a", "std_b"]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for i, point in enumerate(points):
            writer.writerow(
                [_float(v) for v in point]
                + [_float(result.mean_a[i]), _float(result.mean_b[i]), _float(result.std_a[i]), _float(result.std_b[i])]
            )
    return path


REPORT_TEMPLATE = """\
{{ pair_id }}: {{ fn_a }}  ->  {{ fn_b }}
  transform   T(mu) = {{ "%.6g" | format(r.transform.a) }} * mu + {{ "%.6g" | format(r.transform.b) }}{% if r.transform.clamped %}  [slope clamped]{% endif %}
  rho         {{ "%.4f" | format(r.rho) }}{% if r.degenerate_rho %}  [degenerate]{% endif %}
  d1          {{ "%.4f" | format(r.d1_raw) }}
  d2          {{ "%.4f" | format(r.d2_raw) }}
  s1 / s2 / s3  {{ "%.4f" | format(r.s1) }} / {{ "%.4f" | format(r.s2) }} / {{ "%.4f" | format(r.s3) }}
  total       {{ "%.4f" | format(r.total) }}
"""

DIGEST_TEMPLATE = """\
===============================================================================
GP SIMILARITY SUITE  -  {{ ok_count }} OK, {{ failures | length }} FAILED
===============================================================================
{% for row in rows %}
{{ "%-32s" | format(row.pair_id) }} rho={{ "%7.4f" | format(row.rho) }}  d1={{ "%6.4f" | format(row.d1) }}  total={{ "%6.4f" | format(row.total) }}
{%- endfor %}
{% if failures %}
FAILURES
{%- for f in failures %}
  {{ f.pair_id }} [{{ f.stage }}] {{ f.message }}
{%- endfor %}
{% endif %}
===============================================================================
"""

SCREEN_TEMPLATE = """\
Pairwise distances (row transformed onto column):
{% for i in range(ids | length) %}
  [{{ i }}] {{ ids[i] }}
{%- endfor %}

{{ "%6s" | format("") }}{% for j in range(ids | length) %}{{ "%9s" | format("[" ~ j ~ "]") }}{% endfor %}
{% for i in range(ids | length) %}{{ "%6s" | format("[" ~ i ~ "]") }}{% for j in range(ids | length) %}{{ "%9.4f" | format(distances[i][j]) }}{% endfor %}
{% endfor %}
Redundancy candidates (distance <= {{ threshold }}):
{%- for a, b, d in pairs %}
  {{ a }} ~ {{ b }}  ({{ "%.4f" | format(d) }})
{%- else %}
  none
{%- endfor %}
"""

_env = Environment(loader=BaseLoader())


def render_report(pair_id: str, fn_a: str, fn_b: str, report) -> str:
    return _env.from_string(REPORT_TEMPLATE).render(pair_id=pair_id, fn_a=fn_a, fn_b=fn_b, r=report)


def render_digest(outcome) -> str:
    rows = [
        {"pair_id": pair_id, "rho": res.report.rho, "d1": res.report.d1_raw, "total": res.report.total}
        for pair_id, res in outcome.results.items()
    ]
    failures = [
        {"pair_id": pair_id, "stage": err.stage, "message": err.message}
        for pair_id, err in outcome.failures.items()
    ]
    return _env.from_string(DIGEST_TEMPLATE).render(rows=rows, failures=failures, ok_count=len(rows))


def render_screening(screen) -> str:
    return _env.from_string(SCREEN_TEMPLATE).render(
        ids=screen.function_ids,
        distances=np.asarray(screen.distances).tolist(),
        threshold=screen.threshold,
        pairs=screen.redundant_pairs,
    )


def save_suite_output(outcome, output_dir: Path) -> Optional[Path]:
    """Write summary.csv (config order), per-experiment documents and plot data, and summary.txt."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for entry in outcome.entries:
        if entry.pair_id in outcome.results:
            result = outcome.results[entry.pair_id]
            rows.append(summary_row(result))
            write_result_document(output_dir, result)
            write_plot_data(output_dir, result)
        else:
            error = outcome.failures.get(entry.pair_id)
            rows.append(error_row(entry.pair_id, entry.fn_a, entry.fn_b))
            if error is not None:
                write_error_document(output_dir, entry.pair_id, entry.fn_a, entry.fn_b, error)

    summary_path = output_dir / "summary.csv"
    write_summary_csv(summary_path, rows)
    with open(output_dir / "summary.txt", "w", encoding="utf-8") as f:
        f.write(render_digest(outcome))
    logger.info(f"Wrote {len(rows)} summary rows to {summary_path}")
    return summary_path
