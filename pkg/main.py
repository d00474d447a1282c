import argparse
import logging
import sys
from pathlib import Path

import benchmarks
import navigator
import output
from gp_core import OptimizationError
from harness import ConfigError, ExperimentError, ExperimentSpec, pairwise_distances, run_experiment, run_suite
from kernel import NumericalConditioningError
from settings import Settings
from similarity import DegenerateInputError, MeasureConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Compare GP predictive distributions fitted to benchmark functions.")
    parser.add_argument('--log-level', default=None, help='Logging level (default from settings)')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='Run every experiment of a suite config')
    run.add_argument('--config', type=Path, default=None, help='Suite YAML (default from settings)')
    run.add_argument('--out', type=Path, default=None, help='Output directory (default from settings)')
    run.add_argument('--seed', type=int, default=None)
    run.add_argument('--restarts', type=int, default=None)
    run.add_argument('--workers', type=int, default=None, help='Parallel experiments')

    compare = sub.add_parser('compare', help='Fit two functions and print one similarity report')
    compare.add_argument('--fn-a', required=True, help='Function id, e.g. ackley:a=70,c=2pi')
    compare.add_argument('--fn-b', required=True)
    _add_measure_arguments(compare)
    compare.add_argument('--points', type=int, default=None, help='Grid points per dimension')
    compare.add_argument('--seed', type=int, default=None)
    compare.add_argument('--restarts', type=int, default=None)

    sub.add_parser('list-functions', help='List benchmark functions and their defaults')

    screen = sub.add_parser('screen', help='Pairwise distances over several objectives')
    screen.add_argument('--fn', action='append', required=True, help='Function id (repeat)')
    screen.add_argument('--threshold', type=float, default=0.1)
    _add_measure_arguments(screen)
    screen.add_argument('--points', type=int, default=None)
    screen.add_argument('--seed', type=int, default=None)
    screen.add_argument('--restarts', type=int, default=None)

    show = sub.add_parser('show', help='Print stored results')
    show.add_argument('--out', type=Path, default=None)
    show.add_argument('--pair', default=None, help='Pair id to print')
    return parser


def _add_measure_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--eps1', type=float, default=0.25)
    parser.add_argument('--eps2', type=float, default=0.0)
    parser.add_argument('--delta', type=float, default=0.0)
    parser.add_argument('--d1', default='avg_relative_distance', help='avg_relative_distance, p_norm:P, fraction_differing, count_differing')
    parser.add_argument('--d2', default=None, help='none, entrywise_frobenius, entrywise_max')


def _measure_from_args(args) -> MeasureConfig:
    d2 = args.d2 or ('entrywise_frobenius' if args.eps2 > 0 else 'none')
    return MeasureConfig(eps1=args.eps1, eps2=args.eps2, delta=args.delta, d2_variant=d2, **MeasureConfig.parse_d1(args.d1))


def cmd_run(args, settings: Settings) -> int:
    config_file = args.config or settings.config_file
    out_dir = args.out or settings.output_dir
    outcome = run_suite(config_file, out_dir, settings, seed=args.seed, restarts=args.restarts, workers=args.workers)
    print(output.render_digest(outcome))
    print(f"Results written to {out_dir}")
    if outcome.warning_count:
        print(f"{outcome.warning_count} experiment(s) failed; see the error documents in {out_dir}")
    return outcome.exit_code


def cmd_compare(args, settings: Settings) -> int:
    fn_a = benchmarks.parse_function(args.fn_a)
    spec = ExperimentSpec(
        pair_id='compare',
        fn_a=fn_a,
        fn_b=benchmarks.parse_function(args.fn_b),
        points_per_dim=settings.points_per_dim(fn_a.dimension) if args.points is None else args.points,
        measure=_measure_from_args(args),
        seed=settings.seed if args.seed is None else args.seed,
        restarts=settings.restarts if args.restarts is None else args.restarts,
        max_noise_variance=settings.max_noise_variance,
    )
    result = run_experiment(spec)
    print(output.render_report(spec.pair_id, spec.fn_a.describe(), spec.fn_b.describe(), result.report))
    return EXIT_OK


def cmd_list_functions(args, settings: Settings) -> int:
    for fn in benchmarks.catalog():
        domain = " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in fn.domain)
        print(f"{fn.describe():<40} d={fn.dimension}  {domain}")
    return EXIT_OK


def cmd_screen(args, settings: Settings) -> int:
    functions = [benchmarks.parse_function(text) for text in args.fn]
    screen = pairwise_distances(
        functions,
        _measure_from_args(args),
        points_per_dim=settings.points_per_dim(functions[0].dimension) if args.points is None else args.points,
        seed=settings.seed if args.seed is None else args.seed,
        restarts=settings.restarts if args.restarts is None else args.restarts,
        threshold=args.threshold,
        max_noise_variance=settings.max_noise_variance,
    )
    print(output.render_screening(screen))
    return EXIT_OK


def cmd_show(args, settings: Settings) -> int:
    out_dir = args.out or settings.output_dir
    if args.pair is None:
        for row in navigator.load_summary(out_dir):
            status = row['total'] or 'FAILED'
            print(f"{row['pair_id']:<32} {row['fn_a']} vs {row['fn_b']}: {status}")
        return EXIT_OK
    document = navigator.load_result(out_dir, args.pair)
    if document is None:
        print(f"No result document for '{args.pair}' in {out_dir}. Known: {', '.join(navigator.list_results(out_dir)) or 'none'}")
        return EXIT_CONFIG
    if 'error' in document:
        print(f"{args.pair} failed at {document['error']['stage']}: {document['error']['message']}")
        return EXIT_OK
    for key, value in document['report'].items():
        print(f"  {key:<16} {value}")
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'compare': cmd_compare,
    'list-functions': cmd_list_functions,
    'screen': cmd_screen,
    'show': cmd_show,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings()

    # Configure logging
    logging.basicConfig(level=(args.log_level or settings.log_level).upper(),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    try:
        return COMMANDS[args.command](args, settings)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExperimentError, OptimizationError, NumericalConditioningError, DegenerateInputError) as e:
        print(f"Numerical failure: {e}", file=sys.stderr)
        return EXIT_ALL_FAILED
    except ValueError as e:
        print(f"Invalid arguments: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
