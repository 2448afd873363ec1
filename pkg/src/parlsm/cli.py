# -*- encoding: utf-8
"""
Price American puts with the iterative parallel least-squares Monte
Carlo engine, and check it against LSM and a finite-difference oracle.

Usage:
    parlsm (price-parallel | price-lsm | price-fd | price-european | table | converge) [options]
    parlsm -h | --help

Commands:
    price-parallel      Iterative engine; writes result, trace.csv,
                        boundary.csv and coefficients.json.
    price-lsm           Longstaff-Schwartz on stored paths; writes result
                        and lsm_coefficients.csv.
    price-fd            Implicit finite differences; writes result and
                        boundary.csv.
    price-european      Black-Scholes closed form.
    table               The 20-cell comparison; writes table.csv, table.txt.
    converge            Convergence study; writes converge.csv and
                        converge_traces.csv.

Options:
    -h --help                   Show this screen.
    --config=<FILE>             Flat YAML file of any of the keys below.
    --verbose                   Log every iteration.

    --spot=<S>                  Spot price.  Default 36.
    --rate=<R>                  Continuously compounded rate.  Default 0.06.
    --vol=<V>                   Volatility.  Default 0.2.
    --strike=<K>                Strike.  Default 40.
    --maturity=<T>              Maturity in years.  Default 1.
    --dates-per-year=<M>        Exercise dates per year.  Default 50.

    --n-paths=<N>               Total paths.  Default 100000.
    --n-iterations=<n>          Iterations of the parallel engine.  Default 100.
    --group-size=<D>            Dates per regression block.  Default 10.
    --basis=<B>                 time (1,S,S²,t,tS,tS²) or spot (1,S,S²).
    --lam=<L>                   U/V ramp scale.  Default 2.
    --mu=<MU>                   U/V ramp decay.  Default 2.
    --nu=<NU>                   Price weight ramp.  Default 0.99.
    --beta=<B>                  Boundary weight width.  Default 0.2 x strike.
    --beta-shrink=<F>           Width multiplier per iteration.  Default 1.
    --boundary-weights=<B>      Focus the regression on the boundary.
    --seed=<SEED>               Master seed; AMC_SEED overrides the file.
    --workers=<W>               Worker threads.  Default 1.
    --bootstrap=<MODE>          european or warm_start.
    --warm-start-file=<FILE>    coefficients.json from an earlier run.
    --ridge=<R>                 Relative ridge.  Default 1e-10.
    --ridge-mode=<M>            trace (ridge x mean diagonal) or column.
    --lsm-parallel-paths=<B>    Simulate LSM paths on every worker.

    --fd-time-steps=<N>         Default 40000.
    --fd-space-steps=<N>        Default 1000.
    --fd-s-max=<S>              Default 4 x strike.
    --fd-method=<M>             projection or psor.

    --output-dir=<DIR>          Where to write results.  Default ".".
    --format=<F>                json, csv or text.  Default json.
    --study-axis=<AXIS>         paths, iterations, workers or group_size.
    --study-points=<LIST>       Comma-separated axis values.
    --study-repeats=<N>         Repeats per point.  Default 5.
"""

import logging
import os
import sys

import attr
import docopt

from parlsm import diagnostics, lsm, results, table
from parlsm.config import COMMANDS, KEY_TYPES, parse_config
from parlsm.errors import AmcError, ConfigurationError, OutputError
from parlsm.oracle import american_put_fd, european_put_closed_form
from parlsm.regression import CoefficientSet


LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_OUTPUT = 4

RESULT_FILES = {'json': 'result.json', 'csv': 'result.csv', 'text': 'result.txt'}


def _write(config, name, text):
    results.write_text(os.path.join(config.output_dir, name), text)


def _emit(config, result):
    result = attr.evolve(result, config=config.to_dict())
    _write(config, RESULT_FILES[config.format], results.emit_result(result, config.format))
    print(results.result_to_text(result), end='')
    return result


def _load_warm_start(config, spec):
    try:
        with open(config.warm_start_file) as infile:
            text = infile.read()
    except OSError as err:
        raise ConfigurationError(
            f'unable to read {config.warm_start_file}: {err}', key='warm_start_file'
        ) from err
    return CoefficientSet.from_json(text, spec)


def price_parallel(config):
    setup = config.setup()
    if config.bootstrap == 'warm_start':
        setup = attr.evolve(
            setup, bootstrap=_load_warm_start(config, setup.basis_spec())
        )
    result = _emit(config, setup.price())
    _write(config, 'trace.csv', results.trace_to_csv(result.iteration_trace))
    _write(config, 'boundary.csv', results.boundary_to_csv(result.boundary))
    _write(config, 'coefficients.json', result.coefficients.to_json())


def price_lsm(config):
    setup = config.setup(engine='lsm')
    result = _emit(config, setup.price())
    spec = lsm.LsmConfig().basis_for(setup.schedule())
    _write(
        config, 'lsm_coefficients.csv',
        lsm.coefficients_to_csv(result.coefficients, spec)
    )


def price_fd(config):
    solution = american_put_fd(config.market_params(), config.fd_grid())
    result = _emit(config, solution.to_result('fd'))
    _write(config, 'boundary.csv', results.boundary_to_csv(result.boundary))


def price_european(config):
    price = european_put_closed_form(config.market_params())
    _emit(config, results.PricingResult(
        engine='european', price=price, standard_error=0.0
    ))


def run_table(config):
    rows = table.run_table(config)
    text = table.table_to_text(rows)
    _write(config, 'table.csv', table.table_to_csv(rows))
    _write(config, 'table.txt', text)
    print(text, end='')
    if any(r.error for r in rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def converge(config):
    study = diagnostics.ConvergenceStudy(
        axis=config.study_axis,
        points=config.study_points,
        repeats=config.study_repeats,
    )
    study = diagnostics.run_convergence_study(study, config.setup())
    _write(config, 'converge.csv', diagnostics.study_to_csv(study))
    _write(config, 'converge_traces.csv', diagnostics.traces_to_csv(study))

    for s in study.summaries():
        print(
            f'{study.axis}={s.axis_value}: {s.mean_price:.4f}, '
            f'se {s.se_internal:.4f} (empirical {s.se_empirical:.4f}), '
            f'{s.wall_ms:.0f} ms'
        )
    if study.axis in ('paths', 'iterations'):
        rate = diagnostics.estimate_rate(study)
        print(f'log-log slope of s.e.: {rate.slope:.3f} ± {rate.slope_stderr:.3f}')
        if study.repeats > 1 and all(s.se_empirical > 0 for s in study.summaries()):
            rate = diagnostics.estimate_rate(study, column='se_empirical')
            print(
                f'log-log slope of empirical s.e.: {rate.slope:.3f} '
                f'± {rate.slope_stderr:.3f}'
            )


COMMAND_HANDLERS = {
    'price-parallel': price_parallel,
    'price-lsm': price_lsm,
    'price-fd': price_fd,
    'price-european': price_european,
    'table': run_table,
    'converge': converge,
}


def _flags(args):
    return {
        key: args.get('--' + key.replace('_', '-'))
        for key in KEY_TYPES if key != 'command'
    }


def run(config):
    try:
        os.makedirs(config.output_dir, exist_ok=True)
    except OSError as err:
        raise OutputError(f'Unable to create {config.output_dir}: {err}') from err
    return COMMAND_HANDLERS[config.command](config) or EXIT_OK


def main(argv=None):
    args = docopt.docopt(__doc__, argv=argv)
    logging.basicConfig(
        level=logging.DEBUG if args['--verbose'] else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s %(message)s',
    )

    command = next(c for c in COMMANDS if args[c])
    flags = _flags(args)
    flags['command'] = command

    try:
        config = parse_config(path=args['--config'], flags=flags)
        return run(config)
    except ConfigurationError as err:
        print(f'Configuration error: {err}', file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as err:
        print(f'Output error: {err}', file=sys.stderr)
        return EXIT_OUTPUT
    except AmcError as err:
        print(f'Numerical failure: {err}', file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
