"""Command-line front end: ``mimorelay {single,sweep-power,sweep-position,sweep-users,validate}``."""

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace

from . import __version__
from .config import load_config, render_config, with_sweep
from .errors import ConfigError, MimoRelayError
from .montecarlo import WORKERS_ENV, ExperimentConfig, SweepResult, run_sweep
from .schemes import SchemeId

__all__ = ['CSV_HEADER', 'CSV_SCHEMA_VERSION', 'DEFAULT_SWEEPS', 'format_number',
           'sweep_rows', 'write_csv', 'summary_table', 'main']

CSV_SCHEMA_VERSION = 1
CSV_HEADER = (
    'sweep_axis', 'sweep_value', 'scheme', 'mean_sum_exact', 'stderr_exact',
    'mean_sum_lower', 'stderr_lower', 'realizations', 'discards',
    'bound_violation_fraction',
)

SUBCOMMAND_AXIS = {
    'single': None,
    'sweep-power': 'power',
    'sweep-position': 'rs_position',
    'sweep-users': 'users',
}

DEFAULT_SWEEPS = {
    'power': (10.0, 16.0, 22.0, 28.0, 34.0),
    'rs_position': (0.1, 0.25, 0.5, 0.75, 0.9),
    'users': (2.0, 3.0, 4.0, 5.0, 6.0),
}

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

logger = logging.getLogger(__name__)


def format_number(x) -> str:
    """12 significant digits, trailing zeros dropped (``'%.12g'``)."""
    if isinstance(x, int):
        return str(x)
    return format(float(x), '.12g')


def sweep_rows(result: SweepResult):
    """One row of formatted fields per (sweep value, scheme)."""
    axis = result.axis or 'single'
    rows = []
    for value, point in result.points:
        for scheme, st in point.stats.items():
            rows.append((
                axis, '' if value is None else format_number(value), scheme.value,
                format_number(st.mean_sum_exact), format_number(st.stderr_exact),
                format_number(st.mean_sum_lower), format_number(st.stderr_lower),
                format_number(st.realizations), format_number(st.discards),
                format_number(st.bound_violation_fraction),
            ))
    return rows


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


def summary_table(rows) -> str:
    """Fixed-width table built from the same formatted fields as the CSV."""
    head = ('axis', 'value', 'scheme', 'sum_exact', '+-se', 'sum_lower', '+-se', 'N', 'disc', 'viol')
    cols = [head] + [tuple(r) for r in rows]
    widths = [max(len(c[i]) for c in cols) for i in range(len(head))]
    lines = ['  '.join(field.rjust(w) for field, w in zip(c, widths)) for c in cols]
    lines.insert(1, '  '.join('-' * w for w in widths))
    return '\n'.join(lines)


def _parse_values(text):
    try:
        return tuple(float(s) for s in text.split(',') if s.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", key='--values') from None


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, 'seed', None) is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("must be a 64-bit unsigned integer", key='--seed')
        overrides['master_seed'] = args.seed
    if getattr(args, 'realizations', None) is not None:
        if args.realizations < 1:
            raise ConfigError("must be >= 1", key='--realizations')
        overrides['realizations'] = args.realizations
    if getattr(args, 'schemes', None):
        try:
            overrides['schemes'] = tuple(SchemeId.parse(s) for s in args.schemes.split(',') if s.strip())
        except ValueError as exc:
            raise ConfigError(str(exc), key='--schemes') from None
    if overrides:
        cfg = replace(cfg, **overrides)

    if args.command == 'validate':
        return cfg
    axis = SUBCOMMAND_AXIS[args.command]
    if axis is None:
        return with_sweep(cfg, None, ())
    if args.values:
        values = _parse_values(args.values)
    elif cfg.sweep_axis == axis:
        values = cfg.sweep_values
    elif cfg.sweep_axis is None:
        values = DEFAULT_SWEEPS[axis]
    else:
        raise ConfigError(f"config sweeps {cfg.sweep_axis!r} but the command sweeps {axis!r}",
                          key='sweep.axis')
    return with_sweep(cfg, axis, values)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog='mimorelay',
        description='Monte Carlo sum rates of linear BS precoding / relay beamforming schemes '
                    'for MIMO relay broadcast channels with a direct link.',
        epilog=f'Worker processes default to ${WORKERS_ENV} (else 1).')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (
            ('single', 'evaluate one operating point'),
            ('sweep-power', 'sweep P_s = P_r in dB'),
            ('sweep-position', 'sweep the relay position'),
            ('sweep-users', 'sweep K = M_b = M_r')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--config', metavar='PATH', help="config file or 'paper_defaults'")
        p.add_argument('--seed', type=int, metavar='U64', help='override mc.seed')
        p.add_argument('--realizations', type=int, metavar='N', help='override mc.realizations')
        p.add_argument('--schemes', metavar='LIST', help='comma-separated scheme names')
        p.add_argument('--output', metavar='PATH', help='CSV destination (default: stdout)')
        p.add_argument('--format', choices=('csv',), default='csv')
        p.add_argument('--workers', type=int, metavar='N', help=f'worker processes (default ${WORKERS_ENV} or 1)')
        if name != 'single':
            p.add_argument('--values', metavar='LIST', help='comma-separated sweep values')

    v = sub.add_parser('validate', help='check a config and print the resolved settings')
    v.add_argument('--config', metavar='PATH', required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        cfg = _resolve(args)
    except (ConfigError, MimoRelayError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == 'validate':
        sys.stdout.write(render_config(cfg))
        return EXIT_OK

    if args.workers is not None and args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_sweep(cfg, workers=args.workers)
    except (MimoRelayError, ArithmeticError) as exc:
        print(f"runtime error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # e.g. malformed worker-count environment variable
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = sweep_rows(result)
    buf = io.StringIO()
    write_csv(rows, buf)
    if args.output:
        with open(args.output, 'w', newline='') as fh:
            fh.write(buf.getvalue())
        print(summary_table(rows))
    else:
        sys.stdout.write(buf.getvalue())
        print(summary_table(rows), file=sys.stderr)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
