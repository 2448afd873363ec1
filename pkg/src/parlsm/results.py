# -*- encoding: utf-8
"""Pricing results and the files we write them to.

Machine formats (JSON, CSV) keep full precision; the text format rounds
prices to three decimals and prints the standard error in brackets,
like ``4.467 (.009)``.

"""

import csv
import io
import json
import math

import attr

from parlsm.errors import OutputError


RESULT_COLUMNS = (
    'engine', 'price', 'standard_error', 'ci95_halfwidth', 'n_paths', 'wall_ms'
)
TRACE_COLUMNS = ('iteration', 'price', 'standard_error', 'boundary', 'wall_ms')
BOUNDARY_COLUMNS = ('time', 'boundary')

FORMATS = ('json', 'csv', 'text')


def format_number(value):
    """17 significant digits, or an empty cell for a missing value."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ''
    if isinstance(value, float):
        return '%.17g' % value
    return str(value)


def parse_number(text, kind=float):
    if text == '':
        return None
    return kind(text)


def format_price_se(price, standard_error):
    """Formats a price and its error as ``4.467 (.009)``."""
    se = f'{standard_error:.3f}'
    if se.startswith('0.'):
        se = se[1:]
    return f'{price:.3f} ({se})'


def _optional_float(value):
    return None if value is None else float(value)


@attr.s(frozen=True)
class TraceRow:
    """Running figures after one iteration of the iterative engine."""
    iteration = attr.ib(converter=int)
    price = attr.ib(converter=float)
    standard_error = attr.ib(converter=float)
    boundary = attr.ib(converter=_optional_float, default=None)
    wall_ms = attr.ib(converter=float, default=0.0)


def _to_trace(rows):
    if rows is None:
        return None
    return tuple(
        r if isinstance(r, TraceRow) else TraceRow(**r) for r in rows
    )


def _to_boundary(points):
    if points is None:
        return None
    return tuple((float(t), _optional_float(b)) for t, b in points)


def _non_negative(instance, attribute, value):
    if not value >= 0:
        raise ValueError(f'{attribute.name} must be >= 0, got {value}')


@attr.s(frozen=True)
class PricingResult:
    engine = attr.ib()
    price = attr.ib(converter=float)
    standard_error = attr.ib(converter=float, validator=_non_negative)
    n_paths = attr.ib(converter=int, default=0)

    # Wall time in milliseconds, per phase.
    timings = attr.ib(factory=dict)
    iteration_trace = attr.ib(converter=_to_trace, default=None)

    # (time, boundary) pairs; the boundary is None where there isn't one.
    boundary = attr.ib(converter=_to_boundary, default=None)
    config = attr.ib(factory=dict)

    # Final regression coefficients, for engines that have them.  These
    # travel in their own file, not in the result.
    coefficients = attr.ib(default=None, eq=False, repr=False)

    @property
    def ci95_halfwidth(self):
        return 1.96 * self.standard_error

    @property
    def wall_ms(self):
        return self.timings.get('total', sum(self.timings.values()))

    def to_dict(self):
        return {
            'engine': self.engine,
            'price': self.price,
            'standard_error': self.standard_error,
            'ci95_halfwidth': self.ci95_halfwidth,
            'n_paths': self.n_paths,
            'timings': dict(sorted(self.timings.items())),
            'iteration_trace': None if self.iteration_trace is None else [
                attr.asdict(row) for row in self.iteration_trace
            ],
            'boundary': None if self.boundary is None else [
                list(point) for point in self.boundary
            ],
            'config': self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data.pop('ci95_halfwidth', None)
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def result_to_csv(result):
    return _csv_text(RESULT_COLUMNS, [(
        result.engine,
        result.price,
        result.standard_error,
        result.ci95_halfwidth,
        result.n_paths,
        float(result.wall_ms),
    )])


def result_to_text(result):
    lines = [
        f'engine:        {result.engine}',
        f'price:         {format_price_se(result.price, result.standard_error)}',
        f'95% interval:  ±{result.ci95_halfwidth:.3f}',
        f'paths:         {result.n_paths}',
    ]
    if result.timings:
        phases = ', '.join(
            f'{name}={ms:.0f}' for name, ms in sorted(result.timings.items())
        )
        lines.append(f'timings (ms):  {phases}')
    return '\n'.join(lines) + '\n'


def trace_to_csv(rows):
    return _csv_text(TRACE_COLUMNS, [
        (r.iteration, r.price, r.standard_error, r.boundary, r.wall_ms)
        for r in rows
    ])


def trace_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    return tuple(
        TraceRow(
            iteration=int(row['iteration']),
            price=float(row['price']),
            standard_error=float(row['standard_error']),
            boundary=parse_number(row['boundary']),
            wall_ms=float(row['wall_ms']),
        )
        for row in reader
    )


def boundary_to_csv(points):
    return _csv_text(BOUNDARY_COLUMNS, points)


def write_text(path, text):
    """Writes ``text`` to ``path``, raising OutputError if we can't."""
    try:
        with open(path, 'w', newline='') as outfile:
            outfile.write(text)
    except OSError as err:
        raise OutputError(f'Unable to write {path}: {err}') from err


def emit_result(result, fmt='json', path=None):
    """Serialises ``result`` as json, csv or text, optionally to ``path``."""
    if fmt == 'json':
        text = result.to_json()
    elif fmt == 'csv':
        text = result_to_csv(result)
    elif fmt == 'text':
        text = result_to_text(result)
    else:
        raise ValueError(f'Unknown output format {fmt!r}; use one of {FORMATS}')

    if path is not None:
        write_text(path, text)
    return text
