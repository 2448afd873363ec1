# -*- encoding: utf-8
"""The American put comparison table.

Twenty cells: spot 36 to 44 in steps of 2, volatility 20% and 40%,
maturity one and two years.  Each cell is priced with the FD oracle,
LSM, the iterative engine and the European closed form.  A cell that
fails is logged, keeps its error text and doesn't stop the others.

"""

import csv
import io
import logging
import re

import attr

from parlsm.errors import AmcError
from parlsm.market import MarketParams
from parlsm.oracle import american_put_fd, european_put_closed_form
from parlsm.results import format_number, format_price_se


LOGGER = logging.getLogger(__name__)

SPOTS = (36.0, 38.0, 40.0, 42.0, 44.0)
VOLS = (0.2, 0.4)
MATURITIES = (1.0, 2.0)

TABLE_COLUMNS = (
    'spot', 'vol', 'maturity',
    'fd', 'lsm', 'lsm_se', 'parallel', 'parallel_se', 'european',
    'premium_fd', 'premium_lsm', 'premium_parallel',
    'fd_minus_lsm', 'fd_minus_parallel', 'lsm_minus_parallel',
    'error',
)


def cells():
    """(spot, vol, maturity) for every cell, in table order."""
    return [(s, v, t) for s in SPOTS for v in VOLS for t in MATURITIES]


def _difference(a, b):
    if a is None or b is None:
        return None
    return a - b


@attr.s(frozen=True)
class TableRow:
    spot = attr.ib()
    vol = attr.ib()
    maturity = attr.ib()
    fd = attr.ib(default=None)
    lsm = attr.ib(default=None)
    lsm_se = attr.ib(default=None)
    parallel = attr.ib(default=None)
    parallel_se = attr.ib(default=None)
    european = attr.ib(default=None)
    error = attr.ib(default='')

    @property
    def premium_fd(self):
        return _difference(self.fd, self.european)

    @property
    def premium_lsm(self):
        return _difference(self.lsm, self.european)

    @property
    def premium_parallel(self):
        return _difference(self.parallel, self.european)

    @property
    def fd_minus_lsm(self):
        return _difference(self.fd, self.lsm)

    @property
    def fd_minus_parallel(self):
        return _difference(self.fd, self.parallel)

    @property
    def lsm_minus_parallel(self):
        return _difference(self.lsm, self.parallel)

    def values(self):
        return [getattr(self, name) for name in TABLE_COLUMNS]


def price_cell(config, spot, vol, maturity, seed):
    """Prices one cell; numerical failures end up in ``error``."""
    params = MarketParams(
        spot=spot,
        rate=config.rate,
        vol=vol,
        strike=config.strike,
        maturity=maturity
    )
    row = {'spot': spot, 'vol': vol, 'maturity': maturity}
    try:
        row['european'] = european_put_closed_form(params)
        row['fd'] = american_put_fd(params, config.fd_grid()).price

        setup = attr.evolve(config.setup(), params=params, seed=seed)
        lsm = attr.evolve(setup, engine='lsm').price()
        row['lsm'], row['lsm_se'] = lsm.price, lsm.standard_error

        parallel = setup.price()
        row['parallel'], row['parallel_se'] = parallel.price, parallel.standard_error
    except AmcError as err:
        LOGGER.error('Cell (%s, %s, %s) failed: %s', spot, vol, maturity, err)
        row['error'] = str(err)
    return TableRow(**row)


def run_table(config, selected=None):
    """Prices every cell; cell ``i`` uses seed ``config.seed + i``."""
    rows = []
    for i, (spot, vol, maturity) in enumerate(cells()):
        if selected is not None and i not in selected:
            continue
        LOGGER.info('Pricing cell %d: S=%s, vol=%s, T=%s', i, spot, vol, maturity)
        rows.append(price_cell(config, spot, vol, maturity, seed=config.seed + i))
    return rows


def table_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow([format_number(v) for v in row.values()])
    return buf.getvalue()


def _cell(value, se=None):
    if value is None:
        return '-'
    if se is None:
        return f'{value:.3f}'
    return format_price_se(value, se)


def _signed(value):
    if value is None:
        return '-'
    return re.sub(r'^(-?)0\.', r'\1.', f'{value:.3f}')


def table_to_text(rows):
    header = [
        'S', 'vol', 'T', 'FD', 'LSM (s.e.)', 'Parallel (s.e.)', 'European',
        'EE FD', 'EE LSM', 'EE Par', 'FD-LSM', 'FD-Par', 'LSM-Par',
    ]
    lines = [header]
    for r in rows:
        lines.append([
            f'{r.spot:g}', f'{r.vol:g}', f'{r.maturity:g}',
            _cell(r.fd),
            _cell(r.lsm, r.lsm_se),
            _cell(r.parallel, r.parallel_se),
            _cell(r.european),
            _signed(r.premium_fd), _signed(r.premium_lsm),
            _signed(r.premium_parallel),
            _signed(r.fd_minus_lsm), _signed(r.fd_minus_parallel),
            _signed(r.lsm_minus_parallel),
        ])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    text = [
        '  '.join(cell.rjust(width) for cell, width in zip(line, widths))
        for line in lines
    ]
    for r in rows:
        if r.error:
            text.append(f'! S={r.spot:g} vol={r.vol:g} T={r.maturity:g}: {r.error}')
    return '\n'.join(text) + '\n'
