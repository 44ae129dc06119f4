"""Grids of region membership, for drawing capacity regions."""
import csv
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .regions import uncoded_contains, coded_contains_waterfill

cap_logger = logging.getLogger('cap_logger')
cap_logger.setLevel(logging.INFO)

SWEEP_DIMENSIONS = (2, 3)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid: per-axis lower and upper bounds and point
    counts (inclusive of both ends)."""
    lower: tuple
    upper: tuple
    points: tuple

    @classmethod
    def square(cls, k, upper, points, lower=0.):
        return cls((float(lower),) * k, (float(upper),) * k, (int(points),) * k)

    @classmethod
    def stepped(cls, k, upper, step, lower=0.):
        """Grid with a fixed step, e.g. 0.25 rate units."""
        count = int(round((upper - lower) / step)) + 1
        return cls.square(k, lower + (count - 1) * step, count, lower)

    def axes(self):
        return [np.linspace(lo, hi, p)
                for lo, hi, p in zip(self.lower, self.upper, self.points)]


def region_sweep(system, grid_spec):
    """Evaluate both region tests on every grid point.

    Returns:
        List of (lam, uncoded_verdict, coded_verdict) rows in row-major
        order (first axis slowest).

    Raises:
        ValueError: for k outside the supported sweep dimensions, or a
          malformed grid.

    """
    if system.k not in SWEEP_DIMENSIONS:
        raise ValueError('Region sweeps support k in %s (got k=%i).'
                         % (SWEEP_DIMENSIONS, system.k))
    g = grid_spec
    if not (len(g.lower) == len(g.upper) == len(g.points) == system.k):
        raise ValueError('Grid dimension does not match k=%i.' % system.k)
    if min(g.points) < 2:
        raise ValueError('Need at least 2 points per axis.')
    rows = []
    for lam in itertools.product(*g.axes()):
        lam = tuple(float(x) for x in lam)
        rows.append((lam, uncoded_contains(system, lam).verdict,
                     coded_contains_waterfill(system, lam).verdict))
    cap_logger.info('Swept %i points for n=%i, n_coded=%i.'
                    % (len(rows), system.n, system.n_coded))
    return rows


def region_header(k):
    return ['lambda_%i' % (i + 1) for i in range(k)] + ['uncoded', 'coded']


def write_region_csv(rows, k, filename):
    with open(filename, 'w', newline='') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(region_header(k))
        for lam, unc, cod in rows:
            writer.writerow(['%.10g' % x for x in lam] + [unc, cod])


def gained_points(rows):
    """Rows that are coded-interior but uncoded-exterior."""
    return [r for r in rows if r[1] == 'exterior' and r[2] == 'interior']


def lost_points(rows):
    """Rows that are uncoded-interior but coded-exterior."""
    return [r for r in rows if r[1] == 'interior' and r[2] == 'exterior']
