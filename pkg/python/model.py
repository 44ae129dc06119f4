"""System topology for coded multi-access servers.

A system has ``n`` unit-rate servers.  ``n_coded`` of them store a
systematic MDS combination of all ``k`` content types; the rest are
split into ``k`` systematic classes, one per job type, in proportion
to the allocation fractions ``alpha``.

Job types are numbered 1..k in the public API.  Array-valued
quantities (arrival rates, per-class loads) are indexed from 0, with
position ``k`` reserved for the coded class wherever a per-class
vector has ``k+1`` entries.

"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

model_logger = logging.getLogger('model_logger')
model_logger.setLevel(logging.INFO)

#: Tolerance on sum(alpha) before renormalization.
ALPHA_SUM_TOL = 1e-9


def largest_remainder(total, weights):
    """Apportion an integer total across weights so the parts are
    integers summing exactly to total.  Each part gets the floor of its
    quota; leftover units go to the largest fractional remainders,
    ties broken by lower index.

    """
    weights = np.asarray(weights, dtype=float)
    quotas = np.round(total * weights / weights.sum(), 9)
    parts = np.floor(quotas).astype(int)
    leftover = int(total - parts.sum())
    order = sorted(range(len(weights)),
                   key=lambda i: (-(quotas[i] - parts[i]), i))
    for i in order[:leftover]:
        parts[i] += 1
    return tuple(int(p) for p in parts)


@dataclass(frozen=True)
class SystemSpec:
    """Validated server topology.  Construct with :func:`build_system`
    rather than directly.

    Attributes:
        n (int): total number of servers.
        k (int): number of job types.
        n_coded (int): number of coded servers.
        alpha (tuple of float): allocation fractions, summing to 1.
        s (tuple of int): systematic server count per job type.

    """
    n: int
    k: int
    n_coded: int
    alpha: tuple
    s: tuple

    def class_sizes(self):
        """Array of k+1 class sizes; the last entry is the coded class."""
        return np.array(list(self.s) + [self.n_coded], dtype=float)

    def uncoded(self):
        """The uncoded counterpart: same n and alpha, no coded servers."""
        return build_system(self.n, self.k, 0, self.alpha)

    def to_json(self):
        return {'n': self.n, 'k': self.k, 'n_coded': self.n_coded,
                'alpha': list(self.alpha)}

    @classmethod
    def from_json(cls, data):
        unknown = set(data) - {'n', 'k', 'n_coded', 'alpha'}
        if len(unknown):
            raise ValueError('Unknown system keys: %s' % sorted(unknown))
        return build_system(data['n'], data['k'], data['n_coded'],
                            data['alpha'])


def build_system(n, k, n_coded, alpha):
    """Validate a topology and apportion systematic servers.

    Args:
        n (int): total servers.
        k (int): job types.
        n_coded (int): coded servers, 0 <= n_coded < n.
        alpha (sequence of float): k positive fractions summing to 1.

    Returns:
        SystemSpec with integer per-class counts; sum(s) + n_coded == n.

    Raises:
        ValueError: on any violated constraint, including a job type
          left with no systematic server after rounding.

    """
    n, k, n_coded = int(n), int(k), int(n_coded)
    if n < 1 or k < 1:
        raise ValueError('Need n >= 1 and k >= 1 (got n=%i, k=%i).' % (n, k))
    if n_coded < 0 or n_coded >= n:
        raise ValueError('Need 0 <= n_coded < n (got n_coded=%i, n=%i).'
                         % (n_coded, n))
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (k,):
        raise ValueError('alpha must have %i entries (got %s).'
                         % (k, alpha.shape))
    if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
        raise ValueError('alpha entries must be positive (got %s).'
                         % list(alpha))
    if abs(alpha.sum() - 1.) > ALPHA_SUM_TOL:
        raise ValueError('alpha must sum to 1 (got %.12g).' % alpha.sum())
    alpha = alpha / alpha.sum()
    s = largest_remainder(n - n_coded, alpha)
    if min(s) < 1:
        raise ValueError('Rounding leaves a job type with no systematic '
                         'server (s=%s).' % (s,))
    return SystemSpec(n=n, k=k, n_coded=n_coded,
                      alpha=tuple(float(a) for a in alpha), s=s)


def build_system_from_counts(s, n_coded):
    """Build a system from explicit systematic counts; alpha is taken
    as s_i / sum(s) so apportionment reproduces s exactly."""
    s = [int(x) for x in s]
    if min(s) < 1:
        raise ValueError('Systematic counts must be positive (got %s).' % s)
    total = sum(s)
    system = build_system(total + n_coded, len(s), n_coded,
                          [x / total for x in s])
    assert system.s == tuple(s)
    return system


@dataclass(frozen=True)
class RecoveryPattern:
    """Class-level recovery set for one job type.

    ``num_coded == 0`` means one task on an own-type systematic
    server.  Otherwise the job forks into ``num_coded`` tasks on
    distinct coded servers plus one task on a systematic server of each
    helper type, k tasks in all.

    """
    job_type: int
    num_coded: int
    helper_types: tuple = ()

    def __post_init__(self):
        if self.num_coded == 0 and len(self.helper_types):
            raise ValueError('Own-systematic pattern takes no helpers.')
        if self.job_type in self.helper_types:
            raise ValueError('Job type %i cannot help itself.' % self.job_type)

    @property
    def task_count(self):
        if self.num_coded == 0:
            return 1
        return self.num_coded + len(self.helper_types)

    def tasks_of(self, c, k):
        """Tasks this pattern places in class c (0-based; c == k is the
        coded class)."""
        if c == k:
            return self.num_coded
        if self.num_coded == 0:
            return int(c + 1 == self.job_type)
        return int((c + 1) in self.helper_types)

    def task_vector(self, k):
        return np.array([self.tasks_of(c, k) for c in range(k + 1)],
                        dtype=float)

    def to_json(self):
        return {'job_type': self.job_type, 'num_coded': self.num_coded,
                'helper_types': list(self.helper_types)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data['job_type']), int(data['num_coded']),
                   tuple(int(h) for h in data['helper_types']))


def _check_job_type(system, job_type):
    if not (1 <= job_type <= system.k):
        raise ValueError('job_type must lie in [1, %i] (got %s).'
                         % (system.k, job_type))


def enumerate_recovery_patterns(system, job_type):
    """Feasible recovery patterns for one job type, in canonical order:
    own-systematic first, then ascending num_coded, then lexicographic
    helper sets.

    """
    _check_job_type(system, job_type)
    k = system.k
    others = [j for j in range(1, k + 1) if j != job_type]
    patterns = [RecoveryPattern(job_type, 0)]
    for k1 in range(1, k + 1):
        if system.n_coded < k1:
            break
        for helpers in itertools.combinations(others, k - k1):
            if all(system.s[h - 1] >= 1 for h in helpers):
                patterns.append(RecoveryPattern(job_type, k1, helpers))
    return patterns


def all_patterns(system):
    """Patterns for every job type, as a list of lists."""
    return [enumerate_recovery_patterns(system, i)
            for i in range(1, system.k + 1)]


# Exact linear algebra.

def row_rank(rows):
    """Rank of a list of rows by Gaussian elimination over Fractions."""
    mat = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncol = len(mat[0]) if len(mat) else 0
    for col in range(ncol):
        pivot = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col] / mat[rank][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
    return rank


def in_row_span(rows, target):
    """True if target lies in the span of rows (exact)."""
    if len(rows) == 0:
        return all(Fraction(x) == 0 for x in target)
    return row_rank(list(rows) + [target]) == row_rank(rows)


class GeneratorSpec:
    """Generator matrix of a systematic MDS code, with exact rational
    coefficients.  Rows 0..k-1 are the standard basis; the remaining
    n_coded rows are the coded combinations.

    """
    def __init__(self, rows, k, check=True):
        rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if any(len(r) != k for r in rows):
            raise ValueError('Every generator row needs %i entries.' % k)
        for i in range(k):
            basis = tuple(Fraction(int(i == j)) for j in range(k))
            if rows[i] != basis:
                raise ValueError('Row %i is not the systematic basis row.' % i)
        self.k = k
        self.rows = rows
        self.n_coded = len(rows) - k
        if check and not self.is_mds():
            raise ValueError('Generator is not MDS: some %i rows are '
                             'dependent.' % k)

    @classmethod
    def vandermonde(cls, k, n_coded, check=True):
        """Systematic Vandermonde code; coded row j is (1, x, x^2, ...)
        with x = j+1.  Positive distinct points make every k-row minor
        nonzero."""
        rows = [[int(i == j) for j in range(k)] for i in range(k)]
        for x in range(1, n_coded + 1):
            rows.append([Fraction(x) ** p for p in range(k)])
        return cls(rows, k, check=check)

    def coded_row(self, j):
        return self.rows[self.k + j]

    def is_mds(self):
        for subset in itertools.combinations(self.rows, self.k):
            if row_rank(subset) < self.k:
                return False
        return True


def verify_pattern_decodable(generator, pattern, coded_rows=None):
    """Check that a pattern's servers can reconstruct its job type.

    Args:
        generator (GeneratorSpec): the code.
        pattern (RecoveryPattern): the recovery pattern.
        coded_rows (sequence of int): which coded rows (0-based) the
          pattern's coded tasks use.  If None, every choice of
          ``num_coded`` coded rows is checked and all must decode.

    Returns:
        bool: True iff the job type's basis vector lies in the row span
        of the selected rows.

    Raises:
        ValueError: if the pattern does not fit the generator.

    """
    k = generator.k
    if not (1 <= pattern.job_type <= k) or \
       any(not (1 <= h <= k) for h in pattern.helper_types):
        raise ValueError('Pattern %s does not fit a k=%i generator.'
                         % (pattern, k))
    if pattern.num_coded > generator.n_coded:
        raise ValueError('Pattern needs %i coded rows; generator has %i.'
                         % (pattern.num_coded, generator.n_coded))
    target = [int(j + 1 == pattern.job_type) for j in range(k)]
    if pattern.num_coded == 0:
        return in_row_span([generator.rows[pattern.job_type - 1]], target)
    helpers = [generator.rows[h - 1] for h in pattern.helper_types]
    if coded_rows is None:
        choices = itertools.combinations(range(generator.n_coded),
                                         pattern.num_coded)
    else:
        if len(coded_rows) != pattern.num_coded:
            raise ValueError('Need %i coded rows (got %i).'
                             % (pattern.num_coded, len(coded_rows)))
        choices = [tuple(coded_rows)]
    for choice in choices:
        rows = helpers + [generator.coded_row(j) for j in choice]
        if not in_row_span(rows, target):
            model_logger.debug('Pattern %s fails with coded rows %s'
                               % (pattern, choice))
            return False
    return True
