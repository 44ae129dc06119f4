"""Membership tests for the uncoded and coded service capacity regions.

The coded region has a closed-form water-filling test on the residual
capacities r_i = s_i - lambda_i; an independent linear program over
class-aggregated recovery patterns serves as an oracle for it.

"""
import logging
from dataclasses import dataclass

import numpy as np

from .. import config
from ..model import all_patterns
from .simplex import TwoPhaseSimplex, LPError

cap_logger = logging.getLogger('cap_logger')
cap_logger.setLevel(logging.INFO)

INTERIOR = 'interior'
BOUNDARY = 'boundary'
EXTERIOR = 'exterior'


@dataclass(frozen=True)
class Membership:
    """Verdict plus a signed margin in rate units (positive inside)."""
    verdict: str
    margin: float

    @classmethod
    def from_margin(cls, margin, tol=None):
        tol = config.get('tolerance', tol)
        if margin > tol:
            verdict = INTERIOR
        elif margin < -tol:
            verdict = EXTERIOR
        else:
            verdict = BOUNDARY
        return cls(verdict, float(margin))

    @property
    def interior(self):
        return self.verdict == INTERIOR


def as_rates(system, lam):
    """Validate an arrival vector against a system; returns a float
    array."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (system.k,):
        raise ValueError('Arrival vector needs %i entries (got shape %s).'
                         % (system.k, lam.shape))
    if not np.all(np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError('Arrival rates must be finite and non-negative '
                         '(got %s).' % list(lam))
    return lam


def uncoded_contains(system, lam, tol=None):
    """Box test lambda_i <= alpha_i * n, ignoring n_coded."""
    lam = as_rates(system, lam)
    margin = np.min(np.asarray(system.alpha) * system.n - lam)
    return Membership.from_margin(margin, tol)


def systematic_contains(system, lam, tol=None):
    """Box test on the integer systematic counts s."""
    lam = as_rates(system, lam)
    return Membership.from_margin(np.min(np.asarray(system.s) - lam), tol)


@dataclass(frozen=True)
class ResidualProfile:
    r: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    sort_order: np.ndarray

    @property
    def sorted(self):
        return self.r[self.sort_order]


def residual_profile(system, lam):
    lam = as_rates(system, lam)
    r = np.asarray(system.s, dtype=float) - lam
    return ResidualProfile(r=r, r_plus=np.maximum(r, 0.),
                           r_minus=np.maximum(-r, 0.),
                           sort_order=np.argsort(r, kind='stable'))


def waterfill_margin(system, lam):
    """Largest total excess demand the coded servers can absorb, minus
    the actual excess sum r_i^-.

    With r sorted ascending and P(k0) the sum of the k0 smallest
    r_i^+, every offloaded job needs k tasks with at most one on each
    other type, so the excess may not exceed (n_coded + P(k0))/k0.  A
    job uses at most M = min(n_coded, k) coded servers; when M < k it
    also needs k - M helpers, which bounds the excess by
    P(k0)/(k0 - M) for k0 > M.

    """
    prof = residual_profile(system, lam)
    if system.n_coded == 0:
        return float(prof.r.min())
    k = system.k
    cum = np.cumsum(np.maximum(prof.sorted, 0.))
    k0 = np.arange(1, k + 1)
    bound = ((system.n_coded + cum) / k0).min()
    m = min(system.n_coded, k)
    if m < k:
        bound = min(bound, (cum[m:] / (k0[m:] - m)).min())
    return float(bound - prof.r_minus.sum())


def coded_contains_waterfill(system, lam, tol=None):
    return Membership.from_margin(waterfill_margin(system, lam), tol)


# Class-aggregated LP oracle.

def _lp_problem(system, lam):
    """Variables: f_{i,p} for every (type, pattern), then u >= 0 with
    the uniform slack t = u - shift.  Returns (c, A_ub, b_ub, A_eq,
    b_eq, index, shift) where index maps each type to its column
    range."""
    pats = all_patterns(system)
    k = system.k
    sizes = system.class_sizes()
    cols, index = [], []
    for i, plist in enumerate(pats):
        start = len(cols)
        cols.extend(p.task_vector(k) for p in plist)
        index.append((start, len(cols)))
    nf = len(cols)
    tasks = np.array(cols).T            # (k+1, nf)
    shift = float(k * lam.sum() + 1.)
    live = np.nonzero(sizes > 0)[0]
    A_ub = np.hstack([tasks[live], np.ones((len(live), 1))])
    b_ub = sizes[live] + shift
    A_eq = np.zeros((k, nf + 1))
    for i, (a, b) in enumerate(index):
        A_eq[i, a:b] = 1.
    c = np.zeros(nf + 1)
    c[-1] = 1.
    return c, A_ub, b_ub, A_eq, lam.copy(), index, shift


def lp_flows(system, lam):
    """Solve max t s.t. every class load <= capacity - t.

    Returns:
        (flows, t): flows is a list, per job type, of arrays of
        per-pattern flow f_{i,p} (ordered as enumerate_recovery_patterns);
        t is the maximal uniform slack.

    Raises:
        LPError: if the solver does not reach an optimum.

    """
    lam = as_rates(system, lam)
    c, A_ub, b_ub, A_eq, b_eq, index, shift = _lp_problem(system, lam)
    result = TwoPhaseSimplex().solve(c, A_ub, b_ub, A_eq, b_eq)
    if result.status != 'optimal':
        # The shifted slack makes every instance feasible.
        raise LPError('Capacity LP reported %s.' % result.status)
    flows = [result.x[a:b].copy() for a, b in index]
    t = result.x[-1] - shift
    cap_logger.debug('LP slack %.6g for lambda=%s' % (t, list(lam)))
    return flows, float(t)


def coded_contains_lp(system, lam, tol=None):
    flows, t = lp_flows(system, lam)
    return Membership.from_margin(t, tol)


# Two job types: closed-form boundary.

def k2_max_lambda1(system):
    """Largest supportable lambda1 (with lambda2 = 0) for k = 2."""
    if system.k != 2:
        raise ValueError('k2_max_lambda1 needs k = 2 (got k=%i).'
                         % system.k)
    s1, s2 = system.s
    c = system.n_coded
    if c == 0:
        return float(s1)
    if c == 1:
        return float(s1 + min(1, s2))
    return float(s1 + min(c, (c + s2) / 2.))


def k2_boundary(system, lambda1):
    """Largest lambda2 with (lambda1, lambda2) in the closed coded
    region, for k = 2.

    With s = (s1, s2) and c = n_coded >= 2 the boundary is piecewise
    linear:

    - lambda1 <= s1 - c:          s2 + c
    - s1 - c < lambda1 <= s1:     s2 + (c + s1 - lambda1)/2
    - s1 < lambda1 <= s1 + c/2:   s1 + s2 + c/2 - lambda1
    - s1 + c/2 < lambda1:         s2 + c - 2*(lambda1 - s1)

    up to :func:`k2_max_lambda1`, where it reaches lambda2 = 0 or
    lambda1 = s1 + c.  The last piece is the first three with the roles
    of the two types swapped.  A single coded server only serves
    one-coded patterns, so for c = 1 it is s2 + min(1, s1 - lambda1)
    up to s1 and s1 + s2 - lambda1 beyond.

    Raises:
        ValueError: for k != 2 or lambda1 outside [0, max lambda1].

    """
    if system.k != 2:
        raise ValueError('k2_boundary needs k = 2 (got k=%i).' % system.k)
    s1, s2 = system.s
    c = system.n_coded
    top = k2_max_lambda1(system)
    tol = config.get('tolerance')
    lambda1 = float(lambda1)
    if lambda1 < -tol or lambda1 > top + tol:
        raise ValueError('lambda1=%g outside [0, %g].' % (lambda1, top))
    lambda1 = min(max(lambda1, 0.), top)
    if c == 0:
        return float(s2)
    if c == 1:
        if lambda1 <= s1:
            return s2 + min(1., s1 - lambda1)
        return max(s1 + s2 - lambda1, 0.)
    if lambda1 <= s1 - c:
        return float(s2 + c)
    if lambda1 <= s1:
        return s2 + (c + s1 - lambda1) / 2.
    if lambda1 <= s1 + c / 2.:
        return s1 + s2 + c / 2. - lambda1
    return max(s2 + c - 2. * (lambda1 - s1), 0.)


def _k2_breakpoints(system):
    s1 = system.s[0]
    c = system.n_coded
    top = k2_max_lambda1(system)
    pts = [0., s1 - c, s1 - 1., s1, s1 + c / 2., top]
    return np.unique(np.clip(pts, 0., top))


def region_area_k2(system):
    """Exact area of the coded region for k = 2 (trapezoids over the
    breakpoints of the piecewise-linear boundary)."""
    x = _k2_breakpoints(system)
    y = np.array([k2_boundary(system, v) for v in x])
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.))


def uncoded_area_k2(system):
    if system.k != 2:
        raise ValueError('uncoded_area_k2 needs k = 2.')
    a1, a2 = system.alpha
    return float(a1 * system.n * a2 * system.n)


__all__ = ['Membership', 'ResidualProfile', 'LPError', 'INTERIOR',
           'BOUNDARY', 'EXTERIOR', 'as_rates', 'uncoded_contains',
           'systematic_contains', 'residual_profile', 'waterfill_margin',
           'coded_contains_waterfill', 'coded_contains_lp', 'lp_flows',
           'k2_boundary', 'k2_max_lambda1', 'region_area_k2',
           'uncoded_area_k2']
