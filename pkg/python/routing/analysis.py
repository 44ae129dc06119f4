"""Loads and approximate response times induced by a routing policy.

Per-server loads are exact.  Response times use the independence
approximation: each server class behaves as an M/M/1 queue with
residual service rate 1 - nu_c, and a job's response is the maximum
over its tasks.

"""
import itertools
from collections import Counter, namedtuple
from dataclasses import dataclass
from math import comb

import numpy as np

from .. import config
from ..capacity import as_rates

#: Widest pattern accepted by inclusion-exclusion.
MAX_TERMS = 20


class NotStabilizingError(ValueError):
    """The policy overloads some server class, so a steady-state
    response time does not exist."""


@dataclass
class LoadProfile:
    """Per-class task rates.  Index k is the coded class.

    Attributes:
        nu (array): per-server task arrival rate in each class.
        totals (array): total task arrival rate into each class.

    """
    nu: np.ndarray
    totals: np.ndarray

    @property
    def max_load(self):
        return float(self.nu.max())

    def to_json(self):
        return {'nu': [float(x) for x in self.nu],
                'totals': [float(x) for x in self.totals]}


def load_profile(system, lam, policy):
    lam = as_rates(system, lam)
    if policy.system != system:
        raise ValueError('Policy was built for a different system.')
    k = system.k
    totals = np.zeros(k + 1)
    for i, pat, pr in policy.items():
        if pr > 0:
            totals += lam[i] * pr * pat.task_vector(k)
    sizes = system.class_sizes()
    nu = np.zeros(k + 1)
    live = sizes > 0
    nu[live] = totals[live] / sizes[live]
    nu[~live & (totals > 0)] = np.inf
    return LoadProfile(nu=nu, totals=totals)


def policy_is_stabilizing(profile, tol=None):
    tol = config.get('tolerance', tol)
    return bool(np.all(profile.nu < 1. - tol))


PropertyCheck = namedtuple('PropertyCheck', ['bounded', 'ratio', 'per_type',
                                             'limit'])


def check_property_41(system, policy):
    """Diversion check: (1 - q_i0) * n / n_coded per type.

    A stabilizing policy diverts at most O(n_coded/n) of any type's
    traffic away from its own servers.  Each diverted job needs at
    least one coded task, so with lambda_i near alpha_i*n the ratio
    cannot exceed 1/alpha_i; ``bounded`` compares against that limit.

    Returns:
        PropertyCheck(bounded, ratio, per_type, limit).

    """
    diverted = np.array([1. - policy.q_own(i + 1) for i in range(system.k)])
    diverted = np.clip(diverted, 0., None)
    if system.n_coded == 0:
        per_type = np.where(diverted > 0, np.inf, 0.)
    else:
        per_type = diverted * system.n / system.n_coded
    limit = 1. / np.asarray(system.alpha)
    bounded = bool(np.all(per_type <= limit * (1. + 1e-12)))
    return PropertyCheck(bounded, float(per_type.max()), per_type,
                         float(limit.min()))


def expected_max_exponentials(rates):
    """E[max] of independent exponentials with the given rates.

    Inclusion-exclusion over subsets, grouped by distinct rate so
    repeated rates cost one term per multiplicity.  Identical rates
    reduce to H_m / mu.

    """
    rates = [float(r) for r in rates]
    if len(rates) < 1 or len(rates) > MAX_TERMS:
        raise ValueError('Need 1..%i rates (got %i).' % (MAX_TERMS, len(rates)))
    if min(rates) <= 0 or not np.all(np.isfinite(rates)):
        raise ValueError('Rates must be positive and finite (got %s).' % rates)
    counts = sorted(Counter(rates).items())
    if len(counts) == 1:
        mu, m = counts[0]
        return sum(1. / j for j in range(1, m + 1)) / mu
    total = 0.
    for picks in itertools.product(*[range(m + 1) for _, m in counts]):
        size = sum(picks)
        if size == 0:
            continue
        weight = 1
        for c, (_, m) in zip(picks, counts):
            weight *= comb(m, c)
        rate = sum(c * mu for c, (mu, _) in zip(picks, counts))
        total += (-1) ** (size + 1) * weight / rate
    return total


def pattern_rates(pattern, residual, k):
    """Residual rates of a pattern's tasks."""
    if pattern.num_coded == 0:
        return [residual[pattern.job_type - 1]]
    return ([residual[h - 1] for h in pattern.helper_types]
            + [residual[k]] * pattern.num_coded)


@dataclass
class ApproxObjective:
    value: float
    per_type: np.ndarray

    def to_json(self):
        return {'value': float(self.value),
                'per_type': [float(x) for x in self.per_type]}


def _weights(lam):
    total = lam.sum()
    if total > 0:
        return lam / total
    return np.full(len(lam), 1. / len(lam))


def approx_mean_response(system, lam, policy, profile=None, floor=None):
    """Mean response time under the independence approximation.

    Args:
        floor (float): if given, residual rates are clamped below at
          floor instead of raising; optimizers use this to keep the
          objective finite outside the stable set.

    Raises:
        NotStabilizingError: some class has nu >= 1 and no floor was
          given.

    """
    lam = as_rates(system, lam)
    if profile is None:
        profile = load_profile(system, lam, policy)
    residual = 1. - profile.nu
    if floor is None:
        if not policy_is_stabilizing(profile):
            raise NotStabilizingError('Policy overloads a class (max nu '
                                      '= %.4g).' % profile.max_load)
    else:
        residual = np.maximum(residual, floor)
    k = system.k
    per_type = np.zeros(k)
    for i, pat, pr in policy.items():
        if pr > 0:
            per_type[i] += pr * expected_max_exponentials(
                pattern_rates(pat, residual, k))
    return ApproxObjective(float(_weights(lam) @ per_type), per_type)


def uncoded_mean_response(system, lam):
    """Closed-form mean response of the uncoded system (n servers, no
    coding) under uniform routing: sum_i (lambda_i/sum) alpha_i n /
    beta_i."""
    lam = as_rates(system, lam)
    share = np.asarray(system.alpha) * system.n
    beta = share - lam
    if np.any(beta <= 0):
        raise NotStabilizingError('Uncoded system is unstable (slack %s).'
                                  % list(beta))
    return float(_weights(lam) @ (share / beta))


def aggregate_q(system, policy):
    """q_ij: probability that type i uses j coded servers, j = 0..k."""
    out = np.zeros((system.k, system.k + 1))
    for i, pat, pr in policy.items():
        out[i, pat.num_coded] += pr
    return out
