"""Probabilistic routing policies over class-level recovery patterns.

A policy holds, for each job type, a probability vector over that
type's patterns in the order produced by
:func:`mdsq.model.enumerate_recovery_patterns`.

"""
import logging

import numpy as np

from .. import config
from ..model import all_patterns, RecoveryPattern
from ..capacity import (as_rates, coded_contains_waterfill, lp_flows,
                        residual_profile)
from .. import regimes

route_logger = logging.getLogger('route_logger')
route_logger.setLevel(logging.INFO)

PROB_SUM_TOL = 1e-9


class InfeasibleError(ValueError):
    """Arrival rates admit no stabilizing coded routing, or a requested
    policy cannot be built for this system."""


class RoutingPolicy:
    """Per-type probability vectors over recovery patterns.

    Args:
        system (SystemSpec): the topology the patterns belong to.
        probs (list of array-like): one vector per job type, ordered
          like the enumerated patterns.  Each must be non-negative and
          sum to 1; small rounding is renormalized away.

    """
    def __init__(self, system, probs):
        self.system = system
        self.patterns = all_patterns(system)
        if len(probs) != system.k:
            raise ValueError('Need %i probability vectors (got %i).'
                             % (system.k, len(probs)))
        self.probs = []
        for i, (p, pats) in enumerate(zip(probs, self.patterns)):
            p = np.asarray(p, dtype=float)
            if p.shape != (len(pats),):
                raise ValueError('Type %i has %i patterns; got %i '
                                 'probabilities.' % (i + 1, len(pats), p.size))
            if np.any(p < -PROB_SUM_TOL) or abs(p.sum() - 1.) > PROB_SUM_TOL:
                raise ValueError('Type %i probabilities must be a '
                                 'distribution (got %s).' % (i + 1, list(p)))
            p = np.clip(p, 0., None)
            self.probs.append(p / p.sum())

    def __repr__(self):
        return 'RoutingPolicy(%s)' % [list(np.round(p, 6)) for p in self.probs]

    @classmethod
    def from_flat(cls, system, x):
        pats = all_patterns(system)
        out, a = [], 0
        for plist in pats:
            out.append(np.asarray(x[a:a + len(plist)]))
            a += len(plist)
        return cls(system, out)

    def flat(self):
        return np.concatenate(self.probs)

    def q_own(self, job_type):
        """Probability q_i0 of routing type job_type (1-based) to its own
        systematic servers."""
        return float(self.probs[job_type - 1][0])

    def items(self):
        """Yield (type index, pattern, probability) for all entries."""
        for i, (pats, p) in enumerate(zip(self.patterns, self.probs)):
            for pat, pr in zip(pats, p):
                yield i, pat, float(pr)

    def to_json(self):
        return {'type_%i' % (i + 1): [
            {'pattern': pat.to_json(), 'prob': float(pr)}
            for pat, pr in zip(pats, p)]
            for i, (pats, p) in enumerate(zip(self.patterns, self.probs))}

    @classmethod
    def from_json(cls, system, data):
        """Rebuild a policy; patterns omitted from data get probability
        0, patterns unknown to the system are an error."""
        pats = all_patterns(system)
        expected = {'type_%i' % (i + 1) for i in range(system.k)}
        if set(data) != expected:
            raise ValueError('Policy keys must be %s (got %s).'
                             % (sorted(expected), sorted(data)))
        probs = []
        for i, plist in enumerate(pats):
            p = np.zeros(len(plist))
            for entry in data['type_%i' % (i + 1)]:
                pat = RecoveryPattern.from_json(entry['pattern'])
                if pat not in plist:
                    raise ValueError('Pattern %s is not feasible for type '
                                     '%i.' % (pat, i + 1))
                p[plist.index(pat)] += float(entry['prob'])
            probs.append(p)
        return cls(system, probs)


def uniform_uncoded_policy(system):
    """Every job goes to one of its own systematic servers, chosen
    uniformly at random."""
    probs = []
    for pats in all_patterns(system):
        p = np.zeros(len(pats))
        p[0] = 1.
        probs.append(p)
    return RoutingPolicy(system, probs)


def barycenter_policy(system):
    """Uniform over every feasible pattern of each type."""
    return RoutingPolicy(system, [np.full(len(p), 1. / len(p))
                                  for p in all_patterns(system)])


def kpattern_policy(system):
    """Uniform over the k-task (coded) patterns only; every job uses at
    least one coded server."""
    probs = []
    for pats in all_patterns(system):
        p = np.array([float(x.num_coded > 0) for x in pats])
        if p.sum() == 0:
            raise InfeasibleError('No coded patterns exist (n_coded=%i).'
                                  % system.n_coded)
        probs.append(p / p.sum())
    return RoutingPolicy(system, probs)


def _offload_policy(system, own_fraction, istar, helpers):
    """Policy where type i keeps own_fraction[i] on its own servers and
    sends the rest to the pattern with istar coded tasks and the given
    helper types."""
    pats = all_patterns(system)
    probs = []
    for i, plist in enumerate(pats):
        p = np.zeros(len(plist))
        q0 = float(own_fraction[i])
        p[0] = q0
        if q0 < 1.:
            target = RecoveryPattern(i + 1, istar, tuple(sorted(helpers)))
            if target not in plist:
                raise InfeasibleError('Pattern %s is not feasible '
                                      '(n_coded=%i).' % (target, system.n_coded))
            p[plist.index(target)] = 1. - q0
        probs.append(p)
    return RoutingPolicy(system, probs)


def heavy_regime_policy(system, lam, istar=None, kstar=None,
                        regime_kind=None):
    """Offload policy for the heavy regimes.

    With types ordered by slack ascending, the first k* types keep
    q_i0 = 1 - v*n_coded/n on their own servers and send the rest to
    i* coded servers plus one systematic server of every type past
    i*; v = 1/(k* * sum_{j<=k*} alpha_j).  Other types stay home.

    Args:
        system, lam: the instance.
        istar (int): split index; computed from the slack order if
          None.
        kstar (int): heavy-set size; computed by classifying the
          instance if None (which must then land in a heavy regime).
        regime_kind (str): inner_heavy or outer_heavy, used only to
          compute kstar when it is None.

    Raises:
        InfeasibleError: kstar > istar, the needed pattern does not
          exist, or v*n_coded/n > 1.

    """
    lam = as_rates(system, lam)
    sp = regimes.slack_profile(system, lam)
    order = sp.sort_order
    if istar is None:
        istar = regimes.bottleneck_index(system, order)
    if kstar is None:
        if regime_kind is None:
            label = regimes.classify_regime(system, lam)
            if label.kstar is None:
                raise InfeasibleError('Instance is %s, not a heavy regime.'
                                      % label.label)
            kstar = label.kstar
        else:
            kstar = regimes.kstar_index(system, lam, regime_kind, istar)
    if not (1 <= kstar <= istar < system.k):
        raise InfeasibleError('Need 1 <= k* <= i* < k (k*=%s, i*=%s).'
                              % (kstar, istar))
    alpha = np.asarray(system.alpha)[order]
    v = 1. / (kstar * alpha[:kstar].sum())
    q = v * system.n_coded / system.n
    if q > 1.:
        raise InfeasibleError('Offload fraction v*n_coded/n = %.4g > 1.' % q)
    own = np.ones(system.k)
    own[order[:kstar]] = 1. - q
    helpers = [int(j) + 1 for j in order[istar:]]
    route_logger.debug('heavy policy: v=%.4g, q=%.4g, helpers=%s'
                       % (v, q, helpers))
    return _offload_policy(system, own, istar, helpers)


def uncoded_unstable_policy(system, lam):
    """Stabilizing policy for instances meeting the uncoded-unstable
    sufficient condition: each over-loaded type keeps slightly less than
    its systematic capacity and sends the excess to i* coded servers
    plus every helper type past i*."""
    lam = as_rates(system, lam)
    cond = regimes.unstable_sufficient_conditions(system, lam)
    if not cond['uncoded_unstable']:
        raise InfeasibleError('Instance does not meet the uncoded-unstable '
                              'condition.')
    istar = cond['istar']
    order = regimes.slack_profile(system, lam).sort_order
    rp = residual_profile(system, lam)
    s = np.asarray(system.s, dtype=float)
    excess = rp.r_minus.sum()
    over = rp.r < 0
    if not over.any():
        return uniform_uncoded_policy(system)
    helpers = [int(j) + 1 for j in order[istar:]]
    coded_room = (system.n_coded - istar * excess) / istar
    helper_room = min(rp.r[j - 1] - excess for j in helpers)
    delta = min(0.5, 0.5 * min(coded_room, helper_room) / s[over].sum())
    own = np.ones(system.k)
    own[over] = s[over] * (1. - delta) / lam[over]
    return _offload_policy(system, own, istar, helpers)


def lp_policy(system, lam, tol=None):
    """Policy from the capacity LP's max-slack flow split."""
    lam = as_rates(system, lam)
    tol = config.get('tolerance', tol)
    flows, t = lp_flows(system, lam)
    if t <= tol:
        raise InfeasibleError('lambda=%s is not inside the coded region '
                              '(slack %.3g).' % (list(lam), t))
    probs = []
    for f, li in zip(flows, lam):
        if li > 0:
            p = np.clip(f, 0., None)
            probs.append(p / p.sum())
        else:
            p = np.zeros(len(f))
            p[0] = 1.
            probs.append(p)
    return RoutingPolicy(system, probs)


def require_coded_interior(system, lam):
    m = coded_contains_waterfill(system, lam)
    if not m.interior:
        raise InfeasibleError('lambda=%s is %s to the coded region '
                              '(margin %.4g).' % (list(lam), m.verdict,
                                                  m.margin))
    return m
