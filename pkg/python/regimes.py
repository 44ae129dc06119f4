"""Traffic-regime classification of a single (system, lambda) instance.

Slack capacities beta_i = alpha_i*n - lambda_i are sorted ascending;
types below the split index i* are beneficiaries (they may offload to
coded servers), the rest are helpers.  The asymptotic regime
definitions are made concrete with explicit constants, see
:class:`Thresholds`.

"""
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from . import config
from .capacity import (uncoded_contains, coded_contains_waterfill,
                       residual_profile, as_rates)

regime_logger = logging.getLogger('regime_logger')
regime_logger.setLevel(logging.INFO)

LIGHT = 'light'
INNER_HEAVY = 'inner_heavy'
OUTER_HEAVY = 'outer_heavy'
UNCODED_UNSTABLE = 'uncoded_unstable'
CODED_UNSTABLE = 'coded_unstable'
UNCLASSIFIED = 'unclassified'

LABELS = (LIGHT, INNER_HEAVY, OUTER_HEAVY, UNCODED_UNSTABLE,
          CODED_UNSTABLE, UNCLASSIFIED)

# Strict inequality margin for j * sum(alpha) < 1.
_ISTAR_TOL = 1e-12


@dataclass(frozen=True)
class Thresholds:
    """Finite-n constants.

    - light: beta_1 >= light * sqrt(n*n_coded) is light traffic.
    - heavy_gap: the first helper's slack must exceed heavy_gap times
      the beneficiary cutoff (beta_1 or n_coded).
    - outer: beta_1 < outer * n_coded is outer-heavy.
    - kstar: k* counts beneficiaries with beta_j <= kstar * threshold.

    """
    light: float = 0.5
    heavy_gap: float = 2.0
    outer: float = 0.25
    kstar: float = 1.0

    @classmethod
    def from_config(cls, **kw):
        vals = {'light': config.get('light_const'),
                'heavy_gap': config.get('heavy_gap_const'),
                'outer': config.get('outer_const'),
                'kstar': config.get('kstar_const')}
        vals.update({k: v for k, v in kw.items() if v is not None})
        return cls(**vals)


@dataclass(frozen=True)
class SlackProfile:
    beta: np.ndarray
    sort_order: np.ndarray

    @property
    def sorted(self):
        return self.beta[self.sort_order]


@dataclass
class RegimeLabel:
    label: str
    istar: int
    kstar: int = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return {'label': self.label, 'istar': self.istar,
                'kstar': self.kstar, 'diagnostics': self.diagnostics}


def slack_profile(system, lam):
    lam = as_rates(system, lam)
    beta = np.asarray(system.alpha) * system.n - lam
    return SlackProfile(beta=beta, sort_order=np.argsort(beta, kind='stable'))


def bottleneck_index(system, order=None):
    """i* = max{j : j * sum_{i<=j} alpha_i < 1}, with alpha permuted by
    order (0-based type indices, slack ascending).  Returns 0 when no j
    qualifies."""
    if system.k < 2:
        raise ValueError('bottleneck_index needs k >= 2 (got k=%i).'
                         % system.k)
    alpha = np.asarray(system.alpha)
    if order is not None:
        alpha = alpha[np.asarray(order)]
    j = np.arange(1, system.k + 1)
    ok = j * np.cumsum(alpha) < 1. - _ISTAR_TOL
    return int(j[ok].max()) if ok.any() else 0


def _threshold(system, regime_kind):
    if regime_kind == INNER_HEAVY:
        return np.sqrt(system.n * system.n_coded)
    if regime_kind == OUTER_HEAVY:
        return float(system.n_coded)
    raise ValueError('No k* threshold for regime %s.' % regime_kind)


def kstar_index(system, lam, regime_kind, istar=None, const=None):
    """k* = max{j <= i* : beta_(j) <= c * threshold}, on slack sorted
    ascending; threshold is sqrt(n*n_coded) for inner-heavy and n_coded
    for outer-heavy.

    Raises:
        ValueError: if no index qualifies (the instance is not in the
          stated heavy regime).

    """
    const = config.get('kstar_const', const)
    prof = slack_profile(system, lam)
    if istar is None:
        istar = bottleneck_index(system, prof.sort_order)
    bound = const * _threshold(system, regime_kind)
    beta = prof.sorted
    qual = [j for j in range(1, istar + 1) if beta[j - 1] <= bound]
    if not qual:
        raise ValueError('No beneficiary has slack <= %.4g; not %s.'
                         % (bound, regime_kind))
    return max(qual)


def unstable_sufficient_conditions(system, lam, thresholds=None):
    """Evaluate finite-n forms of the unstable-regime sufficient
    conditions.

    uncoded_unstable holds when beta_(i*) <= 0 and the constructive
    offload works: every type with negative residual is a beneficiary,
    i* * E < n_coded for total excess E = sum r_j^-, each helper type
    above i* keeps residual > E, and n_coded >= i*.  Under these the
    uncoded system is not stable and the coded one is.

    coded_unstable records the excess-demand inequality
    (i*+1) * E_G >= n_coded over the first i*+1 types, with
    beta_(i*+1) >= 0.  It is informational only.

    """
    thresholds = thresholds or Thresholds.from_config()
    sp = slack_profile(system, lam)
    rp = residual_profile(system, lam)
    order = sp.sort_order
    istar = bottleneck_index(system, order)
    beta = sp.sorted
    r = rp.r[order]
    out = {'istar': istar}
    if istar == 0:
        out.update(uncoded_unstable=False, coded_unstable=False)
        return out
    excess = float(rp.r_minus.sum())
    negative_ok = bool(np.all(r[istar:] >= 0))
    helpers_ok = bool(np.all(r[istar:] > excess))
    out['uncoded_unstable'] = bool(
        beta[istar - 1] <= 0 and negative_ok and helpers_ok
        and system.n_coded >= istar and istar * excess < system.n_coded)
    group = slice(0, istar + 1)
    excess_g = float(-r[group].sum())
    out['coded_unstable'] = bool(
        beta[istar] >= 0 and excess_g > 0
        and (istar + 1) * excess_g >= system.n_coded)
    out['excess'] = excess
    out['group_excess'] = excess_g
    return out


def classify_regime(system, lam, thresholds=None):
    """Label an instance with one of :data:`LABELS`.

    Stability labels come from the capacity tests alone.  When both
    systems are stable, slack sorted ascending decides:

    - light: beta_1 >= c_L sqrt(n n_coded)
    - inner_heavy: c_O n_coded <= beta_1 < c_L sqrt(n n_coded) and
      beta_(i*+1) >= c_H beta_1
    - outer_heavy: beta_1 < c_O n_coded and beta_(i*+1) >= c_H n_coded
    - otherwise unclassified.

    The inner/outer split sits at c_O n_coded (``outer_const``,
    default 0.25) rather than at n_coded itself.  With c_O = 1 the
    n=1024, n/16 inner-heavy preset (beta_1 = 512 - 512^0.55, about
    30.9, against n_coded = 64) would be labelled outer-heavy.  c_L
    likewise defaults to 0.5 rather than 1.  Set ``outer_const`` and
    ``light_const`` to 1 to recover the plain cutoffs.

    """
    t = thresholds or Thresholds.from_config()
    lam = as_rates(system, lam)
    unc = uncoded_contains(system, lam)
    cod = coded_contains_waterfill(system, lam)
    sp = slack_profile(system, lam)
    istar = bottleneck_index(system, sp.sort_order)
    beta = sp.sorted
    diag = {
        'uncoded': unc.verdict, 'uncoded_margin': unc.margin,
        'coded': cod.verdict, 'coded_margin': cod.margin,
        'beta_sorted': [float(b) for b in beta],
        'order': [int(i) + 1 for i in sp.sort_order],
        'thresholds': asdict(t),
    }
    diag['sufficient'] = unstable_sufficient_conditions(system, lam, t)

    def done(label, kstar=None):
        regime_logger.debug('lambda=%s -> %s (i*=%i, k*=%s)'
                            % (list(lam), label, istar, kstar))
        return RegimeLabel(label, istar, kstar, diag)

    if not unc.interior and cod.interior:
        return done(UNCODED_UNSTABLE)
    if not cod.interior and unc.interior:
        return done(CODED_UNSTABLE)
    if not (unc.interior and cod.interior) or istar == 0:
        return done(UNCLASSIFIED)

    root = np.sqrt(system.n * system.n_coded)
    b1, helper = beta[0], beta[istar]
    diag['light_cut'] = t.light * root
    diag['outer_cut'] = t.outer * system.n_coded
    kind = None
    if b1 >= t.light * root:
        return done(LIGHT)
    if t.outer * system.n_coded <= b1 and helper >= t.heavy_gap * b1:
        kind = INNER_HEAVY
    elif b1 < t.outer * system.n_coded and \
            helper >= t.heavy_gap * system.n_coded:
        kind = OUTER_HEAVY
    if kind is None:
        return done(UNCLASSIFIED)
    try:
        kstar = kstar_index(system, lam, kind, istar, t.kstar)
    except ValueError as e:
        diag['kstar_error'] = str(e)
        return done(UNCLASSIFIED)
    return done(kind, kstar)
