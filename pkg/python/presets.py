"""Experiment configurations: the schema, its validation, and the
named presets that regenerate the capacity, fixed-rate and
time-varying comparisons.

An experiment is a JSON-compatible dict.  Its ``command`` is one of
``capacity``, ``regime``, ``route`` or ``simulate``; the other keys
depend on the command:

- ``system``: ``{"n", "k", "n_coded", "alpha"}`` or
  ``{"s", "n_coded"}``.
- ``systems``: named systems, for runs that compare several.
- ``lam``: fixed arrival-rate vector.
- ``arrivals``: per-type constant rates or square-wave dicts.
- ``grid``: ``{"upper", "points"}`` for capacity sweeps.
- ``sweep``: ``{"alpha", "sizes", "coded_rules", "regimes",
  "family"}`` for sweeps over n.
- ``policy``: routing policy name (see :data:`POLICIES` and
  :data:`POLICY_ALIASES`).
- ``routing``: with policy ``explicit``, the policy itself in the
  ``RoutingPolicy.to_json`` form.
- ``run``: ``RunConfig`` overrides (departures, replications, horizon,
  warmup_time, trajectory_dt, seed).

"""
import copy
import logging
import math

import numpy as np

from . import model
from . import regimes

preset_logger = logging.getLogger('preset_logger')
preset_logger.setLevel(logging.INFO)

COMMANDS = ('capacity', 'regime', 'route', 'simulate')
TOP_KEYS = {'command', 'description', 'system', 'systems', 'lam',
            'arrivals', 'grid', 'sweep', 'policy', 'routing', 'run'}
SYSTEM_KEYS = ({'n', 'k', 'n_coded', 'alpha'}, {'s', 'n_coded'})
GRID_KEYS = {'upper', 'points', 'lower'}
SWEEP_KEYS = {'family', 'alpha', 'sizes', 'coded_rules', 'regimes'}
RUN_KEYS = {'departures', 'replications', 'horizon', 'warmup_time',
            'warmup_fraction', 'trajectory_dt', 'seed', 'workers'}
WAVE_KEYS = {'low', 'high', 'period', 'high_fraction', 'phase_shift'}
POLICIES = ('pseudo_optimal', 'uniform', 'barycenter', 'kpattern', 'lp',
            'heavy', 'uncoded_unstable', 'explicit')
POLICY_ALIASES = {'uncoded_uniform': 'uniform', 'heavy_regime': 'heavy'}
SWEEP_REGIMES = (regimes.LIGHT, regimes.INNER_HEAVY, regimes.OUTER_HEAVY)

#: n_coded as a function of n.
CODED_RULES = {
    'n16': lambda n: n // 16,
    'n27': lambda n: n // 27,
    'sqrt': lambda n: int(math.ceil(math.sqrt(n) - 1e-9)),
}


def _check_keys(name, data, allowed):
    if not isinstance(data, dict):
        raise TypeError('%s must be a mapping, got %s.'
                        % (name, type(data).__name__))
    unknown = set(data) - set(allowed)
    if unknown:
        raise ValueError('Unknown %s keys: %s.' % (name, sorted(unknown)))


def system_from_config(data):
    """Build a SystemSpec from a ``system`` entry."""
    _check_keys('system', data, SYSTEM_KEYS[0] | SYSTEM_KEYS[1])
    if 's' in data:
        if set(data) != SYSTEM_KEYS[1]:
            raise ValueError('A counts-based system takes exactly '
                             '"s" and "n_coded".')
        return model.build_system_from_counts(data['s'], data['n_coded'])
    if set(data) != SYSTEM_KEYS[0]:
        raise ValueError('system needs n, k, n_coded and alpha (got %s).'
                         % sorted(data))
    return model.build_system(data['n'], data['k'], data['n_coded'],
                              data['alpha'])


def policy_name(cfg):
    """Canonical policy name of an experiment (aliases resolved)."""
    name = cfg.get('policy', 'pseudo_optimal')
    name = POLICY_ALIASES.get(name, name)
    if name not in POLICIES:
        raise ValueError('policy must be one of %s (got %r).'
                         % (POLICIES + tuple(POLICY_ALIASES), name))
    return name


def validate_experiment(cfg):
    """Check an experiment dict against the schema.

    Returns:
        The same dict.

    Raises:
        ValueError, TypeError: on unknown keys, missing entries or
        malformed values.

    """
    _check_keys('experiment', cfg, TOP_KEYS)
    cmd = cfg.get('command')
    if cmd not in COMMANDS:
        raise ValueError('command must be one of %s (got %r).'
                         % (COMMANDS, cmd))
    if 'system' in cfg:
        system_from_config(cfg['system'])
    if 'systems' in cfg:
        if not isinstance(cfg['systems'], dict) or not cfg['systems']:
            raise TypeError('systems must be a non-empty mapping.')
        for sub in cfg['systems'].values():
            system_from_config(sub)
    if 'grid' in cfg:
        _check_keys('grid', cfg['grid'], GRID_KEYS)
        if 'upper' not in cfg['grid'] or 'points' not in cfg['grid']:
            raise ValueError('grid needs upper and points.')
    if 'sweep' in cfg:
        sw = cfg['sweep']
        _check_keys('sweep', sw, SWEEP_KEYS)
        if sw.get('family') not in RATE_FAMILIES:
            raise ValueError('sweep family must be one of %s.'
                             % sorted(RATE_FAMILIES))
        for rule in sw.get('coded_rules', []):
            if rule not in CODED_RULES:
                raise ValueError('Unknown coded rule %r.' % rule)
        for reg in sw.get('regimes', []):
            if reg not in SWEEP_REGIMES:
                raise ValueError('Unknown sweep regime %r.' % reg)
        if not sw.get('sizes'):
            raise ValueError('sweep needs a list of sizes.')
    if 'arrivals' in cfg:
        for w in cfg['arrivals']:
            if isinstance(w, dict):
                _check_keys('square wave', w, WAVE_KEYS)
            else:
                float(w)
    name = policy_name(cfg)
    if name == 'explicit':
        if not isinstance(cfg.get('routing'), dict):
            raise ValueError('policy "explicit" needs a routing mapping.')
        if 'sweep' in cfg:
            raise ValueError('An explicit routing cannot be swept over n.')
    elif 'routing' in cfg:
        raise ValueError('routing is only read with policy "explicit".')
    if 'run' in cfg:
        _check_keys('run', cfg['run'], RUN_KEYS)
    if cmd == 'capacity' and ('system' not in cfg or 'grid' not in cfg):
        raise ValueError('capacity needs system and grid.')
    if cmd in ('regime', 'route') and 'sweep' not in cfg and (
            'system' not in cfg or 'lam' not in cfg):
        raise ValueError('%s needs system and lam, or a sweep.' % cmd)
    if cmd == 'simulate' and not ('sweep' in cfg or 'arrivals' in cfg
                                  or 'lam' in cfg):
        raise ValueError('simulate needs lam, arrivals or sweep.')
    return cfg


# Arrival-rate vectors of the fixed-rate sweeps, per regime.

def _k2_rates(regime, n, alpha):
    a1, a2 = alpha
    lam2 = a2 * n - 6 * n / 32
    if regime == regimes.LIGHT:
        return [a1 * n - 5 * n / 32, lam2]
    if regime == regimes.INNER_HEAVY:
        return [a1 * n - (a1 * n) ** 0.55, lam2]
    return [a1 * n - (a1 * n) ** 0.3, lam2]


def _k3_rates(regime, n, alpha):
    a1, a2, a3 = alpha
    lam3 = a3 * n - 9 * n / 48
    if regime == regimes.LIGHT:
        return [a1 * n - 5 * n / 48, a2 * n - 7 * n / 48, lam3]
    if regime == regimes.INNER_HEAVY:
        return [a1 * n - (a1 * n) ** 0.55, a2 * n - (a2 * n) ** 0.65, lam3]
    return [a1 * n - (a1 * n) ** 0.3, a2 * n - (a2 * n) ** 0.7, lam3]


RATE_FAMILIES = {'k2': _k2_rates, 'k3': _k3_rates}


def regime_rates(family, regime, n, alpha):
    """Arrival rates that put an n-server system of the given family in
    the named regime."""
    if regime not in SWEEP_REGIMES:
        raise ValueError('Unknown sweep regime %r.' % regime)
    return np.array(RATE_FAMILIES[family](regime, n, alpha), dtype=float)


def sweep_points(sweep, sizes=None, coded_rule=None):
    """Yield (n, n_coded, regime, lam) for every point of a sweep."""
    sizes = sizes or sweep['sizes']
    rules = [coded_rule] if coded_rule else sweep.get('coded_rules',
                                                      ['sqrt'])
    regs = sweep.get('regimes', SWEEP_REGIMES)
    for rule in rules:
        if rule not in CODED_RULES:
            raise ValueError('Unknown coded rule %r.' % rule)
        for n in sizes:
            n_coded = CODED_RULES[rule](n)
            preset_logger.debug('Sweep point n=%i n_coded=%i (%s).'
                                % (n, n_coded, rule))
            for reg in regs:
                yield n, n_coded, reg, regime_rates(sweep['family'], reg, n,
                                                    sweep['alpha'])


class Preset:
    """A named experiment configuration."""

    def __init__(self, name, description, config):
        self.name = name
        self.description = description
        self.config = validate_experiment(config)

    def experiment(self):
        """A private copy of the configuration."""
        out = copy.deepcopy(self.config)
        out['description'] = self.description
        return out


PRESETS = {p.name: p for p in [
    Preset('fig2-k2',
           'Capacity regions of a 64-server two-type system with 4 '
           'coded servers against the uncoded split.',
           {'command': 'capacity',
            'system': {'n': 64, 'k': 2, 'n_coded': 4, 'alpha': [0.5, 0.5]},
            'grid': {'upper': 40., 'points': 81}}),
    Preset('fig2-k3',
           'Capacity regions of a 63-server three-type system with 3 '
           'coded servers against the uncoded split.',
           {'command': 'capacity',
            'system': {'n': 63, 'k': 3, 'n_coded': 3,
                       'alpha': [1 / 3, 1 / 3, 1 / 3]},
            'grid': {'upper': 24., 'points': 25}}),
    Preset('fig4-k2',
           'Mean response time against n = 2^m for two symmetric job '
           'types, coded (n/16 or sqrt(n) coded servers) and uncoded, '
           'in the light, inner-heavy and outer-heavy regimes.',
           {'command': 'simulate',
            'sweep': {'family': 'k2', 'alpha': [0.5, 0.5],
                      'sizes': [64, 128, 256, 512],
                      'coded_rules': ['n16', 'sqrt'],
                      'regimes': list(SWEEP_REGIMES)},
            'policy': 'pseudo_optimal'}),
    Preset('fig4-k3',
           'Mean response time against n = 3^m for three job types with '
           'alpha = (2/11, 3/11, 6/11), coded (n/27 or sqrt(n) coded '
           'servers) and uncoded.',
           {'command': 'simulate',
            'sweep': {'family': 'k3', 'alpha': [2 / 11, 3 / 11, 6 / 11],
                      'sizes': [243, 729],
                      'coded_rules': ['n27', 'sqrt'],
                      'regimes': list(SWEEP_REGIMES)},
            'policy': 'pseudo_optimal'}),
    Preset('fig5',
           'Occupancy trajectories under square-wave arrivals: 60 '
           'servers, coded (22/31 systematic + 7 coded) against '
           'uncoded (26/34).',
           {'command': 'simulate',
            'systems': {'coded': {'s': [22, 31], 'n_coded': 7},
                        'uncoded': {'s': [26, 34], 'n_coded': 0}},
            'arrivals': [{'low': 6., 'high': 18., 'period': 2000.,
                          'high_fraction': 0.5},
                         {'low': 12., 'high': 30., 'period': 2000.,
                          'high_fraction': 0.6, 'phase_shift': 100.}],
            'policy': 'pseudo_optimal',
            'run': {'horizon': 20000., 'trajectory_dt': 10.}}),
]}


def preset_factory(name):
    """Return the experiment dict of a named preset."""
    if name in PRESETS:
        return PRESETS[name].experiment()
    raise ValueError('No preset named %s; choose from %s.'
                     % (name, sorted(PRESETS)))
