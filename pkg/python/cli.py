"""Command-line front end.

Usage::

  python -m mdsq.cli presets
  python -m mdsq.cli capacity --preset fig2-k2 --out results/
  python -m mdsq.cli regime --preset fig4-k2 --sizes 1024
  python -m mdsq.cli route --config exp.json
  python -m mdsq.cli simulate --preset fig5 --seed 7 --out results/

Experiment files (``--config``) are JSON or YAML in the schema of
:mod:`mdsq.presets`.  Exit codes: 0 success, 2 configuration error, 3
infeasible or unstable input, 1 anything else.

"""
import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys

import numpy as np
import yaml
from tqdm import tqdm

from . import capacity
from . import model
from . import presets
from . import regimes
from . import routing
from . import sim
from .routing import InfeasibleError, NotStabilizingError
from .sim import UnstableError

cli_logger = logging.getLogger('cli_logger')
cli_logger.setLevel(logging.INFO)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3

LOGGERS = ('model_logger', 'cap_logger', 'regime_logger', 'route_logger',
           'sim_logger', 'preset_logger', 'cli_logger')

SWEEP_COLUMNS = ['n', 'n_coded', 'regime', 'coded_mean', 'coded_se',
                 'uncoded_mean', 'uncoded_se', 'uncoded_theory']


def _fmt(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ''
    if isinstance(x, (int, np.integer)):
        return '%i' % x
    if isinstance(x, (float, np.floating)):
        return '%.10g' % x
    return str(x)


def _write_json(data, filename):
    with open(filename, 'w') as fout:
        json.dump(data, fout, indent=2, sort_keys=True)
        fout.write('\n')
    cli_logger.info('Wrote %s' % filename)


def _write_rows(header, rows, filename):
    with open(filename, 'w', newline='') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    cli_logger.info('Wrote %s' % filename)


def _parse_floats(text):
    return [float(x) for x in text.split(',') if x.strip()]


def _parse_ints(text):
    return [int(x) for x in text.split(',') if x.strip()]


def load_experiment(args):
    """Resolve --preset / --config into a validated experiment dict."""
    if (args.preset is None) == (args.config is None):
        raise ValueError('Give exactly one of --preset or --config.')
    if args.preset is not None:
        cfg = presets.preset_factory(args.preset)
    else:
        with open(args.config) as fin:
            cfg = yaml.safe_load(fin)
    if getattr(args, 'lam', None):
        cfg['lam'] = _parse_floats(args.lam)
    cfg['command'] = args.command
    return presets.validate_experiment(cfg)


def run_config(cfg, args, **extra):
    """RunConfig from the experiment's run block and the flags."""
    run = dict(cfg.get('run', {}))
    kw = {'target_departures': run.pop('departures', None),
          'replications': run.pop('replications', None),
          'seed': run.pop('seed', None),
          'workers': run.pop('workers', None)}
    kw.update(run)
    if args.departures is not None:
        kw['target_departures'] = args.departures
    if args.replications is not None:
        kw['replications'] = args.replications
    if args.workers is not None:
        kw['workers'] = args.workers
    if args.seed is not None:
        kw['seed'] = args.seed
    kw.update(extra)
    return sim.RunConfig(**kw)


def build_policy(name, system, lam, explicit=None):
    """Routing policy of the given name for rates lam; ``explicit`` is
    the policy JSON read by the explicit policy."""
    if name == 'explicit':
        return routing.RoutingPolicy.from_json(system, explicit)
    if name == 'uniform' or (name == 'pseudo_optimal'
                             and system.n_coded == 0):
        return routing.uniform_uncoded_policy(system)
    if name == 'pseudo_optimal':
        return routing.pseudo_optimal_policy(system, lam)
    if name == 'barycenter':
        return routing.barycenter_policy(system)
    if name == 'kpattern':
        return routing.kpattern_policy(system)
    if name == 'lp':
        return routing.lp_policy(system, lam)
    if name == 'heavy':
        return routing.heavy_regime_policy(system, lam)
    if name == 'uncoded_unstable':
        return routing.uncoded_unstable_policy(system, lam)
    raise ValueError('Unknown policy %r.' % name)


def _systems(cfg):
    if 'systems' in cfg:
        return {name: presets.system_from_config(sub)
                for name, sub in sorted(cfg['systems'].items())}
    return {'system': presets.system_from_config(cfg['system'])}


def _prefix(args):
    return args.preset or os.path.splitext(
        os.path.basename(args.config))[0]


def cmd_presets(args):
    for name in sorted(presets.PRESETS):
        print('%-10s %s' % (name, presets.PRESETS[name].description))
    return EXIT_OK


def cmd_capacity(args):
    cfg = load_experiment(args)
    system = presets.system_from_config(cfg['system'])
    prefix = _prefix(args)
    summary = {'system': system.to_json()}
    if 'lam' in cfg:
        lam = cfg['lam']
        summary['lam'] = lam
        summary['uncoded'] = dataclasses.asdict(
            capacity.uncoded_contains(system, lam))
        summary['coded'] = dataclasses.asdict(
            capacity.coded_contains_waterfill(system, lam))
        summary['coded_lp'] = dataclasses.asdict(
            capacity.coded_contains_lp(system, lam))
    grid = cfg['grid']
    spec = capacity.GridSpec.square(system.k, grid['upper'], grid['points'],
                                    grid.get('lower', 0.))
    rows = capacity.region_sweep(system, spec)
    capacity.write_region_csv(rows, system.k,
                              os.path.join(args.out, prefix + '_region.csv'))
    summary['points'] = len(rows)
    summary['gained'] = len(capacity.gained_points(rows))
    summary['lost'] = len(capacity.lost_points(rows))
    if system.k == 2:
        summary['max_lambda1'] = capacity.k2_max_lambda1(system)
        summary['area_coded'] = capacity.region_area_k2(system)
        summary['area_uncoded'] = capacity.uncoded_area_k2(system)
    _write_json(summary, os.path.join(args.out, prefix + '_capacity.json'))
    return EXIT_OK


def _sweep_systems(cfg, args):
    sweep = cfg['sweep']
    sizes = _parse_ints(args.sizes) if args.sizes else None
    k = len(sweep['alpha'])
    for n, n_coded, reg, lam in presets.sweep_points(sweep, sizes,
                                                     args.coded_rule):
        system = model.build_system(n, k, n_coded, sweep['alpha'])
        yield system, reg, lam


def cmd_regime(args):
    cfg = load_experiment(args)
    prefix = _prefix(args)
    if 'sweep' in cfg and 'lam' not in cfg:
        rows = []
        for system, reg, lam in _sweep_systems(cfg, args):
            label = regimes.classify_regime(system, lam)
            rows.append([system.n, system.n_coded, reg, label.label,
                         label.istar, label.kstar])
        _write_rows(['n', 'n_coded', 'nominal', 'label', 'istar', 'kstar'],
                    rows, os.path.join(args.out, prefix + '_regimes.csv'))
        return EXIT_OK
    system = presets.system_from_config(cfg['system'])
    label = regimes.classify_regime(system, cfg['lam'])
    print(label.label)
    _write_json(label.to_json(),
                os.path.join(args.out, prefix + '_regime.json'))
    return EXIT_OK


def _route_summary(system, lam, policy):
    profile = routing.load_profile(system, lam, policy)
    if not routing.policy_is_stabilizing(profile):
        raise NotStabilizingError('Policy overloads a server class: '
                                  'max load %.6g.' % profile.max_load)
    check = routing.check_property_41(system, policy)
    return {'system': system.to_json(), 'lam': [float(x) for x in lam],
            'policy': policy.to_json(), 'loads': profile.to_json(),
            'approx_mean_response':
                routing.approx_mean_response(system, lam, policy,
                                             profile).to_json(),
            'property_41': {'bounded': bool(check.bounded),
                            'ratio': float(check.ratio)}}


def cmd_route(args):
    cfg = load_experiment(args)
    name = presets.policy_name(cfg)
    prefix = _prefix(args)
    if 'sweep' in cfg and 'lam' not in cfg:
        out = []
        for system, reg, lam in _sweep_systems(cfg, args):
            entry = _route_summary(system, lam,
                                   build_policy(name, system, lam,
                                                cfg.get('routing')))
            entry['nominal'] = reg
            out.append(entry)
    else:
        system = presets.system_from_config(cfg['system'])
        lam = capacity.as_rates(system, cfg['lam'])
        out = _route_summary(system, lam, build_policy(
            name, system, lam, cfg.get('routing')))
    _write_json(out, os.path.join(args.out, prefix + '_route.json'))
    return EXIT_OK


def _sweep_point(system, lam, name, rcfg):
    """Coded and uncoded (mean, se) at one sweep point; unstable runs
    come back as NaN."""
    schedule = sim.ArrivalSchedule.fixed(lam)
    out = []
    for sysm, pname in ((system, name), (system.uncoded(), 'uniform')):
        try:
            stats = sim.replicate(sysm, schedule,
                                  build_policy(pname, sysm, lam), rcfg)
            out.extend([stats.mean_response, stats.std_error])
        except UnstableError as e:
            cli_logger.warning('n=%i n_coded=%i: %s'
                               % (sysm.n, sysm.n_coded, e))
            out.extend([math.nan, None])
    return out


def cmd_simulate(args):
    cfg = load_experiment(args)
    name = presets.policy_name(cfg)
    prefix = _prefix(args)

    if 'sweep' in cfg and 'lam' not in cfg:
        rcfg = run_config(cfg, args)
        points = list(_sweep_systems(cfg, args))
        rows = []
        for system, reg, lam in tqdm(points, disable=not args.verbose,
                                     desc='sweep'):
            theory = routing.uncoded_mean_response(system.uncoded(), lam)
            rows.append([system.n, system.n_coded, reg]
                        + _sweep_point(system, lam, name, rcfg) + [theory])
        _write_rows(SWEEP_COLUMNS, rows,
                    os.path.join(args.out, prefix + '.csv'))
        return EXIT_OK

    if 'arrivals' in cfg:
        schedule = sim.ArrivalSchedule.from_json(cfg['arrivals'])
        rcfg = run_config(cfg, args)
        summary = {}
        for sname, system in _systems(cfg).items():
            def builder(lam, system=system):
                return build_policy(name, system, lam, cfg.get('routing'))
            stats = sim.simulate_time_varying(system, schedule, builder,
                                              rcfg, progress=args.verbose)
            sim.write_trajectory_csv(
                stats, system.k,
                os.path.join(args.out, '%s_%s.csv' % (prefix, sname)))
            summary[sname] = stats.to_json()
        _write_json(summary, os.path.join(args.out,
                                          prefix + '_summary.json'))
        return EXIT_OK

    system = presets.system_from_config(cfg['system'])
    lam = capacity.as_rates(system, cfg['lam'])
    policy = build_policy(name, system, lam, cfg.get('routing'))
    stats = sim.replicate(system, sim.ArrivalSchedule.fixed(lam), policy,
                          run_config(cfg, args), progress=args.verbose)
    _write_json(stats.to_json(), os.path.join(args.out,
                                              prefix + '_stats.json'))
    return EXIT_OK


COMMANDS = {
    'presets': (cmd_presets, 'List the built-in presets.'),
    'capacity': (cmd_capacity, 'Sweep the uncoded and coded capacity '
                 'regions over a grid.'),
    'regime': (cmd_regime, 'Classify the traffic regime of arrival rates.'),
    'route': (cmd_route, 'Build a routing policy and report its loads.'),
    'simulate': (cmd_simulate, 'Simulate mean response time or occupancy '
                 'trajectories.'),
}


def get_parser():
    parser = argparse.ArgumentParser(
        prog='mdsq',
        description='Capacity, regime, routing and simulation tools for '
        'multi-access servers with systematic MDS coded servers.  '
        'Presets: %s.' % ', '.join(sorted(presets.PRESETS)))
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='Debug logging and progress bars.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    for name, (func, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text)
        p.set_defaults(func=func)
        if name == 'presets':
            continue
        p.add_argument('--config', help='Experiment file (JSON or YAML).')
        p.add_argument('--preset', choices=sorted(presets.PRESETS),
                       help='Built-in experiment.')
        p.add_argument('--out', default='.', help='Output directory.')
        p.add_argument('--seed', type=int,
                       help='Master seed (default 42).')
        p.add_argument('--lam', help='Comma-separated arrival rates, '
                       'replacing the experiment\'s.')
        p.add_argument('--sizes', help='Comma-separated n values for '
                       'sweeps.')
        p.add_argument('--coded-rule', choices=sorted(presets.CODED_RULES),
                       help='n_coded rule for sweeps.')
        p.add_argument('--departures', type=int,
                       help='Departures per replication.')
        p.add_argument('--replications', type=int,
                       help='Independent replications.')
        p.add_argument('--workers', type=int,
                       help='Processes for replications.')
    return parser


def main(argv=None):
    parser = get_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    if args.verbose:
        for name in LOGGERS:
            logging.getLogger(name).setLevel(logging.DEBUG)
    try:
        if getattr(args, 'out', None):
            os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except (InfeasibleError, NotStabilizingError, UnstableError) as e:
        cli_logger.error(str(e))
        return EXIT_UNSTABLE
    except (ValueError, TypeError, OSError, yaml.YAMLError) as e:
        cli_logger.error('Configuration error: %s' % e)
        return EXIT_CONFIG
    except Exception:
        cli_logger.exception('Internal error.')
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
