import csv
import json
import os
import tempfile
import unittest

from mdsq import cli


def read(path):
    with open(path) as fin:
        return fin.read()


class TestCLI(unittest.TestCase):
    """End-to-end runs of the command-line front end at small sizes."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, name, cfg):
        path = os.path.join(self.tmp, name + '.json')
        with open(path, 'w') as fout:
            json.dump(cfg, fout)
        return path

    def test_00_presets(self):
        assert(cli.main(['presets']) == cli.EXIT_OK)
        help_text = cli.get_parser().format_help()
        for name in ['capacity', 'regime', 'route', 'simulate', 'fig5']:
            assert(name in help_text)

    def test_01_capacity(self):
        out = os.path.join(self.tmp, 'a')
        assert(cli.main(['capacity', '--preset', 'fig2-k2', '--out', out,
                         '--lam', '33,20']) == 0)
        summary = json.loads(read(os.path.join(out,
                                               'fig2-k2_capacity.json')))
        assert(abs(summary['area_coded'] - 1134.) < 1e-9)
        assert(summary['gained'] > 0 and summary['lost'] > 0)
        assert(summary['uncoded']['verdict'] == 'exterior')
        assert(summary['coded']['verdict'] == 'interior')
        lines = read(os.path.join(out, 'fig2-k2_region.csv')).splitlines()
        assert(len(lines) == 81 * 81 + 1)
        # Same inputs, same bytes.
        out2 = os.path.join(self.tmp, 'b')
        cli.main(['capacity', '--preset', 'fig2-k2', '--out', out2,
                  '--lam', '33,20'])
        for fn in ['fig2-k2_capacity.json', 'fig2-k2_region.csv']:
            assert(read(os.path.join(out, fn)) == read(os.path.join(out2, fn)))

    def test_02_regime(self):
        assert(cli.main(['regime', '--preset', 'fig4-k2', '--sizes', '1024',
                         '--coded-rule', 'n16', '--out', self.tmp]) == 0)
        lines = read(os.path.join(self.tmp,
                                  'fig4-k2_regimes.csv')).splitlines()
        assert(lines[0] == 'n,n_coded,nominal,label,istar,kstar')
        assert(len(lines) == 4)
        for line in lines[1:]:
            fields = line.split(',')
            assert(fields[2] == fields[3]), line

    def test_03_route(self):
        path = self.write_config('heavy', {
            'command': 'route', 'policy': 'heavy',
            'system': {'n': 256, 'k': 2, 'n_coded': 16, 'alpha': [.5, .5]},
            'lam': [128. - 128. ** .55, 80.]})
        assert(cli.main(['route', '--config', path, '--out', self.tmp]) == 0)
        out = json.loads(read(os.path.join(self.tmp, 'heavy_route.json')))
        assert(out['property_41']['bounded'])
        assert(max(out['loads']['nu']) < 1.)
        probs = [e['prob'] for e in out['policy']['type_1']]
        assert(any(abs(p - .875) < 1e-12 for p in probs))
        assert(max(e['prob'] for e in out['policy']['type_2']) == 1.)

    def test_04_simulate_fixed(self):
        path = self.write_config('fixed', {
            'command': 'simulate', 'policy': 'pseudo_optimal',
            'system': {'n': 16, 'k': 2, 'n_coded': 2, 'alpha': [.5, .5]},
            'lam': [6., 4.], 'run': {'departures': 2000}})
        args = ['simulate', '--config', path, '--out', self.tmp,
                '--replications', '2', '--seed', '7']
        assert(cli.main(args) == 0)
        first = read(os.path.join(self.tmp, 'fixed_stats.json'))
        stats = json.loads(first)
        assert(stats['replications'] == 2 and stats['seed'] == 7)
        assert(stats['departures_counted'] == 2 * 1800)
        assert(cli.main(args) == 0)
        assert(read(os.path.join(self.tmp, 'fixed_stats.json')) == first)

    def test_05_simulate_sweep(self):
        assert(cli.main(['simulate', '--preset', 'fig4-k2', '--sizes', '64',
                         '--coded-rule', 'sqrt', '--departures', '2000',
                         '--replications', '2', '--out', self.tmp]) == 0)
        lines = read(os.path.join(self.tmp, 'fig4-k2.csv')).splitlines()
        assert(lines[0] == ','.join(cli.SWEEP_COLUMNS))
        assert(len(lines) == 4)
        for line in lines[1:]:
            fields = line.split(',')
            assert(fields[0] == '64' and fields[1] == '8')
            assert(float(fields[3]) > 1. and float(fields[5]) > 1.)
            assert(float(fields[7]) > 1.)

    def test_06_simulate_time_varying(self):
        cfg = {'command': 'simulate', 'policy': 'pseudo_optimal',
               'systems': {'coded': {'s': [22, 31], 'n_coded': 7},
                           'uncoded': {'s': [26, 34], 'n_coded': 0}},
               'arrivals': [{'low': 6., 'high': 18., 'period': 200.},
                            {'low': 12., 'high': 30., 'period': 200.,
                             'high_fraction': .6, 'phase_shift': 10.}],
               'run': {'horizon': 400., 'trajectory_dt': 2.}}
        path = self.write_config('wave', cfg)
        assert(cli.main(['simulate', '--config', path, '--out', self.tmp,
                         '--replications', '1']) == 0)
        for name in ['coded', 'uncoded']:
            lines = read(os.path.join(self.tmp,
                                      'wave_%s.csv' % name)).splitlines()
            assert(lines[0] == 'time,total_jobs,jobs_type_1,jobs_type_2')
            assert(len(lines) == 201)
        summary = json.loads(read(os.path.join(self.tmp,
                                               'wave_summary.json')))
        assert(set(summary) == {'coded', 'uncoded'})
        assert(summary['coded']['trajectory_points'] == 200)

    def test_07_exit_codes(self):
        path = self.write_config('bad', {'command': 'route', 'oops': 1})
        assert(cli.main(['route', '--config', path]) == cli.EXIT_CONFIG)
        assert(cli.main(['route', '--config',
                         os.path.join(self.tmp, 'missing.json')])
               == cli.EXIT_CONFIG)
        assert(cli.main(['capacity', '--preset', 'fig2-k2', '--config',
                         path]) == cli.EXIT_CONFIG)
        assert(cli.main(['regime', '--preset', 'fig5']) == cli.EXIT_CONFIG)
        yaml_path = os.path.join(self.tmp, 'broken.yaml')
        with open(yaml_path, 'w') as fout:
            fout.write('command: [route\n')
        assert(cli.main(['route', '--config', yaml_path]) == cli.EXIT_CONFIG)
        path = self.write_config('outside', {
            'command': 'route', 'policy': 'lp',
            'system': {'n': 64, 'k': 2, 'n_coded': 4, 'alpha': [.5, .5]},
            'lam': [34., 34.]})
        assert(cli.main(['route', '--config', path, '--out', self.tmp])
               == cli.EXIT_UNSTABLE)
        assert(cli.main(['simulate', '--config', path, '--out', self.tmp])
               == cli.EXIT_UNSTABLE)

    def test_08_explicit_routing(self):
        own = {'job_type': 1, 'num_coded': 0, 'helper_types': []}
        coded = {'job_type': 1, 'num_coded': 1, 'helper_types': [2]}
        cfg = {'command': 'route', 'policy': 'explicit',
               'system': {'n': 16, 'k': 2, 'n_coded': 2, 'alpha': [.5, .5]},
               'lam': [6., 4.],
               'routing': {
                   'type_1': [{'pattern': own, 'prob': .8},
                              {'pattern': coded, 'prob': .2}],
                   'type_2': [{'pattern': {'job_type': 2, 'num_coded': 0,
                                           'helper_types': []},
                               'prob': 1.}]}}
        path = self.write_config('explicit', cfg)
        assert(cli.main(['route', '--config', path, '--out', self.tmp]) == 0)
        out = json.loads(read(os.path.join(self.tmp, 'explicit_route.json')))
        used = [(e['pattern'], e['prob']) for e in out['policy']['type_1']
                if e['prob'] > 0]
        assert(used == [(own, .8), (coded, .2)])
        nu = out['loads']['nu']
        assert(abs(nu[0] - 4.8 / 7) < 1e-12 and abs(nu[2] - .6) < 1e-12)
        # All type-1 jobs at home overload the type-1 servers.
        cfg['routing']['type_1'] = [{'pattern': own, 'prob': 1.}]
        cfg['lam'] = [7.5, 4.]
        path = self.write_config('overload', cfg)
        assert(cli.main(['route', '--config', path, '--out', self.tmp])
               == cli.EXIT_UNSTABLE)

    def test_09_capacity_k3(self):
        assert(cli.main(['capacity', '--preset', 'fig2-k3', '--out',
                         self.tmp, '--lam', '20.5,20.5,20.5']) == 0)
        summary = json.loads(read(os.path.join(self.tmp,
                                               'fig2-k3_capacity.json')))
        assert(summary['system']['n'] == 63)
        assert(summary['points'] == 25 ** 3 and summary['gained'] > 0)
        assert('area_coded' not in summary)
        # Balanced heavy traffic is where coding loses capacity.
        assert(summary['uncoded']['verdict'] == 'interior')
        assert(summary['coded']['verdict'] == 'exterior')
        assert(summary['coded_lp']['verdict'] == 'exterior')
        with open(os.path.join(self.tmp, 'fig2-k3_region.csv'),
                  newline='') as fin:
            rows = list(csv.reader(fin))
        assert(rows[0] == ['lambda_1', 'lambda_2', 'lambda_3', 'uncoded',
                           'coded'])
        assert(len(rows) == 25 ** 3 + 1)
        assert(['22', '0', '0', 'exterior', 'interior'] in rows)

    def test_10_single_replication_sweep(self):
        assert(cli.main(['simulate', '--preset', 'fig4-k2', '--sizes', '64',
                         '--coded-rule', 'sqrt', '--departures', '2000',
                         '--replications', '1', '--out', self.tmp]) == 0)
        with open(os.path.join(self.tmp, 'fig4-k2.csv'), newline='') as fin:
            rows = list(csv.DictReader(fin))
        assert(len(rows) == 3)
        for row in rows:
            assert(row['regime'] in ('light', 'inner_heavy', 'outer_heavy'))
            assert(row['coded_se'] == '' and row['uncoded_se'] == '')
            assert(float(row['coded_mean']) > 1.)


if __name__ == '__main__':
    unittest.main()
