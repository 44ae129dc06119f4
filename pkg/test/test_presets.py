import json
import unittest

import numpy as np
import pytest

from mdsq import presets


class TestPresets(unittest.TestCase):
    """Preset registry and experiment schema."""

    def test_00_registry(self):
        assert(set(presets.PRESETS) == {'fig2-k2', 'fig2-k3', 'fig4-k2',
                                        'fig4-k3', 'fig5'})
        for name, p in presets.PRESETS.items():
            assert(len(p.description) > 20)
            cfg = presets.preset_factory(name)
            # Presets survive a trip through JSON text.
            again = json.loads(json.dumps(cfg))
            assert(presets.validate_experiment(again) == cfg)
        with pytest.raises(ValueError):
            presets.preset_factory('fig9')

    def test_01_copies(self):
        cfg = presets.preset_factory('fig2-k2')
        cfg['system']['n'] = 3
        assert(presets.preset_factory('fig2-k2')['system']['n'] == 64)

    def test_02_systems(self):
        sys = presets.system_from_config({'s': [22, 31], 'n_coded': 7})
        assert(sys.n == 60 and sys.s == (22, 31))
        sys = presets.system_from_config({'n': 64, 'k': 2, 'n_coded': 4,
                                          'alpha': [.5, .5]})
        assert(sys.s == (30, 30))
        with pytest.raises(ValueError):
            presets.system_from_config({'s': [1, 2], 'n_coded': 1, 'n': 4})
        with pytest.raises(ValueError):
            presets.system_from_config({'n': 64, 'k': 2, 'n_coded': 4})
        with pytest.raises(TypeError):
            presets.system_from_config([64, 2])

    def test_03_validation(self):
        good = presets.preset_factory('fig5')
        for key, value in [('bogus', 1), ('command', 'plot'),
                           ('policy', 'greedy'), ('run', {'cap': 5}),
                           ('arrivals', [{'low': 1., 'hi': 2.}])]:
            bad = dict(good)
            bad[key] = value
            with pytest.raises((ValueError, TypeError)):
                presets.validate_experiment(bad)
        bad = presets.preset_factory('fig4-k2')
        bad['sweep']['family'] = 'k4'
        with pytest.raises(ValueError):
            presets.validate_experiment(bad)
        bad = presets.preset_factory('fig4-k2')
        bad['sweep']['coded_rules'] = ['half']
        with pytest.raises(ValueError):
            presets.validate_experiment(bad)
        with pytest.raises(ValueError):
            presets.validate_experiment({'command': 'capacity'})
        with pytest.raises(ValueError):
            presets.validate_experiment({'command': 'regime',
                                         'system': {'s': [2, 2],
                                                    'n_coded': 1}})

    def test_04_rates(self):
        np.testing.assert_allclose(
            presets.regime_rates('k2', 'light', 1024, [.5, .5]), [352., 320.])
        lam = presets.regime_rates('k2', 'outer_heavy', 1024, [.5, .5])
        assert(abs(lam[0] - (512. - 512. ** .3)) < 1e-9)
        lam = presets.regime_rates('k3', 'light', 48 * 11,
                                   [2 / 11, 3 / 11, 6 / 11])
        np.testing.assert_allclose(lam, [96. - 55., 144. - 77.,
                                         288. - 99.])
        with pytest.raises(ValueError):
            presets.regime_rates('k2', 'uncoded_unstable', 64, [.5, .5])

    def test_05_sweep_points(self):
        sweep = presets.preset_factory('fig4-k2')['sweep']
        points = list(presets.sweep_points(sweep))
        assert(len(points) == 24)
        assert(points[0][:3] == (64, 4, 'light'))
        points = list(presets.sweep_points(sweep, sizes=[1024],
                                           coded_rule='sqrt'))
        assert([p[1] for p in points] == [32] * 3)
        rules = presets.CODED_RULES
        assert(rules['n16'](1024) == 64 and rules['n27'](729) == 27)
        assert(rules['sqrt'](243) == 16 and rules['sqrt'](256) == 16)

    def test_06_policy_names(self):
        assert(presets.policy_name({}) == 'pseudo_optimal')
        assert(presets.policy_name({'policy': 'heavy_regime'}) == 'heavy')
        assert(presets.policy_name({'policy': 'uncoded_uniform'})
               == 'uniform')
        base = {'command': 'route', 'lam': [1., 1.],
                'system': {'s': [2, 2], 'n_coded': 1}}
        with pytest.raises(ValueError):
            presets.validate_experiment(dict(base, policy='explicit'))
        with pytest.raises(ValueError):
            presets.validate_experiment(dict(base, routing={}))
        cfg = dict(base, policy='explicit', routing={'type_1': []})
        assert(presets.validate_experiment(cfg) is cfg)


if __name__ == '__main__':
    unittest.main()
