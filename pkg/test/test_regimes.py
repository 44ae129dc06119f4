import unittest

import numpy as np
import pytest

from mdsq import presets
from mdsq import regimes
from mdsq.model import build_system
from mdsq.regimes import (LIGHT, INNER_HEAVY, OUTER_HEAVY, UNCODED_UNSTABLE,
                          CODED_UNSTABLE, UNCLASSIFIED, Thresholds)


def fig2_system():
    return build_system(64, 2, 4, [.5, .5])


class TestIndices(unittest.TestCase):
    """Split index i* and heavy-set size k*."""

    def test_00_bottleneck(self):
        assert(regimes.bottleneck_index(fig2_system()) == 1)
        sys = build_system(243, 3, 9, [2 / 11, 3 / 11, 6 / 11])
        assert(regimes.bottleneck_index(sys) == 2)
        assert(regimes.bottleneck_index(sys, order=[2, 1, 0]) == 1)
        even = build_system(30, 3, 3, [1 / 3, 1 / 3, 1 / 3])
        assert(regimes.bottleneck_index(even) == 1)
        with pytest.raises(ValueError):
            regimes.bottleneck_index(build_system(10, 1, 1, [1.]))

    def test_01_slack(self):
        prof = regimes.slack_profile(fig2_system(), [30, 20])
        assert(list(prof.beta) == [2., 12.])
        assert(list(prof.sorted) == [2., 12.])
        prof = regimes.slack_profile(fig2_system(), [10, 25])
        assert(list(prof.sort_order) == [1, 0])

    def test_02_kstar(self):
        sys = build_system(1024, 2, 64, [.5, .5])
        lam = presets.regime_rates('k2', OUTER_HEAVY, 1024, [.5, .5])
        assert(regimes.kstar_index(sys, lam, OUTER_HEAVY) == 1)
        light = presets.regime_rates('k2', LIGHT, 1024, [.5, .5])
        with pytest.raises(ValueError):
            regimes.kstar_index(sys, light, OUTER_HEAVY)
        with pytest.raises(ValueError):
            regimes.kstar_index(sys, lam, LIGHT)


class TestClassify(unittest.TestCase):
    """Regime labels for the sweep rate families and the stability
    corner cases."""

    def test_00_k2_sweep(self):
        for rule in ['n16', 'sqrt']:
            sweep = {'family': 'k2', 'alpha': [.5, .5], 'sizes': [1024]}
            for n, n_coded, reg, lam in presets.sweep_points(sweep,
                                                             coded_rule=rule):
                sys = build_system(n, 2, n_coded, [.5, .5])
                label = regimes.classify_regime(sys, lam)
                assert(label.label == reg), (rule, reg, label.to_json())
                if reg != LIGHT:
                    assert(label.kstar == 1)

    def test_01_k3_sweep(self):
        alpha = [2 / 11, 3 / 11, 6 / 11]
        sys = build_system(729, 3, 27, alpha)
        expect = {LIGHT: None, INNER_HEAVY: 2, OUTER_HEAVY: 1}
        for reg, kstar in expect.items():
            lam = presets.regime_rates('k3', reg, 729, alpha)
            label = regimes.classify_regime(sys, lam)
            assert(label.label == reg), label.to_json()
            assert(label.kstar == kstar)
            assert(label.istar == 2)

    def test_02_unstable(self):
        sys = fig2_system()
        label = regimes.classify_regime(sys, [33, 20])
        assert(label.label == UNCODED_UNSTABLE)
        assert(label.diagnostics['sufficient']['uncoded_unstable'])
        assert(regimes.classify_regime(sys, [31.5, 31.5]).label
               == CODED_UNSTABLE)
        assert(regimes.classify_regime(sys, [40, 40]).label == UNCLASSIFIED)
        # One coded server: type 2 cannot borrow through an all-coded
        # pattern, so this point only looks heavy.
        small = build_system(4, 2, 1, [.25, .75])
        label = regimes.classify_regime(small, [.75, 2.5])
        assert(label.label == CODED_UNSTABLE), label.to_json()

    def test_03_sufficient(self):
        sys = fig2_system()
        cond = regimes.unstable_sufficient_conditions(sys, [33, 20])
        assert(cond['istar'] == 1)
        assert(cond['excess'] == 3.)
        assert(cond['uncoded_unstable'])
        # Excess beyond the coded capacity.
        cond = regimes.unstable_sufficient_conditions(sys, [35, 20])
        assert(not cond['uncoded_unstable'])
        cond = regimes.unstable_sufficient_conditions(sys, [20, 20])
        assert(not cond['uncoded_unstable'])
        assert(not cond['coded_unstable'])

    def test_04_thresholds(self):
        t = Thresholds.from_config()
        assert(t.light == .5 and t.heavy_gap == 2. and t.outer == .25)
        t = Thresholds.from_config(light=100.)
        assert(t.light == 100. and t.outer == .25)
        sys = build_system(1024, 2, 64, [.5, .5])
        lam = presets.regime_rates('k2', LIGHT, 1024, [.5, .5])
        # A large light constant pushes the light point out of light
        # traffic; its helper gap is too small for a heavy label.
        assert(regimes.classify_regime(sys, lam, t).label == UNCLASSIFIED)

    def test_05_diagnostics(self):
        sys = build_system(1024, 2, 64, [.5, .5])
        lam = np.array([352., 320.])
        label = regimes.classify_regime(sys, lam)
        d = label.to_json()
        assert(d['label'] == LIGHT)
        assert(d['diagnostics']['order'] == [1, 2])
        assert(d['diagnostics']['beta_sorted'] == [160., 192.])
        assert(abs(d['diagnostics']['light_cut'] - 128.) < 1e-9)
        assert(set(regimes.LABELS) >= {d['label']})

    def test_06_outer_cutoff(self):
        sys = build_system(1024, 2, 64, [.5, .5])
        lam = presets.regime_rates('k2', INNER_HEAVY, 1024, [.5, .5])
        label = regimes.classify_regime(sys, lam)
        assert(label.label == INNER_HEAVY)
        assert(abs(label.diagnostics['outer_cut'] - 16.) < 1e-9)
        plain = Thresholds.from_config(outer=1.)
        label = regimes.classify_regime(sys, lam, plain)
        assert(label.label == OUTER_HEAVY)
        assert(label.kstar == 1)


if __name__ == '__main__':
    unittest.main()
