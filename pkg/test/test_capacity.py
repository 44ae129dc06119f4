import itertools
import os
import tempfile
import unittest

import numpy as np
import pytest

from mdsq import capacity
from mdsq.capacity import (INTERIOR, BOUNDARY, EXTERIOR, GridSpec,
                           uncoded_contains, coded_contains_waterfill,
                           coded_contains_lp)
from mdsq.model import build_system, build_system_from_counts


def small_system(n_coded=2):
    return build_system(10, 2, n_coded, [.5, .5])


def fig2_system():
    return build_system(64, 2, 4, [.5, .5])


class TestRegions(unittest.TestCase):
    """Uncoded box and coded water-filling membership."""

    def test_00_uncoded(self):
        sys = fig2_system()
        assert(uncoded_contains(sys, [31, 20]).verdict == INTERIOR)
        assert(uncoded_contains(sys, [32, 20]).verdict == BOUNDARY)
        assert(uncoded_contains(sys, [33, 20]).verdict == EXTERIOR)
        assert(capacity.systematic_contains(sys, [31, 20]).verdict
               == EXTERIOR)

    def test_01_waterfill(self):
        sys = small_system()
        assert(sys.s == (4, 4))
        m = coded_contains_waterfill(sys, [5, 3])
        assert(m.verdict == INTERIOR and abs(m.margin - .5) < 1e-12)
        m = coded_contains_waterfill(sys, [6, 3])
        assert(m.verdict == EXTERIOR and abs(m.margin + .5) < 1e-12)
        # Point on the boundary of the 64-server region.
        assert(coded_contains_waterfill(fig2_system(), [28, 33]).verdict
               == BOUNDARY)

    def test_02_gained(self):
        sys = fig2_system()
        lam = [33, 20]
        assert(not uncoded_contains(sys, lam).interior)
        assert(coded_contains_waterfill(sys, lam).interior)
        assert(coded_contains_lp(sys, lam).interior)

    def test_03_no_coding(self):
        sys = small_system(0)
        assert(capacity.waterfill_margin(sys, [3, 4]) == 1.)
        assert(coded_contains_waterfill(sys, [5.5, 2]).verdict == EXTERIOR)

    def test_04_bad_rates(self):
        sys = small_system()
        with pytest.raises(ValueError):
            capacity.as_rates(sys, [1, 2, 3])
        with pytest.raises(ValueError):
            capacity.as_rates(sys, [-1, 2])
        with pytest.raises(ValueError):
            capacity.as_rates(sys, [np.nan, 2])


class TestLPOracle(unittest.TestCase):
    """The LP oracle agrees with the closed form away from the
    boundary."""

    def test_00_k2_grid(self):
        sys = small_system()
        for l1 in np.arange(0., 7.01, .5):
            for l2 in np.arange(0., 7.01, .5):
                wf = capacity.waterfill_margin(sys, [l1, l2])
                flows, t = capacity.lp_flows(sys, [l1, l2])
                if abs(wf) < 1e-6:
                    assert(abs(t) < 1e-6)
                else:
                    assert(np.sign(wf) == np.sign(t)), (l1, l2, wf, t)

    def test_01_k3_random(self):
        sys = build_system(30, 3, 3, [.3, .3, .4])
        rng = np.random.default_rng(1)
        for lam in rng.uniform(0., 12., size=(40, 3)):
            wf = capacity.waterfill_margin(sys, lam)
            flows, t = capacity.lp_flows(sys, lam)
            if abs(wf) > 1e-6:
                assert(np.sign(wf) == np.sign(t)), (lam, wf, t)

    def test_02_flows(self):
        sys = fig2_system()
        lam = np.array([33., 20.])
        flows, t = capacity.lp_flows(sys, lam)
        assert(t > 0)
        for f, li in zip(flows, lam):
            assert(np.all(f >= -1e-9))
            assert(abs(f.sum() - li) < 1e-7)

    def test_03_k2_exhaustive(self):
        # Every small two-type topology, including n_coded < k.
        for n in [4, 5, 8, 12, 16]:
            for n_coded in range(5):
                if n - n_coded < 3:
                    continue
                for a1 in [.25, .5, .75]:
                    sys = build_system(n, 2, n_coded, [a1, 1. - a1])
                    for l1 in np.arange(0., n + 1e-9, n / 8.):
                        for l2 in np.arange(0., n + 1e-9, n / 8.):
                            wf = capacity.waterfill_margin(sys, [l1, l2])
                            flows, t = capacity.lp_flows(sys, [l1, l2])
                            if abs(wf) < 1e-6 or abs(t) < 1e-6:
                                continue
                            assert(np.sign(wf) == np.sign(t)), \
                                (sys.s, n_coded, l1, l2, wf, t)

    def test_04_k3_few_coded(self):
        for n_coded in [1, 2, 3]:
            sys = build_system(9 + n_coded, 3, n_coded, [1 / 3] * 3)
            steps = np.arange(0., 4.51, .75)
            for lam in itertools.product(steps, repeat=3):
                wf = capacity.waterfill_margin(sys, lam)
                flows, t = capacity.lp_flows(sys, lam)
                if abs(wf) < 1e-6 or abs(t) < 1e-6:
                    continue
                assert(np.sign(wf) == np.sign(t)), (n_coded, lam, wf, t)
        sys = build_system(30, 3, 2, [.2, .3, .5])
        rng = np.random.default_rng(7)
        for lam in rng.uniform(0., 16., size=(60, 3)):
            wf = capacity.waterfill_margin(sys, lam)
            flows, t = capacity.lp_flows(sys, lam)
            if abs(wf) > 1e-6 and abs(t) > 1e-6:
                assert(np.sign(wf) == np.sign(t)), (lam, wf, t)

    def test_05_single_coded_server(self):
        # One coded server cannot serve an all-coded pattern, so a
        # deficit on type 2 needs type-1 helpers.
        sys = build_system(4, 2, 1, [.25, .75])
        assert(sys.s == (1, 2))
        lam = [.75, 2.5]
        m = coded_contains_waterfill(sys, lam)
        assert(m.verdict == EXTERIOR and abs(m.margin + .25) < 1e-12)
        assert(coded_contains_lp(sys, lam).verdict == EXTERIOR)
        assert(coded_contains_waterfill(sys, [.25, 2.5]).verdict == INTERIOR)
        assert(coded_contains_waterfill(sys, [.5, 2.5]).verdict == BOUNDARY)


class TestInvariants(unittest.TestCase):
    """Structural properties of the coded region."""

    def test_00_monotone(self):
        rng = np.random.default_rng(3)
        for n_coded in [1, 2, 4]:
            sys = build_system(24, 3, n_coded, [.2, .3, .5])
            for lam in rng.uniform(0., 12., size=(50, 3)):
                shrunk = lam * rng.uniform(0., 1., size=3)
                assert(capacity.waterfill_margin(sys, shrunk)
                       >= capacity.waterfill_margin(sys, lam) - 1e-12)

    def test_01_more_servers(self):
        rng = np.random.default_rng(4)
        base = build_system_from_counts([3, 5, 4], 2)
        bigger = [build_system_from_counts([4, 5, 4], 2),
                  build_system_from_counts([3, 5, 6], 2),
                  build_system_from_counts([3, 5, 4], 3)]
        for lam in rng.uniform(0., 8., size=(50, 3)):
            m = capacity.waterfill_margin(base, lam)
            for sys in bigger:
                assert(capacity.waterfill_margin(sys, lam) >= m - 1e-12)
        # Coding never loses against the systematic servers alone.
        for lam in rng.uniform(0., 8., size=(50, 3)):
            if capacity.systematic_contains(base, lam).interior:
                assert(coded_contains_waterfill(base, lam).interior)

    def test_02_permutation(self):
        rng = np.random.default_rng(5)
        s = [2, 5, 7]
        for n_coded in [1, 2, 3]:
            sys = build_system_from_counts(s, n_coded)
            for lam in rng.uniform(0., 9., size=(20, 3)):
                m = capacity.waterfill_margin(sys, lam)
                for perm in itertools.permutations(range(3)):
                    perm = list(perm)
                    other = build_system_from_counts([s[p] for p in perm],
                                                     n_coded)
                    assert(abs(capacity.waterfill_margin(other, lam[perm])
                               - m) < 1e-12)


class TestK2Boundary(unittest.TestCase):
    """Piecewise boundary and areas for two job types."""

    def test_00_pieces(self):
        sys = fig2_system()
        assert(capacity.k2_max_lambda1(sys) == 34.)
        for l1, l2 in [(0, 34), (26, 34), (28, 33), (30, 32), (31, 31),
                       (32, 30), (34, 26)]:
            assert(abs(capacity.k2_boundary(sys, l1) - l2) < 1e-12), l1
        with pytest.raises(ValueError):
            capacity.k2_boundary(sys, 35)

    def test_01_boundary_on_region(self):
        sys = fig2_system()
        for l1 in np.linspace(0., 34., 35):
            l2 = capacity.k2_boundary(sys, l1)
            assert(abs(capacity.waterfill_margin(sys, [l1, l2])) < 1e-9)

    def test_02_area(self):
        sys = fig2_system()
        assert(abs(capacity.region_area_k2(sys) - 1134.) < 1e-9)
        assert(abs(capacity.uncoded_area_k2(sys) - 1024.) < 1e-9)
        assert(capacity.region_area_k2(sys) > capacity.uncoded_area_k2(sys))

    def test_03_few_systematic(self):
        # s2 < n_coded: the last piece reaches lambda2 = 0 before
        # lambda1 = s1 + n_coded.
        sys = build_system(10, 2, 4, [.5, .5])
        assert(sys.s == (3, 3))
        assert(capacity.k2_max_lambda1(sys) == 6.5)
        assert(capacity.k2_boundary(sys, 6.5) == 0.)
        assert(abs(capacity.k2_boundary(sys, 5.) - 3.) < 1e-12)
        with pytest.raises(ValueError):
            capacity.k2_boundary(sys, 6.9)
        assert(abs(capacity.region_area_k2(sys) - 27.5) < 1e-12)
        assert(coded_contains_waterfill(sys, [6.5, 0.]).verdict == BOUNDARY)
        assert(coded_contains_waterfill(sys, [6.9, 0.]).verdict == EXTERIOR)
        for l1 in np.linspace(0., 6.5, 27):
            l2 = capacity.k2_boundary(sys, l1)
            assert(abs(capacity.waterfill_margin(sys, [l1, l2])) < 1e-9), l1

    def test_04_one_coded(self):
        sys = build_system(10, 2, 1, [.5, .5])
        assert(sys.s == (5, 4))
        assert(capacity.k2_max_lambda1(sys) == 6.)
        for l1, l2 in [(0, 5), (4, 5), (4.5, 4.5), (5, 4), (6, 3)]:
            assert(abs(capacity.k2_boundary(sys, l1) - l2) < 1e-12), l1
        for l1 in np.linspace(0., 6., 25):
            l2 = capacity.k2_boundary(sys, l1)
            assert(abs(capacity.waterfill_margin(sys, [l1, l2])) < 1e-9), l1
        assert(abs(capacity.region_area_k2(sys) - 28.) < 1e-12)
        with pytest.raises(ValueError):
            capacity.k2_max_lambda1(build_system(12, 3, 3, [1 / 3] * 3))


class TestSweep(unittest.TestCase):
    """Membership grids and their CSV output."""

    def test_00_sweep(self):
        sys = build_system(10, 2, 4, [.5, .5])
        grid = GridSpec.stepped(2, 7., .5)
        assert(grid.points == (15, 15))
        rows = capacity.region_sweep(sys, grid)
        assert(len(rows) == 225)
        assert(rows[0][0] == (0., 0.) and rows[1][0] == (0., .5))
        gained = [r[0] for r in capacity.gained_points(rows)]
        lost = [r[0] for r in capacity.lost_points(rows)]
        assert((5.5, 1.) in gained and (1., 5.5) in gained)
        assert((4.5, 4.5) in lost)

    def test_01_csv(self):
        sys = small_system()
        rows = capacity.region_sweep(sys, GridSpec.square(2, 6., 4))
        with tempfile.TemporaryDirectory() as tmp:
            fn = os.path.join(tmp, 'region.csv')
            capacity.write_region_csv(rows, 2, fn)
            with open(fn) as fin:
                lines = fin.read().splitlines()
        assert(lines[0] == 'lambda_1,lambda_2,uncoded,coded')
        assert(len(lines) == 17)
        assert(lines[1] == '0,0,interior,interior')

    def test_02_bad_grid(self):
        with pytest.raises(ValueError):
            capacity.region_sweep(build_system(10, 1, 2, [1.]),
                                  GridSpec.square(1, 5., 3))
        with pytest.raises(ValueError):
            capacity.region_sweep(small_system(), GridSpec.square(3, 5., 3))


if __name__ == '__main__':
    unittest.main()
