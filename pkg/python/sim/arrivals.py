"""Arrival schedules: constant rates or per-type square waves.

Arrival times of a Poisson process with piecewise-constant rate are
drawn by inverting the cumulative intensity: one Exp(1) variate is
spent across rate phases until it is exhausted.

"""
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SquareWave:
    """Rate ``high`` for the first ``high_fraction`` of each period,
    then ``low``; the whole pattern is delayed by ``phase_shift``."""
    low: float
    high: float
    period: float
    high_fraction: float = 0.5
    phase_shift: float = 0.

    def __post_init__(self):
        if self.low < 0 or self.high < 0:
            raise ValueError('Square-wave rates must be >= 0.')
        if self.period <= 0:
            raise ValueError('Square-wave period must be > 0.')
        if not (0 < self.high_fraction < 1):
            raise ValueError('high_fraction must lie in (0, 1).')

    def _offset(self, t):
        return (t - self.phase_shift) % self.period

    def rate(self, t):
        if self._offset(t) < self.high_fraction * self.period:
            return self.high
        return self.low

    def next_change(self, t):
        """First time strictly after t at which the rate may change."""
        off = self._offset(t)
        edge = self.high_fraction * self.period
        base = t - off
        if off < edge:
            nxt = base + edge
        else:
            nxt = base + self.period
        if nxt <= t:
            nxt += self.period
        return nxt

    def breakpoints(self, t0, t1):
        out = []
        t = t0
        while True:
            t = self.next_change(t)
            if t >= t1:
                return out
            out.append(t)

    def to_json(self):
        return {'low': self.low, 'high': self.high, 'period': self.period,
                'high_fraction': self.high_fraction,
                'phase_shift': self.phase_shift}


class ArrivalSchedule:
    """Per-type arrival rate functions.

    Each entry of ``waves`` is a float (constant rate) or a
    :class:`SquareWave`.

    """
    def __init__(self, waves):
        self.waves = []
        for w in waves:
            if isinstance(w, SquareWave):
                self.waves.append(w)
            else:
                w = float(w)
                if not (w >= 0 and math.isfinite(w)):
                    raise ValueError('Constant rates must be finite and '
                                     '>= 0 (got %s).' % w)
                self.waves.append(w)

    @classmethod
    def fixed(cls, lam):
        return cls([float(x) for x in lam])

    @property
    def k(self):
        return len(self.waves)

    @property
    def is_fixed(self):
        return not any(isinstance(w, SquareWave) for w in self.waves)

    @property
    def period(self):
        """Longest wave period (None for constant schedules)."""
        periods = [w.period for w in self.waves if isinstance(w, SquareWave)]
        return max(periods) if periods else None

    def rate(self, i, t):
        w = self.waves[i]
        return w.rate(t) if isinstance(w, SquareWave) else w

    def rates(self, t):
        return tuple(float(self.rate(i, t)) for i in range(self.k))

    def next_change_of(self, i, t):
        w = self.waves[i]
        return w.next_change(t) if isinstance(w, SquareWave) else math.inf

    def next_change(self, t):
        return min(self.next_change_of(i, t) for i in range(self.k))

    def mean_rates(self):
        out = []
        for w in self.waves:
            if isinstance(w, SquareWave):
                out.append(w.high * w.high_fraction
                           + w.low * (1 - w.high_fraction))
            else:
                out.append(w)
        return np.array(out)

    def phases(self, horizon):
        """Distinct rate vectors taken on [0, horizon), in order of
        first appearance."""
        seen = []
        t = 0.
        while t < horizon:
            r = self.rates(t)
            if r not in seen:
                seen.append(r)
            t = self.next_change(t)
        return seen

    def next_arrival(self, i, t, stream):
        """Next type-i arrival after time t."""
        e = stream.exponential()
        while True:
            r = self.rate(i, t)
            c = self.next_change_of(i, t)
            if r > 0:
                dt = e / r
                if t + dt < c:
                    return t + dt
                e -= r * (c - t)
            if c == math.inf:
                return math.inf
            t = c

    def to_json(self):
        return [w.to_json() if isinstance(w, SquareWave) else w
                for w in self.waves]

    @classmethod
    def from_json(cls, data):
        waves = []
        for w in data:
            if isinstance(w, dict):
                waves.append(SquareWave(**w))
            else:
                waves.append(float(w))
        return cls(waves)
