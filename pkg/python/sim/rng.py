"""Reproducible random streams.

Algorithm: numpy's PCG64 bit generator, seeded through
``numpy.random.SeedSequence``.  A run's master seed is turned into a
per-replication seed with the splitmix64 finalizer; each (purpose,
index) pair then gets its own independent stream via the
SeedSequence ``spawn_key``.  Streams are created lazily, and a given
stream's draws do not depend on which other streams exist, so e.g. a
server's service times are the same whatever the routing does.

"""
import numpy as np

RNG_ALGORITHM = 'PCG64'
MASK64 = (1 << 64) - 1

# Stream purposes.
ARRIVAL = 0
ROUTE = 1
SELECT = 2
SERVICE = 3


def splitmix64(x):
    """splitmix64 finalizer (Steele, Lea, Flood): a bijective 64-bit
    mix."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def replication_seed(master_seed, index):
    """Seed for replication index of a run with the given master seed."""
    return splitmix64((int(master_seed) + int(index)) & MASK64)


class Stream:
    """Block-buffered draws from one PCG64 generator."""

    def __init__(self, seed, purpose, index, block):
        seq = np.random.SeedSequence(seed, spawn_key=(purpose, index))
        self.gen = np.random.Generator(np.random.PCG64(seq))
        self.block = block
        self._exp = []
        self._ie = 0
        self._uni = []
        self._iu = 0

    def exponential(self):
        if self._ie >= len(self._exp):
            self._exp = self.gen.standard_exponential(self.block).tolist()
            self._ie = 0
        self._ie += 1
        return self._exp[self._ie - 1]

    def uniform(self):
        if self._iu >= len(self._uni):
            self._uni = self.gen.random(self.block).tolist()
            self._iu = 0
        self._iu += 1
        return self._uni[self._iu - 1]


class StreamFactory:
    """Lazily creates and caches the streams of one replication."""

    def __init__(self, seed, block=4096):
        self.seed = seed
        self.block = block
        self._streams = {}

    def get(self, purpose, index=0, block=None):
        key = (purpose, index)
        if key not in self._streams:
            self._streams[key] = Stream(self.seed, purpose, index,
                                        block or self.block)
        return self._streams[key]
