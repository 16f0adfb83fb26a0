"""Reproducible random streams for the slotted simulator.

All randomness comes from numpy's PCG64 bit generator, seeded through a
``SeedSequence`` tree so that streams are independent and the layout is
stable across runs and platforms:

    SeedSequence(seed) --spawn--> [arrivals, channels]
    channels           --spawn--> one child per link

The arrivals stream supplies one uniform per link per slot (link order);
each per-link channel stream supplies one uniform per slot.  Every slot
consumes the same number of draws regardless of queue state, so a trace
is a pure function of the seed.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 8192


class UniformStream:
    """Buffered uniform(0,1) draws from a dedicated PCG64 generator.

    Draws are taken from the underlying generator in blocks; the emitted
    sequence is identical to calling ``Generator.random()`` one value at
    a time.
    """

    def __init__(self, seed_seq: np.random.SeedSequence, block: int = _BLOCK):
        self._gen = np.random.Generator(np.random.PCG64(seed_seq))
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def take(self, k: int) -> list[float]:
        return [self.next() for _ in range(k)]


class SimStreams:
    """The per-purpose / per-link stream bundle used by one simulation."""

    def __init__(self, seed: int, num_links: int):
        root = np.random.SeedSequence(seed)
        arrivals_ss, channels_ss = root.spawn(2)
        self.seed = seed
        self.num_links = num_links
        self.arrivals = UniformStream(arrivals_ss)
        self.channels = [UniformStream(ss) for ss in channels_ss.spawn(num_links)]
