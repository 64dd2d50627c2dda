"""Keyed random substreams.

Every random draw in the package comes from a Philox generator (counter
based) whose key is derived from ``(seed, *key)`` through
``numpy.random.SeedSequence``.  Streams for different keys are independent,
so work can be split across threads in any order and still reproduce
bitwise.
"""

import numpy as np

# namespaces so that e.g. noise for target 3 and surrogates for target 3 never share a stream
NOISE = 1
DRIVER = 2
CIRC = 3
PHASE = 4
NULL = 5


def substream(seed, *key):
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
