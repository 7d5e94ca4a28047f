"""Counter-based RNG substreams.

Every Monte-Carlo sample draws from its own Philox substream derived from
(master seed, sample index), so results do not depend on batching, worker
count, or the order in which samples are evaluated.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for sample `index` of the stream keyed by `seed`.

    Philox jumps are 2**128 steps apart, far beyond any single sample's
    consumption, so substreams never overlap.
    """
    if index < 0:
        raise ValueError("substream index must be nonnegative")
    bitgen = np.random.Philox(key=np.uint64(seed))
    if index:
        bitgen = bitgen.jumped(index)
    return np.random.Generator(bitgen)
