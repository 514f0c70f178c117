"""Counter-based random streams.

Every Monte-Carlo routine derives its noise from Philox streams keyed by
(seed, step index), with the path index selecting a fixed slot inside the
step block.  The variate used by path i at step k is therefore a pure
function of (seed, i, k): path blocks can be generated in any order, or in
parallel, and aggregates do not depend on scheduling.

Probe-level seeds are derived from the master seed with `substream`, so
independent probes never share a stream.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64


def substream(master_seed: int, *ids: int) -> int:
    """Derive a 64-bit sub-seed from a master seed and probe identifiers."""
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1), spawn_key=tuple(int(i) for i in ids))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def step_generator(seed: int, step: int) -> np.random.Generator:
    """Generator for one simulation step, keyed by (seed, step)."""
    key = np.array([int(seed) & (2**64 - 1), int(step) & (2**64 - 1)], dtype=_U64)
    return np.random.Generator(np.random.Philox(key=key))


def stream_generator(seed: int, purpose: int = 0) -> np.random.Generator:
    """Sequential generator for non-stepwise draws (initial clouds, grids)."""
    return step_generator(seed, (1 << 62) + int(purpose))
