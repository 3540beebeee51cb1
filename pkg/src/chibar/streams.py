"""Reproducible RNG substreams.

Draws are cut into fixed-size blocks, each with its own generator spawned
from the root seed.  The block layout depends only on ``(seed, n, block)``,
never on how many workers process it, so results are bit-identical under
any degree of parallelism.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple

import numpy as np

DEFAULT_BLOCK = 8192


def block_layout(seed, n: int, block: int = DEFAULT_BLOCK) -> List[Tuple[int, np.random.SeedSequence]]:
    """``[(size, seedseq), ...]`` covering ``n`` draws."""
    from .orthant import seed_sequence

    if n < 0:
        raise ValueError("n must be non-negative")
    nblocks = (n + block - 1) // block
    children = seed_sequence(seed).spawn(nblocks)
    sizes = [block] * nblocks
    if nblocks:
        sizes[-1] = n - block * (nblocks - 1)
    return list(zip(sizes, children))


def map_blocks(fn: Callable, layout: Sequence, jobs: int = 1) -> list:
    """Apply ``fn(size, seedseq)`` to each block; results come back in block order."""
    if jobs <= 1 or len(layout) <= 1:
        return [fn(size, ss) for size, ss in layout]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda item: fn(*item), layout))
