"""Worker-count-independent block scheduling.

Monte Carlo work is split into fixed blocks of BLOCK path indices (the
RNG block size), each a pure function of (seed, block).  Blocks may run
in any order on any number of processes; results are reassembled in
block order, so every statistic downstream sees the same concatenated
array regardless of scheduling, and numpy's pairwise reductions then
give bitwise identical aggregates.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import DomainError
from .ousim import BLOCK


def block_layout(n_paths: int):
    """(block_index, count) pairs covering path indices 0..n_paths-1."""
    if n_paths < 1:
        raise DomainError("need at least one path")
    full, rem = divmod(n_paths, BLOCK)
    layout = [(b, BLOCK) for b in range(full)]
    if rem:
        layout.append((full, rem))
    return layout


def run_blocks(worker, n_paths: int, workers: int, args: tuple) -> np.ndarray:
    """worker(block, count, *args) -> (count, ...) array; concatenated in
    block order."""
    layout = block_layout(n_paths)
    if workers is None or workers <= 1 or len(layout) == 1:
        parts = [worker(block, count, *args) for block, count in layout]
    else:
        parts = [None] * len(layout)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(worker, block, count, *args): i
                for i, (block, count) in enumerate(layout)
            }
            for fut, i in futures.items():
                parts[i] = fut.result()
    return np.concatenate(parts, axis=0)
