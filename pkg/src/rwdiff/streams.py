"""Reproducible random streams.

Each path ``i`` of an ensemble owns two independent Philox generators, one
for the temporal noise and one for the sphere, derived from the master seed
through ``SeedSequence`` spawn keys. A path's output therefore depends only
on ``(master_seed, i)`` and never on thread count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import os

import numpy as np

TEMPORAL = 0
SPHERE = 1


def generator(master_seed, path_index, stream=TEMPORAL) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.Philox(seq))


def path_streams(master_seed, path_index):
    """``(temporal_rng, sphere_rng)`` for one path."""
    return generator(master_seed, path_index, TEMPORAL), generator(master_seed, path_index, SPHERE)


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(rng))


def resolve_threads(threads=None) -> int:
    """Explicit value, else the RWDIFF_THREADS environment variable, else 1."""
    if threads is None:
        threads = os.environ.get("RWDIFF_THREADS") or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def map_paths(task, n_paths, master_seed, threads=None):
    """``[task(i, temporal_rng, sphere_rng) for i in range(n_paths)]`` on a thread pool.

    Results come back in path order and each path's streams depend only on
    ``(master_seed, i)``, so the output does not depend on ``threads``.
    The compiled kernels release the GIL.
    """
    threads = resolve_threads(threads)

    def run(i):
        return task(i, *path_streams(master_seed, i))

    if threads == 1 or n_paths <= 1:
        return [run(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(n_paths)))
