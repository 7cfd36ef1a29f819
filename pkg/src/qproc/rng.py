"""Named random sub-streams derived from one user seed."""
from __future__ import annotations

import os
import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for task ``name``; independent of every other name."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


def thread_cap(default=None) -> int:
    """Worker count, capped by the ``QPROC_THREADS`` environment variable."""
    n = default if default is not None else (os.cpu_count() or 1)
    env = os.environ.get("QPROC_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return max(1, n)
