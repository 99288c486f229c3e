"""Counter-based random streams.

A run is split into fixed-size chunks of replicates.  Chunk ``c`` of a run with
master seed ``s`` draws from a Philox generator keyed by ``(s, c)``, so the
output does not depend on how chunks are distributed over threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

GENERATOR = "counter-v1"
CHUNK = 16384
THREADS_ENV = "ECF_TOOLKIT_THREADS"

T = TypeVar("T")


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def open_uniform(gen: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    return gen.random(shape) + 2.0**-54


def unit_frechet(gen: np.random.Generator, shape) -> np.ndarray:
    """Unit Frechet variates by inversion, Z = -1/log U."""
    return -1.0 / np.log(open_uniform(gen, shape))


def chunks(n: int, size: int = CHUNK) -> list[tuple[int, int, int]]:
    """(chunk index, start, stop) triples covering range(n)."""
    return [(c, lo, min(lo + size, n)) for c, lo in enumerate(range(0, n, size))]


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def map_chunks(
    fn: Callable[[int, int, int], T],
    parts: Sequence[tuple[int, int, int]],
    threads: int | None = None,
) -> list[T]:
    """Apply fn(c, lo, hi) to every chunk; results come back in chunk order."""
    threads = resolve_threads(threads)
    if threads == 1 or len(parts) <= 1:
        return [fn(*p) for p in parts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: fn(*p), parts))
