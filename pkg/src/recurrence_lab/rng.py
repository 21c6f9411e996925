"""Counter-based random streams.

Every Monte Carlo routine draws its samples in fixed-size chunks. Chunk ``j``
of a run seeded with ``seed`` always uses the Philox stream keyed by
``(seed, j)``, and partial results are reduced in chunk order, so the output
is a pure function of ``(config, seed)`` no matter how many worker threads
execute the chunks.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 14


_U64 = (1 << 64) - 1


def _splitmix(z):
    z = (z + 0x9E3779B97F4A7C15) & _U64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
    return z ^ (z >> 31)


def dither_salt(seed, index):
    """64-bit salt for the orbit dither of chunk `index` (pure arithmetic)."""
    return _splitmix(_splitmix(int(seed) & _U64) ^ (int(index) & _U64))


def stream(seed, index):
    """Independent Generator for chunk `index` of a run seeded with `seed`."""
    key = np.array([np.uint64(seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def chunk_sizes(total, chunk=CHUNK):
    """Split `total` samples into the fixed chunk layout."""
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def map_chunks(func, seed, total, threads=None, chunk=CHUNK):
    """Run ``func(chunk_index, chunk_size)`` over the fixed chunk layout.

    Results are returned in chunk order regardless of the worker count, so a
    deterministic reduction is just a fold over the returned list.
    """
    sizes = chunk_sizes(total, chunk)
    if threads is None or threads <= 1 or len(sizes) <= 1:
        return [func(j, m) for j, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(len(sizes)), sizes))
