"""Canonical chunk grids and the worker pool that evaluates them.

A generator splits its output space into a fixed number of chunks that
depends only on the model parameters.  Each chunk draws from its own keyed
substream, so a partition ``(index, count)`` is just a contiguous run of
chunks and the concatenation over partitions is byte-identical to a
single-stream run for every partition or thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError

MAX_CHUNKS = 4096
TARGET_CHUNK_OUTPUT = 1 << 20


def chunk_count(expected_output: float, limit: Optional[int] = None) -> int:
    """Chunks for a job expected to emit ``expected_output`` items."""
    c = int(expected_output // TARGET_CHUNK_OUTPUT) + 1
    c = min(c, MAX_CHUNKS)
    if limit is not None:
        c = min(c, max(1, int(limit)))
    return max(1, c)


def partition_range(num_chunks: int, partition: Optional[tuple]) -> range:
    if partition is None:
        return range(num_chunks)
    index, count = partition
    if count < 1 or not 0 <= index < count:
        raise InvalidParameterError(f"bad partition {partition}")
    return range((index * num_chunks) // count, ((index + 1) * num_chunks) // count)


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = int(os.environ.get("GRAPHFORGE_THREADS", "1") or 1)
    if threads < 1:
        raise InvalidParameterError("threads must be >= 1")
    return threads


def map_ordered(fn: Callable, items: Sequence, threads: int = 1) -> Iterator:
    """``map`` that may run on a thread pool but always yields in order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        for x in items:
            yield fn(x)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(fn, items)


@dataclass
class ChunkedJob:
    """A partitionable generator: ``num_chunks`` and a chunk -> edges map.

    ``chunk`` returns an ``(k, 2)`` edge array, or ``(edges, weights)``
    for weighted models.
    """

    num_chunks: int
    chunk: Callable[[int], object]

    def iter_chunks(self, partition: Optional[tuple] = None, threads: int = 1) -> Iterator:
        yield from map_ordered(self.chunk, partition_range(self.num_chunks, partition), threads)

    def collect(self, partition: Optional[tuple] = None, threads: int = 1):
        edges, weights = [], []
        weighted = False
        for res in self.iter_chunks(partition, threads):
            if isinstance(res, tuple):
                weighted = True
                edges.append(res[0])
                weights.append(res[1])
            else:
                edges.append(res)
        e = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
        if weighted:
            return e, np.concatenate(weights)
        return e, None
