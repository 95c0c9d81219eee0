import concurrent.futures
import logging
import os

import numpy as np

from meshkit.errors import ArgumentError

logger = logging.getLogger(__name__)

THREADS_ENV = "MESHKIT_THREADS"
_threads = None


def get_threads():
    """Number of worker threads: explicit setting, then $MESHKIT_THREADS, then cpu count."""
    if _threads is not None:
        return _threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ArgumentError(f"{THREADS_ENV} must be an integer, got {env!r}")
        if value < 1:
            raise ArgumentError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def set_threads(count):
    """Cap the worker count; None restores the environment default."""
    global _threads
    if count is not None and count < 1:
        raise ArgumentError(f"thread count must be >= 1, got {count}")
    _threads = count


def parallel_map(fn, items):
    """Apply fn to every item, returning results in input order.

    With a single thread everything runs in the calling thread, which is the
    reference mode used for bit-reproducibility checks.
    """
    items = list(items)
    workers = min(get_threads(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def relabel_first_occurrence(labels):
    """Map arbitrary integer labels to 0..K-1 ordered by first occurrence."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return labels.copy()
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


def offsets_from_counts(counts):
    """Exclusive prefix sum with a trailing total: [0, c0, c0+c1, ...]."""
    counts = np.asarray(counts, dtype=np.int64)
    offsets = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets


def segment_ids(offsets):
    """Owner segment of every element described by an offsets table."""
    offsets = np.asarray(offsets, dtype=np.int64)
    return np.repeat(np.arange(len(offsets) - 1), np.diff(offsets))


def configure_logging(verbose=False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
