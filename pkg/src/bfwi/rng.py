"""Deterministic random-stream splitting.

Every random draw in the package descends from an explicit user seed
through :func:`substream`.  A substream is addressed by the root seed plus
any number of integer or string keys (record index, purpose tag, repeat
counter).  The same address always yields the same generator, and distinct
addresses yield statistically independent streams, so per-record work can
be farmed out to threads without changing results.
"""

import hashlib

import numpy as np

__all__ = ["substream", "key_to_int"]


def key_to_int(key):
    """Map a substream key to a stable non-negative integer.

    Integers pass through (must be non-negative); strings hash via
    SHA-256 so the mapping is stable across processes and platforms.
    """
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"substream keys must be non-negative, got {key}")
        return int(key)
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"substream keys must be int or str, got {type(key).__name__}")


def substream(seed, *keys):
    """Return a ``numpy.random.Generator`` for the addressed substream.

    ``seed`` is the experiment root seed (any 64-bit unsigned integer);
    ``keys`` identify the consumer, e.g. ``substream(seed, record_idx,
    "distort")``.
    """
    entropy = [key_to_int(seed)] + [key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
