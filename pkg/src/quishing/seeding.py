"""Sub-seed derivation: one integer seed fans out to every random stream.

Keys are hashed through numpy's SeedSequence, so the stream for, say, tree
17 of the forest depends only on (seed, "rforest", 17) and never on the
order in which work was scheduled.
"""

import zlib

import numpy as np


def _key_to_int(key):
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("integer keys must be non-negative")
        return int(key)
    return zlib.crc32(str(key).encode("utf-8"))


def sub_seed(seed, *keys) -> int:
    """Derive a 64-bit seed from a root seed and a path of keys."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_to_int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed, *keys) -> np.random.Generator:
    return np.random.default_rng(sub_seed(seed, *keys))
