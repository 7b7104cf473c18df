"""Counter-based normal noise, vectorized in numpy.

Every standard-normal draw is a pure function of (seed, path index, step
index), so simulation output cannot depend on batch scheduling or worker
count.  The generator is Philox4x32-10; one 128-bit block yields the pair of
normals for two consecutive steps of one path via Box-Muller:

    counter = (block_lo, block_hi, path_lo, path_hi),  key = (seed_lo, seed_hi)
    u1 = uniform53(w0, w1),  u2 = uniform53(w2, w3)
    z(2j)   = sqrt(-2 ln u1) * cos(2 pi u2)
    z(2j+1) = sqrt(-2 ln u1) * sin(2 pi u2)

The compiled core (``_core.pyx``) implements the same mapping scalar-wise.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
_MASK32 = 0xFFFFFFFF
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_TWO_PI = 6.283185307179586476925287

__all__ = ["philox4x32_10", "normal_matrix"]


def philox4x32_10(c0, c1, c2, c3, key0: int, key1: int):
    """Apply the 10-round Philox4x32 bijection to broadcastable uint32 counters.

    Returns four uint32 arrays (the output words).  Matches the reference
    known-answer vectors for the generator.
    """
    x0 = np.asarray(c0, dtype=np.uint32)
    x1 = np.asarray(c1, dtype=np.uint32)
    x2 = np.asarray(c2, dtype=np.uint32)
    x3 = np.asarray(c3, dtype=np.uint32)
    k0 = int(key0) & _MASK32
    k1 = int(key1) & _MASK32
    for _ in range(10):
        p0 = x0.astype(np.uint64) * PHILOX_M0
        p1 = x2.astype(np.uint64) * PHILOX_M1
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        x0 = hi1 ^ x1 ^ np.uint32(k0)
        x1 = lo1
        x2 = hi0 ^ x3 ^ np.uint32(k1)
        x3 = lo0
        k0 = (k0 + PHILOX_W0) & _MASK32
        k1 = (k1 + PHILOX_W1) & _MASK32
    return x0, x1, x2, x3


def _uniform53(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 53-bit uniform strictly inside (0, 1): never 0, so log() is safe
    hi = (a >> np.uint32(5)).astype(np.float64)
    lo = (b >> np.uint32(6)).astype(np.float64)
    return (hi * 67108864.0 + lo + 0.5) * _INV53


def normal_matrix(seed: int, path_start: int, n_paths: int, n_steps: int) -> np.ndarray:
    """Standard-normal draws for paths [path_start, path_start + n_paths).

    Returns an (n_paths, n_steps) float64 array; entry [p, j] is the draw for
    global path index path_start + p at step j.
    """
    if n_steps == 0:
        return np.zeros((n_paths, 0))
    n_blocks = (n_steps + 1) // 2
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    paths = np.arange(path_start, path_start + n_paths, dtype=np.uint64)[:, None]
    blocks = np.arange(n_blocks, dtype=np.uint64)[None, :]
    c0 = blocks.astype(np.uint32)
    c1 = (blocks >> np.uint64(32)).astype(np.uint32)
    c2 = paths.astype(np.uint32)
    c3 = (paths >> np.uint64(32)).astype(np.uint32)
    w0, w1, w2, w3 = philox4x32_10(
        np.broadcast_to(c0, (n_paths, n_blocks)),
        np.broadcast_to(c1, (n_paths, n_blocks)),
        np.broadcast_to(c2, (n_paths, n_blocks)),
        np.broadcast_to(c3, (n_paths, n_blocks)),
        seed & _MASK32,
        seed >> 32,
    )
    u1 = _uniform53(w0, w1)
    u2 = _uniform53(w2, w3)
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = _TWO_PI * u2
    out = np.empty((n_paths, 2 * n_blocks))
    out[:, 0::2] = radius * np.cos(theta)
    out[:, 1::2] = radius * np.sin(theta)
    return out[:, :n_steps]
