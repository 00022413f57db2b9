"""Counter-based deterministic randomness keyed by (seed, integer).

Used for the seeded random function families and random prime sets: the
value attached to a prime is a pure hash of (seed, p), so a family member
is identical across machines and needs no per-prime storage.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_C1 = 0x9E3779B97F4A7C15
_C2 = 0xBF58476D1CE4E5B9
_C3 = 0x94D049BB133111EB


def _mix_int(x: int) -> int:
    x = (x + _C1) & _MASK
    x = ((x ^ (x >> 30)) * _C2) & _MASK
    x = ((x ^ (x >> 27)) * _C3) & _MASK
    return x ^ (x >> 31)


def _mix_array(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x.astype(np.uint64) + np.uint64(_C1)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_C2)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_C3)
        return x ^ (x >> np.uint64(31))


def uniform01(seed: int, n: int | np.ndarray, salt: int = 0):
    """Deterministic uniforms in [0, 1) keyed by (seed, n, salt).

    ``n`` may be a scalar or an integer array; the result matches shape.
    """
    key = _mix_int((seed & _MASK) ^ (salt * 0x5851F42D4C957F2D & _MASK))
    if np.isscalar(n):
        return _mix_int(key ^ (int(n) & _MASK)) / 2.0**64
    arr = np.asarray(n)
    with np.errstate(over="ignore"):
        mixed = _mix_array(arr.astype(np.uint64) ^ np.uint64(key))
    return mixed.astype(np.float64) / 2.0**64
