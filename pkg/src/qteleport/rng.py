"""Counter-based random streams.

Draw ``k`` of shot ``s`` under ``seed`` is Philox4x32-10 evaluated at
counter ``(k, s)`` with key ``seed``. Nothing is carried between shots, so
any partition of the shots across workers sees identical values.
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox4x32", "uniforms", "ShotStream", "MAX_SEED"]

MAX_SEED = 2**64 - 1

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def philox4x32(counter, key, rounds: int = 10):
    """Vectorized Philox4x32 block function.

    ``counter`` is a sequence of four uint32 arrays (broadcastable), ``key``
    a pair of uint32 scalars or arrays. Returns four uint32 arrays.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) & _MASK for k in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ k0,
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ k1,
            p0 & _MASK,
        )
    return tuple(c.astype(np.uint32) for c in (c0, c1, c2, c3))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def uniforms(seed: int, shots, draws) -> np.ndarray:
    """Uniform doubles in [0, 1) with 53 random bits, shape ``(len(shots), len(draws))``."""
    seed = _check_seed(seed)
    s = np.asarray(shots, dtype=np.uint64).reshape(-1, 1)
    k = np.asarray(draws, dtype=np.uint64).reshape(1, -1)
    w0, w1, _, _ = philox4x32(
        (k & _MASK, k >> _SHIFT, s & _MASK, s >> _SHIFT),
        (seed & 0xFFFFFFFF, seed >> 32),
    )
    hi = (w0 >> np.uint32(5)).astype(np.float64)
    lo = (w1 >> np.uint32(6)).astype(np.float64)
    return (hi * 67108864.0 + lo) / 9007199254740992.0


class ShotStream:
    """Sequential view of one shot's draws; optionally primed with a precomputed row."""

    __slots__ = ("seed", "shot", "_row", "_pos")

    def __init__(self, seed: int, shot: int, row: np.ndarray | None = None):
        self.seed = _check_seed(seed)
        self.shot = int(shot)
        self._row = row if row is not None else np.empty(0)
        self._pos = 0

    def random(self) -> float:
        pos = self._pos
        if pos >= self._row.size:
            extra = uniforms(self.seed, [self.shot], np.arange(pos, pos + 16))[0]
            self._row = np.concatenate([self._row[:pos], extra])
        self._pos = pos + 1
        return float(self._row[pos])

    def integers(self, high: int) -> int:
        return min(int(self.random() * high), high - 1)

    @property
    def consumed(self) -> int:
        return self._pos
