"""
Counter-based random numbers keyed by (seed, sample index).

Every Monte Carlo sample owns an independent Philox4x32-10 stream. The
64-bit seed is the Philox key and the sample index occupies the upper
64 bits of the 128-bit counter, so the draws of sample ``i`` never depend
on how many other samples were generated, in what order, or by which
worker. The lower 64 bits of the counter enumerate blocks within the
stream; each block yields two double-precision uniforms.

Both the scalar stream object returned by :func:`sample_index_rng` and
the vectorised helpers (:func:`uniforms`, :func:`normals`) go through the
same :func:`philox4x32` kernel, so they agree bit for bit.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import InvalidArgumentError

__all__ = [
    "philox4x32",
    "sample_index_rng",
    "SampleStream",
    "uniforms",
    "normals",
    "check_seed",
]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    """Validate and return ``seed`` as a Python int in [0, 2**64)."""
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise InvalidArgumentError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def philox4x32(counter, key, rounds: int = 10):
    """
    Philox4x32 block function, vectorised over the leading axis.

    Parameters
    ----------
    counter : array_like of shape (..., 4)
        32-bit counter words (lowest word first).
    key : array_like of shape (..., 2)
        32-bit key words, broadcast against ``counter``.
    rounds : int
        Number of rounds; 10 is the standard, crush-resistant choice.

    Returns
    -------
    ndarray of uint64, shape (..., 4)
        Output words, each in [0, 2**32).
    """
    ctr = np.asarray(counter, dtype=np.uint64) & _MASK32
    k = np.asarray(key, dtype=np.uint64) & _MASK32
    c0, c1, c2, c3 = ctr[..., 0], ctr[..., 1], ctr[..., 2], ctr[..., 3]
    k0, k1 = k[..., 0], k[..., 1]
    for _ in range(rounds):
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT32) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> _SHIFT32) ^ c3 ^ k1,
            p0 & _MASK32,
        )
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return np.stack([c0, c1, c2, c3], axis=-1)


def _blocks(seed: int, indices: np.ndarray, block: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64)
    n = idx.shape[0]
    counter = np.empty((n, 4), dtype=np.uint64)
    counter[:, 0] = np.uint64(block & 0xFFFFFFFF)
    counter[:, 1] = np.uint64((block >> 32) & 0xFFFFFFFF)
    counter[:, 2] = idx & _MASK32
    counter[:, 3] = idx >> _SHIFT32
    key = np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint64)
    return philox4x32(counter, key)


def _to_unit(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # 53 random bits, shifted by half an ulp so the result lies in (0, 1).
    bits = ((hi >> np.uint64(5)) << np.uint64(26)) | (lo >> np.uint64(6))
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def uniforms(seed: int, indices, draw: int) -> np.ndarray:
    """
    The ``draw``-th uniform variate of each sample's stream.

    Values lie strictly inside (0, 1), so they are safe to push through an
    inverse CDF.
    """
    seed = check_seed(seed)
    if draw < 0:
        raise InvalidArgumentError(f"draw must be non-negative, got {draw}")
    words = _blocks(seed, np.atleast_1d(indices), draw // 2)
    lane = 2 * (draw % 2)
    return _to_unit(words[:, lane], words[:, lane + 1])


def normals(seed: int, indices, draw: int) -> np.ndarray:
    """Standard normal variates by inversion of :func:`uniforms`."""
    return ndtri(uniforms(seed, indices, draw))


class SampleStream:
    """
    Sequential view of one sample's random stream.

    Successive calls consume successive draws; ``SampleStream(s, i)`` always
    starts from draw 0, so two streams built from the same pair produce the
    same sequence.
    """

    def __init__(self, seed: int, index: int):
        self.seed = check_seed(seed)
        if index < 0:
            raise InvalidArgumentError(f"sample index must be non-negative, got {index}")
        self.index = int(index)
        self.position = 0

    def _next_uniforms(self, size: int) -> np.ndarray:
        out = np.empty(size)
        for j in range(size):
            out[j] = uniforms(self.seed, [self.index], self.position)[0]
            self.position += 1
        return out

    def uniform(self, size=None):
        """Uniform(0, 1) variate(s)."""
        if size is None:
            return float(self._next_uniforms(1)[0])
        return self._next_uniforms(int(size))

    def normal(self, loc=0.0, scale=1.0, size=None):
        """Normal variate(s) by inversion."""
        if size is None:
            return float(loc + scale * ndtri(self._next_uniforms(1)[0]))
        return loc + scale * ndtri(self._next_uniforms(int(size)))

    def integers(self, low: int, high: int, size=None):
        """Integers uniform on ``[low, high)``."""
        if high <= low:
            raise InvalidArgumentError(f"empty integer range [{low}, {high})")
        u = self._next_uniforms(1 if size is None else int(size))
        values = low + np.floor(u * (high - low)).astype(np.int64)
        return int(values[0]) if size is None else values


def sample_index_rng(seed: int, index: int) -> SampleStream:
    """Return the reproducible random source belonging to sample ``index``."""
    return SampleStream(seed, index)
