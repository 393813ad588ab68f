"""Iterative radix-2 transform kernels shared by the spectral-analysis and
synthesis modules.  Unscaled; interface-level scaling lives in dsp."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(m: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(m // 2) / m)
    w.setflags(write=False)
    return w


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Unscaled DFT of the last axis via iterative radix-2 butterflies.

    Accepts real or complex input of any shape (..., N) with N a power of
    two; vectorizes over leading axes.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"unsupported length {n}: radix-2 needs a power of two")
    y = np.ascontiguousarray(x[..., _bit_reversal(n)], dtype=np.complex128)
    m = 2
    while m <= n:
        half = m // 2
        w = _twiddles(m)
        blocks = y.reshape(*y.shape[:-1], n // m, m)
        upper = blocks[..., :half]
        lower = blocks[..., half:] * w
        top = upper + lower
        blocks[..., half:] = upper - lower
        blocks[..., :half] = top
        m *= 2
    return y


def ifft_radix2(x: np.ndarray) -> np.ndarray:
    """Unscaled inverse of :func:`fft_radix2` (includes the 1/N factor)."""
    n = np.asarray(x).shape[-1]
    return np.conj(fft_radix2(np.conj(x))) / n
