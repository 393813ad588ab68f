"""Spectral analysis: a from-scratch radix-2 transform scaled to amplitude
density (V/Hz), energy spectral density, and amplitude histograms.

The transform is implemented in-repo (iterative radix-2 with bit-reversal)
so the density scaling by the sampling interval is explicit at the
interface.  All functions are pure and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .fourier import fft_radix2, ifft_radix2
from .modem import ModulationConfig
from .synthesis import SignalFrame

__all__ = ["Spectrum", "dft", "idft", "esd", "histogram", "fft_radix2", "ifft_radix2"]

FrameLike = Union[SignalFrame, np.ndarray]


@dataclass
class Spectrum:
    """Discrete amplitude density: bins[k] estimates the spectrum at k*F."""

    bins: np.ndarray  # complex, V/Hz
    bin_spacing_hz: float


def _as_samples(frame: FrameLike) -> np.ndarray:
    if isinstance(frame, SignalFrame):
        return frame.samples
    return np.asarray(frame)


def dft(frame: FrameLike, config: ModulationConfig) -> Spectrum:
    """Amplitude-density spectrum of one frame.

    bins[k] = T_s * sum_n x[n] exp(-j 2 pi n k / N), with T_s the sampling
    interval, giving units of V/Hz; bin spacing is F = 1/(N*T_s).
    """
    samples = _as_samples(frame)
    bins = config.sample_period_s * fft_radix2(samples)
    n = samples.shape[-1]
    return Spectrum(bins=bins, bin_spacing_hz=config.sample_rate_hz / n)


def idft(spectrum: Spectrum, config: ModulationConfig) -> np.ndarray:
    """Real samples recovered from a :func:`dft` spectrum."""
    return ifft_radix2(spectrum.bins).real / config.sample_period_s


def esd(spectrum: Spectrum) -> np.ndarray:
    """Energy spectral density per bin, |bins[k]|^2, units V^2*s/Hz."""
    return np.abs(spectrum.bins) ** 2


def histogram(frame: FrameLike, num_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude histogram of a frame; returns (counts, bin_edges) with
    edges spanning [min, max] of the samples."""
    samples = _as_samples(frame)
    if samples.size == 0:
        raise ValueError("cannot histogram an empty frame")
    if num_bins < 1:
        raise ValueError("num_bins must be at least 1")
    return np.histogram(samples, bins=num_bins)
