"""Classical non-coherent demodulator: an FFT-bank energy detector over the
64 tone bins, plus its Monte-Carlo error-rate sweep."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsp import fft_radix2
from .evaluation import ErrorRatePoint
from .modem import (
    ModulationConfig,
    SpacingMode,
    ser_to_ber,
    snr_to_ebn0,
    theoretical_ber_noncoherent,
    tone_frequency,
)
from .synthesis import SignalFrame, build_dataset, derive_seed


@dataclass(frozen=True)
class ToneBinMap:
    """DFT bin index per symbol; exact integers in orthogonal mode, nearest
    bins in literal mode."""

    bins: np.ndarray

    @classmethod
    def from_config(cls, config: ModulationConfig) -> "ToneBinMap":
        ratio = config.frame_len / config.sample_rate_hz
        exact = np.array(
            [tone_frequency(m, config) * ratio for m in range(config.alphabet_size)]
        )
        bins = np.rint(exact).astype(np.int64)
        if config.spacing_mode is SpacingMode.ORTHOGONAL:
            if not np.allclose(exact, bins, atol=1e-9):
                raise ValueError("orthogonal mode requires exactly bin-aligned tones")
            if len(set(bins.tolist())) != config.alphabet_size:
                raise ValueError("tone-bin map must be invertible")
        out = bins.copy()
        out.setflags(write=False)
        return cls(out)


def tone_bin_energies(frames: np.ndarray, config: ModulationConfig) -> np.ndarray:
    """Per-frame energy at each of the 64 tone bins; frames is (B, N)."""
    bin_map = ToneBinMap.from_config(config)
    spectra = fft_radix2(np.asarray(frames, dtype=np.float64))
    return np.abs(spectra[..., bin_map.bins]) ** 2


def demod_noncoherent(frame: SignalFrame | np.ndarray, config: ModulationConfig) -> int:
    """Symbol decision: argmax of tone-bin energies, ties toward lowest m."""
    samples = frame.samples if isinstance(frame, SignalFrame) else np.asarray(frame)
    energies = tone_bin_energies(samples[np.newaxis, :], config)
    return int(np.argmax(energies[0]))


def demod_noncoherent_many(
    frames: np.ndarray, config: ModulationConfig, chunk: int = 512
) -> np.ndarray:
    """Vectorized decisions over (B, N) frames, chunked to bound memory."""
    frames = np.asarray(frames)
    out = np.empty(frames.shape[0], dtype=np.int64)
    for start in range(0, frames.shape[0], chunk):
        stop = min(start + chunk, frames.shape[0])
        out[start:stop] = np.argmax(tone_bin_energies(frames[start:stop], config), axis=1)
    return out


def baseline_ser_curve(
    snr_grid: Sequence[float],
    trials_per_point: int,
    seed: int,
    config: ModulationConfig,
) -> list[ErrorRatePoint]:
    """Monte-Carlo error rates of the energy detector across an SNR grid."""
    if trials_per_point < 100:
        raise ValueError("need at least 100 trials per point")
    points = []
    for index, snr_db in enumerate(snr_grid):
        dataset = build_dataset(
            trials_per_point, [snr_db, snr_db], derive_seed(seed, index), config
        )
        decisions = demod_noncoherent_many(dataset.samples, config)
        ser = float(np.mean(decisions != dataset.labels))
        ebn0_db = snr_to_ebn0(snr_db, config)
        points.append(
            ErrorRatePoint(
                snr_db=float(snr_db),
                ebn0_db=ebn0_db,
                ser=ser,
                ber=ser_to_ber(ser, config.alphabet_size),
                theoretical_ber=theoretical_ber_noncoherent(ebn0_db),
            )
        )
    return points
