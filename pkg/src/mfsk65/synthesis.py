"""Labeled symbol-frame synthesis: clean tones, AWGN at a target in-band SNR,
optional narrowband/pulse interference, whole datasets, and the dataset file
format.

Every frame is generated from its own RNG substream derived from
(seed, frame index), so datasets are order-independent, parallel-safe, and
bit-identical under regeneration.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import FormatError
from .fourier import ifft_radix2
from .modem import ModulationConfig, SpacingMode, tone_frequency

DATASET_MAGIC = b"MFSK65DS"
DATASET_VERSION = 1
_SPACING_CODES = {SpacingMode.ORTHOGONAL: 0, SpacingMode.LITERAL: 1}
_SPACING_FROM_CODE = {v: k for k, v in _SPACING_CODES.items()}
_HEADER = struct.Struct("<8sHIIB")

#: Mean-square power of the unit-amplitude carrier; the reference signal
#: power for all SNR calibration.
TONE_POWER = 0.5


@dataclass
class SignalFrame:
    """One symbol interval of real samples with optional ground truth."""

    samples: np.ndarray
    label: Optional[int] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 1:
            raise ValueError("frame samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("frame samples must all be finite")

    def power(self) -> float:
        return float(np.mean(np.square(self.samples, dtype=np.float64)))


@dataclass(frozen=True)
class InterferenceSpec:
    """Narrowband-sinusoid and noise-burst interference levels, expressed as
    fractions of the AWGN power they ride on."""

    narrowband_power_fraction: float = 0.20
    pulse_power_fraction: float = 0.10
    pulse_duty_cycle: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.narrowband_power_fraction < 0 or self.pulse_power_fraction < 0:
            raise ValueError("interference power fractions must be non-negative")
        if not 0.0 < self.pulse_duty_cycle <= 1.0:
            raise ValueError("pulse duty cycle must be in (0, 1]")


@dataclass
class Dataset:
    """Column-major store of labeled frames (float32 samples)."""

    samples: np.ndarray  # (count, frame_len) float32
    labels: np.ndarray  # (count,) uint8
    snrs_db: np.ndarray  # (count,) float32
    config: ModulationConfig
    seed: int = 0

    def __len__(self) -> int:
        return self.samples.shape[0]

    def frame(self, i: int) -> SignalFrame:
        return SignalFrame(self.samples[i], int(self.labels[i]), float(self.snrs_db[i]))


def frame_rng(seed: int, index: int) -> np.random.Generator:
    """Independent per-frame generator for frame ``index`` of stream ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and frame index must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def derive_seed(*parts: int) -> int:
    """Collapse a tuple of non-negative ints into one 64-bit seed."""
    if any(p < 0 for p in parts):
        raise ValueError("seed parts must be non-negative")
    state = np.random.SeedSequence(list(parts)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def synth_tone(m: int, phase: float, config: ModulationConfig) -> SignalFrame:
    """Unit-amplitude cosine at tone ``m`` sampled over one frame."""
    if not math.isfinite(phase):
        raise ValueError("phase must be finite")
    freq = tone_frequency(m, config)
    n = np.arange(config.frame_len, dtype=np.float64)
    samples = np.cos(2.0 * np.pi * freq / config.sample_rate_hz * n + phase)
    return SignalFrame(samples, label=m)


def inband_bin_count(config: ModulationConfig) -> int:
    """Number of positive DFT bins whose frequencies fall inside
    (0, bandwidth_hz]."""
    return int(config.bandwidth_hz * config.frame_len / config.sample_rate_hz)


def awgn_power(snr_db: float, config: ModulationConfig) -> float:
    """Total noise power that puts a unit-amplitude tone at ``snr_db``.

    The channel noise is white within the receiver band (0, W] and zero
    outside it, so the noise power the in-band SNR references is the
    whole noise power: sigma^2 = tone_power / snr_linear.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return TONE_POWER / 10.0 ** (snr_db / 10.0)


def add_awgn(
    frame: SignalFrame, snr_db: float, rng: np.random.Generator, config: ModulationConfig
) -> SignalFrame:
    """Mix band-limited white Gaussian noise into a frame at the given
    in-band SNR.

    The noise is synthesized in the frequency domain: independent complex
    Gaussian coefficients on every DFT bin inside (0, W], zero outside,
    scaled so the time-domain power equals :func:`awgn_power`.  This models
    the receiver's audio-band filter; the noise spectral density across the
    tone bins is exactly N0 = noise_power / W.
    """
    power = awgn_power(snr_db, config)
    if power == 0.0:
        return SignalFrame(frame.samples.copy(), frame.label, snr_db)
    n = config.frame_len
    k = inband_bin_count(config)
    # Var per sample of the inverse transform is (4k/n^2) * s^2.
    scale = n * math.sqrt(power / (4.0 * k))
    z = rng.normal(size=2 * k)
    spectrum = np.zeros(n, dtype=np.complex128)
    spectrum[1 : k + 1] = scale * (z[:k] + 1j * z[k:])
    spectrum[n - k :] = np.conj(spectrum[1 : k + 1][::-1])
    noise = ifft_radix2(spectrum).real
    return SignalFrame(frame.samples + noise, frame.label, snr_db)


#: Lower edge of the audio band in which narrowband interferers appear.
NARROWBAND_LOW_HZ = 300.0

#: Guard distance, in tone spacings, kept between an interferer and the
#: MFSK tone block.
NARROWBAND_GUARD_SPACINGS = 10.0


def narrowband_interferer_bands(config: ModulationConfig) -> list[tuple[float, float]]:
    """In-band frequency ranges where a narrowband interferer may land.

    The tone block itself (plus a guard margin) is excluded: an interferer
    sitting on a tone frequency is a co-channel collision that no
    demodulator can survive, so interference-immunity measurements draw
    from the adjacent-channel spectrum on either side of the signal.
    """
    guard = NARROWBAND_GUARD_SPACINGS * config.tone_spacing_hz
    low_edge = tone_frequency(0, config) - guard
    high_edge = tone_frequency(config.alphabet_size - 1, config) + guard
    bands = []
    if low_edge > NARROWBAND_LOW_HZ:
        bands.append((NARROWBAND_LOW_HZ, low_edge))
    if high_edge < config.bandwidth_hz:
        bands.append((high_edge, config.bandwidth_hz))
    return bands


def _draw_narrowband_freq(rng: np.random.Generator, config: ModulationConfig) -> float:
    bands = narrowband_interferer_bands(config)
    widths = np.array([hi - lo for lo, hi in bands])
    u = rng.uniform(0.0, widths.sum())
    for (lo, hi), width in zip(bands, widths):
        if u <= width:
            return lo + u
        u -= width
    return bands[-1][1]


def add_interference(
    frame: SignalFrame,
    awgn_power: float,
    spec: InterferenceSpec,
    rng: np.random.Generator,
    config: Optional[ModulationConfig] = None,
) -> SignalFrame:
    """Add a random-frequency sinusoid and a wideband noise burst whose
    powers are the configured fractions of ``awgn_power``.

    The sinusoid frequency is re-drawn per frame, uniform over the in-band
    spectrum outside the tone block (see
    :func:`narrowband_interferer_bands`).  The burst is a single rectangle
    of white noise covering duty_cycle of the frame; its in-burst variance
    is scaled so the time-averaged added power equals
    pulse_power_fraction * awgn_power exactly in expectation.
    """
    if awgn_power <= 0:
        raise ValueError("awgn_power must be positive")
    config = config or ModulationConfig()
    n = frame.samples.shape[0]
    out = frame.samples.astype(np.float64).copy()
    if spec.narrowband_power_fraction > 0:
        freq = _draw_narrowband_freq(rng, config)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = math.sqrt(2.0 * spec.narrowband_power_fraction * awgn_power)
        t = np.arange(n, dtype=np.float64)
        out += amp * np.cos(2.0 * np.pi * freq / config.sample_rate_hz * t + phase)
    if spec.pulse_power_fraction > 0:
        burst_len = max(1, round(spec.pulse_duty_cycle * n))
        sigma_burst = math.sqrt(spec.pulse_power_fraction * awgn_power * n / burst_len)
        start = int(rng.integers(0, n - burst_len + 1))
        out[start : start + burst_len] += rng.normal(0.0, sigma_burst, burst_len)
    return SignalFrame(out, frame.label, frame.snr_db)


def draw_frame_params(
    rng: np.random.Generator, snr_range: Sequence[float], config: ModulationConfig
) -> tuple[int, float, float]:
    """Draw (label, phase, snr_db) for one frame: label uniform over the
    alphabet, phase uniform on [0, 2pi), SNR uniform over the range."""
    lo, hi = float(snr_range[0]), float(snr_range[1])
    if lo > hi:
        raise ValueError("snr_range must satisfy low <= high")
    label = int(rng.integers(0, config.alphabet_size))
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    snr_db = float(rng.uniform(lo, hi))
    return label, phase, snr_db


def synth_labeled_frame(
    seed: int,
    index: int,
    snr_range: Sequence[float],
    config: ModulationConfig,
    spec: Optional[InterferenceSpec] = None,
) -> SignalFrame:
    """Generate frame ``index`` of the dataset stream ``seed``."""
    rng = frame_rng(seed, index)
    label, phase, snr_db = draw_frame_params(rng, snr_range, config)
    frame = synth_tone(label, phase, config)
    frame = add_awgn(frame, snr_db, rng, config)
    if spec is not None and (
        spec.narrowband_power_fraction > 0 or spec.pulse_power_fraction > 0
    ):
        noise_power = awgn_power(snr_db, config)
        irng = np.random.default_rng(np.random.SeedSequence([spec.rng_seed, seed, index]))
        frame = add_interference(frame, noise_power, spec, irng, config)
    return frame


def iter_frames(
    count: int,
    snr_range: Sequence[float],
    seed: int,
    config: ModulationConfig,
    spec: Optional[InterferenceSpec] = None,
) -> Iterator[SignalFrame]:
    for i in range(count):
        yield synth_labeled_frame(seed, i, snr_range, config, spec)


def build_dataset(
    count: int,
    snr_range: Sequence[float],
    seed: int,
    config: ModulationConfig,
    spec: Optional[InterferenceSpec] = None,
) -> Dataset:
    """Materialize ``count`` labeled frames as a float32 dataset."""
    if count <= 0:
        raise ValueError("count must be positive")
    samples = np.empty((count, config.frame_len), dtype=np.float32)
    labels = np.empty(count, dtype=np.uint8)
    snrs = np.empty(count, dtype=np.float32)
    for i, frame in enumerate(iter_frames(count, snr_range, seed, config, spec)):
        samples[i] = frame.samples
        labels[i] = frame.label
        snrs[i] = frame.snr_db
    return Dataset(samples, labels, snrs, config, seed)


def _record_dtype(frame_len: int) -> np.dtype:
    return np.dtype(
        [("label", "u1"), ("snr_db", "<f4"), ("samples", "<f4", (frame_len,))]
    )


def save_dataset(dataset: Dataset, path) -> None:
    """Write a dataset file: an 8-byte magic, version, record count,
    samples per record, spacing-mode byte, then packed records."""
    config = dataset.config
    header = _HEADER.pack(
        DATASET_MAGIC,
        DATASET_VERSION,
        len(dataset),
        config.frame_len,
        _SPACING_CODES[config.spacing_mode],
    )
    records = np.empty(len(dataset), dtype=_record_dtype(config.frame_len))
    records["label"] = dataset.labels
    records["snr_db"] = dataset.snrs_db
    records["samples"] = dataset.samples
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(records.tobytes())


def write_dataset_stream(
    path,
    count: int,
    snr_range: Sequence[float],
    seed: int,
    config: ModulationConfig,
    spec: Optional[InterferenceSpec] = None,
    chunk: int = 4096,
) -> None:
    """Stream a dataset to disk without holding all frames in memory."""
    if count <= 0:
        raise ValueError("count must be positive")
    rec_dtype = _record_dtype(config.frame_len)
    header = _HEADER.pack(
        DATASET_MAGIC, DATASET_VERSION, count, config.frame_len,
        _SPACING_CODES[config.spacing_mode],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        buf = np.empty(chunk, dtype=rec_dtype)
        filled = 0
        for i in range(count):
            frame = synth_labeled_frame(seed, i, snr_range, config, spec)
            buf[filled] = (frame.label, frame.snr_db, frame.samples.astype(np.float32))
            filled += 1
            if filled == chunk:
                fh.write(buf.tobytes())
                filled = 0
        if filled:
            fh.write(buf[:filled].tobytes())


def load_dataset(path) -> Dataset:
    """Read a dataset file, rejecting unknown magic/version and truncation."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than the dataset header")
    magic, version, count, frame_len, spacing_code = _HEADER.unpack_from(raw)
    if magic != DATASET_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != DATASET_VERSION:
        raise FormatError(f"{path}: unsupported dataset version {version}")
    if spacing_code not in _SPACING_FROM_CODE:
        raise FormatError(f"{path}: unknown spacing-mode code {spacing_code}")
    rec_dtype = _record_dtype(frame_len)
    expected = _HEADER.size + count * rec_dtype.itemsize
    if len(raw) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for {count} records, got {len(raw)}"
        )
    records = np.frombuffer(raw, dtype=rec_dtype, count=count, offset=_HEADER.size)
    config = ModulationConfig(
        frame_len=frame_len, spacing_mode=_SPACING_FROM_CODE[spacing_code]
    )
    return Dataset(
        samples=records["samples"].copy(),
        labels=records["label"].copy(),
        snrs_db=records["snr_db"].copy(),
        config=config,
    )
