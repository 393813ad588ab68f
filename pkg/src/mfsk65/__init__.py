"""64-tone MFSK symbol synthesis, neural and classical non-coherent
demodulation, and error-rate analysis on the JT65A signal grid."""

from .errors import FormatError, NumericError
from .modem import (
    LITERAL_TONE_SPACING_HZ,
    SYNC_TONE_HZ,
    ErrorRates,
    LinkBudget,
    ModulationConfig,
    SpacingMode,
    exact_noncoherent_ser,
    ser_to_ber,
    snr_to_ebn0,
    snr_to_esn0_linear,
    theoretical_ber_noncoherent,
    tone_frequency,
)
from .synthesis import (
    Dataset,
    InterferenceSpec,
    SignalFrame,
    add_awgn,
    add_interference,
    build_dataset,
    load_dataset,
    save_dataset,
    synth_tone,
)
from .dsp import Spectrum, dft, esd, histogram, idft
from .nn_core import (
    AdamState,
    DenseModel,
    adam_step,
    cross_entropy,
    init_model,
    load_model,
    one_hot,
    save_model,
)
from .training import TrainConfig, TrainHistory, train
from .baseline import ToneBinMap, baseline_ser_curve, demod_noncoherent
from .evaluation import (
    ConfusionMatrix,
    ErrorRatePoint,
    MetricsReport,
    bench_inference,
    evaluate,
    gap_at_ber,
    nn_ser_curve,
)

__version__ = "0.1.0"
