"""Post-prediction evaluation: confusion matrix and derived metrics,
error-rate curve sweeps, curve-gap measurement, the inference latency
benchmark, and the CSV report formats."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .modem import (
    ModulationConfig,
    ser_to_ber,
    snr_to_ebn0,
    theoretical_ber_noncoherent,
)
from .nn_core import DenseModel
from .synthesis import Dataset, InterferenceSpec, build_dataset, derive_seed


@dataclass
class ConfusionMatrix:
    """Integer counts; rows are ground truth, columns are predictions."""

    counts: np.ndarray

    @classmethod
    def from_predictions(
        cls, truth: np.ndarray, predicted: np.ndarray, num_classes: int = 64
    ) -> "ConfusionMatrix":
        truth = np.asarray(truth, dtype=np.int64)
        predicted = np.asarray(predicted, dtype=np.int64)
        if truth.shape != predicted.shape:
            raise ValueError("truth and predictions must have the same length")
        if truth.size and (truth.min() < 0 or truth.max() >= num_classes):
            raise ValueError("truth label outside class range")
        if predicted.size and (predicted.min() < 0 or predicted.max() >= num_classes):
            raise ValueError("prediction outside class range")
        counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        np.add.at(counts, (truth, predicted), 1)
        return cls(counts)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    """Classification metrics derived purely from confusion-matrix counts."""

    error_rate: float
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    macro_precision: float
    macro_recall: float
    micro_precision: float
    micro_recall: float

    @classmethod
    def from_confusion(cls, matrix: ConfusionMatrix) -> "MetricsReport":
        counts = matrix.counts
        total = counts.sum()
        if total == 0:
            raise ValueError("empty confusion matrix")
        diag = np.diag(counts).astype(np.float64)
        accuracy = float(diag.sum() / total)
        col_sums = counts.sum(axis=0).astype(np.float64)
        row_sums = counts.sum(axis=1).astype(np.float64)
        # Classes never predicted / never seen score 0, not NaN.
        precision = np.divide(diag, col_sums, out=np.zeros_like(diag), where=col_sums > 0)
        recall = np.divide(diag, row_sums, out=np.zeros_like(diag), where=row_sums > 0)
        micro = float(diag.sum() / total)
        return cls(
            error_rate=1.0 - accuracy,
            accuracy=accuracy,
            precision=precision,
            recall=recall,
            macro_precision=float(precision.mean()),
            macro_recall=float(recall.mean()),
            micro_precision=micro,
            micro_recall=micro,
        )


@dataclass
class ErrorRatePoint:
    """One point of an error-rate curve."""

    snr_db: float
    ebn0_db: float
    ser: float
    ber: float
    theoretical_ber: float


@dataclass
class LatencyStats:
    """Single-frame inference timing, microseconds."""

    mean_us: float
    p95_us: float
    iterations: int
    budget_us: float

    @property
    def meets_realtime(self) -> bool:
        return self.mean_us < self.budget_us


def evaluate(
    model: DenseModel, testset: Dataset, batch_size: int = 512
) -> tuple[ConfusionMatrix, MetricsReport]:
    """Predict every frame of a labeled testset and derive the metrics."""
    if model.training:
        raise ValueError("evaluate requires the model in inference mode")
    n = len(testset)
    if n == 0:
        raise ValueError("testset must be non-empty")
    predictions = np.empty(n, dtype=np.int64)
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        predictions[start:stop] = model.predict(testset.samples[start:stop])
    matrix = ConfusionMatrix.from_predictions(
        testset.labels, predictions, model.output_width
    )
    return matrix, MetricsReport.from_confusion(matrix)


def nn_ser_curve(
    model: DenseModel,
    snr_grid: Sequence[float],
    trials_per_point: int = 10000,
    seed: int = 0,
    config: Optional[ModulationConfig] = None,
    spec: Optional[InterferenceSpec] = None,
) -> list[ErrorRatePoint]:
    """Sweep the classifier over an SNR grid with freshly synthesized
    testsets (one independent substream per point)."""
    config = config or ModulationConfig()
    points = []
    for index, snr_db in enumerate(snr_grid):
        testset = build_dataset(
            trials_per_point, [snr_db, snr_db], derive_seed(seed, index), config, spec
        )
        _, report = evaluate(model, testset)
        ebn0_db = snr_to_ebn0(snr_db, config)
        points.append(
            ErrorRatePoint(
                snr_db=float(snr_db),
                ebn0_db=ebn0_db,
                ser=report.error_rate,
                ber=ser_to_ber(report.error_rate, config.alphabet_size),
                theoretical_ber=theoretical_ber_noncoherent(ebn0_db),
            )
        )
    return points


def _crossing_db(ebn0_db: np.ndarray, ber: np.ndarray, target: float) -> float:
    """Eb/N0 where a descending curve first crosses ``target``, interpolated
    log-linearly in (dB, log10 BER)."""
    for i in range(len(ebn0_db) - 1):
        hi, lo = ber[i], ber[i + 1]
        if hi >= target >= lo and lo > 0:
            if hi == lo:
                return float(ebn0_db[i])
            frac = (math.log10(target) - math.log10(hi)) / (
                math.log10(lo) - math.log10(hi)
            )
            return float(ebn0_db[i] + frac * (ebn0_db[i + 1] - ebn0_db[i]))
    raise ValueError(f"curve does not bracket target BER {target}")


def gap_at_ber(curve: Sequence[ErrorRatePoint], target_ber: float) -> float:
    """dB distance, at the target BER, between the measured curve and its
    theoretical reference column (positive = measured needs more Eb/N0)."""
    if not 0 < target_ber < 1:
        raise ValueError("target BER must be in (0, 1)")
    pts = sorted(curve, key=lambda p: p.ebn0_db)
    ebn0 = np.array([p.ebn0_db for p in pts])
    measured = _crossing_db(ebn0, np.array([p.ber for p in pts]), target_ber)
    theoretical = _crossing_db(
        ebn0, np.array([p.theoretical_ber for p in pts]), target_ber
    )
    return measured - theoretical


def bench_inference(
    model: DenseModel,
    iterations: int,
    config: Optional[ModulationConfig] = None,
    warmup: int = 20,
) -> LatencyStats:
    """Measure single-frame forward latency in inference mode, synthesis
    excluded; budget is one symbol duration."""
    if iterations < 100:
        raise ValueError("need at least 100 iterations")
    config = config or ModulationConfig()
    rng = np.random.default_rng(0)
    frame = rng.normal(size=(1, model.input_width)).astype(np.float32)
    for _ in range(warmup):
        model.forward(frame)
    samples_us = np.empty(iterations)
    for i in range(iterations):
        t0 = time.perf_counter()
        model.forward(frame)
        samples_us[i] = (time.perf_counter() - t0) * 1e6
    return LatencyStats(
        mean_us=float(samples_us.mean()),
        p95_us=float(np.percentile(samples_us, 95)),
        iterations=iterations,
        budget_us=config.symbol_duration_s * 1e6,
    )


def write_curve_csv(points: Sequence[ErrorRatePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db", "ebn0_db", "ser", "ber", "theoretical_ber"])
        for p in points:
            writer.writerow(
                [repr(p.snr_db), repr(p.ebn0_db), repr(p.ser), repr(p.ber),
                 repr(p.theoretical_ber)]
            )


def read_curve_csv(path) -> list[ErrorRatePoint]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        ErrorRatePoint(
            snr_db=float(r["snr_db"]),
            ebn0_db=float(r["ebn0_db"]),
            ser=float(r["ser"]),
            ber=float(r["ber"]),
            theoretical_ber=float(r["theoretical_ber"]),
        )
        for r in rows
    ]


def write_metrics_csv(report: MetricsReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall"])
        for i, (p, r) in enumerate(zip(report.precision, report.recall)):
            writer.writerow([i, repr(float(p)), repr(float(r))])


def write_summary_csv(report: MetricsReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["error_rate", "accuracy", "macro_precision", "macro_recall",
             "micro_precision", "micro_recall"]
        )
        writer.writerow(
            [repr(report.error_rate), repr(report.accuracy),
             repr(report.macro_precision), repr(report.macro_recall),
             repr(report.micro_precision), repr(report.micro_recall)]
        )


def write_confusion_csv(matrix: ConfusionMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["truth"] + [f"pred_{j}" for j in range(matrix.num_classes)])
        for i in range(matrix.num_classes):
            writer.writerow([i] + matrix.counts[i].tolist())
