"""Training loop: batching, per-epoch shuffling, scalar history, and CSV
emission.

One training run owns its model and optimizer state; synthesis or data
loading may happen elsewhere, but batches are consumed in the
seed-determined order so runs are reproducible.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericError
from .nn_core import AdamState, DenseModel, adam_step, cross_entropy, init_model, one_hot
from .synthesis import Dataset


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1")


@dataclass
class StepRecord:
    step: int
    epoch: int
    loss: float
    accuracy: float


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float
    seconds: float


@dataclass
class TrainHistory:
    steps: list[StepRecord] = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)

    def write_csv(self, steps_path, epochs_path) -> None:
        with open(steps_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "epoch", "loss", "accuracy"])
            for r in self.steps:
                writer.writerow([r.step, r.epoch, repr(r.loss), repr(r.accuracy)])
        with open(epochs_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "loss", "accuracy", "seconds"])
            for r in self.epochs:
                writer.writerow([r.epoch, repr(r.loss), repr(r.accuracy), repr(r.seconds)])


def batch_spans(n: int, batch_size: int) -> list[tuple[int, int]]:
    """(start, stop) spans partitioning ``n`` records into batches.

    The trailing partial batch is kept, except that a trailing batch of
    size 1 is merged into the previous one (batch norm needs at least two
    rows per batch).
    """
    if n < 1:
        raise ValueError("dataset must be non-empty")
    spans = [(s, min(s + batch_size, n)) for s in range(0, n, batch_size)]
    if len(spans) > 1 and spans[-1][1] - spans[-1][0] == 1:
        spans[-2] = (spans[-2][0], n)
        spans.pop()
    return spans


def steps_per_epoch(n: int, batch_size: int) -> int:
    return len(batch_spans(n, batch_size))


def train(
    dataset: Dataset,
    config: TrainConfig,
    model: Optional[DenseModel] = None,
) -> tuple[DenseModel, TrainHistory]:
    """Run the full epoch loop and return the model in inference mode plus
    per-step and per-epoch scalars.

    Deterministic under (config.seed, dataset): the model init and the
    per-epoch shuffles each use their own stream derived from the seed.
    """
    n = len(dataset)
    if n == 0:
        raise ValueError("dataset must be non-empty")
    if n == 1:
        raise ValueError("training needs at least 2 frames for batch statistics")
    if model is None:
        model = init_model(config.seed)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))

    params = model.trainable_parameters()
    adam = AdamState.for_parameters(params, lr=config.lr)
    spans = batch_spans(n, config.batch_size)
    num_classes = model.output_width
    history = TrainHistory()
    labels = dataset.labels.astype(np.int64)

    global_step = 0
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        losses, accuracies = [], []
        model.training = True
        for start, stop in spans:
            idx = order[start:stop]
            inputs = dataset.samples[idx]
            batch_labels = labels[idx]
            targets = one_hot(batch_labels, num_classes)
            probs = model.forward(inputs)
            loss = cross_entropy(targets, probs)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite loss at step {global_step + 1}")
            grads = model.backward(targets)
            adam_step(adam, params, grads)
            accuracy = float(np.mean(np.argmax(probs, axis=1) == batch_labels))
            global_step += 1
            history.steps.append(StepRecord(global_step, epoch, loss, accuracy))
            losses.append(loss)
            accuracies.append(accuracy)
        history.epochs.append(
            EpochRecord(
                epoch=epoch,
                loss=float(np.mean(losses)),
                accuracy=float(np.mean(accuracies)),
                seconds=time.perf_counter() - t0,
            )
        )
    model.training = False
    return model, history
