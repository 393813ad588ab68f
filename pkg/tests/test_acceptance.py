"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run `pytest -s tests/test_acceptance.py` to watch the per-criterion lines.
The desk-scale demodulation gate (criteria 6 and 7) trains a 20k-frame
model once per session and reuses it; the full-scale profile is tagged
``full`` and deselected by default (`pytest -m full` runs it, roughly
fifteen minutes on two cores).
"""

import math
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from mfsk65 import cli, evaluation, modem, nn_core, synthesis, training
from mfsk65.baseline import baseline_ser_curve
from mfsk65.evaluation import (
    ConfusionMatrix,
    MetricsReport,
    bench_inference,
    gap_at_ber,
    nn_ser_curve,
)

from conftest import brute_force_dft

CONFIG = modem.ModulationConfig()
CURVE_GRID = [float(s) for s in range(-20, 1)]
TRIALS = 10_000

DESK_DATASET_SEED = 1101
DESK_TRAIN_SEED = 2202
DESK_CURVE_SEED = 3303
DESK_INTERFERENCE_SEED = 4404

FULL_DATASET_SEED = 5505
FULL_TRAIN_SEED = 6606


@contextmanager
def criterion(number, name):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number} ({name}): FAIL")
        raise
    print(f"[acceptance] criterion {number} ({name}): PASS")


def waterfall_is_monotone_trend(curve, trials):
    """Consecutive BERs never rise by more than 3-sigma of Monte-Carlo
    noise, and the curve strictly decreases end to end."""
    bers = [p.ber for p in curve]
    for a, b in zip(curve, curve[1:]):
        sigma_ber = 3.0 * math.sqrt(max(a.ser * (1 - a.ser), 1e-12) / trials) * (32 / 63)
        if b.ber > a.ber + sigma_ber:
            return False
    return bers[0] > bers[-1]


def train_and_sweep(count, dataset_seed, train_seed):
    dataset = synthesis.build_dataset(count, [-20, 0], dataset_seed, CONFIG)
    model, history = training.train(
        dataset,
        training.TrainConfig(epochs=5, batch_size=32, lr=1e-3, seed=train_seed),
    )
    clean = nn_ser_curve(model, CURVE_GRID, TRIALS, DESK_CURVE_SEED, CONFIG)
    spec = synthesis.InterferenceSpec(0.20, 0.10, rng_seed=DESK_INTERFERENCE_SEED)
    interfered = nn_ser_curve(model, CURVE_GRID, TRIALS, DESK_CURVE_SEED, CONFIG, spec)
    return model, history, clean, interfered


@pytest.fixture(scope="session")
def desk_run():
    """The desk-scale gate: 20k frames, 5 epochs, then clean and
    interference sweeps at 10k trials per SNR point."""
    return train_and_sweep(20_000, DESK_DATASET_SEED, DESK_TRAIN_SEED)


def test_01_parameter_accounting():
    with criterion(1, "parameter accounting"):
        counts = nn_core.init_model(0).parameter_counts()
        assert counts.total == 1_107_904
        assert counts.trainable == 1_098_944
        assert counts.non_trainable == 8_960


def test_02_gradient_correctness():
    with criterion(2, "gradient correctness"):
        model = nn_core.init_model(3, widths=(16, 8, 4), dtype=np.float64)
        rng = np.random.default_rng(5)
        inputs = rng.normal(size=(12, 16))
        targets = nn_core.one_hot(rng.integers(0, 4, 12), 4, dtype=np.float64)
        model.training = True
        model.forward(inputs)
        analytic = [g.copy() for g in model.backward(targets)]
        step = 1e-4
        for param, grad in zip(model.trainable_parameters(), analytic):
            fd = np.zeros_like(param)
            it = np.nditer(param, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                saved = param[ix]
                param[ix] = saved + step
                up = nn_core.cross_entropy(targets, model.forward(inputs))
                param[ix] = saved - step
                down = nn_core.cross_entropy(targets, model.forward(inputs))
                param[ix] = saved
                fd[ix] = (up - down) / (2 * step)
            rel = np.linalg.norm(fd - grad) / (
                np.linalg.norm(fd) + np.linalg.norm(grad) + 1e-12
            )
            assert rel < 1e-4, f"gradient mismatch {rel:.2e} on shape {param.shape}"


def test_03_dft_correctness():
    with criterion(3, "DFT vs brute force + Parseval"):
        from mfsk65.dsp import dft, esd

        rng = np.random.default_rng(7)
        frames = rng.normal(size=(64, 4096))
        oracle = CONFIG.sample_period_s * brute_force_dft(frames)
        for i in range(64):
            spectrum = dft(frames[i], CONFIG)
            err = np.abs(spectrum.bins - oracle[i]).max() / np.abs(oracle[i]).max()
            assert err < 1e-6, f"frame {i}: transform error {err:.2e}"
            parseval_lhs = esd(spectrum).sum() * spectrum.bin_spacing_hz
            parseval_rhs = CONFIG.sample_period_s * np.sum(frames[i] ** 2)
            assert parseval_lhs == pytest.approx(parseval_rhs, rel=1e-6)


def test_04_baseline_vs_closed_form():
    with criterion(4, "baseline Monte Carlo vs closed form (master oracle)"):
        for index, es_n0 in enumerate([2.0, 4.0, 8.0, 12.0, 16.0]):
            snr_db = modem.esn0_linear_to_snr(es_n0, CONFIG)
            point = baseline_ser_curve([snr_db], TRIALS, seed=9090 + index, config=CONFIG)[0]
            expected = modem.exact_noncoherent_ser(es_n0, 64)
            sigma = math.sqrt(expected * (1 - expected) / TRIALS)
            z = (point.ser - expected) / sigma
            assert abs(z) < 3.0, (
                f"Es/N0={es_n0}: MC SER {point.ser:.5f} vs exact {expected:.5f} (z={z:+.2f})"
            )


def test_05_ebn0_conversion():
    with criterion(5, "Eb/N0 conversion"):
        assert modem.snr_to_ebn0(-20.0, CONFIG) == pytest.approx(1.898, abs=1e-3)


def test_06_headline_gap_desk(desk_run):
    with criterion(6, "headline BER gap, desk scale"):
        _, history, clean, _ = desk_run
        epoch_losses = [e.loss for e in history.epochs]
        assert all(
            b <= a * 1.05 for a, b in zip(epoch_losses, epoch_losses[1:])
        ), f"training loss not non-increasing within 5%: {epoch_losses}"
        assert waterfall_is_monotone_trend(clean, TRIALS), "BER waterfall not monotone"
        gap = gap_at_ber(clean, 1e-2)
        print(f"[acceptance] desk-scale Eb/N0 gap at BER 1e-2: {gap:+.2f} dB")
        assert gap < 4.0, f"desk-scale gap {gap:.2f} dB >= 4 dB"


def test_07_interference_robustness_desk(desk_run):
    with criterion(7, "interference robustness, desk scale"):
        _, _, clean, interfered = desk_run
        shift = gap_at_ber(interfered, 1e-2) - gap_at_ber(clean, 1e-2)
        print(f"[acceptance] desk-scale interference gap shift: {shift:+.2f} dB")
        assert shift < 1.5, f"desk-scale interference shift {shift:.2f} dB >= 1.5 dB"


def test_08_realtime_bound():
    with criterion(8, "real-time inference bound"):
        stats = bench_inference(nn_core.init_model(0), 1000, CONFIG)
        print(
            f"[acceptance] inference mean {stats.mean_us:.1f} us/frame "
            f"(p95 {stats.p95_us:.1f} us); reference platform range 34-85 us/frame; "
            f"budget {stats.budget_us:.0f} us"
        )
        assert stats.mean_us < 371_500.0


def test_09_metrics_identities():
    with criterion(9, "metrics identities"):
        rng = np.random.default_rng(11)
        truth = rng.integers(0, 64, 3000)
        predicted = np.where(rng.random(3000) < 0.7, truth, rng.integers(0, 64, 3000))
        matrix = ConfusionMatrix.from_predictions(truth, predicted)
        report = MetricsReport.from_confusion(matrix)
        assert report.micro_precision == report.accuracy
        assert report.micro_recall == report.accuracy
        assert matrix.total() == 3000
        assert np.array_equal(matrix.counts.sum(axis=1), np.bincount(truth, minlength=64))
        assert abs(modem.ser_to_ber(1.0, 64) - float(Fraction(32, 63))) < 1e-12


def test_10_determinism(tmp_path):
    with criterion(10, "determinism of synth/train/curves"):
        def synth(path):
            assert cli.run([
                "synth", "--count", "300", "--snr-min", "-15", "--snr-max", "-5",
                "--seed", "77", "--out", str(path),
            ]) == 0

        a, b = tmp_path / "a.ds", tmp_path / "b.ds"
        synth(a)
        synth(b)
        assert a.read_bytes() == b.read_bytes(), "synth output not byte-identical"

        def train_once(out):
            assert cli.run([
                "train", "--data", str(a), "--epochs", "1", "--batch", "32",
                "--seed", "78", "--out", str(out),
            ]) == 0

        ma, mb = tmp_path / "a.nn", tmp_path / "b.nn"
        train_once(ma)
        train_once(mb)
        assert ma.read_bytes() == mb.read_bytes(), "model files not byte-identical"
        assert (tmp_path / "a.nn.steps.csv").read_bytes() == (
            tmp_path / "b.nn.steps.csv"
        ).read_bytes(), "step history not byte-identical"
        # epoch history carries a wall-clock seconds column (timestamps are
        # excluded from the byte-identity contract); compare the rest
        def epochs_without_seconds(path):
            rows = [line.split(",") for line in path.read_text().splitlines()]
            return [row[:3] for row in rows]

        assert epochs_without_seconds(tmp_path / "a.nn.epochs.csv") == (
            epochs_without_seconds(tmp_path / "b.nn.epochs.csv")
        )

        def curves(out):
            assert cli.run([
                "curves", "--model", str(ma), "--from", "-8", "--to", "-4",
                "--step", "2", "--trials", "300", "--seed", "79", "--out", str(out),
            ]) == 0

        ca, cb = tmp_path / "ca.csv", tmp_path / "cb.csv"
        curves(ca)
        curves(cb)
        assert ca.read_bytes() == cb.read_bytes(), "curve CSV not byte-identical"


@pytest.mark.full
def test_full_profile_headline_and_interference():
    """Full-scale profile: 100k frames, 5 epochs; gap < 2.5 dB and
    interference shift < 0.7 dB at BER 1e-2."""
    with criterion("6-full", "headline BER gap, full scale"):
        _, history, clean, interfered = train_and_sweep(
            100_000, FULL_DATASET_SEED, FULL_TRAIN_SEED
        )
        epoch_losses = [e.loss for e in history.epochs]
        assert all(b <= a * 1.05 for a, b in zip(epoch_losses, epoch_losses[1:]))
        assert waterfall_is_monotone_trend(clean, TRIALS)
        gap = gap_at_ber(clean, 1e-2)
        print(f"[acceptance] full-scale Eb/N0 gap at BER 1e-2: {gap:+.2f} dB")
        assert gap < 2.5, f"full-scale gap {gap:.2f} dB >= 2.5 dB"
    with criterion("7-full", "interference robustness, full scale"):
        shift = gap_at_ber(interfered, 1e-2) - gap
        print(f"[acceptance] full-scale interference gap shift: {shift:+.2f} dB")
        assert shift < 0.7, f"full-scale interference shift {shift:.2f} dB >= 0.7 dB"
