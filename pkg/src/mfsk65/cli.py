"""Command-line pipeline: dataset synthesis, training, evaluation, curve
sweeps, the classical baseline, latency benchmarking, and figure-data CSVs.

Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import secrets
import sys
from pathlib import Path

import numpy as np

from . import dsp, evaluation, synthesis, training
from .baseline import baseline_ser_curve
from .errors import FormatError, NumericError
from .modem import ModulationConfig, SpacingMode
from .nn_core import load_model, save_model
from .synthesis import InterferenceSpec

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed", type=int, default=None,
        help="RNG seed; if omitted a fresh seed is drawn and printed to stderr",
    )
    parser.add_argument(
        "--spacing", choices=["orthogonal", "paper"], default="orthogonal",
        help="tone-grid spacing: DFT-bin aligned (orthogonal) or the "
             "fixed 2.6817 Hz constant (paper)",
    )


def _interference_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--interference", action="store_true",
                        help="inject narrowband + pulse interference")
    parser.add_argument("--nb-frac", type=float, default=0.20,
                        help="narrowband power as a fraction of the AWGN power")
    parser.add_argument("--pulse-frac", type=float, default=0.10,
                        help="pulse power as a fraction of the AWGN power")
    parser.add_argument("--pulse-duty", type=float, default=0.01,
                        help="pulse duty cycle in (0, 1]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfsk65", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize a labeled dataset file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--snr-min", type=float, required=True)
    p.add_argument("--snr-max", type=float, required=True)
    p.add_argument("--out", required=True)
    _interference_options(p)
    _common_options(p)

    p = sub.add_parser("train", help="train the classifier on a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--history-steps", default=None,
                   help="per-step CSV (default: <out>.steps.csv)")
    p.add_argument("--history-epochs", default=None,
                   help="per-epoch CSV (default: <out>.epochs.csv)")
    _common_options(p)

    p = sub.add_parser("eval", help="evaluate a model on a fresh testset")
    p.add_argument("--model", required=True)
    p.add_argument("--snr", type=float, required=True)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--out-prefix", default="eval",
                   help="writes <prefix>_confusion.csv, <prefix>_metrics.csv, "
                        "<prefix>_summary.csv")
    _interference_options(p)
    _common_options(p)

    p = sub.add_parser("curves", help="classifier error-rate curve over an SNR grid")
    p.add_argument("--model", required=True)
    p.add_argument("--from", dest="snr_from", type=float, default=-20.0)
    p.add_argument("--to", dest="snr_to", type=float, default=0.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--out", required=True)
    _interference_options(p)
    _common_options(p)

    p = sub.add_parser("baseline-curves",
                       help="energy-detector error-rate curve over an SNR grid")
    p.add_argument("--from", dest="snr_from", type=float, default=-20.0)
    p.add_argument("--to", dest="snr_to", type=float, default=0.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--out", required=True)
    _common_options(p)

    p = sub.add_parser("bench", help="single-frame inference latency")
    p.add_argument("--model", required=True)
    p.add_argument("--iters", type=int, default=1000)
    _common_options(p)

    p = sub.add_parser("figures", help="waveform / ESD / histogram CSVs for one frame")
    p.add_argument("--snr", type=float, required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--symbol", type=int, default=None,
                   help="tone index; random if omitted")
    p.add_argument("--bins", type=int, default=50)
    _common_options(p)

    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        if args.seed < 0:
            raise ValueError("--seed must be non-negative")
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _config(args) -> ModulationConfig:
    mode = SpacingMode.ORTHOGONAL if args.spacing == "orthogonal" else SpacingMode.LITERAL
    return ModulationConfig(spacing_mode=mode)


def _interference(args, seed: int):
    if not getattr(args, "interference", False):
        return None
    return InterferenceSpec(
        narrowband_power_fraction=args.nb_frac,
        pulse_power_fraction=args.pulse_frac,
        pulse_duty_cycle=args.pulse_duty,
        rng_seed=seed,
    )


def _snr_grid(args) -> list[float]:
    if args.step <= 0:
        raise ValueError("--step must be positive")
    if args.snr_to < args.snr_from:
        raise ValueError("--to must be >= --from")
    count = int(round((args.snr_to - args.snr_from) / args.step)) + 1
    return [args.snr_from + i * args.step for i in range(count)]


def _cmd_synth(args) -> int:
    if args.count < 1:
        raise ValueError("--count must be positive")
    if args.snr_max < args.snr_min:
        raise ValueError("--snr-max must be >= --snr-min")
    seed = _resolve_seed(args)
    config = _config(args)
    synthesis.write_dataset_stream(
        args.out, args.count, [args.snr_min, args.snr_max], seed, config,
        _interference(args, seed),
    )
    print(f"wrote {args.count} frames to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    seed = _resolve_seed(args)
    dataset = synthesis.load_dataset(args.data)
    config = training.TrainConfig(
        epochs=args.epochs, batch_size=args.batch, lr=args.lr, seed=seed,
        shuffle=not args.no_shuffle,
    )
    model, history = training.train(dataset, config)
    save_model(model, args.out)
    steps_path = args.history_steps or f"{args.out}.steps.csv"
    epochs_path = args.history_epochs or f"{args.out}.epochs.csv"
    history.write_csv(steps_path, epochs_path)
    last = history.epochs[-1]
    print(
        f"trained {config.epochs} epochs x {training.steps_per_epoch(len(dataset), config.batch_size)} steps; "
        f"final epoch loss {last.loss:.4f}, accuracy {last.accuracy:.4f}"
    )
    print(f"model: {args.out}; history: {steps_path}, {epochs_path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    if args.count < 1:
        raise ValueError("--count must be positive")
    seed = _resolve_seed(args)
    config = _config(args)
    model = load_model(args.model)
    testset = synthesis.build_dataset(
        args.count, [args.snr, args.snr], seed, config, _interference(args, seed)
    )
    matrix, report = evaluation.evaluate(model, testset)
    prefix = args.out_prefix
    evaluation.write_confusion_csv(matrix, f"{prefix}_confusion.csv")
    evaluation.write_metrics_csv(report, f"{prefix}_metrics.csv")
    evaluation.write_summary_csv(report, f"{prefix}_summary.csv")
    print(
        f"SNR {args.snr:+.1f} dB over {args.count} frames: "
        f"accuracy {report.accuracy:.4f}, error rate {report.error_rate:.4f}"
    )
    return EXIT_OK


def _cmd_curves(args) -> int:
    if args.trials < 1:
        raise ValueError("--trials must be positive")
    seed = _resolve_seed(args)
    config = _config(args)
    model = load_model(args.model)
    points = evaluation.nn_ser_curve(
        model, _snr_grid(args), args.trials, seed, config, _interference(args, seed)
    )
    evaluation.write_curve_csv(points, args.out)
    print(f"wrote {len(points)} curve points to {args.out}")
    return EXIT_OK


def _cmd_baseline_curves(args) -> int:
    if args.trials < 100:
        raise ValueError("--trials must be at least 100")
    seed = _resolve_seed(args)
    points = baseline_ser_curve(_snr_grid(args), args.trials, seed, _config(args))
    evaluation.write_curve_csv(points, args.out)
    print(f"wrote {len(points)} curve points to {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.iters < 100:
        raise ValueError("--iters must be at least 100")
    model = load_model(args.model)
    stats = evaluation.bench_inference(model, args.iters, _config(args))
    verdict = "meets" if stats.meets_realtime else "MISSES"
    print(
        f"mean {stats.mean_us:.1f} us/frame, p95 {stats.p95_us:.1f} us over "
        f"{stats.iterations} iterations"
    )
    print(
        f"{verdict} the real-time budget of {stats.budget_us:.0f} us; "
        f"reference platforms run comparable models at 34-85 us/frame"
    )
    return EXIT_OK


def _cmd_figures(args) -> int:
    if args.bins < 1:
        raise ValueError("--bins must be at least 1")
    seed = _resolve_seed(args)
    config = _config(args)
    rng = synthesis.frame_rng(seed, 0)
    symbol = args.symbol if args.symbol is not None else int(rng.integers(0, config.alphabet_size))
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    frame = synthesis.add_awgn(
        synthesis.synth_tone(symbol, phase, config), args.snr, rng, config
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "waveform.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "x"])
        for n, x in enumerate(frame.samples[:200]):
            writer.writerow([n, repr(float(x))])

    spectrum = dsp.dft(frame, config)
    densities = dsp.esd(spectrum)
    with open(out / "esd.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f_hz", "esd"])
        for k, value in enumerate(densities):
            writer.writerow([repr(k * spectrum.bin_spacing_hz), repr(float(value))])

    counts, edges = dsp.histogram(frame, args.bins)
    with open(out / "histogram.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edge", "count"])
        for edge, count in zip(edges[:-1], counts):
            writer.writerow([repr(float(edge)), int(count)])

    print(f"symbol {symbol} at SNR {args.snr:+.1f} dB -> {out}/waveform.csv, esd.csv, histogram.csv")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "curves": _cmd_curves,
    "baseline-curves": _cmd_baseline_curves,
    "bench": _cmd_bench,
    "figures": _cmd_figures,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"mfsk65 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"mfsk65 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, FloatingPointError) as exc:
        print(f"mfsk65 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
