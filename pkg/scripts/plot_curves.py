#!/usr/bin/env python3
"""Render error-rate curve CSVs (from `mfsk65 curves` / `baseline-curves`)
as a BER-vs-Eb/N0 waterfall plot.  Plotting stays out of the library; this
script is the external rendering tool."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csvs", nargs="+", help="curve CSV files")
    parser.add_argument("--labels", nargs="*", default=None)
    parser.add_argument("--out", default="waterfall.png")
    parser.add_argument("--ser", action="store_true",
                        help="plot SER against SNR instead of BER against Eb/N0")
    args = parser.parse_args()

    labels = args.labels or [path.rsplit("/", 1)[-1] for path in args.csvs]
    plt.figure(figsize=(7, 5))
    for path, label in zip(args.csvs, labels):
        rows = np.genfromtxt(path, delimiter=",", names=True)
        if args.ser:
            plt.semilogy(rows["snr_db"], np.maximum(rows["ser"], 1e-6),
                         marker="o", label=label)
        else:
            plt.semilogy(rows["ebn0_db"], np.maximum(rows["ber"], 1e-6),
                         marker="o", label=label)
    if not args.ser:
        rows = np.genfromtxt(args.csvs[0], delimiter=",", names=True)
        order = np.argsort(rows["ebn0_db"])
        plt.semilogy(rows["ebn0_db"][order], rows["theoretical_ber"][order],
                     "k--", label="non-coherent reference")
        plt.xlabel("Eb/N0 (dB)")
        plt.ylabel("BER")
    else:
        plt.xlabel("SNR (dB)")
        plt.ylabel("SER")
    plt.grid(True, which="both", linestyle=":", linewidth=0.5)
    plt.legend()
    plt.tight_layout()
    plt.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
