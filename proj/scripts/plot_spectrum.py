"""Log-log plot of one or more m = 0 spectra written by `dhtool hurst` or `dhtool analyze --spectrum`."""

import argparse
import csv

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    lam = np.array([float(r["lambda"]) for r in rows])
    psd = np.array([float(r["psd"]) for r in rows])
    used = np.array([r.get("included_in_fit", "0") == "1" for r in rows])
    return lam, psd, used


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("spectra", nargs="+", help="spectrum CSV files")
    ap.add_argument("-o", "--out", default="spectrum.png")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for path in args.spectra:
        lam, psd, used = load(path)
        keep = (lam > 0) & (psd > 0)
        ax.loglog(lam[keep], psd[keep], "o", ms=3, label=path)
        if used.sum() >= 2:
            slope, icpt = np.polyfit(np.log(lam[used]), np.log(psd[used]), 1)
            ax.loglog(lam[used], np.exp(icpt) * lam[used] ** slope, "-", label=f"slope {slope:.3f}")
    ax.set_xlabel("l(0)_k")
    ax.set_ylabel("|q_0^k|^2")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
