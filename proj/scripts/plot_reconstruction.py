"""Normalized Hausdorff RMSE against truncation degree from `dhtool reconstruct --report`."""

import argparse
import csv

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("report", help="CSV with columns k,rmse")
    ap.add_argument("-o", "--out", default="reconstruction.png")
    args = ap.parse_args()

    with open(args.report, newline="") as f:
        rows = list(csv.DictReader(f))
    k = [int(r["k"]) for r in rows]
    e = [float(r["rmse"]) for r in rows]

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(k, e, "o-")
    ax.set_xlabel("k")
    ax.set_ylabel("normalized RMSE")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
