"""Write the bundled synthetic dataset (data/synthetic.csv)."""
import argparse
from pathlib import Path

from sddsafe.synthetic import drifting_ar1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "data" / "synthetic.csv")
    ap.add_argument("-n", type=int, default=2500)
    ap.add_argument("--drift", type=float, default=0.3, help="mean increase per tick after the split")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    series = drifting_ar1(args.n, drift_per_step=args.drift, seed=args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,value\n")
        for t, v in zip(series.index, series.values):
            fh.write(f"{t},{v:.6f}\n")
    print(f"wrote {len(series)} rows to {args.out}")


if __name__ == "__main__":
    main()
