"""Recompute robustness verdicts for the Google and JP Morgan segments from WD and ratio columns.

The threshold distance per stock is the median WD / ratio quotient; each
segment is then judged robust iff WD / threshold <= 1.
"""
import numpy as np

from sddsafe.stadro import robustness

P_MIN = {"google": 500.0, "jpmorgan": 8.5}
ROWS = {
    "google": [(634.73, 0.39, True), (740.50, 0.45, True), (717.43, 0.44, True),
               (842.07, 0.52, True), (910.24, 0.56, True), (945.59, 0.58, True),
               (1094.77, 0.67, True), (1330.72, 0.82, True), (1739.06, 1.07, False),
               (2153.03, 1.32, False), (2430.59, 1.49, False)],
    "jpmorgan": [(61.25, 0.63, True), (62.63, 0.64, True), (53.44, 0.55, True),
                 (59.38, 0.61, True), (63.12, 0.65, True), (78.90, 0.81, True),
                 (66.65, 0.68, True), (46.56, 0.48, True), (50.30, 0.52, True),
                 (76.55, 0.78, True), (105.03, 1.08, False), (107.21, 1.10, False),
                 (114.84, 1.18, False)],
}


def main():
    for stock, rows in ROWS.items():
        wd = np.array([r[0] for r in rows])
        d_pmin = float(np.median(wd / np.array([r[1] for r in rows])))
        print(f"\n{stock}: P_min = {P_MIN[stock]}, d_pmin = {d_pmin:.2f}")
        print(f"{'segment':>10} {'WD':>9} {'ratio':>7} {'given':>6} {'robust':>7}")
        for i, (d, ratio, given) in enumerate(rows):
            v = robustness(d, d_pmin, P_MIN[stock], instance=(70 * i, 70 * (i + 1)))
            flag = "" if v.robust == given else "  MISMATCH"
            print(f"{v.instance[0]:>4}:{v.instance[1]:<5} {d:>9.2f} {v.ratio:>7.3f} "
                  f"{ratio:>6.2f} {str(v.robust).upper():>7}{flag}")


if __name__ == "__main__":
    main()
