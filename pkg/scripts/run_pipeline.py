"""Run every CLI subcommand in order on one config.

    python3 scripts/run_pipeline.py --config data/synthetic.cfg --out out
    python3 scripts/run_pipeline.py --out tests/golden     # refresh golden files
"""
import argparse
import sys
import time
from pathlib import Path

from sddsafe.cli import OUTPUTS, main

REPO = Path(__file__).resolve().parents[1]


def run(config, out, threads=1, verbose=True) -> int:
    for cmd in OUTPUTS:
        t0 = time.perf_counter()
        code = main([cmd, "--config", str(config), "--out", str(out), "--threads", str(threads)])
        if verbose:
            print(f"{cmd:<8} exit={code}  {time.perf_counter() - t0:6.2f}s")
        if code:
            return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default=REPO / "data" / "synthetic.cfg")
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    sys.exit(run(a.config, a.out, a.threads))
