"""Silhouette-based choice of k on planted sinusoid / ramp / step windows."""
import argparse

from sklearn.metrics import adjusted_rand_score

from sddsafe.cluster import select_clusters
from sddsafe.synthetic import planted_windows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, nargs="+", default=[0.05, 0.2, 0.4])
    ap.add_argument("--k-min", type=int, default=2)
    ap.add_argument("--k-max", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    for noise in args.noise:
        X, labels = planted_windows(30, 30, noise, seed=args.seed)
        sel, model = select_clusters(X, args.k_min, args.k_max, seed=args.seed, threads=args.threads)
        scores = "  ".join(f"k={k}:{s:.3f}" for k, s in sel.scores.items())
        print(f"noise {noise:<5} chosen k={sel.chosen_k}  ARI={adjusted_rand_score(labels, model.assignments):.3f}  {scores}")


if __name__ == "__main__":
    main()
