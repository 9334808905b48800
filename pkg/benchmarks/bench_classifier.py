"""LOOCV accuracy of SIC-M / SIC-D / SIC-R on synthetic multi-scale datasets.

    python3 benchmarks/bench_classifier.py [--seeds 5] [--workers 1]

Scales are drawn uniformly in [0.5, 2]; every setting is averaged over
seeds 0..N-1.
"""
import argparse
import time

import numpy as np

from sicr.classifier import Metric, TrainingSet, evaluate_all_metrics
from sicr.signal import synth_dataset

SETTINGS = [  # (classes, instances, noise_std)
    (3, 6, 0.05),
    (4, 6, 0.05),
    (3, 6, 0.3),
    (8, 6, 0.05),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print(f"{'classes':>7s} {'inst':>4s} {'noise':>5s} {'M':>6s} {'D':>6s} {'R':>6s} {'sec':>6s}")
    for classes, instances, noise in SETTINGS:
        acc = {m: [] for m in Metric}
        t0 = time.perf_counter()
        for seed in range(args.seeds):
            data = synth_dataset(classes, instances, 0.5, 2.0, noise, seed=seed)
            ts = TrainingSet(tuple((sig, str(spec.class_id)) for spec, sig in data))
            for m, rep in evaluate_all_metrics(ts, workers=args.workers).items():
                acc[m].append(rep.accuracy)
        dt = time.perf_counter() - t0
        means = [np.mean(acc[m]) for m in (Metric.M, Metric.D, Metric.R)]
        print(f"{classes:7d} {instances:4d} {noise:5.2f} " + " ".join(f"{v:6.3f}" for v in means)
              + f" {dt:6.1f}")


if __name__ == "__main__":
    main()
