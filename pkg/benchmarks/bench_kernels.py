"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times the end-to-end LOOCV benchmark (3 classes x 6 instances) with
each backend swapped in.
"""
import argparse
import timeit

import numpy as np

from sicr import _backend, matching, scale_space
from sicr.classifier import TrainingSet, evaluate_all_metrics
from sicr.scale_space import build_dog, build_scale_space, gaussian_kernel
from sicr.signal import SynthSpec, synth_dataset, synth_event


def kernel_cases(rng):
    # pipeline-sized inputs: a 2x-dilated 1200-sample event and its DoG stack
    sig = synth_event(SynthSpec(0, "bump_train", scale_factor=2.0, noise_std=0.05, seed=1), 1200)
    x = sig.samples
    k = gaussian_kernel(8.0)
    dog = np.ascontiguousarray(build_dog(build_scale_space(sig)).levels)
    a = rng.normal(size=(40, 16))
    b = rng.normal(size=(40, 16))
    cost = np.ascontiguousarray(rng.uniform(size=(40, 40)))
    # large inputs
    big_x = rng.normal(size=20_000)
    big_dog = np.ascontiguousarray(rng.normal(size=(12, 20_000)))
    big_a = rng.normal(size=(300, 16))
    big_cost = np.ascontiguousarray(rng.uniform(size=(400, 400)))
    return {
        "convolve_reflect n=2400 r=32": lambda m: m.convolve_reflect(x, k),
        f"dog_extrema {dog.shape[0]}x{dog.shape[1]}": lambda m: m.dog_extrema(dog, 0.0),
        "pairwise_euclidean 40x40x16": lambda m: m.pairwise_euclidean(a, b),
        "dtw_accumulate 40x40": lambda m: m.dtw_accumulate(cost),
        "convolve_reflect n=20000 r=32": lambda m: m.convolve_reflect(big_x, k),
        "dog_extrema 12x20000 (noise)": lambda m: m.dog_extrema(big_dog, 0.0),
        "pairwise_euclidean 300x300x16": lambda m: m.pairwise_euclidean(big_a, big_a),
        "dtw_accumulate 400x400": lambda m: m.dtw_accumulate(big_cost),
    }


def best_of(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available_backends()
    names = sorted(backends)
    rng = np.random.default_rng(0)

    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + "   speedup")
    for label, case in kernel_cases(rng).items():
        times = {n: best_of(lambda: case(backends[n]), args.repeat) for n in names}
        row = f"{label:34s}" + "".join(f"{times[n] * 1e3:10.3f}ms" for n in names)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:6.1f}x"
        print(row)

    data = synth_dataset(3, 6, 0.5, 2.0, 0.05, seed=42)
    ts = TrainingSet(tuple((sig, str(spec.class_id)) for spec, sig in data))
    saved = scale_space.kernels, matching.kernels
    times = {}
    try:
        for n in names:
            scale_space.kernels = matching.kernels = backends[n]
            times[n] = best_of(lambda: evaluate_all_metrics(ts), max(1, args.repeat // 2))
    finally:
        scale_space.kernels, matching.kernels = saved
    row = f"{'LOOCV 3x6 (all metrics)':34s}" + "".join(f"{times[n] * 1e3:10.3f}ms" for n in names)
    if "cython" in times:
        row += f"   {times['python'] / times['cython']:6.1f}x"
    print(row)


if __name__ == "__main__":
    main()
