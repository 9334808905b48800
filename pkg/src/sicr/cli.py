"""Command-line interface.

Every subcommand prints one ``key=value`` summary line on success. Exit
status is 0 on success, 2 on usage errors and 1 on pipeline failures.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import files
from .classifier import Metric, PipelineParams, classify, evaluate_loocv, fit
from .descriptor import DescriptorParams, closeness_sweep, describe_all
from .errors import SicrError
from .matching import MatchParams, extract_features, match_features, score_features, Features
from .render import match_svg, matrix_svg
from .scale_space import ScaleSpaceParams, build_dog, build_scale_space, detect_keypoints
from .signal import class_spec_template, synth_dataset


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (SicrError, OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


# --------------------------------------------------------------------------
# argument types
# --------------------------------------------------------------------------

def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _above_one(text):
    v = float(text)
    if not v > 1:
        raise argparse.ArgumentTypeError(f"must be > 1, got {text}")
    return v


def _int_at_least(lo):
    def parse(text):
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {text}")
        return v
    return parse


def _even_int(text):
    v = int(text)
    if v < 2 or v % 2:
        raise argparse.ArgumentTypeError(f"must be an even integer >= 2, got {text}")
    return v


def _add_rate(p):
    p.add_argument("--rate", type=_positive_float, default=100.0,
                   help="sample rate for one-column CSV input (Hz)")


def _add_scale_space(p):
    g = p.add_argument_group("scale space")
    g.add_argument("--sigma0", type=_positive_float, default=1.6)
    g.add_argument("--k", type=_above_one, default=2.0 ** 0.25)
    g.add_argument("--max-levels", type=_int_at_least(1), default=None)
    g.add_argument("--contrast", type=_nonneg_float, default=0.0)


def _add_descriptor(p):
    g = p.add_argument_group("descriptor")
    g.add_argument("--n", type=_even_int, default=4, help="extrema per descriptor")
    g.add_argument("--m", type=_int_at_least(1), default=4, help="segments per extremum")
    g.add_argument("--delta", type=_int_at_least(1), default=5, help="segment spacing (samples)")
    g.add_argument("--min-neigh", type=_int_at_least(2), default=20,
                   help="monotone run length required on each side of an extremum")
    g.add_argument("--extrema-sigma", type=_nonneg_float, default=0.0,
                   help="measure extrema on the signal blurred at this sigma (0: raw)")


def _add_matching(p):
    g = p.add_argument_group("matching")
    g.add_argument("--ratio", type=_above_one, default=1.5)
    g.add_argument("--ransac-iters", type=_int_at_least(1), default=500)
    g.add_argument("--tol-frac", type=_positive_float, default=0.02)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--dtw-on", choices=("descriptors", "raw"), default="descriptors")


def _ss_params(a) -> ScaleSpaceParams:
    return ScaleSpaceParams(a.sigma0, a.k, a.max_levels, a.contrast)


def _d_params(a) -> DescriptorParams:
    return DescriptorParams(a.n, a.m, a.delta, a.min_neigh, a.extrema_sigma)


def _m_params(a) -> MatchParams:
    return MatchParams(ratio_threshold=a.ratio, ransac_iterations=a.ransac_iters,
                       tolerance_fraction=a.tol_frac, rng_seed=a.seed, dtw_on=a.dtw_on)


def _pipeline(a) -> PipelineParams:
    return PipelineParams(_ss_params(a), _d_params(a), _m_params(a))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_keypoints(a) -> str:
    sig = _stage("load", files.read_signal, a.input, a.rate)
    params = _ss_params(a)
    dog = _stage("scale_space", lambda: build_dog(build_scale_space(sig, params)))
    kps = _stage("keypoints", detect_keypoints, dog, params)
    files.write_json(a.out, [kp.to_dict() for kp in kps])
    return f"keypoints={len(kps)} levels={len(dog) + 1} samples={len(sig)}"


def _keypoints_or_detect(a, sig):
    if a.keypoints:
        kps = _stage("load", files.read_keypoints, a.keypoints)
        bad = [kp.position for kp in kps if not 0 <= kp.position < len(sig)]
        if bad:
            raise StageError("load", ValueError(f"keypoint positions outside signal: {bad[:5]}"))
        return kps
    params = _ss_params(a)
    return _stage("keypoints", lambda: detect_keypoints(build_dog(build_scale_space(sig, params)), params))


def cmd_describe(a) -> str:
    sig = _stage("load", files.read_signal, a.input, a.rate)
    kps = _keypoints_or_detect(a, sig)
    descs = _stage("describe", describe_all, sig, kps, _d_params(a))
    files.write_json(a.out, [d.to_dict() for d in descs])
    return f"descriptors={len(descs)} keypoints={len(kps)}"


def cmd_match(a) -> str:
    pattern = _stage("load", files.read_signal, a.pattern, a.rate)
    query = _stage("load", files.read_signal, a.query, a.rate)
    ss, dp, mp = _ss_params(a), _d_params(a), _m_params(a)
    fp = _stage("features", extract_features, pattern, ss, dp)
    fq = _stage("features", extract_features, query, ss, dp)
    ms = _stage("match", match_features, fp, fq, mp)
    scores = _stage("score", score_features, fp, fq, mp, ms)
    doc = ms.to_dict()
    doc["scores"] = {"m_norm": scores.m_norm, "dtw_norm": scores.dtw_norm, "r": scores.r}
    doc["pattern_descriptors"] = len(fp.descriptors)
    doc["query_descriptors"] = len(fq.descriptors)
    files.write_json(a.out, doc)
    if a.svg:
        svg = match_svg(pattern, query, ms, fp.positions, fq.positions)
        files.write_atomic(a.svg, svg)
    return (f"m={ms.m_raw} m_norm={scores.m_norm:.6g} dtw_norm={scores.dtw_norm:.6g} "
            f"r={scores.r:.6g} a={ms.model.a:.6g} b={ms.model.b:.6g}")


def cmd_classify(a) -> str:
    train = _stage("load", files.read_manifest, a.train, a.rate)
    query = _stage("load", files.read_signal, a.query, a.rate)
    params = _pipeline(a)
    model = _stage("fit", fit, train, params)
    result = _stage("classify", classify, model, query, Metric.parse(a.metric))
    files.write_json(a.out, result.to_dict())
    return f"predicted={result.predicted} metric={result.metric.value}"


def cmd_evaluate(a) -> str:
    data = _stage("load", files.read_manifest, a.dataset, a.rate)
    metric = Metric.parse(a.metric)
    report = _stage("evaluate", evaluate_loocv, data, metric, _pipeline(a), a.workers)
    files.write_json(a.out, report.to_dict())
    if a.matrix_svg:
        files.write_atomic(a.matrix_svg, matrix_svg(report.similarity_matrix, report.classes))
    return (f"metric={metric.value} accuracy={report.accuracy:.4f} "
            f"correct={report.correct} total={report.total}")


def cmd_sweep(a) -> str:
    result = closeness_sweep()
    if a.out:
        files.write_json(a.out, {"close_cases": result.close_cases, "total_cases": result.total_cases,
                                 "close_fraction": result.close_fraction})
    return result.summary()


def class_label(class_id: int) -> str:
    family, _ = class_spec_template(class_id)
    lap = class_id // 4
    return family if lap == 0 else f"{family}_{lap}"


def cmd_synth(a) -> str:
    if a.scale_min > a.scale_max:
        raise StageError("synth", ValueError("--scale-min must not exceed --scale-max"))
    data = _stage("synth", synth_dataset, a.classes, a.instances, a.scale_min, a.scale_max,
                  a.noise, a.seed, a.duration)
    out = Path(a.out)
    manifest = []
    for n, (spec, sig) in enumerate(data):
        rel = f"c{spec.class_id:02d}_i{n % a.instances:03d}.csv"
        files.write_signal(out / rel, sig)
        manifest.append({
            "path": rel,
            "label": class_label(spec.class_id),
            "sample_rate_hz": sig.sample_rate_hz,
            "base_shape": spec.base_shape,
            "scale_factor": spec.scale_factor,
            "noise_std": spec.noise_std,
            "seed": spec.seed,
        })
    files.write_json(out / files.MANIFEST_NAME, manifest)
    return f"signals={len(data)} classes={a.classes} out={out}"


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keypoints", help="detect scale-space keypoints")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_rate(p)
    _add_scale_space(p)
    p.set_defaults(func=cmd_keypoints)

    p = sub.add_parser("describe", help="build slope-ratio descriptors")
    p.add_argument("--input", required=True)
    p.add_argument("--keypoints", help="keypoints JSON from the keypoints command")
    p.add_argument("--out", required=True)
    _add_rate(p)
    _add_scale_space(p)
    _add_descriptor(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("match", help="match two signals and score them")
    p.add_argument("--pattern", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    _add_rate(p)
    _add_scale_space(p)
    _add_descriptor(p)
    _add_matching(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("classify", help="classify one signal against a training set")
    p.add_argument("--train", required=True, help="manifest JSON or a directory containing one")
    p.add_argument("--query", required=True)
    p.add_argument("--metric", choices=("r", "m", "d"), default="r")
    p.add_argument("--out", required=True)
    _add_rate(p)
    _add_scale_space(p)
    _add_descriptor(p)
    _add_matching(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="leave-one-out evaluation of a labelled dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--metric", choices=("r", "m", "d"), default="r")
    p.add_argument("--loocv", action="store_true",
                   help="leave-one-out protocol (the only protocol; accepted for clarity)")
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--matrix-svg")
    _add_rate(p)
    _add_scale_space(p)
    _add_descriptor(p)
    _add_matching(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="cap-angle closeness sweep")
    p.add_argument("--out", help="optional JSON result")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a seeded multi-scale dataset")
    p.add_argument("--classes", type=_int_at_least(1), required=True)
    p.add_argument("--instances", type=_int_at_least(1), required=True)
    p.add_argument("--scale-min", type=_positive_float, required=True)
    p.add_argument("--scale-max", type=_positive_float, required=True)
    p.add_argument("--noise", type=_nonneg_float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--duration", type=_int_at_least(100), default=1200,
                   help="unit-scale event length in samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        summary = args.func(args)
    except StageError as exc:
        print(f"error: stage={exc.stage} {exc.__cause__}", file=sys.stderr)
        return 1
    print(summary)
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
