import math

import numpy as np
import pytest

from sicr.classifier import (
    ClassificationResult,
    Metric,
    PipelineParams,
    TrainingSet,
    class_averages,
    classify,
    decide,
    evaluate_all_metrics,
    evaluate_loocv,
    fit,
)
from sicr.errors import ClassifierError
from sicr.matching import ScoreTriple
from sicr.signal import Signal, SynthSpec, resample_linear, synth_dataset, synth_event


def as_training(dataset):
    return TrainingSet(tuple((sig, spec.base_shape) for spec, sig in dataset))


@pytest.fixture(scope="module")
def three_class():
    return as_training(synth_dataset(3, 4, 0.6, 1.6, 0.05, seed=7))


@pytest.fixture(scope="module")
def three_class_model(three_class):
    return fit(three_class)


class TestDecide:
    def test_direction(self):
        scores = [("a", 1.0), ("b", 3.0), ("c", 2.0)]
        assert decide(scores, Metric.R) == "b"
        assert decide(scores, Metric.M) == "b"
        assert decide(scores, Metric.D) == "a"

    def test_ties_earliest(self):
        tied = [("x", 0.5), ("y", 0.5), ("z", 0.5)]
        assert all(decide(tied, m) == "x" for m in Metric)

    def test_positive_scaling_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            vals = rng.uniform(0, 5, 4)
            c = rng.uniform(0.01, 100)
            base = [(str(i), v) for i, v in enumerate(vals)]
            scaled = [(str(i), v * c) for i, v in enumerate(vals)]
            for m in Metric:
                assert decide(base, m) == decide(scaled, m)

    def test_metric_parse(self):
        assert Metric.parse("R") is Metric.R
        with pytest.raises(ClassifierError):
            Metric.parse("x")

    def test_sic_d_skips_non_finite(self):
        scores = [ScoreTriple(0, 2.0, 0), ScoreTriple(0, math.inf, 0), ScoreTriple(0, 5.0, 0)]
        out = class_averages(scores, ["a", "a", "b"], ["a", "b"], Metric.D)
        assert out == [("a", 2.0), ("b", 5.0)]


class TestFit:
    def test_caches_54(self):
        ds = synth_dataset(9, 6, 0.5, 2.0, 0.05, seed=1, duration_samples=400)
        model = fit(TrainingSet(tuple((sig, f"c{spec.class_id}") for spec, sig in ds)))
        assert len(model.features) == 54
        assert len(model.classes) == 9

    def test_single_class(self):
        sig = synth_event(SynthSpec(0, "bump_train"), 600)
        model = fit(TrainingSet(((sig, "only"),)))
        assert classify(model, sig).predicted == "only"

    def test_short_signal_named(self):
        good = synth_event(SynthSpec(0, "bump_train"), 600)
        ts = TrainingSet(((good, "a"), (Signal(np.arange(10.0)), "b")))
        with pytest.raises(ClassifierError, match="training entry 1"):
            fit(ts)

    def test_empty_and_label_checks(self):
        with pytest.raises(ClassifierError):
            TrainingSet(())
        with pytest.raises(ClassifierError):
            TrainingSet(((Signal([1.0, 2.0]), ""),))

    def test_class_order_canonical(self, three_class):
        assert three_class.classes == ("bump_train", "step_ramp", "damped_oscillation")


class TestClassify:
    def test_self_match_dominates(self, three_class, three_class_model):
        for sig, label in three_class.entries:
            res = classify(three_class_model, sig, Metric.R)
            assert res.predicted == label

    def test_all_equal_scores_first_class(self):
        flat = Signal(np.zeros(600))
        model = fit(TrainingSet(((flat, "p"), (flat, "q"))))
        for m in Metric:
            res = classify(model, flat, m)
            assert res.predicted == "p"

    def test_held_out_dilated_bump_train(self, three_class_model):
        base = synth_event(SynthSpec(0, "bump_train", noise_std=0.05, seed=999), 1200)
        query = resample_linear(base, 1.7)
        res = classify(three_class_model, query, Metric.R)
        assert res.predicted == "bump_train"
        scores = dict(res.per_class_scores)
        assert scores["bump_train"] > 2 * max(scores["step_ramp"], scores["damped_oscillation"])

    def test_deterministic(self, three_class_model):
        q = synth_event(SynthSpec(0, "step_ramp", scale_factor=1.3, noise_std=0.05, seed=5), 1200)
        a = classify(three_class_model, q, Metric.R)
        b = classify(three_class_model, q, Metric.R)
        assert a == b
        assert a.to_dict()["predicted"] == a.predicted

    def test_duplicate_query_never_lowers_class_r(self, three_class):
        q = synth_event(SynthSpec(0, "damped_oscillation", scale_factor=1.2,
                                  noise_std=0.05, seed=77), 1200)
        before = dict(classify(fit(three_class), q).per_class_scores)
        augmented = TrainingSet(three_class.entries + ((q, "damped_oscillation"),))
        after = dict(classify(fit(augmented), q).per_class_scores)
        assert after["damped_oscillation"] >= before["damped_oscillation"]


class TestLoocv:
    def test_identical_copies(self):
        entries = []
        for shape in ("bump_train", "step_ramp", "chirp_burst"):
            sig = synth_event(SynthSpec(0, shape, noise_std=0.05, seed=1), 1200)
            entries += [(sig, shape)] * 3
        rep = evaluate_loocv(TrainingSet(tuple(entries)), Metric.R)
        assert rep.accuracy == 1.0

    def test_single_instance_class(self):
        a = synth_event(SynthSpec(0, "bump_train"), 600)
        with pytest.raises(ClassifierError):
            evaluate_loocv(TrainingSet(((a, "x"), (a, "x"), (a, "y"))))

    def test_report_consistency(self, three_class):
        reports = evaluate_all_metrics(three_class)
        for m, rep in reports.items():
            assert rep.metric is m
            recomputed = sum(t == p for _, t, p in rep.predictions)
            assert rep.correct == recomputed <= rep.total == len(three_class)
            assert rep.accuracy == recomputed / rep.total
            assert rep.similarity_matrix.shape == (3, len(three_class))
            assert np.all((rep.similarity_matrix >= 0) & (rep.similarity_matrix <= 1))
            d = rep.to_dict()
            assert d["accuracy"] == rep.accuracy and len(d["predictions"]) == rep.total

    def test_matches_single_metric_call(self, three_class):
        all_m = evaluate_all_metrics(three_class)
        single = evaluate_loocv(three_class, Metric.D)
        assert single.predictions == all_m[Metric.D].predictions
        assert np.array_equal(single.raw_scores, all_m[Metric.D].raw_scores)

    def test_parallel_equals_sequential(self, three_class):
        seq = evaluate_loocv(three_class, Metric.R, workers=1)
        par = evaluate_loocv(three_class, Metric.R, workers=2)
        assert seq.predictions == par.predictions
        assert np.array_equal(seq.raw_scores, par.raw_scores)

    def test_identical_distributions_near_chance(self):
        accs = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            entries = []
            for i in range(12):
                spec = SynthSpec(0, "bump_train", scale_factor=float(rng.uniform(0.5, 2.0)),
                                 noise_std=0.05, seed=int(rng.integers(1 << 31)))
                entries.append((synth_event(spec, 1200), "ab"[i % 2]))
            accs.append(evaluate_loocv(TrainingSet(tuple(entries)), Metric.R).accuracy)
        assert abs(np.mean(accs) - 0.5) <= 0.15
