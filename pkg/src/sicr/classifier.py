"""SIC-M / SIC-D / SIC-R classification and leave-one-out evaluation."""
from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .descriptor import DescriptorParams
from .errors import ClassifierError, SicrError
from .matching import Features, MatchParams, ScoreTriple, extract_features, score_features
from .scale_space import ScaleSpaceParams
from .signal import Signal


class Metric(str, enum.Enum):
    M = "m"
    D = "d"
    R = "r"

    @property
    def higher_is_better(self) -> bool:
        # DTW is a distance
        return self is not Metric.D

    @classmethod
    def parse(cls, value) -> "Metric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ClassifierError(f"unknown metric {value!r}; use m, d or r") from None


@dataclass(frozen=True)
class PipelineParams:
    scale_space: ScaleSpaceParams = field(default_factory=ScaleSpaceParams)
    descriptor: DescriptorParams = field(default_factory=DescriptorParams)
    matching: MatchParams = field(default_factory=MatchParams)

    def features(self, signal: Signal) -> Features:
        return extract_features(signal, self.scale_space, self.descriptor)


@dataclass(frozen=True)
class TrainingSet:
    entries: tuple[tuple[Signal, str], ...]

    def __post_init__(self):
        entries = tuple((sig, str(label)) for sig, label in self.entries)
        if not entries:
            raise ClassifierError("training set is empty")
        for i, (_, label) in enumerate(entries):
            if not label:
                raise ClassifierError(f"entry {i} has an empty label")
        object.__setattr__(self, "entries", entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for _, label in self.entries)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.labels))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Model:
    features: tuple[Features, ...]
    labels: tuple[str, ...]
    classes: tuple[str, ...]
    params: PipelineParams


@dataclass(frozen=True)
class ClassificationResult:
    per_class_scores: tuple[tuple[str, float], ...]
    predicted: str
    metric: Metric

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "predicted": self.predicted,
            "per_class_scores": [{"class": c, "score": s} for c, s in self.per_class_scores],
        }


def decide(per_class: list[tuple[str, float]], metric: Metric) -> str:
    """Best class by the metric's direction; ties go to the earliest class."""
    best_label, best = per_class[0]
    for label, score in per_class[1:]:
        better = score > best if metric.higher_is_better else score < best
        if better:
            best_label, best = label, score
    return best_label


def fit(training: TrainingSet, params: PipelineParams = PipelineParams()) -> Model:
    feats = []
    for i, (sig, label) in enumerate(training.entries):
        try:
            feats.append(params.features(sig))
        except SicrError as exc:
            raise ClassifierError(f"training entry {i} (class {label!r}): {exc}") from exc
    return Model(tuple(feats), training.labels, training.classes, params)


def class_averages(scores: list[ScoreTriple], labels, classes, metric: Metric) -> list[tuple[str, float]]:
    """Mean score per class.

    Comparisons without an alignment (infinite DTW, r = 0) are left out of
    the SIC-D mean; a class with no finite DTW averages to infinity.
    """
    out = []
    for c in classes:
        vals = np.array([s.metric(metric.value) for s, label in zip(scores, labels) if label == c])
        if metric is Metric.D:
            vals = vals[np.isfinite(vals)]
            out.append((c, float(vals.mean()) if vals.size else float("inf")))
        else:
            out.append((c, float(vals.mean())))
    return out


def classify_features(model: Model, query: Features, metric) -> ClassificationResult:
    metric = Metric.parse(metric)
    scores = [score_features(f, query, model.params.matching) for f in model.features]
    per_class = class_averages(scores, model.labels, model.classes, metric)
    return ClassificationResult(tuple(per_class), decide(per_class, metric), metric)


def classify(model: Model, query: Signal, metric=Metric.R) -> ClassificationResult:
    return classify_features(model, model.params.features(query), metric)


# --------------------------------------------------------------------------
# Leave-one-out evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    metric: Metric
    classes: tuple[str, ...]
    correct: int
    total: int
    predictions: tuple[tuple[int, str, str], ...]
    raw_scores: np.ndarray  # (classes, instances) class-average scores
    similarity_matrix: np.ndarray  # per-column [0, 1], 1 = most likely class

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "classes": list(self.classes),
            "predictions": [
                {"instance": i, "true": t, "predicted": p} for i, t, p in self.predictions
            ],
            "raw_scores": self.raw_scores.tolist(),
            "similarity_matrix": self.similarity_matrix.tolist(),
        }


def _column_normalize(raw: np.ndarray, higher_is_better: bool) -> np.ndarray:
    vals = raw if higher_is_better else -raw
    vals = np.where(np.isfinite(vals), vals, np.nan)
    out = np.zeros_like(raw, dtype=np.float64)
    for j in range(raw.shape[1]):
        col = vals[:, j]
        finite = ~np.isnan(col)
        if not finite.any():
            continue
        lo, hi = col[finite].min(), col[finite].max()
        if hi > lo:
            out[finite, j] = (col[finite] - lo) / (hi - lo)
        else:
            out[finite, j] = 1.0
    return out


def _score_row(args):
    feats, i, params = args
    return [None if j == i else score_features(f, feats[i], params) for j, f in enumerate(feats)]


def pairwise_scores(feats: list[Features], params: MatchParams, workers: int = 1):
    """scores[i][j] = score of query i against pattern j (None on the diagonal)."""
    jobs = [(feats, i, params) for i in range(len(feats))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_score_row, jobs))
    return [_score_row(job) for job in jobs]


def report_from_scores(scores, labels, classes, metric) -> EvalReport:
    metric = Metric.parse(metric)
    n = len(labels)
    raw = np.zeros((len(classes), n))
    predictions = []
    correct = 0
    for i in range(n):
        others = [j for j in range(n) if j != i]
        per_class = class_averages([scores[i][j] for j in others],
                                   [labels[j] for j in others], classes, metric)
        raw[:, i] = [s for _, s in per_class]
        pred = decide(per_class, metric)
        predictions.append((i, labels[i], pred))
        correct += pred == labels[i]
    return EvalReport(metric, tuple(classes), correct, n, tuple(predictions), raw,
                      _column_normalize(raw, metric.higher_is_better))


def _check_loocv(dataset: TrainingSet):
    counts = {c: dataset.labels.count(c) for c in dataset.classes}
    single = [c for c, k in counts.items() if k < 2]
    if single:
        raise ClassifierError(f"leave-one-out needs >= 2 instances per class; {single} have 1")


def evaluate_loocv(dataset: TrainingSet, metric=Metric.R, params: PipelineParams = PipelineParams(),
                   workers: int = 1) -> EvalReport:
    """Classify every instance against a model fitted on all the others.

    Per-signal features do not depend on the rest of the training set, so
    they are extracted once and shared between folds.
    """
    _check_loocv(dataset)
    feats = list(fit(dataset, params).features)
    scores = pairwise_scores(feats, params.matching, workers)
    return report_from_scores(scores, dataset.labels, dataset.classes, metric)


def evaluate_all_metrics(dataset: TrainingSet, params: PipelineParams = PipelineParams(),
                         workers: int = 1) -> dict[Metric, EvalReport]:
    """LOOCV reports for M, D and R from one shared set of pairwise scores."""
    _check_loocv(dataset)
    feats = list(fit(dataset, params).features)
    scores = pairwise_scores(feats, params.matching, workers)
    return {m: report_from_scores(scores, dataset.labels, dataset.classes, m) for m in Metric}
