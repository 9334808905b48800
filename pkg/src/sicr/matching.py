"""Descriptor matching, RANSAC time-map filtering, DTW and the M/DTW/R scores."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._backend import kernels
from .descriptor import Descriptor, DescriptorParams, describe_all
from .errors import MatchingError
from .scale_space import Keypoint, ScaleSpaceParams, keypoints_for
from .signal import Signal

DTW_FLOOR = 1e-9


@dataclass(frozen=True)
class MatchParams:
    ratio_threshold: float = 1.5
    ransac_iterations: int = 500
    tolerance_fraction: float = 0.02
    min_tolerance: float = 3.0
    # absolute inlier tolerance in samples; overrides the fraction rule when set
    inlier_tolerance: float | None = None
    rng_seed: int = 42
    # "descriptors": DTW over descriptor sequences; "raw": over the samples
    dtw_on: str = "descriptors"

    def __post_init__(self):
        if not self.ratio_threshold > 1:
            raise MatchingError(f"ratio_threshold must be > 1, got {self.ratio_threshold}")
        if self.ransac_iterations < 1:
            raise MatchingError("ransac_iterations must be >= 1")
        if self.inlier_tolerance is not None and not self.inlier_tolerance > 0:
            raise MatchingError("inlier_tolerance must be > 0")
        if not self.tolerance_fraction > 0:
            raise MatchingError("tolerance_fraction must be > 0")
        if self.dtw_on not in ("descriptors", "raw"):
            raise MatchingError(f"dtw_on must be 'descriptors' or 'raw', got {self.dtw_on!r}")

    def tolerance_for(self, query_length: int) -> float:
        if self.inlier_tolerance is not None:
            return float(self.inlier_tolerance)
        return max(self.min_tolerance, self.tolerance_fraction * query_length)


@dataclass(frozen=True)
class CandidateMatch:
    pattern_idx: int
    query_idx: int
    distance: float
    ratio: float

    def to_dict(self) -> dict:
        return {"pattern_idx": self.pattern_idx, "query_idx": self.query_idx,
                "distance": self.distance}


@dataclass(frozen=True)
class LinearTimeMap:
    """query_position = a * pattern_position + b"""

    a: float = 1.0
    b: float = 0.0

    def __call__(self, p):
        return self.a * np.asarray(p, dtype=np.float64) + self.b


@dataclass(frozen=True)
class MatchSet:
    inliers: tuple[CandidateMatch, ...]
    model: LinearTimeMap
    rejected: tuple[CandidateMatch, ...] = ()
    tolerance: float = 0.0
    degenerate: bool = False

    @property
    def m_raw(self) -> int:
        return len(self.inliers)

    def to_dict(self) -> dict:
        return {
            "model": {"a": self.model.a, "b": self.model.b},
            "inliers": [c.to_dict() for c in self.inliers],
            "rejected": [c.to_dict() for c in self.rejected],
            "m_raw": self.m_raw,
            "tolerance": self.tolerance,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ScoreTriple:
    m_norm: float
    dtw_norm: float
    r: float

    @classmethod
    def from_parts(cls, m_norm: float, dtw_norm: float) -> "ScoreTriple":
        return cls(m_norm, dtw_norm, m_norm / max(dtw_norm, DTW_FLOOR))

    def metric(self, name: str) -> float:
        return {"m": self.m_norm, "d": self.dtw_norm, "r": self.r}[name.lower()]


@dataclass(frozen=True)
class Features:
    """Per-signal pipeline output reused across comparisons."""

    signal: Signal
    keypoints: tuple[Keypoint, ...]
    descriptors: tuple[Descriptor, ...]
    matrix: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.matrix is None:
            if self.descriptors:
                mat = np.array([d.values for d in self.descriptors], dtype=np.float64)
            else:
                mat = np.empty((0, 0))
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)

    @property
    def positions(self) -> np.ndarray:
        return np.array([d.keypoint.position for d in self.descriptors], dtype=np.float64)


def _as_matrix(descs) -> np.ndarray:
    if isinstance(descs, np.ndarray):
        return np.ascontiguousarray(descs, dtype=np.float64)
    return np.ascontiguousarray([d.values for d in descs], dtype=np.float64)


def nn_match(pattern, query, params: MatchParams = MatchParams()) -> list[CandidateMatch]:
    """Nearest-neighbour candidates passing the second/nearest distance ratio test.

    ``pattern`` and ``query`` are descriptor lists or (n, dim) arrays.
    """
    P, Q = _as_matrix(pattern), _as_matrix(query)
    if P.shape[0] == 0 or Q.shape[0] == 0:
        raise MatchingError("nn_match needs non-empty descriptor lists")
    if P.shape[1] != Q.shape[1]:
        raise MatchingError(f"descriptor dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    dist = kernels.pairwise_euclidean(P, Q)
    out = []
    for i, row in enumerate(dist):
        j = int(np.argmin(row))
        nearest = float(row[j])
        if row.size < 2:
            ratio = math.inf
        else:
            second = float(np.partition(row, 1)[1])
            if nearest == 0.0:
                ratio = math.inf if second > 0.0 else 1.0
            else:
                ratio = second / nearest
        if ratio >= params.ratio_threshold:
            out.append(CandidateMatch(i, j, nearest, ratio))
    return out


def _fit_line(p: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    pm, qm = p.mean(), q.mean()
    dp = p - pm
    a = float(np.dot(dp, q - qm) / np.dot(dp, dp))
    return a, float(qm - a * pm)


def _one_per_query(matches, residual):
    """Keep the best-fitting candidate for each query descriptor."""
    best: dict[int, int] = {}
    for idx, c in enumerate(matches):
        cur = best.get(c.query_idx)
        key = (residual[idx], c.distance, c.pattern_idx)
        if cur is None or key < (residual[cur], matches[cur].distance, matches[cur].pattern_idx):
            best[c.query_idx] = idx
    return set(best.values())


def ransac_filter(candidates: list[CandidateMatch], pattern_positions, query_positions,
                  params: MatchParams = MatchParams(), query_length: int | None = None) -> MatchSet:
    """Keep candidates consistent with one increasing linear time map.

    ``pattern_positions``/``query_positions`` give the keypoint position of
    each descriptor index (descriptor lists are accepted too). When all
    pairs fit in the iteration budget they are enumerated exhaustively;
    otherwise pairs are drawn from PCG64 seeded with ``params.rng_seed``.
    """
    pp = _positions(pattern_positions)
    qp = _positions(query_positions)
    if query_length is None:
        query_length = int(qp.max()) + 1 if qp.size else 0
    tol = params.tolerance_for(query_length)
    cands = list(candidates)
    n = len(cands)
    if n < 2:
        model = LinearTimeMap(1.0, 0.0)
        if n == 1:
            c = cands[0]
            model = LinearTimeMap(1.0, float(qp[c.query_idx] - pp[c.pattern_idx]))
        return MatchSet(tuple(cands), model, (), tol)

    P = np.array([pp[c.pattern_idx] for c in cands])
    Q = np.array([qp[c.query_idx] for c in cands])

    n_pairs = n * (n - 1) // 2
    if n_pairs <= params.ransac_iterations:
        pairs = combinations(range(n), 2)
    else:
        rng = np.random.Generator(np.random.PCG64(params.rng_seed))
        pairs = (tuple(rng.choice(n, 2, replace=False)) for _ in range(params.ransac_iterations))

    best_key = None
    best_model = None
    for i, j in pairs:
        if P[i] == P[j]:
            continue
        a = (Q[j] - Q[i]) / (P[j] - P[i])
        if a <= 0:
            continue
        b = Q[i] - a * P[i]
        res = np.abs(a * P + b - Q)
        mask = res <= tol
        key = (-int(mask.sum()), float(res[mask].sum()))
        if best_key is None or key < best_key:
            best_key, best_model = key, (a, b)

    if best_model is None:
        return MatchSet((), LinearTimeMap(1.0, 0.0), tuple(cands), tol, degenerate=True)

    a, b = best_model
    mask = np.abs(a * P + b - Q) <= tol
    a_fit, b_fit = _fit_line(P[mask], Q[mask])
    if a_fit > 0:
        a, b = a_fit, b_fit
    res = np.abs(a * P + b - Q)
    inlier_idx = [k for k in range(n) if res[k] <= tol]
    keep = _one_per_query([cands[k] for k in inlier_idx], res[inlier_idx])
    inliers = tuple(cands[inlier_idx[k]] for k in sorted(keep))
    kept = {inlier_idx[k] for k in keep}
    rejected = tuple(c for k, c in enumerate(cands) if k not in kept)
    return MatchSet(inliers, LinearTimeMap(float(a), float(b)), rejected, tol)


def _positions(obj) -> np.ndarray:
    if isinstance(obj, np.ndarray):
        return obj.astype(np.float64)
    obj = list(obj)
    if obj and isinstance(obj[0], Descriptor):
        return np.array([d.keypoint.position for d in obj], dtype=np.float64)
    return np.asarray(obj, dtype=np.float64)


def dtw(seq_a, seq_b) -> tuple[float, int]:
    """Unconstrained DTW with Euclidean local cost.

    Returns the accumulated cost of the optimal alignment and the number of
    cells on it (ties backtracked diagonal first).
    """
    a = np.asarray(seq_a, dtype=np.float64)
    b = np.asarray(seq_b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise MatchingError("dtw needs non-empty sequences")
    if a.shape[1] != b.shape[1]:
        raise MatchingError(f"dtw dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    cost = kernels.pairwise_euclidean(np.ascontiguousarray(a), np.ascontiguousarray(b))
    score, length = kernels.dtw_accumulate(cost)
    return float(score), int(length)


def extract_features(signal: Signal, ss_params: ScaleSpaceParams = ScaleSpaceParams(),
                     d_params: DescriptorParams = DescriptorParams()) -> Features:
    kps = keypoints_for(signal, ss_params)
    return Features(signal, tuple(kps), tuple(describe_all(signal, kps, d_params)))


def match_features(pattern: Features, query: Features,
                   params: MatchParams = MatchParams()) -> MatchSet:
    tol = params.tolerance_for(len(query.signal))
    if not pattern.descriptors or not query.descriptors:
        return MatchSet((), LinearTimeMap(), (), tol)
    cands = nn_match(pattern.matrix, query.matrix, params)
    return ransac_filter(cands, pattern.positions, query.positions, params, len(query.signal))


def score_features(pattern: Features, query: Features, params: MatchParams = MatchParams(),
                   matches: MatchSet | None = None) -> ScoreTriple:
    if matches is None:
        matches = match_features(pattern, query, params)
    n_min = min(len(pattern.descriptors), len(query.descriptors))
    m_norm = matches.m_raw / n_min if n_min else 0.0
    if params.dtw_on == "raw":
        score, length = dtw(pattern.signal.samples, query.signal.samples)
        dtw_norm = score / length
    elif n_min:
        score, length = dtw(pattern.matrix, query.matrix)
        dtw_norm = score / length
    else:
        # no descriptors on one side: no alignment exists
        dtw_norm = math.inf
    return ScoreTriple.from_parts(m_norm, dtw_norm)


def score_pair(pattern_sig: Signal, query_sig: Signal,
               ss_params: ScaleSpaceParams = ScaleSpaceParams(),
               d_params: DescriptorParams = DescriptorParams(),
               m_params: MatchParams = MatchParams()) -> ScoreTriple:
    """M, DTW and R scores of ``query_sig`` against ``pattern_sig``."""
    fp = extract_features(pattern_sig, ss_params, d_params)
    fq = extract_features(query_sig, ss_params, d_params)
    return score_features(fp, fq, m_params)
