"""Shape extrema with the monotonicity test and slope-ratio descriptors.

A descriptor anchors on a keypoint, picks the N nearest accepted shape
extrema (N/2 on each side) and, for each, stores M ratios of the right-hand
to left-hand chord slopes taken at distances delta, 2*delta, ..., M*delta.
Ratios at peaks are made non-negative, which penalises matching a peak
against a valley.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import DescriptorError
from .scale_space import Keypoint, convolve_reflect, gaussian_kernel
from .signal import Signal

RATIO_CLAMP = 1e6
FLAT_SLOPE_RTOL = 1e-12
CLOSE_LOW, CLOSE_HIGH = 2.0 / 3.0, 3.0 / 2.0


@dataclass(frozen=True)
class DescriptorParams:
    n_extrema: int = 4
    m_segments: int = 4
    delta: int = 5
    min_neighborhood: int = 20
    # > 0: locate extrema and slopes on the signal blurred at this sigma
    extrema_sigma: float = 0.0
    # keep one descriptor per distinct extrema window (strongest keypoint wins)
    dedupe: bool = True

    def __post_init__(self):
        if self.n_extrema < 2 or self.n_extrema % 2:
            raise DescriptorError(f"n_extrema must be even and >= 2, got {self.n_extrema}")
        if self.m_segments < 1:
            raise DescriptorError(f"m_segments must be >= 1, got {self.m_segments}")
        if self.delta < 1:
            raise DescriptorError(f"delta must be >= 1, got {self.delta}")
        if self.min_neighborhood < 2:
            raise DescriptorError(f"min_neighborhood must be >= 2, got {self.min_neighborhood}")
        if self.extrema_sigma < 0:
            raise DescriptorError("extrema_sigma must be >= 0")

    @property
    def length(self) -> int:
        return self.n_extrema * self.m_segments


@dataclass(frozen=True)
class ShapeExtremum:
    index: int
    kind: str  # "peak" | "valley"
    left_run: int
    right_run: int


@dataclass(frozen=True)
class Descriptor:
    keypoint: Keypoint
    values: np.ndarray
    extrema_indices: tuple[int, ...]
    extrema_kinds: tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "keypoint": self.keypoint.to_dict(),
            "extrema_indices": list(self.extrema_indices),
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Descriptor":
        values = np.asarray(d["values"], dtype=np.float64)
        values.setflags(write=False)
        return cls(Keypoint.from_dict(d["keypoint"]), values,
                   tuple(int(i) for i in d["extrema_indices"]))


@dataclass(frozen=True)
class SweepResult:
    total_cases: int
    close_cases: int

    @property
    def close_fraction(self) -> float:
        return self.close_cases / self.total_cases if self.total_cases else 0.0

    def summary(self) -> str:
        return f"close={self.close_cases} total={self.total_cases} fraction={self.close_fraction:.4f}"


# --------------------------------------------------------------------------
# Shape extrema
# --------------------------------------------------------------------------

def _step_signs(x: np.ndarray) -> np.ndarray:
    """Signs of first differences with single-step plateaus absorbed into a run."""
    s = np.sign(np.diff(x)).astype(np.int8)
    n = s.size
    zeros = np.flatnonzero(s == 0)
    for t in zeros:
        lone = (t == 0 or s[t - 1] != 0) and (t == n - 1 or s[t + 1] != 0)
        if not lone:
            continue
        if t > 0:
            s[t] = s[t - 1]
        elif t + 1 < n:
            s[t] = s[t + 1]
    return s


def _run_lengths(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per step: length of the equal-sign run ending here / starting here."""
    n = s.size
    ending = np.zeros(n, dtype=np.int64)
    starting = np.zeros(n, dtype=np.int64)
    for t in range(n):
        if s[t] != 0:
            ending[t] = ending[t - 1] + 1 if t and s[t - 1] == s[t] else 1
    for t in range(n - 1, -1, -1):
        if s[t] != 0:
            starting[t] = starting[t + 1] + 1 if t < n - 1 and s[t + 1] == s[t] else 1
    return ending, starting


def find_shape_extrema(samples, params: DescriptorParams = DescriptorParams()) -> list[ShapeExtremum]:
    """Peaks and valleys whose strictly monotone runs on both sides span >= d samples."""
    x = np.asarray(samples, dtype=np.float64)
    d = params.min_neighborhood
    if x.size <= 2 * d:
        raise DescriptorError(f"signal of length {x.size} too short for min_neighborhood {d}")
    s = _step_signs(x)
    ending, starting = _run_lengths(s)
    out = []
    turns = np.flatnonzero((s[:-1] * s[1:]) < 0)
    for t in turns:
        left, right = int(ending[t]), int(starting[t + 1])
        if left >= d and right >= d:
            kind = "peak" if s[t] > 0 else "valley"
            out.append(ShapeExtremum(int(t + 1), kind, left, right))
    return out


# --------------------------------------------------------------------------
# Descriptors
# --------------------------------------------------------------------------

def slope_ratio(left_slope: float, right_slope: float, is_peak: bool) -> float:
    if abs(left_slope) < FLAT_SLOPE_RTOL * max(1.0, abs(right_slope)):
        if is_peak:
            return RATIO_CLAMP
        sign = math.copysign(1.0, right_slope) * math.copysign(1.0, left_slope)
        return sign * RATIO_CLAMP
    r = right_slope / left_slope
    return abs(r) if is_peak else r


def extremum_ratios(x: np.ndarray, index: int, is_peak: bool, m_segments: int, delta: int):
    """Slope ratios r^1..r^M at one extremum, or None if a chord leaves the signal."""
    if index - m_segments * delta < 0 or index + m_segments * delta >= x.size:
        return None
    centre = x[index]
    out = []
    for i in range(1, m_segments + 1):
        step = i * delta
        left = (x[index - step] - centre) / (-step)
        right = (x[index + step] - centre) / step
        out.append(slope_ratio(left, right, is_peak))
    return out


def select_extrema(extrema_idx: list[int], position: int, half: int):
    """Indices into the extrema list: ``half`` nearest strictly left and right."""
    lo = bisect_left(extrema_idx, position)
    hi = bisect_right(extrema_idx, position)
    if lo < half or len(extrema_idx) - hi < half:
        return None
    return list(range(lo - half, lo)) + list(range(hi, hi + half))


def build_descriptor(samples, extrema: list[ShapeExtremum], keypoint: Keypoint,
                     params: DescriptorParams = DescriptorParams()) -> Descriptor | None:
    x = np.asarray(samples, dtype=np.float64)
    if not 0 <= keypoint.position < x.size:
        raise DescriptorError(f"keypoint position {keypoint.position} outside signal")
    picked = select_extrema([e.index for e in extrema], keypoint.position, params.n_extrema // 2)
    if picked is None:
        return None
    values: list[float] = []
    for j in picked:
        e = extrema[j]
        ratios = extremum_ratios(x, e.index, e.kind == "peak", params.m_segments, params.delta)
        if ratios is None:
            return None
        values.extend(ratios)
    arr = np.asarray(values)
    arr.setflags(write=False)
    return Descriptor(keypoint, arr, tuple(extrema[j].index for j in picked),
                      tuple(extrema[j].kind for j in picked))


def shape_source(signal: Signal, params: DescriptorParams) -> np.ndarray:
    """Samples on which extrema and slopes are measured."""
    if params.extrema_sigma > 0:
        return convolve_reflect(signal.samples, gaussian_kernel(params.extrema_sigma))
    return signal.samples


def describe_all(signal: Signal, keypoints: list[Keypoint],
                 params: DescriptorParams = DescriptorParams()) -> list[Descriptor]:
    """Descriptors for every keypoint with enough context, in position order.

    Keypoints lying between the same extrema produce identical vectors; with
    ``params.dedupe`` only the keypoint with the largest |DoG| is kept for
    each extrema window.
    """
    x = shape_source(signal, params)
    if x.size <= 2 * params.min_neighborhood:
        return []
    extrema = find_shape_extrema(x, params)
    if len(extrema) < params.n_extrema:
        return []
    ordered = sorted(keypoints, key=lambda kp: (kp.position, kp.scale_index))
    built = [d for d in (build_descriptor(x, extrema, kp, params) for kp in ordered) if d is not None]
    if not params.dedupe:
        return built
    best: dict[tuple[int, ...], Descriptor] = {}
    for d in built:
        cur = best.get(d.extrema_indices)
        if cur is None or abs(d.keypoint.dog_value) > abs(cur.keypoint.dog_value):
            best[d.extrema_indices] = d
    keep = {id(d) for d in best.values()}
    return [d for d in built if id(d) in keep]


# --------------------------------------------------------------------------
# Closeness sweep over cap angles and dilation factors
# --------------------------------------------------------------------------

def inclusive_range(start: float, step: float, stop: float, slack: float = 1e-9) -> np.ndarray:
    """start, start+step, ... up to the last value <= stop + slack*step."""
    if not step > 0 or stop < start:
        return np.empty(0)
    count = int(math.floor((stop - start) / step + slack)) + 1
    return start + step * np.arange(count)


def is_close(r) -> np.ndarray:
    r = np.asarray(r)
    return (r >= CLOSE_LOW) & (r <= CLOSE_HIGH)


def cap_ratio(theta_left, theta_right):
    """Signed slope ratio of a cap with flank angles measured from the vertical."""
    return -(1.0 / np.tan(theta_right)) / (1.0 / np.tan(theta_left))


def closeness_sweep() -> SweepResult:
    """Count (theta1, theta2, s) cases whose dilated cap ratio stays within [2/3, 3/2]."""
    top = 0.45 * math.pi
    total = close = 0
    for t1 in inclusive_range(0.05, 0.005, 0.45) * math.pi:
        for t2 in inclusive_range(t1, (top - t1) / 100.0, top):
            s = inclusive_range(1.25, 0.05, top / t2)
            if s.size == 0:
                continue
            r = cap_ratio(s * t1, s * t2) / cap_ratio(t1, t2)
            total += s.size
            close += int(np.count_nonzero(is_close(r)))
    return SweepResult(total, close)
