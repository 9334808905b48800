"""Single-octave Gaussian scale space, DoG stack and keypoint detection."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from ._backend import kernels
from .errors import ScaleSpaceError
from .signal import Signal

MIN_LEVELS = 4


@dataclass(frozen=True)
class ScaleSpaceParams:
    sigma0: float = 1.6
    k: float = 2.0 ** 0.25
    max_levels: int | None = None
    contrast_threshold: float = 0.0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ScaleSpaceError(f"sigma0 must be > 0, got {self.sigma0}")
        if not self.k > 1:
            raise ScaleSpaceError(f"k must be > 1, got {self.k}")
        if self.max_levels is not None and self.max_levels < 1:
            raise ScaleSpaceError(f"max_levels must be >= 1, got {self.max_levels}")
        if not self.contrast_threshold >= 0:
            raise ScaleSpaceError("contrast_threshold must be >= 0")


@dataclass(frozen=True)
class ScaleSpace:
    sigmas: tuple[float, ...]
    levels: np.ndarray  # (n_levels, n_samples)

    def __len__(self):
        return len(self.sigmas)


@dataclass(frozen=True)
class DoGStack:
    sigmas: tuple[float, ...]  # sigma of the upper level of each pair
    levels: np.ndarray  # (n_levels, n_samples)

    def __len__(self):
        return len(self.sigmas)


@dataclass(frozen=True)
class Keypoint:
    position: int
    scale_index: int
    sigma: float
    dog_value: float
    polarity: str  # "maximum" | "minimum"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Keypoint":
        if d["polarity"] not in ("maximum", "minimum"):
            raise ScaleSpaceError(f"bad keypoint polarity {d['polarity']!r}")
        return cls(int(d["position"]), int(d["scale_index"]), float(d["sigma"]),
                   float(d["dog_value"]), d["polarity"])


def kernel_radius(sigma: float) -> int:
    return int(math.ceil(4.0 * sigma))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian on [-ceil(4 sigma), ceil(4 sigma)], normalized to unit sum."""
    if not sigma > 0:
        raise ScaleSpaceError(f"sigma must be > 0, got {sigma}")
    r = kernel_radius(sigma)
    half = np.exp(-0.5 * (np.arange(r + 1, dtype=np.float64) / sigma) ** 2)
    w = np.concatenate([half[:0:-1], half])
    return w / w.sum()


def convolve_reflect(samples, kernel) -> np.ndarray:
    """Same-length convolution with mirror boundaries (edge sample not repeated)."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if kernel.ndim != 1 or kernel.size % 2 == 0:
        raise ScaleSpaceError("kernel must be 1-D with odd length")
    if kernel.size // 2 >= x.size:
        raise ScaleSpaceError(
            f"kernel radius {kernel.size // 2} too long for signal of length {x.size}")
    return kernels.convolve_reflect(x, kernel)


def level_count(n_samples: int, params: ScaleSpaceParams) -> int:
    """Largest level count whose top kernel (full 4-sigma support) fits in the signal."""
    count = 0
    while True:
        sigma = params.sigma0 * params.k ** count
        if 2 * kernel_radius(sigma) + 1 > n_samples:
            break
        count += 1
        if params.max_levels is not None and count >= params.max_levels:
            break
    return count


def build_scale_space(signal: Signal, params: ScaleSpaceParams = ScaleSpaceParams()) -> ScaleSpace:
    x = signal.samples
    n_levels = level_count(x.size, params)
    if n_levels < MIN_LEVELS:
        raise ScaleSpaceError(
            f"signal of length {x.size} yields {n_levels} scale levels, need {MIN_LEVELS}")
    sigmas = [params.sigma0 * params.k ** i for i in range(n_levels)]
    levels = np.empty((n_levels, x.size))
    levels[0] = convolve_reflect(x, gaussian_kernel(sigmas[0]))
    for i in range(1, n_levels):
        inc = math.sqrt(sigmas[i] ** 2 - sigmas[i - 1] ** 2)
        levels[i] = convolve_reflect(levels[i - 1], gaussian_kernel(inc))
    levels.setflags(write=False)
    return ScaleSpace(tuple(sigmas), levels)


def build_dog(space: ScaleSpace) -> DoGStack:
    if len(space) < 2:
        raise ScaleSpaceError("need at least 2 scale levels for a DoG stack")
    diff = space.levels[1:] - space.levels[:-1]
    diff.setflags(write=False)
    return DoGStack(tuple(space.sigmas[1:]), diff)


def detect_keypoints(dog: DoGStack, params: ScaleSpaceParams = ScaleSpaceParams()) -> list[Keypoint]:
    """Points strictly above or below all 8 neighbours in (position, scale).

    Boundary positions and the first/last DoG level are never keypoints.
    """
    if len(dog) < 3:
        raise ScaleSpaceError("need at least 3 DoG levels to detect keypoints")
    arr = np.ascontiguousarray(dog.levels)
    xs, ks, is_max = kernels.dog_extrema(arr, float(params.contrast_threshold))
    return [
        Keypoint(int(x), int(k), dog.sigmas[k], float(arr[k, x]),
                 "maximum" if m else "minimum")
        for x, k, m in zip(xs, ks, is_max)
    ]


def keypoints_for(signal: Signal, params: ScaleSpaceParams = ScaleSpaceParams()) -> list[Keypoint]:
    return detect_keypoints(build_dog(build_scale_space(signal, params)), params)
