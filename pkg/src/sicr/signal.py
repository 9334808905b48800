"""Signal container, CSV ingestion, linear resampling and synthetic events.

Synthetic events are piecewise-linear motifs with aperiodic height
modulation, so every flank is linear between knots; a time-dilated instance is produced by linearly
resampling the unit-scale waveform, which keeps dilation exact in the sense
that ``synth_event(s)`` and ``resample_linear(synth_event(1), s)`` agree.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import SignalError

CSV_UNIFORM_RTOL = 1e-6

BASE_SHAPES = ("bump_train", "chirp_burst", "step_ramp", "damped_oscillation")

# name -> (parameter names, defaults)
SHAPE_PARAMS: dict[str, tuple[tuple[str, ...], tuple[float, ...]]] = {
    # n_bumps, amplitude, rise_fraction
    "bump_train": (("n_bumps", "amplitude", "rise_fraction"), (6.0, 100.0, 0.5)),
    # start_cycles, end_cycles, amplitude
    "chirp_burst": (("start_cycles", "end_cycles", "amplitude"), (3.0, 7.0, 100.0)),
    # n_steps, amplitude, rise_fraction
    "step_ramp": (("n_steps", "amplitude", "rise_fraction"), (6.0, 100.0, 0.65)),
    # n_cycles, amplitude, decay_lengths, rise_fraction
    "damped_oscillation": (
        ("n_cycles", "amplitude", "decay_lengths", "rise_fraction"),
        (6.0, 100.0, 1.0, 0.4),
    ),
}


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled, finite, real-valued 1-D series."""

    samples: np.ndarray
    sample_rate_hz: float = 1.0
    label: str | None = None

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).ravel()
        if arr.size < 2:
            raise SignalError(f"signal needs at least 2 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise SignalError("signal contains non-finite samples")
        rate = float(self.sample_rate_hz)
        if not (rate > 0 and math.isfinite(rate)):
            raise SignalError(f"sample_rate_hz must be positive, got {self.sample_rate_hz!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.label == other.label
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic event instance.

    ``shape_params`` may be empty (family defaults from ``SHAPE_PARAMS``) or
    give exactly one value per named parameter of the family.
    """

    class_id: int
    base_shape: str
    shape_params: tuple[float, ...] = field(default_factory=tuple)
    scale_factor: float = 1.0
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape_params", tuple(float(v) for v in self.shape_params))
        if not self.scale_factor > 0:
            raise SignalError(f"scale_factor must be > 0, got {self.scale_factor}")
        if not self.noise_std >= 0:
            raise SignalError(f"noise_std must be >= 0, got {self.noise_std}")

    def resolved_params(self) -> tuple[float, ...]:
        if self.base_shape not in SHAPE_PARAMS:
            raise SignalError(f"unknown base_shape {self.base_shape!r}")
        names, defaults = SHAPE_PARAMS[self.base_shape]
        if not self.shape_params:
            return defaults
        if len(self.shape_params) != len(names):
            raise SignalError(
                f"{self.base_shape} takes {len(names)} shape_params {names}, "
                f"got {len(self.shape_params)}"
            )
        return self.shape_params


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise SignalError(f"line {lineno}: cannot parse {token!r} as a number") from None
    if not math.isfinite(value):
        raise SignalError(f"line {lineno}: non-finite value {token!r}")
    return value


def _is_header(tokens: Sequence[str]) -> bool:
    lowered = [t.strip().lower() for t in tokens]
    return lowered in (["time", "value"], ["value"])


def load_signal_csv(source: IO[bytes] | IO[str] | bytes | str, sample_rate_hz: float = 1.0,
                    label: str | None = None) -> Signal:
    """Parse a one- or two-column sample file.

    ``source`` is a binary/text stream or raw bytes/str content. In the
    two-column ``time,value`` form the sample rate is inferred from the time
    column and ``sample_rate_hz`` is ignored.
    """
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw

    times: list[float] = []
    values: list[float] = []
    ncols = None
    seen_data = False
    for lineno, line in enumerate(io.StringIO(text, newline=None), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t.strip() for t in line.split(",")]
        if not seen_data and _is_header(tokens):
            seen_data = True
            continue
        seen_data = True
        if len(tokens) not in (1, 2):
            raise SignalError(f"line {lineno}: expected 1 or 2 columns, got {len(tokens)}")
        if ncols is None:
            ncols = len(tokens)
        elif len(tokens) != ncols:
            raise SignalError(f"line {lineno}: expected {ncols} columns, got {len(tokens)}")
        if ncols == 2:
            times.append(_parse_float(tokens[0], lineno))
        values.append(_parse_float(tokens[-1], lineno))

    if len(values) < 2:
        raise SignalError(f"need at least 2 samples, got {len(values)}")
    rate = float(sample_rate_hz)
    if ncols == 2:
        t = np.asarray(times)
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise SignalError("time column must be strictly increasing")
        mean_step = (t[-1] - t[0]) / (t.size - 1)
        if np.any(np.abs(steps - mean_step) > CSV_UNIFORM_RTOL * mean_step):
            raise SignalError("non-uniform time spacing")
        rate = 1.0 / mean_step
    return Signal(np.asarray(values), rate, label)


def dumps_signal_csv(signal: Signal, with_time: bool = False) -> str:
    """Serialize at 17 significant digits (round-trips bit-exactly)."""
    if with_time:
        dt = 1.0 / signal.sample_rate_hz
        lines = [f"{i * dt:.17g},{v:.17g}" for i, v in enumerate(signal.samples)]
    else:
        lines = [f"{v:.17g}" for v in signal.samples]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Resampling
# --------------------------------------------------------------------------

def resample_linear(signal: Signal, factor: float) -> Signal:
    """Dilate ``signal`` in time by ``factor`` (output length floor(n*factor)).

    Output sample i is the piecewise-linear interpolant at position i/factor.
    Positions past the last sample continue the final segment linearly.
    """
    if not factor > 0:
        raise SignalError(f"factor must be > 0, got {factor}")
    x = signal.samples
    n = x.size
    n_out = int(math.floor(n * factor))
    if n_out < 2:
        raise SignalError(f"resampled length {n_out} < 2")
    pos = np.arange(n_out, dtype=np.float64) / factor
    left = np.minimum(np.floor(pos).astype(np.int64), n - 2)
    frac = pos - left
    out = x[left] + frac * (x[left + 1] - x[left])
    return Signal(out, signal.sample_rate_hz, signal.label)


# --------------------------------------------------------------------------
# Synthetic events
# --------------------------------------------------------------------------

def _check_fraction(value: float, name: str) -> None:
    if not 0.0 < value < 1.0:
        raise SignalError(f"{name} must lie in (0, 1), got {value}")


def _check_count(value: float, name: str) -> int:
    if value < 1 or value != int(value):
        raise SignalError(f"{name} must be a positive integer, got {value}")
    return int(value)


def _height_pattern(count: int) -> np.ndarray:
    """Deterministic, non-repeating relative heights in [0.55, 1]."""
    j = np.arange(count)
    return 0.55 + 0.45 * np.abs(np.cos(1.3 * j + 0.4))


def _knots(shape: str, params: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints (position in [0, 1], value) of a piecewise-linear motif."""
    if shape == "bump_train":
        count, amp, rise = params
        n = _check_count(count, "n_bumps")
        _check_fraction(rise, "rise_fraction")
        h = amp * _height_pattern(n)
        u = [0.0]
        v = [0.0]
        for j in range(n):
            u += [(j + rise) / n, (j + 1) / n]
            v += [h[j], 0.0]
        return np.array(u), np.array(v)
    if shape == "step_ramp":
        count, amp, rise = params
        n = _check_count(count, "n_steps")
        _check_fraction(rise, "rise_fraction")
        h = amp * _height_pattern(n + 1)
        base = 0.3 * amp * np.arange(n + 1) / n
        u = [0.0]
        v = [base[0]]
        for j in range(n):
            u += [(j + rise) / n, (j + 1) / n]
            v += [base[j] + h[j], base[j + 1]]
        return np.array(u), np.array(v)
    if shape == "damped_oscillation":
        count, amp, decay, rise = params
        n = _check_count(count, "n_cycles")
        _check_fraction(rise, "rise_fraction")
        if not decay > 0:
            raise SignalError("decay_lengths must be > 0")
        u = [0.0]
        for j in range(n):
            u += [(j + rise) / n, (j + 1) / n]
        u = np.array(u)
        env = amp * (0.4 + 0.6 * np.exp(-(u / decay) ** 2)) * _height_pattern(u.size)
        sign = np.where(np.arange(u.size) % 2 == 1, 1.0, -1.0)
        return u, sign * env
    if shape == "chirp_burst":
        f0, f1, amp = params
        if not (f0 > 0 and f1 > 0):
            raise SignalError("chirp cycle counts must be > 0")
        # phase(u) = f0 u + (f1 - f0) u^2 / 2; breakpoints every half cycle
        total = 0.5 * (f0 + f1)
        half_cycles = np.arange(0.0, 2.0 * total + 1e-12, 1.0) / 2.0
        if f1 == f0:
            u = half_cycles / f0
        else:
            a = 0.5 * (f1 - f0)
            u = (-f0 + np.sqrt(f0 * f0 + 4.0 * a * half_cycles)) / (2.0 * a)
        u = np.append(u[u < 1.0], 1.0)
        v = amp * _height_pattern(u.size) * np.where(np.arange(u.size) % 2 == 0, -1.0, 1.0)
        return u, v
    raise SignalError(f"unknown base_shape {shape!r}")


def base_waveform(shape: str, params: Sequence[float], n: int) -> np.ndarray:
    """Noise-free unit-scale waveform of ``n`` samples."""
    u_knots, v_knots = _knots(shape, params)
    return np.interp(np.arange(n, dtype=np.float64) / n, u_knots, v_knots)


def synth_event(spec: SynthSpec, duration_samples: int, sample_rate_hz: float = 100.0) -> Signal:
    """Generate one event: unit-scale waveform, dilated by ``scale_factor``, plus noise.

    Noise is i.i.d. Gaussian drawn from numpy's PCG64 generator seeded with
    ``spec.seed`` and added after dilation.
    """
    if duration_samples < 100:
        raise SignalError(f"duration_samples must be >= 100, got {duration_samples}")
    params = spec.resolved_params()
    base = Signal(base_waveform(spec.base_shape, params, int(duration_samples)), sample_rate_hz)
    clean = base if spec.scale_factor == 1.0 else resample_linear(base, spec.scale_factor)
    samples = clean.samples
    if spec.noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        samples = samples + rng.normal(0.0, spec.noise_std, samples.size)
    return Signal(samples, sample_rate_hz, label=str(spec.class_id))


def as_signal(samples: Signal | Iterable[float], sample_rate_hz: float = 1.0) -> Signal:
    if isinstance(samples, Signal):
        return samples
    return Signal(np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples),
                  sample_rate_hz)


CLASS_FAMILIES = ("bump_train", "step_ramp", "damped_oscillation", "chirp_burst")
DEFAULT_DURATION = 1200


def class_spec_template(class_id: int) -> tuple[str, tuple[float, ...]]:
    """Shape family and parameters of synthetic class ``class_id``.

    The first four classes use the family defaults; later ones cycle the
    families with one extra cycle per lap.
    """
    family = CLASS_FAMILIES[class_id % len(CLASS_FAMILIES)]
    params = list(SHAPE_PARAMS[family][1])
    params[0] += class_id // len(CLASS_FAMILIES)
    return family, tuple(params)


def synth_dataset(n_classes: int, n_instances: int, scale_min: float, scale_max: float,
                  noise_std: float = 0.05, seed: int = 42,
                  duration_samples: int = DEFAULT_DURATION) -> list[tuple[SynthSpec, Signal]]:
    """Seeded multi-scale dataset: instance scales drawn uniformly in [scale_min, scale_max]."""
    if n_classes < 1 or n_instances < 1:
        raise SignalError("need at least one class and one instance")
    if not 0 < scale_min <= scale_max:
        raise SignalError(f"bad scale range [{scale_min}, {scale_max}]")
    root = np.random.SeedSequence(seed)
    scale_rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
    noise_seeds = root.generate_state(n_classes * n_instances, dtype=np.uint64)
    out = []
    for c in range(n_classes):
        family, params = class_spec_template(c)
        for i in range(n_instances):
            spec = SynthSpec(
                class_id=c,
                base_shape=family,
                shape_params=params,
                scale_factor=float(scale_rng.uniform(scale_min, scale_max)),
                noise_std=noise_std,
                seed=int(noise_seeds[c * n_instances + i]),
            )
            out.append((spec, synth_event(spec, duration_samples)))
    return out
