import numpy as np
import pytest

from sicr import _backend, matching, scale_space
from sicr.signal import Signal, synth_dataset


@pytest.fixture(params=sorted(_backend.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per importable kernel backend."""
    mod = _backend.available_backends()[request.param]
    monkeypatch.setattr(scale_space, "kernels", mod)
    monkeypatch.setattr(matching, "kernels", mod)
    return request.param


@pytest.fixture(scope="session")
def small_dataset():
    """3 classes x 4 instances, seeded."""
    return synth_dataset(3, 4, 0.6, 1.6, 0.05, seed=7)


def noise_signal(seed, n=400):
    rng = np.random.default_rng(seed)
    return Signal(rng.normal(size=n))


ACCEPTANCE = []


def record_acceptance(number, name, passed, detail=""):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}"
    ACCEPTANCE.append(line + (f": {detail}" if detail else ""))
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
