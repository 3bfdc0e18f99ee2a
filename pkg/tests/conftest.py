import time

import numpy as np
import pytest

from udcscatter import kernels
from udcscatter.scenes import random_hdr_scene

_ACCEPTANCE = []


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    impl = kernels.get_backend(request.param)
    for name in ("random_u64", "uniforms", "standard_normals", "conv2d_wrap"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scene():
    return random_hdr_scene(0, 64, 64)


@pytest.fixture
def timer():
    class Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start

    return Timer


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        _ACCEPTANCE.append((marker.args[0], rep.outcome, rep.duration))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, duration in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  ({duration:.2f} s)")
