import os

import pytest
from hypothesis import HealthCheck, settings

from conxsense import kernels, synth
from conxsense.config import PipelineConfig
from conxsense.pipeline import build_profile

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def commuter():
    return synth.generate_scenario(synth.commuter(days=14, seed=42))


@pytest.fixture(scope="session")
def commuter_profile(commuter):
    return build_profile(commuter.trace, PipelineConfig())


_KERNEL_FUNCS = ("gps_segments", "wifi_segments", "snapshot_starts", "chain_runs", "jaccard_sorted",
                 "jaccard_to_set")


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = kernels.available_backends()[request.param]
    for name in _KERNEL_FUNCS:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
