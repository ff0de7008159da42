import importlib

import pytest

from dpmst._backend import available_backends, get_kernels


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Run a test once per kernel backend by patching the modules that use it."""
    k = get_kernels(request.param)
    for name in ("dpmst.graph", "dpmst.pamst"):
        monkeypatch.setattr(importlib.import_module(name), "kernels", k)
    return request.param


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record ``(number, passed, detail)`` for the end-of-run acceptance summary."""
    def record(number: int, passed: bool, detail: str) -> bool:
        request.config.stash.setdefault(ACCEPTANCE, {})[number] = (passed, detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
