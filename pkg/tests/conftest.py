import functools

import numpy as np
import pytest

from frenetgeo.presets import load_preset


@functools.lru_cache(maxsize=None)
def _cached(name, items):
    return load_preset(name, dict(items))


def preset(name, **params):
    """Cached preset descriptor (presets are immutable)."""
    return _cached(name, tuple(sorted(params.items())))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(mod.format_result(num))
