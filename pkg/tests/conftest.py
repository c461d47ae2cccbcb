from pathlib import Path

import pytest

from bianchi_modsym.coeffs import FormSpec
from bianchi_modsym.verify import DEFAULT_FORM, default_cache_dir


@pytest.fixture(scope="session")
def cache_dir() -> Path:
    """Persistent cache so the coefficient table and symbols are built once per machine."""
    path = default_cache_dir()
    path.mkdir(parents=True, exist_ok=True)
    return path


@pytest.fixture(scope="session")
def form(cache_dir) -> FormSpec:
    f = FormSpec.from_dict(DEFAULT_FORM)
    f.load(cache_dir)
    return f


@pytest.fixture(scope="session")
def small_form(cache_dir) -> FormSpec:
    """Same form with a short table, for tests that only probe large heights."""
    f = FormSpec.from_dict({**DEFAULT_FORM, "norm_bound": 20000})
    f.load(cache_dir)
    return f


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.VERDICTS):
            terminalreporter.write_line(test_acceptance.VERDICTS[k])
