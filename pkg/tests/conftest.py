import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE = pytest.StashKey[list]()
REPO = Path(__file__).resolve().parents[1]


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def gate(request):
    """Record a one-line pass/fail verdict for an acceptance criterion."""
    def record(label, ok, detail=""):
        request.config.stash[ACCEPTANCE].append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok
    return record


@pytest.fixture(scope="session")
def planted():
    from sddsafe.synthetic import planted_windows
    return planted_windows(n_per=30, w=30, noise=0.05, seed=0)


@pytest.fixture(scope="session")
def planted_model(planted):
    from sddsafe.cluster import kmeans_dtw
    X, _ = planted
    return kmeans_dtw(X, 3, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
