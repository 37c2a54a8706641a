import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from viewmix.io import synthetic_cifar10_bytes, synthetic_dataset

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# lines appended by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset():
    return synthetic_dataset(16, 32, seed=3)


@pytest.fixture(scope="session")
def cifar_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cifar") / "data_batch_test.bin"
    path.write_bytes(synthetic_cifar10_bytes(40, seed=5))
    return path


def real_cifar_batch() -> Path | None:
    """A genuine CIFAR-10 batch file, if one is available on this machine."""
    candidates = [os.environ.get("VIEWMIX_CIFAR10_BATCH", "")]
    root = Path(__file__).resolve().parent.parent
    candidates += [str(root / "data" / "cifar-10-batches-bin" / "data_batch_1.bin")]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None
