import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quishing import dataset, synthetic  # noqa: E402

# Filled by test_acceptance.py; printed at the end of the run.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def small_set():
    """600 synthetic samples encoded to QR features."""
    return dataset.build_feature_matrix(synthetic.generate_records(600, seed=11))


@pytest.fixture(scope="session")
def small_split(small_set):
    return dataset.split_train_test(small_set, dataset.SplitSpec(seed=5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
