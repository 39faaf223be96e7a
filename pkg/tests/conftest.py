from pathlib import Path

import numpy as np
import pytest

from cqlab import channels

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def uniform():
    return (0.5, 0.5)


@pytest.fixture
def distinguishable():
    return channels.distinguishable_qubit()


@pytest.fixture
def hadamard():
    return channels.hadamard_rotated()


@pytest.fixture
def zero_plus():
    return channels.zero_plus_qubit()


@pytest.fixture
def wiretap():
    return channels.degraded_wiretap()


@pytest.fixture
def wiretap_rotated():
    return channels.degraded_wiretap_rotated()


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR
