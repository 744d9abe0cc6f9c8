import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "tests" / "golden"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


@pytest.fixture(scope="session")
def reference_net():
    from percept.models import build_reference_cnn
    return build_reference_cnn(7)


@pytest.fixture(scope="session")
def planted_net():
    from percept.models import build_reference_cnn
    return build_reference_cnn(7, planted=True)


@pytest.fixture(scope="session")
def digit_image():
    from percept.imageio import read_image
    return read_image(FIXTURES / "digit0.pgm").array


@pytest.fixture(scope="session")
def adult_dataset():
    from percept.data import ingest_csv
    return ingest_csv(FIXTURES / "adult.csv")


def seeded_input(seed, low=0.2, high=1.0, shape=(1, 16, 16)):
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=shape).astype(np.float32)


@pytest.fixture
def make_input():
    return seeded_input
