import shutil
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURE = ROOT / "fixtures" / "synthetic"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixture_copy(tmp_path):
    """A private copy of the bundled synthetic fixture (without prior outputs)."""
    dst = tmp_path / "fixture"
    shutil.copytree(FIXTURE, dst, ignore=shutil.ignore_patterns("out"))
    return dst
