from pathlib import Path

import numpy as np
import pytest

EXTRACTOR_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def media_dir():
    return EXTRACTOR_ROOT / "media"


@pytest.fixture
def golden_dir():
    return EXTRACTOR_ROOT / "golden"


@pytest.fixture
def media_paths(media_dir):
    return (media_dir / "clip_a.avi", media_dir / "clip_b.avi", media_dir / "still_c.png")
