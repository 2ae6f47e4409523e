"""
Pytest configuration and shared fixtures.

This module provides:
1. Automatic loading of .env.test configuration
2. A settings reset around every test so GRIDSHIFT_* overrides never leak
3. Small shared datasets and images
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

# Add project root to path for imports
_project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(_project_root))

# Load .env.test (lowest priority) - don't override existing env vars
_env_test_path = _project_root / ".env.test"
if _env_test_path.exists():
    load_dotenv(_env_test_path, override=False)

from gridshift.config.settings import reset_settings  # noqa: E402
from gridshift.models.imaging import ImageBuffer  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Drop cached settings before and after each test."""
    for key in list(os.environ):
        if key.startswith("GRIDSHIFT_") and key not in ("GRIDSHIFT_DATA_PATH",):
            monkeypatch.delenv(key, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def two_blobs():
    """Two tight, well separated 2-D groups of 40 points each."""
    rng = np.random.default_rng(7)
    a = rng.normal(0.2, 0.01, size=(40, 2))
    b = rng.normal(0.8, 0.01, size=(40, 2))
    return np.vstack([a, b]), np.repeat([0, 1], 40)


@pytest.fixture
def quadrant_image():
    """8x8 RGB image with four solid quadrants."""
    pixels = np.zeros((8, 8, 3), dtype=np.uint8)
    pixels[:4, :4] = (255, 0, 0)
    pixels[:4, 4:] = (0, 255, 0)
    pixels[4:, :4] = (0, 0, 255)
    pixels[4:, 4:] = (255, 255, 0)
    return ImageBuffer(pixels)


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "slow: million-point acceptance runs")
