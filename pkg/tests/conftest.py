from __future__ import annotations

import numpy as np
import pytest

from geomwalk.point_process import PointConfig, Window


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_config(points, pad: float = 1.0) -> PointConfig:
    """Wrap raw coordinates in a config whose window covers them."""
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0) - pad
    hi = pts.max(axis=0) + pad
    return PointConfig(Window(tuple(lo), tuple(hi)), pts)
