import numpy as np
import pytest

from ringfix.geometry import FanBeamGeometry, desk_geometry


@pytest.fixture(scope="session")
def small_geom():
    """64-pixel geometry used by fast operator tests."""
    return desk_geometry(image_size=64, num_views=90, num_detectors=95)


@pytest.fixture(scope="session")
def tiny_geom():
    """Minimal geometry for brute-force comparisons (n=8, V=6, U=9)."""
    return desk_geometry(image_size=8, num_views=6, num_detectors=9)


def area_sampled_disk(n, radius_frac, value, supersample=8):
    """Centered disk with subpixel area sampling (smooth, rotation-fair)."""
    ss = supersample
    yy, xx = np.mgrid[0 : n * ss, 0 : n * ss]
    half = (n * ss - 1) / 2
    rad = radius_frac * n / 2 * ss
    fine = ((xx - half) ** 2 + (yy - half) ** 2 <= rad**2).astype(float)
    return fine.reshape(n, ss, n, ss).mean(axis=(1, 3)) * value


def hard_disk(n, radius_frac, value):
    """Centered disk sampled at pixel centers."""
    yy, xx = np.mgrid[0:n, 0:n]
    half = (n - 1) / 2
    rad = radius_frac * n / 2
    return (((xx - half) ** 2 + (yy - half) ** 2) <= rad**2).astype(float) * value
