import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ring_band(n_theta=24, n_rad=3, r=0.8, s=1.2, theta_range=(0.0, 2 * np.pi), plane="xy"):
    """Regular polar sample of a planar annulus (or a sector of one) in R^3."""
    lo, hi = theta_range
    full = np.isclose(hi - lo, 2 * np.pi)
    theta = np.linspace(lo, hi, n_theta, endpoint=not full)
    rad = np.linspace(r, s, n_rad)
    tt, rr = np.meshgrid(theta, rad)
    u, v = (rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()
    z = np.zeros_like(u)
    if plane == "xy":
        return np.column_stack([u, v, z])
    return np.column_stack([u, z, v])
