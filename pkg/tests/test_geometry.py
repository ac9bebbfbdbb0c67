import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from localph.errors import ParameterError
from localph.geometry import (
    AnnulusQuery,
    GroundTruth,
    PointCloud,
    SpatialIndex,
    annulus_neighbors,
    brute_force_annulus,
    build_spatial_index,
    pairwise_distances,
)

coords = st.floats(-10, 10, allow_nan=False, width=64)


def test_annulus_query_rejects_bad_radii():
    with pytest.raises(ParameterError):
        AnnulusQuery(0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        AnnulusQuery(0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        AnnulusQuery(0, 2.0, 1.0)


def test_point_cloud_validation():
    with pytest.raises(Exception):
        PointCloud(np.array([[0.0, np.nan]]))
    with pytest.raises(Exception):
        PointCloud(np.zeros(3))
    cloud = PointCloud(np.zeros((4, 3)))
    assert cloud.ambient_dim == 3 and len(cloud) == 4


def test_annulus_is_closed_and_excludes_center():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.5, 0.0], [2.5, 0.0]])
    cloud = PointCloud(pts)
    got = annulus_neighbors(cloud, build_spatial_index(cloud), AnnulusQuery(0, 1.0, 2.0))
    assert got.tolist() == [1, 2]


def test_bad_center_index():
    cloud = PointCloud(np.zeros((3, 2)))
    with pytest.raises(IndexError):
        annulus_neighbors(cloud, build_spatial_index(cloud), AnnulusQuery(7, 0.1, 0.2))


@given(
    arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 4)), elements=coords),
    st.floats(0.1, 3.0),
    st.floats(0.1, 3.0),
    st.data(),
)
def test_annulus_matches_brute_force(pts, a, b, data):
    r, s = min(a, b), max(a, b) + 0.05
    y = data.draw(st.integers(0, len(pts) - 1))
    cloud = PointCloud(pts)
    got = annulus_neighbors(cloud, build_spatial_index(cloud), AnnulusQuery(y, r, s))
    assert got.tolist() == brute_force_annulus(pts, y, r, s).tolist()


def test_high_dimensional_cloud_uses_scan(rng):
    pts = rng.normal(size=(200, 24))
    idx = SpatialIndex(pts)
    cloud = PointCloud(pts)
    for y in (0, 17, 199):
        got = annulus_neighbors(cloud, idx, AnnulusQuery(y, 5.0, 7.0))
        assert got.tolist() == brute_force_annulus(pts, y, 5.0, 7.0).tolist()


@given(arrays(np.float64, st.tuples(st.integers(1, 15), st.integers(1, 4)), elements=coords))
def test_pairwise_distances_symmetric(pts):
    d = pairwise_distances(pts)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    i, j = np.triu_indices(len(pts), 1)
    assert np.allclose(d[i, j], np.linalg.norm(pts[i] - pts[j], axis=1))


def test_ground_truth_proximity():
    gt = GroundTruth(distance=np.array([0.0, 0.5, 2.0]), stratum_id=np.array([0, 1, 0]), proximity_radius=0.5)
    assert gt.near_singularity.tolist() == [True, True, False]
    assert gt.with_proximity(0.1).near_singularity.tolist() == [True, False, False]
    assert gt[1].distance_to_singular_locus == 0.5
    assert len(gt.subset([2])) == 1
