import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ring_band
from localph.datasets import GeneratorSpec, generate
from localph.detector import (
    BOUNDARY,
    INTERSECTION,
    LABELS,
    MANIFOLD,
    SPARSE_FLAG,
    DetectorConfig,
    Partition,
    classify_point,
    detect,
    evaluate,
    label_for,
    local_svd_score,
    local_svd_scores,
)
from localph.errors import DataIntegrityError, ParameterError
from localph.geometry import AnnulusQuery, GroundTruth, PointCloud, annulus_neighbors, build_spatial_index
from localph.persistence import count_long_bars, rips_barcode


def centred(band):
    pts = np.unique(np.vstack([[0.0, 0.0, 0.0], band]).round(12), axis=0)
    return PointCloud(pts), int(np.flatnonzero(np.all(pts == 0, axis=1))[0])


@given(st.integers(0, 50))
def test_label_rule(n):
    assert label_for(n) == (BOUNDARY if n == 0 else MANIFOLD if n == 1 else INTERSECTION)


def test_label_rule_rejects_negative():
    with pytest.raises(ValueError):
        label_for(-1)


def test_config_defaults():
    cfg = DetectorConfig(1.5, 2.0)
    assert (cfg.k, cfg.t_max, cfg.max_dim, cfg.min_annulus_size) == (2, 4.0, 2, 3)
    assert cfg.degree == 1 and cfg.threshold == 0.5


def test_config_swaps_radii(caplog):
    with caplog.at_level(logging.WARNING):
        cfg = DetectorConfig(2.0, 1.5)
    assert (cfg.r, cfg.s) == (1.5, 2.0)
    assert "swap" in caplog.text.lower()


@pytest.mark.parametrize("kw", [dict(r=0, s=1), dict(r=1, s=1), dict(r=0.1, s=0.2, k=0), dict(r=0.1, s=0.2, threads=0),
                                dict(r=0.1, s=0.2, k=1), dict(r=0.1, s=0.2, t_max=0.0),
                                dict(r=0.1, s=0.2, k=3, max_dim=2)])
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        DetectorConfig(**kw)


# synthetic annuli with known answers -----------------------------------------


CFG = DetectorConfig(0.75, 1.25, k=2)


def test_full_band_is_manifold():
    cloud, y = centred(ring_band())
    assert classify_point(cloud, None, y, CFG)[:2] == (MANIFOLD, 1)


def test_half_band_is_boundary():
    cloud, y = centred(ring_band(n_theta=13, theta_range=(0, np.pi)))
    assert classify_point(cloud, None, y, CFG)[:2] == (BOUNDARY, 0)


def test_crossing_bands_are_intersection():
    cloud, y = centred(np.vstack([ring_band(), ring_band(plane="xz")]))
    assert classify_point(cloud, None, y, CFG)[:2] == (INTERSECTION, 3)


def test_classify_agrees_with_explicit_barcode(rng):
    cloud = generate(GeneratorSpec("hemisphere_plane", count=800, seed=5))
    cfg = DetectorConfig(0.3, 0.45)
    index = build_spatial_index(cloud)
    for y in rng.choice(len(cloud), 15, replace=False):
        nbrs = annulus_neighbors(cloud, index, AnnulusQuery(int(y), cfg.r, cfg.s))
        bc = rips_barcode(cloud.points[nbrs], 1, cfg.t_max, max_dim=2)
        want = count_long_bars(bc, 1, cfg.threshold, cfg.t_max)
        got = classify_point(cloud, index, int(y), cfg)
        assert got[1] == want and got[2] == len(nbrs)


def test_sparse_annulus_flagged():
    cloud = PointCloud(np.array([[0.0, 0, 0], [1.0, 0, 0], [5.0, 0, 0]]))
    part = detect(cloud, DetectorConfig(0.5, 1.5))
    assert part.labels[0] == BOUNDARY and part.flags[0] == SPARSE_FLAG
    assert part.annulus_size[0] == 1


def test_circle_is_all_boundary_for_surfaces():
    # a 1-manifold's annulus is two arcs: no H1 bar
    cloud = generate(GeneratorSpec("circle", count=200, seed=0))
    part = detect(cloud, DetectorConfig(0.1, 0.2, k=2))
    assert set(part.labels) == {BOUNDARY}


def test_sphere_interior_is_manifold():
    cloud = generate(GeneratorSpec("sphere", count=1500, seed=1))
    part = detect(cloud, DetectorConfig(0.3, 0.45))
    assert np.mean(part.labels == MANIFOLD) > 0.95


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_label_stays_intersection_along_the_line(seed):
    base = generate(GeneratorSpec("planes", count=4000, seed=seed)).points
    cfg = DetectorConfig(0.13, 0.15)
    for x in np.linspace(-0.5 + cfg.s, 0.5 - cfg.s, 29):
        cloud = PointCloud(np.vstack([base, [x, 0.0, 0.0]]))
        assert classify_point(cloud, None, len(base), cfg)[0] == INTERSECTION


# detect plumbing ----------------------------------------------------------------


def test_threads_do_not_change_output():
    cloud = generate(GeneratorSpec("planes", count=600, seed=2))
    one = detect(cloud, DetectorConfig(0.13, 0.15, threads=1))
    many = detect(cloud, DetectorConfig(0.13, 0.15, threads=5))
    assert one.to_csv() == many.to_csv()


def test_timings_recorded():
    cloud = generate(GeneratorSpec("planes", count=100))
    t = {}
    detect(cloud, DetectorConfig(0.13, 0.15), timings=t)
    assert set(t) >= {"index", "classify"} and all(v >= 0 for v in t.values())


def test_empty_cloud():
    part = detect(PointCloud(np.empty((0, 3))), DetectorConfig(0.1, 0.2))
    assert len(part) == 0 and part.to_csv().count("\n") == 1


def test_partition_csv_round_trip():
    part = Partition([MANIFOLD, BOUNDARY, INTERSECTION], [1, 0, 2], [10, 2, 30], ["", SPARSE_FLAG, ""], [4, 7, 9])
    back = Partition.from_csv(part.to_csv())
    assert back.to_csv() == part.to_csv()
    assert back.indices(INTERSECTION).tolist() == [9]
    assert part.counts() == {BOUNDARY: 1, MANIFOLD: 1, INTERSECTION: 1}


@pytest.mark.parametrize("text", ["a,b\n", "index,label,n_long_bars,annulus_size,flags\n0,weird,1,1,\n",
                                  "index,label,n_long_bars,annulus_size,flags\n0,manifold,1\n",
                                  "index,label,n_long_bars,annulus_size,flags\nx,manifold,1,1,\n"])
def test_partition_csv_rejects_malformed(text):
    with pytest.raises(DataIntegrityError):
        Partition.from_csv(text)


def test_partition_column_lengths():
    with pytest.raises(DataIntegrityError):
        Partition([MANIFOLD], [1, 2], [3])


# local SVD score --------------------------------------------------------------


def test_svd_score_plane_is_one(rng):
    pts = np.column_stack([rng.uniform(-1, 1, (400, 2)), np.zeros(400)])
    pts[0] = 0
    assert local_svd_score(PointCloud(pts), 0, 0.2, 0.6, 2) == pytest.approx(1.0)


def test_svd_score_circle_is_half():
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    pts = np.vstack([[0.0, 0.0], np.column_stack([np.cos(t), np.sin(t)])])
    assert local_svd_score(PointCloud(pts), 0, 0.9, 1.1, 1) == pytest.approx(0.5)


def test_svd_scores_flag_empty_annuli():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [10.5, 0.0]])
    scores, empty = local_svd_scores(PointCloud(pts), 0.1, 1.0, 1)
    assert empty.tolist() == [True, False, False]
    assert scores[0] == 0.0


# evaluation -------------------------------------------------------------------


def _truth_cloud(distance, rim=None):
    distance = np.asarray(distance, float)
    gt = GroundTruth(distance, np.zeros(len(distance), np.int64), 0.1,
                     np.full(len(distance), np.inf) if rim is None else np.asarray(rim, float))
    return PointCloud(np.zeros((len(distance), 2)), gt)


def test_evaluate_confusion():
    cloud = _truth_cloud([0.0, 0.05, 1.0, 1.0], rim=[5, 5, 5, 0.01])
    part = Partition([INTERSECTION, MANIFOLD, MANIFOLD, BOUNDARY], [2, 1, 1, 0], [5] * 4)
    rep = evaluate(part, cloud, 0.1, 0.05)
    assert rep.confusion.tolist() == [[1, 0, 0], [0, 1, 0], [0, 1, 1]]
    assert rep.recall[INTERSECTION] == 0.5
    assert rep.precision[INTERSECTION] == 1.0
    assert rep.precision[MANIFOLD] == 0.5
    assert rep.total == 4


def test_evaluate_subset_partition():
    cloud = _truth_cloud([0.0, 1.0, 0.0])
    part = Partition([INTERSECTION], [2], [5], point_index=[2])
    assert evaluate(part, cloud, 0.1).recall[INTERSECTION] == 1.0
    with pytest.raises(DataIntegrityError):
        evaluate(Partition([MANIFOLD], [1], [1], point_index=[9]), cloud, 0.1)


def test_random_labels_give_prior_precision(rng):
    n = 4000
    near = rng.uniform(size=n) < 0.2
    cloud = _truth_cloud(np.where(near, 0.0, 1.0))
    labels = rng.choice(LABELS, size=n)
    rep = evaluate(Partition(labels, np.zeros(n), np.zeros(n)), cloud, 0.1)
    assert abs(rep.precision[INTERSECTION] - near.mean()) < 0.1
