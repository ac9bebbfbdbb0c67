"""Point clouds, Euclidean distances and annulus range queries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataIntegrityError, ParameterError

#: Above this ambient dimension the index falls back to a linear scan.
KDTREE_MAX_DIM = 8


@dataclass(frozen=True)
class GroundTruthLabel:
    near_singularity: bool
    distance_to_singular_locus: float
    stratum_id: int
    distance_to_boundary: float = np.inf


@dataclass
class GroundTruth:
    """Column-oriented ground truth for a generated cloud.

    ``near_singularity[i]`` holds iff ``distance[i] <= proximity_radius``.
    ``boundary_distance`` is the distance to the rim of the generating surface
    (``inf`` for closed surfaces).
    """

    distance: np.ndarray
    stratum_id: np.ndarray
    proximity_radius: float
    boundary_distance: np.ndarray | None = None

    def __post_init__(self):
        self.distance = np.asarray(self.distance, dtype=float)
        self.stratum_id = np.asarray(self.stratum_id, dtype=np.int64)
        if self.boundary_distance is None:
            self.boundary_distance = np.full(len(self.distance), np.inf)
        else:
            self.boundary_distance = np.asarray(self.boundary_distance, dtype=float)
        if not (len(self.distance) == len(self.stratum_id) == len(self.boundary_distance)):
            raise DataIntegrityError("ground truth columns have different lengths")

    @property
    def near_singularity(self) -> np.ndarray:
        return self.distance <= self.proximity_radius

    def __len__(self):
        return len(self.distance)

    def __getitem__(self, i) -> GroundTruthLabel:
        return GroundTruthLabel(
            bool(self.distance[i] <= self.proximity_radius),
            float(self.distance[i]),
            int(self.stratum_id[i]),
            float(self.boundary_distance[i]),
        )

    def subset(self, indices) -> "GroundTruth":
        indices = np.asarray(indices, dtype=np.int64)
        return GroundTruth(
            self.distance[indices],
            self.stratum_id[indices],
            self.proximity_radius,
            self.boundary_distance[indices],
        )

    def with_proximity(self, radius: float) -> "GroundTruth":
        return GroundTruth(self.distance, self.stratum_id, radius, self.boundary_distance)


@dataclass
class PointCloud:
    points: np.ndarray
    ground_truth: GroundTruth | None = None
    ambient_dim: int = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 1)
        if pts.ndim != 2:
            raise DataIntegrityError(f"points must be a 2-d array, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise DataIntegrityError("ambient dimension must be positive")
        if not np.all(np.isfinite(pts)):
            raise DataIntegrityError("point coordinates must be finite")
        if self.ground_truth is not None and len(self.ground_truth) != len(pts):
            raise DataIntegrityError(
                f"ground truth has {len(self.ground_truth)} rows for {len(pts)} points"
            )
        self.points = np.ascontiguousarray(pts)
        self.ambient_dim = pts.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def subset(self, indices) -> "PointCloud":
        indices = np.asarray(indices, dtype=np.int64)
        gt = None if self.ground_truth is None else self.ground_truth.subset(indices)
        return PointCloud(self.points[indices], gt)


@dataclass(frozen=True)
class AnnulusQuery:
    center_index: int
    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ParameterError(
                f"annulus radii must satisfy 0 < r < s, got r={self.inner_radius}, "
                f"s={self.outer_radius}"
            )


def distances_from(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix, exactly symmetric with a zero diagonal."""
    points = np.asarray(points, dtype=np.float64)
    diff = points[:, None, :] - points[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # the subtraction is antisymmetric, so d is already symmetric; keep it exact
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


class SpatialIndex:
    """Ball-query index over an immutable point array.

    Uses a k-d tree up to :data:`KDTREE_MAX_DIM` dimensions and a linear
    scan above. Candidate sets from the tree are re-filtered with
    :func:`distances_from`, so both modes return identical results.
    """

    def __init__(self, points: np.ndarray):
        self.points = np.asarray(points, dtype=np.float64)
        n, dim = self.points.shape
        self.kind = "kdtree" if (n > 0 and dim <= KDTREE_MAX_DIM) else "brute"
        self._tree = cKDTree(self.points) if self.kind == "kdtree" else None

    def __len__(self):
        return self.points.shape[0]

    def ball(self, center: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Indices (ascending) and distances of points with ``dist <= radius``."""
        if len(self) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        if self._tree is not None:
            pad = radius * 1e-9 + 1e-12
            cand = np.asarray(self._tree.query_ball_point(center, radius + pad), dtype=np.int64)
            cand.sort()
        else:
            cand = np.arange(len(self), dtype=np.int64)
        d = distances_from(self.points[cand], center)
        keep = d <= radius
        return cand[keep], d[keep]


def build_spatial_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud.points)


def annulus_neighbors(cloud: PointCloud, index: SpatialIndex, q: AnnulusQuery) -> np.ndarray:
    """Indices ``i != center`` with ``r <= |p_i - p_center| <= s``, ascending."""
    n = len(cloud)
    if not 0 <= q.center_index < n:
        raise IndexError(f"center index {q.center_index} out of range for {n} points")
    idx, d = index.ball(cloud.points[q.center_index], q.outer_radius)
    keep = (d >= q.inner_radius) & (idx != q.center_index)
    return idx[keep]


def brute_force_annulus(points: np.ndarray, center_index: int, r: float, s: float) -> np.ndarray:
    """Reference scan used to check :func:`annulus_neighbors`."""
    d = np.linalg.norm(points - points[center_index], axis=1)
    mask = (d >= r) & (d <= s)
    mask[center_index] = False
    return np.flatnonzero(mask)
