"""Per-point classification by long bars of annulus barcodes.

Each point ``y`` is labelled from ``N_y``, the number of degree ``k-1``
intervals longer than ``s - r`` in the Rips barcode of its annulus
``{x : r <= |x - y| <= s}``: 0 means boundary, 1 manifold, 2 or more
intersection.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataIntegrityError, ParameterError
from .geometry import AnnulusQuery, PointCloud, SpatialIndex, annulus_neighbors, build_spatial_index, pairwise_distances
from .persistence import rips_long_bar_count

log = logging.getLogger(__name__)

BOUNDARY, MANIFOLD, INTERSECTION = "boundary", "manifold", "intersection"
LABELS = (BOUNDARY, MANIFOLD, INTERSECTION)
SPARSE_FLAG = "sparse_annulus"


def label_for(n_long_bars: int) -> str:
    if n_long_bars < 0:
        raise ValueError("long-bar count cannot be negative")
    return LABELS[min(n_long_bars, 2)]


@dataclass
class DetectorConfig:
    """Parameters of the detector.

    ``r > s`` is accepted and swapped with a warning; ``t_max``, ``max_dim``
    and ``min_annulus_size`` default to ``2s``, ``k`` and ``k + 1``.
    """

    r: float
    s: float
    k: int = 2
    t_max: float | None = None
    max_dim: int | None = None
    min_annulus_size: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.r > self.s:
            log.warning("inner radius %g exceeds outer radius %g; swapping", self.r, self.s)
            self.r, self.s = self.s, self.r
        if not 0 < self.r < self.s:
            raise ParameterError(f"need 0 < r < s, got r={self.r}, s={self.s}")
        if self.k < 2:
            raise ParameterError("intrinsic dimension k must be >= 2")
        if self.t_max is None:
            self.t_max = 2 * self.s
        if self.max_dim is None:
            self.max_dim = self.k
        if self.min_annulus_size is None:
            self.min_annulus_size = self.k + 1
        if not self.t_max > 0:
            raise ParameterError("t_max must be positive")
        if self.max_dim < self.k:
            raise ParameterError("max_dim must be >= k")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")

    @property
    def degree(self) -> int:
        return self.k - 1

    @property
    def threshold(self) -> float:
        return self.s - self.r

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Partition:
    """Detector output. ``point_index`` maps rows back to the input cloud."""

    labels: np.ndarray  # object array of label strings
    n_long_bars: np.ndarray
    annulus_size: np.ndarray
    flags: list = field(default_factory=list)
    point_index: np.ndarray | None = None

    def __len__(self):
        return len(self.labels)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=object)
        self.n_long_bars = np.asarray(self.n_long_bars, dtype=np.int64)
        self.annulus_size = np.asarray(self.annulus_size, dtype=np.int64)
        if not self.flags:
            self.flags = [""] * len(self.labels)
        if self.point_index is None:
            self.point_index = np.arange(len(self.labels), dtype=np.int64)
        self.point_index = np.asarray(self.point_index, dtype=np.int64)
        if not (len(self.labels) == len(self.n_long_bars) == len(self.annulus_size) == len(self.flags) == len(self.point_index)):
            raise DataIntegrityError("partition columns have different lengths")

    def indices(self, label: str) -> np.ndarray:
        """Input-cloud indices of points carrying ``label``."""
        return self.point_index[self.labels == label]

    def counts(self) -> dict:
        return {lab: int(np.sum(self.labels == lab)) for lab in LABELS}

    def to_csv(self) -> str:
        lines = ["index,label,n_long_bars,annulus_size,flags"]
        for i in range(len(self)):
            lines.append(
                f"{self.point_index[i]},{self.labels[i]},{self.n_long_bars[i]},{self.annulus_size[i]},{self.flags[i]}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Partition":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "index,label,n_long_bars,annulus_size,flags":
            raise DataIntegrityError("partition CSV header must be 'index,label,n_long_bars,annulus_size,flags'")
        rows = [ln.split(",") for ln in lines[1:] if ln.strip()]
        for lineno, r in enumerate(rows, start=2):
            if len(r) != 5:
                raise DataIntegrityError(f"line {lineno}: expected 5 fields, found {len(r)}")
            if r[1] not in LABELS:
                raise DataIntegrityError(f"line {lineno}: unknown label {r[1]!r}")
        try:
            return cls(
                [r[1] for r in rows],
                [int(r[2]) for r in rows],
                [int(r[3]) for r in rows],
                [r[4] for r in rows],
                [int(r[0]) for r in rows],
            )
        except ValueError as exc:
            raise DataIntegrityError(f"malformed partition CSV: {exc}") from None


def _classify(points: np.ndarray, index: SpatialIndex, y: int, cfg: DetectorConfig):
    q = AnnulusQuery(y, cfg.r, cfg.s)
    nbrs = annulus_neighbors_raw(points, index, q)
    size = len(nbrs)
    if size < cfg.min_annulus_size:
        return BOUNDARY, 0, size, SPARSE_FLAG
    n_long = rips_long_bar_count(pairwise_distances(points[nbrs]), cfg.degree, cfg.threshold, cfg.t_max, cfg.max_dim)
    return label_for(n_long), n_long, size, ""


def annulus_neighbors_raw(points, index, q):
    idx, d = index.ball(points[q.center_index], q.outer_radius)
    keep = (d >= q.inner_radius) & (idx != q.center_index)
    return idx[keep]


def classify_point(cloud: PointCloud, index: SpatialIndex | None, y: int, cfg: DetectorConfig):
    """Return ``(label, N_y, annulus_size)`` for point ``y``."""
    if index is None:
        index = build_spatial_index(cloud)
    if not 0 <= y < len(cloud):
        raise IndexError(f"point index {y} out of range for {len(cloud)} points")
    label, n_long, size, _ = _classify(cloud.points, index, y, cfg)
    return label, n_long, size


def detect(cloud: PointCloud, cfg: DetectorConfig, timings: dict | None = None) -> Partition:
    """Classify every point of ``cloud``; output does not depend on ``cfg.threads``."""
    t0 = time.perf_counter()
    index = build_spatial_index(cloud)
    t1 = time.perf_counter()
    n = len(cloud)
    labels = np.empty(n, dtype=object)
    counts = np.zeros(n, dtype=np.int64)
    sizes = np.zeros(n, dtype=np.int64)
    flags = [""] * n

    def run(chunk):
        for y in chunk:
            labels[y], counts[y], sizes[y], flags[y] = _classify(cloud.points, index, int(y), cfg)

    workers = min(cfg.threads, max(n, 1))
    if workers <= 1:
        run(range(n))
    else:
        # interleaved chunks balance dense and sparse regions; slots are disjoint
        chunks = [range(w, n, workers) for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run, c) for c in chunks]:
                fut.result()
    t2 = time.perf_counter()
    if timings is not None:
        timings["index"] = t1 - t0
        timings["classify"] = t2 - t1
    return Partition(labels, counts, sizes, flags)


def local_svd_score(cloud: PointCloud, y: int, r: float, s: float, k: int, index: SpatialIndex | None = None) -> float:
    """Fraction of annulus variance captured by its best ``k``-dimensional fit.

    Close to 1 where the annulus is locally flat and ``k``-dimensional;
    an empty annulus scores 0 (see :func:`local_svd_scores` for the flag).
    """
    if index is None:
        index = build_spatial_index(cloud)
    nbrs = annulus_neighbors(cloud, index, AnnulusQuery(y, r, s))
    return _svd_fraction(cloud.points[nbrs], k)


def _svd_fraction(pts: np.ndarray, k: int) -> float:
    if len(pts) == 0:
        return 0.0
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    total = float(np.sum(sv**2))
    if total == 0.0:
        return 1.0
    return float(np.sum(sv[:k] ** 2) / total)


def local_svd_scores(cloud: PointCloud, r: float, s: float, k: int):
    """Scores for every point plus a mask of points with empty annuli."""
    index = build_spatial_index(cloud)
    scores = np.zeros(len(cloud))
    empty = np.zeros(len(cloud), dtype=bool)
    for y in range(len(cloud)):
        nbrs = annulus_neighbors(cloud, index, AnnulusQuery(y, r, s))
        empty[y] = len(nbrs) == 0
        scores[y] = _svd_fraction(cloud.points[nbrs], k)
    return scores, empty


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvaluationReport:
    proximity_radius: float
    boundary_radius: float
    confusion: np.ndarray  # rows: true class, columns: predicted, in LABELS order
    precision: dict
    recall: dict

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict:
        return {
            "proximity_radius": self.proximity_radius,
            "boundary_radius": self.boundary_radius,
            "classes": list(LABELS),
            "confusion": self.confusion.tolist(),
            "precision": self.precision,
            "recall": self.recall,
            "total": self.total,
        }


def true_classes(cloud: PointCloud, proximity_radius: float, boundary_radius: float | None = None) -> np.ndarray:
    gt = cloud.ground_truth
    if gt is None:
        raise DataIntegrityError("cloud has no ground truth")
    if boundary_radius is None:
        boundary_radius = proximity_radius
    out = np.full(len(gt), MANIFOLD, dtype=object)
    out[gt.boundary_distance <= boundary_radius] = BOUNDARY
    out[gt.distance <= proximity_radius] = INTERSECTION
    return out


def evaluate(partition: Partition, cloud: PointCloud, proximity_radius: float, boundary_radius: float | None = None) -> EvaluationReport:
    """Score a partition against generator ground truth.

    A point is truly ``intersection`` within ``proximity_radius`` of the
    singular locus, else ``boundary`` within ``boundary_radius`` (defaults
    to ``proximity_radius``) of the rim, else ``manifold``.
    """
    idx = partition.point_index
    if len(idx) and (idx.min() < 0 or idx.max() >= len(cloud)):
        raise DataIntegrityError(f"partition refers to points outside a cloud of {len(cloud)}")
    if boundary_radius is None:
        boundary_radius = proximity_radius
    truth = true_classes(cloud, proximity_radius, boundary_radius)[idx]
    conf = np.zeros((3, 3), dtype=np.int64)
    for i, t in enumerate(LABELS):
        for j, p in enumerate(LABELS):
            conf[i, j] = np.sum((truth == t) & (partition.labels == p))
    precision, recall = {}, {}
    for i, lab in enumerate(LABELS):
        predicted, actual = conf[:, i].sum(), conf[i, :].sum()
        precision[lab] = float(conf[i, i] / predicted) if predicted else math.nan
        recall[lab] = float(conf[i, i] / actual) if actual else math.nan
    return EvaluationReport(float(proximity_radius), float(boundary_radius), conf, precision, recall)


def default_threads() -> int:
    return os.cpu_count() or 1
