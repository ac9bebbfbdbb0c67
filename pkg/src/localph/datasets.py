"""Synthetic singular spaces with ground truth, and point-file I/O."""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import CloudParseError, DataIntegrityError, ParameterError
from .geometry import GroundTruth, PointCloud

SHAPES = ("henneberg", "planes", "hemisphere_plane", "circle", "sphere")

BETA_RANGE = (0.4, 0.6)
PHI_RANGE = (0.0, 2 * math.pi)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # renamed in numpy 2


# ---------------------------------------------------------------------------
# Henneberg surface


def henneberg_point(beta, phi):
    """Henneberg immersion evaluated at (beta, phi); broadcasts over arrays."""
    beta = np.asarray(beta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(beta == 0):
        raise ZeroDivisionError("henneberg_point is undefined at beta = 0")
    b2, b3 = beta**2, beta**3
    b6 = b3 * b3
    x = 2 * (b2 - 1) * np.cos(phi) / beta - 2 * (b6 - 1) * np.cos(3 * phi) / (3 * b3)
    y = -(6 * b2 * (b2 - 1) * np.sin(phi) + 2 * (b6 - 1) * np.sin(3 * phi)) / (3 * b3)
    z = 2 * (b2 * b2 + 1) * np.cos(2 * phi) / b2
    return np.stack([x, y, z], axis=-1)


def _henneberg_jacobian(beta, phi):
    """Partial derivatives (dF/dbeta, dF/dphi), each of shape (..., 3)."""
    beta = np.asarray(beta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    b2, b3, b4 = beta**2, beta**3, beta**4
    c1, c3, s1, s3 = np.cos(phi), np.cos(3 * phi), np.sin(phi), np.sin(3 * phi)
    # x = 2(b - 1/b) cos(phi) - (2/3)(b^3 - b^-3) cos(3 phi)
    dx_db = 2 * (1 + 1 / b2) * c1 - 2 * (b2 + 1 / b4) * c3
    dx_dp = -2 * (beta - 1 / beta) * s1 + 2 * (b3 - 1 / b3) * s3
    # y = -2(b - 1/b) sin(phi) - (2/3)(b^3 - b^-3) sin(3 phi)
    dy_db = -2 * (1 + 1 / b2) * s1 - 2 * (b2 + 1 / b4) * s3
    dy_dp = -2 * (beta - 1 / beta) * c1 - 2 * (b3 - 1 / b3) * c3
    # z = 2(b^2 + b^-2) cos(2 phi)
    dz_db = 2 * (2 * beta - 2 / b3) * np.cos(2 * phi)
    dz_dp = -4 * (b2 + 1 / b2) * np.sin(2 * phi)
    return np.stack([dx_db, dy_db, dz_db], -1), np.stack([dx_dp, dy_dp, dz_dp], -1)


def henneberg_area_density(beta, phi):
    """Surface area element |F_beta x F_phi| at (beta, phi)."""
    fb, fp = _henneberg_jacobian(beta, phi)
    return np.linalg.norm(np.cross(fb, fp), axis=-1)


@dataclass(frozen=True)
class HennebergParams:
    """Sampling of the Henneberg surface over ``beta_range x [0, 2pi)``.

    ``mode`` is ``"grid"`` (uniform parameter grid of ``n_beta x n_phi``),
    ``"area"`` (i.i.d. area-uniform), or ``"lattice"`` (rows spaced by
    arclength in beta, each row with a point count proportional to its
    length, giving roughly area-uniform deterministic spacing).
    """

    n_beta: int = 62
    n_phi: int = 88
    mode: str = "lattice"
    seed: int = 0
    beta_range: tuple = BETA_RANGE
    proximity_radius: float = 1.5
    noise: float = 0.0

    def __post_init__(self):
        lo, hi = self.beta_range
        if not (BETA_RANGE[0] <= lo < hi <= BETA_RANGE[1]):
            raise ParameterError(f"beta range must lie within {BETA_RANGE}, got {self.beta_range}")
        if self.mode not in ("grid", "area", "lattice"):
            raise ParameterError(f"unknown Henneberg sampling mode {self.mode!r}")
        if self.n_beta < 2 or self.n_phi < 3:
            raise ParameterError("need n_beta >= 2 and n_phi >= 3")

    @property
    def count(self) -> int:
        return self.n_beta * self.n_phi


def henneberg_parameters(params: HennebergParams) -> np.ndarray:
    """Parameter samples ``(m, 2)`` of ``(beta, phi)`` for the chosen mode."""
    lo, hi = params.beta_range
    if params.mode == "grid":
        b = np.linspace(lo, hi, params.n_beta)
        p = np.linspace(0, 2 * np.pi, params.n_phi, endpoint=False)
        bb, pp = np.meshgrid(b, p, indexing="ij")
        return np.column_stack([bb.ravel(), pp.ravel()])
    if params.mode == "area":
        return _area_uniform_parameters(params.count, lo, hi, np.random.default_rng(params.seed))
    return _lattice_parameters(params.count, lo, hi)


def _area_uniform_parameters(count, lo, hi, rng) -> np.ndarray:
    bound = henneberg_area_density(np.linspace(lo, hi, 201)[:, None], np.linspace(0, 2 * np.pi, 721)[None, :]).max() * 1.05
    out = np.empty((0, 2))
    while len(out) < count:
        cand = np.column_stack([rng.uniform(lo, hi, 2 * count), rng.uniform(0, 2 * np.pi, 2 * count)])
        accept = rng.uniform(0, bound, len(cand)) < henneberg_area_density(cand[:, 0], cand[:, 1])
        out = np.vstack([out, cand[accept]])
    return out[:count]


def _lattice_parameters(count, lo, hi) -> np.ndarray:
    fine_b = np.linspace(lo, hi, 2001)
    fine_p = np.linspace(0, 2 * np.pi, 721)
    fb, fp = _henneberg_jacobian(fine_b[:, None], fine_p[None, :])
    row_speed = np.linalg.norm(fb, axis=-1).mean(axis=1)  # |dF/dbeta| averaged over phi
    row_length = np.linalg.norm(fp, axis=-1).mean(axis=1) * 2 * np.pi  # circumference of beta-row
    arclen = np.concatenate([[0], np.cumsum((row_speed[1:] + row_speed[:-1]) / 2 * np.diff(fine_b))])
    area = _trapezoid(row_length * row_speed, fine_b)
    spacing = math.sqrt(area / count)
    n_rows = max(2, int(round(arclen[-1] / spacing)) + 1)
    row_b = np.interp(np.linspace(0, arclen[-1], n_rows), arclen, fine_b)
    lengths = np.interp(row_b, fine_b, row_length)
    # distribute exactly `count` points among rows proportionally to length
    share = lengths / lengths.sum() * count
    per_row = np.floor(share).astype(int)
    per_row[np.argsort(share - per_row)[::-1][: count - per_row.sum()]] += 1
    rows = []
    for i, (b, m) in enumerate(zip(row_b, per_row)):
        offset = 0.5 * (i % 2)
        phi = (np.arange(m) + offset) * (2 * np.pi / m)
        rows.append(np.column_stack([np.full(m, b), phi]))
    return np.vstack(rows)


def _refine_pairs(x, iters=40):
    """Batched minimum-norm Gauss-Newton for F(a) = F(b).

    ``x`` has rows ``(beta_a, phi_a, beta_b, phi_b)``; the solution set is a
    curve, so each step is the least-norm correction J^T (J J^T)^-1 g.
    """
    x = np.array(x, dtype=float)
    for _ in range(iters):
        g = henneberg_point(x[:, 0], x[:, 1]) - henneberg_point(x[:, 2], x[:, 3])
        if np.all(np.linalg.norm(g, axis=1) < 1e-13):
            break
        fb1, fp1 = _henneberg_jacobian(x[:, 0], x[:, 1])
        fb2, fp2 = _henneberg_jacobian(x[:, 2], x[:, 3])
        jac = np.stack([fb1, fp1, -fb2, -fp2], axis=-1)  # (m, 3, 4)
        jjt = jac @ np.swapaxes(jac, 1, 2)
        try:
            y = np.linalg.solve(jjt, g[..., None])
        except np.linalg.LinAlgError:
            y = np.linalg.pinv(jjt) @ g[..., None]
        x = x - (np.swapaxes(jac, 1, 2) @ y)[..., 0]
    return x


def _phi_gap(a, b):
    d = np.abs(np.mod(a - b, 2 * np.pi))
    return np.minimum(d, 2 * np.pi - d)


@dataclass
class SelfIntersectionLocus:
    """Sampled self-intersection curves of the Henneberg surface.

    ``points[i]`` is reproduced by both ``params_a[i]`` and ``params_b[i]``;
    the table contains each pair in both orders.
    """

    points: np.ndarray
    params_a: np.ndarray
    params_b: np.ndarray

    def components(self, link: float = 0.5) -> np.ndarray:
        """Connected-component label of each sample under single linkage."""
        return single_linkage_labels(self.points, link)

    def n_components(self, link: float = 0.5) -> int:
        labels = self.components(link)
        return int(labels.max() + 1) if len(labels) else 0


def single_linkage_labels(points: np.ndarray, link: float) -> np.ndarray:
    n = len(points)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    pairs = cKDTree(points).query_pairs(link, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels.astype(np.int64)


def self_intersection_locus(
    params: HennebergParams | None = None,
    tol: float = 1e-8,
    grid: tuple = (240, 960),
    min_separation: float = 0.05,
) -> SelfIntersectionLocus:
    """Numerically locate pairs of parameters mapped to the same 3D point.

    A parameter grid is searched for pairs of images closer than the local
    grid spacing whose parameters differ by more than ``min_separation``;
    each candidate is refined by Gauss-Newton and kept if the two images
    agree within ``tol`` and both parameters stay inside the domain.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    beta_range = (params or HennebergParams()).beta_range
    return _locus_cached(beta_range, float(tol), tuple(grid), float(min_separation))


@functools.lru_cache(maxsize=8)
def _locus_cached(beta_range, tol, grid, min_separation):
    lo, hi = beta_range
    nb, nphi = grid
    b = np.linspace(lo, hi, nb)
    p = np.linspace(0, 2 * np.pi, nphi, endpoint=False)
    bb, pp = np.meshgrid(b, p, indexing="ij")
    prm = np.column_stack([bb.ravel(), pp.ravel()])
    xyz = henneberg_point(prm[:, 0], prm[:, 1])
    fb, fp = _henneberg_jacobian(prm[:, 0], prm[:, 1])
    # local cell diameter: a true crossing has a grid partner this close
    reach = np.hypot(np.linalg.norm(fb, axis=1) * (hi - lo) / (nb - 1), np.linalg.norm(fp, axis=1) * 2 * np.pi / nphi)
    tree = cKDTree(xyz)
    cand_i, cand_j = [], []
    for i, nbrs in enumerate(tree.query_ball_point(xyz, reach)):
        if len(nbrs) < 2:
            continue
        nbrs = np.asarray(nbrs)
        sep = np.maximum(np.abs(prm[nbrs, 0] - prm[i, 0]), _phi_gap(prm[nbrs, 1], prm[i, 1]))
        far = nbrs[sep > 4 * min_separation]
        if len(far):
            j = far[np.argmin(np.linalg.norm(xyz[far] - xyz[i], axis=1))]
            cand_i.append(i)
            cand_j.append(j)
    if not cand_i:
        empty = np.empty((0, 2))
        return SelfIntersectionLocus(np.empty((0, 3)), empty, empty)
    x = _refine_pairs(np.column_stack([prm[cand_i], prm[cand_j]]))
    fa = henneberg_point(x[:, 0], x[:, 1])
    fc = henneberg_point(x[:, 2], x[:, 3])
    inside = (x[:, 0] >= lo - 1e-12) & (x[:, 0] <= hi) & (x[:, 2] >= lo - 1e-12) & (x[:, 2] <= hi)
    apart = np.maximum(np.abs(x[:, 0] - x[:, 2]), _phi_gap(x[:, 1], x[:, 3])) > min_separation
    ok = inside & apart & (np.linalg.norm(fa - fc, axis=1) < tol)
    x, pts = x[ok], ((fa + fc) / 2)[ok]
    x[:, 1] %= 2 * np.pi
    x[:, 3] %= 2 * np.pi
    # symmetric table
    pa = np.vstack([x[:, :2], x[:, 2:]])
    pb = np.vstack([x[:, 2:], x[:, :2]])
    pts = np.vstack([pts, pts])
    # thin near-duplicates: one sample per 1e-3 voxel of each parameter pair
    key = np.round(np.column_stack([pa, pb]) / 1e-3).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    first.sort()
    return SelfIntersectionLocus(pts[first], pa[first], pb[first])


def henneberg_rim(beta_range=BETA_RANGE, samples: int = 20000) -> np.ndarray:
    """Images of the two boundary curves beta = lo and beta = hi."""
    phi = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    return np.vstack([henneberg_point(np.full(samples, beta), phi) for beta in beta_range])


def _densify_locus(locus: SelfIntersectionLocus, spacing: float) -> np.ndarray:
    """Locus samples plus linear interpolation between close neighbours."""
    pts = locus.points
    if len(pts) < 2:
        return pts
    d, nn = cKDTree(pts).query(pts, k=min(3, len(pts)))
    extra = [pts]
    for col in range(1, d.shape[1]):
        for i in np.flatnonzero(d[:, col] > spacing):
            if d[i, col] > 0.5:
                continue
            m = int(math.ceil(d[i, col] / spacing))
            t = np.linspace(0, 1, m + 1)[1:-1, None]
            extra.append(pts[i] + t * (pts[nn[i, col]] - pts[i]))
    return np.vstack(extra)


def sample_henneberg(params: HennebergParams | None = None) -> PointCloud:
    params = params or HennebergParams()
    prm = henneberg_parameters(params)
    pts = henneberg_point(prm[:, 0], prm[:, 1])
    if params.noise > 0:
        pts = pts + _ball_noise(np.random.default_rng(params.seed + 1), len(pts), 3, params.noise)
    locus = self_intersection_locus(params)
    dense = _densify_locus(locus, 0.01)
    dist = cKDTree(dense).query(pts)[0] if len(dense) else np.full(len(pts), np.inf)
    rim_dist = cKDTree(henneberg_rim(params.beta_range)).query(pts)[0]
    # stratum: 0 for beta below the mid-range, 1 above (purely descriptive)
    stratum = (prm[:, 0] > sum(params.beta_range) / 2).astype(np.int64)
    return PointCloud(pts, GroundTruth(dist, stratum, params.proximity_radius, rim_dist))


# ---------------------------------------------------------------------------
# simple singular spaces


@dataclass(frozen=True)
class GeneratorSpec:
    shape: str
    count: int = 4000
    noise: float = 0.0
    seed: int = 0
    proximity_radius: float = 0.05

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"unknown shape {self.shape!r}; choose from {', '.join(SHAPES)}")
        if self.count <= 0:
            raise ParameterError("count must be positive")
        if self.noise < 0:
            raise ParameterError("noise must be >= 0")


def _ball_noise(rng, n, dim, amplitude):
    """Isotropic noise, uniform in the ball of radius ``amplitude``."""
    v = rng.normal(size=(n, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * amplitude * rng.uniform(size=(n, 1)) ** (1 / dim)


def _split(count, weights):
    weights = np.asarray(weights, dtype=float)
    share = weights / weights.sum() * count
    out = np.floor(share).astype(int)
    out[np.argsort(share - out)[::-1][: count - out.sum()]] += 1
    return out


def sample_planes(spec: GeneratorSpec) -> PointCloud:
    """Two unit squares, ``z = 0`` and ``y = 0``, crossing along the x-axis."""
    rng = np.random.default_rng(spec.seed)
    n0, n1 = _split(spec.count, [1, 1])
    a = rng.uniform(-0.5, 0.5, size=(n0, 2))
    b = rng.uniform(-0.5, 0.5, size=(n1, 2))
    pts = np.vstack([
        np.column_stack([a[:, 0], a[:, 1], np.zeros(n0)]),
        np.column_stack([b[:, 0], np.zeros(n1), b[:, 1]]),
    ])
    sheet = np.repeat([0, 1], [n0, n1])
    if spec.noise > 0:
        pts = pts + _ball_noise(rng, len(pts), 3, spec.noise)
    dx = np.maximum(np.abs(pts[:, 0]) - 0.5, 0)
    dist = np.sqrt(dx**2 + pts[:, 1] ** 2 + pts[:, 2] ** 2)
    in_plane = np.where(sheet == 0, pts[:, 1], pts[:, 2])
    rim = 0.5 - np.maximum(np.abs(pts[:, 0]), np.abs(in_plane))
    return PointCloud(pts, GroundTruth(dist, sheet, spec.proximity_radius, np.abs(rim)))


def circle_distance(points: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Distance from 3D points to the circle of ``radius`` in the plane z = 0."""
    rho = np.hypot(points[:, 0], points[:, 1])
    return np.hypot(rho - radius, points[:, 2])


def sample_hemisphere_plane(spec: GeneratorSpec) -> PointCloud:
    """Unit upper hemisphere glued to the disk of radius 2 along the equator."""
    rng = np.random.default_rng(spec.seed)
    n_hemi, n_disk = _split(spec.count, [2 * np.pi, 4 * np.pi])
    z = rng.uniform(0, 1, n_hemi)
    t = rng.uniform(0, 2 * np.pi, n_hemi)
    rho = np.sqrt(1 - z**2)
    hemi = np.column_stack([rho * np.cos(t), rho * np.sin(t), z])
    rd = 2 * np.sqrt(rng.uniform(0, 1, n_disk))
    td = rng.uniform(0, 2 * np.pi, n_disk)
    disk = np.column_stack([rd * np.cos(td), rd * np.sin(td), np.zeros(n_disk)])
    pts = np.vstack([hemi, disk])
    if spec.noise > 0:
        pts = pts + _ball_noise(rng, len(pts), 3, spec.noise)
    sheet = np.repeat([0, 1], [n_hemi, n_disk])
    rim = np.where(sheet == 1, np.abs(2 - np.hypot(pts[:, 0], pts[:, 1])), np.inf)
    return PointCloud(pts, GroundTruth(circle_distance(pts), sheet, spec.proximity_radius, rim))


def sample_circle(spec: GeneratorSpec) -> PointCloud:
    rng = np.random.default_rng(spec.seed)
    t = rng.uniform(0, 2 * np.pi, spec.count)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    if spec.noise > 0:
        pts = pts + _ball_noise(rng, len(pts), 2, spec.noise)
    n = len(pts)
    return PointCloud(pts, GroundTruth(np.full(n, np.inf), np.zeros(n), spec.proximity_radius))


def sample_sphere(spec: GeneratorSpec, radius: float = 1.0) -> PointCloud:
    rng = np.random.default_rng(spec.seed)
    v = rng.normal(size=(spec.count, 3))
    pts = radius * v / np.linalg.norm(v, axis=1, keepdims=True)
    if spec.noise > 0:
        pts = pts + _ball_noise(rng, len(pts), 3, spec.noise)
    n = len(pts)
    return PointCloud(pts, GroundTruth(np.full(n, np.inf), np.zeros(n), spec.proximity_radius))


def generate(spec: GeneratorSpec, henneberg: HennebergParams | None = None) -> PointCloud:
    if spec.shape == "henneberg":
        if henneberg is None:
            henneberg = HennebergParams(seed=spec.seed, noise=spec.noise, proximity_radius=spec.proximity_radius)
        return sample_henneberg(henneberg)
    return {
        "planes": sample_planes,
        "hemisphere_plane": sample_hemisphere_plane,
        "circle": sample_circle,
        "sphere": sample_sphere,
    }[spec.shape](spec)


# ---------------------------------------------------------------------------
# files


def load_cloud(path, skip_header: bool = False, delimiter: str = ",") -> PointCloud:
    """Read a headerless numeric CSV, one point per row."""
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if lineno == 1 and skip_header:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise CloudParseError(f"non-numeric field in row {row!r}", lineno) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CloudParseError(f"ragged row: expected {width} fields, found {len(values)}", lineno)
            if not all(math.isfinite(v) for v in values):
                raise CloudParseError("non-finite coordinate", lineno)
            rows.append(values)
    if not rows:
        raise CloudParseError(f"{path} contains no points")
    return PointCloud(np.array(rows, dtype=np.float64))


def save_cloud(path, cloud: PointCloud) -> None:
    np.savetxt(path, cloud.points, delimiter=",", fmt="%.17g")


GT_HEADER = ["index", "near_singularity", "distance", "stratum_id", "boundary_distance"]


def save_ground_truth(path, gt: GroundTruth) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GT_HEADER)
        near = gt.near_singularity
        for i in range(len(gt)):
            w.writerow([i, int(near[i]), repr(float(gt.distance[i])), int(gt.stratum_id[i]), repr(float(gt.boundary_distance[i]))])


def load_ground_truth(path, proximity_radius: float | None = None) -> GroundTruth:
    """Read a ground-truth sidecar.

    With no ``proximity_radius``, the radius is recovered as the largest
    distance flagged near (the sidecar stores flags, not the radius).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"index", "near_singularity", "distance", "stratum_id"} - set(reader.fieldnames or [])
        if missing:
            raise DataIntegrityError(f"{path}: sidecar lacks columns {sorted(missing)}")
        rows = list(reader)
    rows.sort(key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(len(rows))):
        raise DataIntegrityError(f"{path}: indices are not 0..n-1")
    dist = np.array([float(r["distance"]) for r in rows])
    near = np.array([r["near_singularity"].strip() in ("1", "true", "True") for r in rows])
    stratum = np.array([int(r["stratum_id"]) for r in rows], dtype=np.int64)
    rim = np.array([float(r.get("boundary_distance") or "inf") for r in rows])
    if proximity_radius is None:
        proximity_radius = float(dist[near].max()) if near.any() else 0.0
    return GroundTruth(dist, stratum, proximity_radius, rim)
