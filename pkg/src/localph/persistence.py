"""Persistence barcodes over GF(2), a dense Betti oracle and bottleneck distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import _kernels
from .errors import ParameterError
from .filtration import Filtration, build_rips_filtration
from .geometry import pairwise_distances


@dataclass(frozen=True, order=True)
class PersistenceInterval:
    """Half-open interval ``[birth, death)`` in homology degree ``dim``."""

    dim: int
    birth: float
    death: float

    def __post_init__(self):
        if not (0 <= self.birth <= self.death):
            raise ParameterError(f"invalid interval [{self.birth}, {self.death})")

    @property
    def length(self) -> float:
        return self.death - self.birth

    def is_infinite(self) -> bool:
        return math.isinf(self.death)


class Barcode:
    """Multiset of persistence intervals, kept sorted by (dim, birth, death)."""

    def __init__(self, intervals: Iterable[PersistenceInterval] = ()):
        self.intervals = sorted(intervals)

    @classmethod
    def from_pairs(cls, by_degree: dict) -> "Barcode":
        return cls(
            PersistenceInterval(d, float(b), float(x)) for d, pairs in by_degree.items() for b, x in pairs
        )

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __eq__(self, other):
        return isinstance(other, Barcode) and self.intervals == other.intervals

    def __repr__(self):
        return f"Barcode({self.intervals!r})"

    def in_degree(self, dim: int) -> list[PersistenceInterval]:
        return [iv for iv in self.intervals if iv.dim == dim]

    def pairs(self, dim: int) -> np.ndarray:
        """(m, 2) array of ``[birth, death]`` in degree ``dim``."""
        out = np.array([(iv.birth, iv.death) for iv in self.in_degree(dim)], dtype=float)
        return out.reshape(-1, 2)

    def rank_at(self, t: float, dim: int) -> int:
        """Number of degree-``dim`` intervals with ``birth <= t < death``."""
        return sum(1 for iv in self.in_degree(dim) if iv.birth <= t < iv.death)

    def to_text(self) -> str:
        rows = []
        for iv in self.intervals:
            death = "inf" if iv.is_infinite() else repr(iv.death)
            rows.append(f"{iv.dim} {iv.birth!r} {death}")
        return "\n".join(rows) + ("\n" if rows else "")

    @classmethod
    def from_text(cls, text: str) -> "Barcode":
        out = []
        for line in text.splitlines():
            if line.strip():
                d, b, x = line.split()
                out.append(PersistenceInterval(int(d), float(b), float(x)))
        return cls(out)


def _intervals_from_low(f: Filtration, low: np.ndarray, max_degree: int) -> list:
    paired = np.zeros(len(f), dtype=bool)
    out = []
    for j in np.flatnonzero(low >= 0):
        i = low[j]
        paired[i] = paired[j] = True
        dim = int(f.dims[i])
        if dim <= max_degree and f.values[j] > f.values[i]:
            out.append(PersistenceInterval(dim, float(f.values[i]), float(f.values[j])))
    for i in np.flatnonzero(~paired):
        dim = int(f.dims[i])
        if dim <= max_degree:
            out.append(PersistenceInterval(dim, float(f.values[i]), math.inf))
    return out


def compute_barcode(f: Filtration, max_degree: int | None = None, check: bool = True) -> Barcode:
    """Barcode of a filtration by the twist (clearing) column reduction.

    Intervals of zero length are dropped. A class still alive at the end of
    the filtration gets ``death = inf``.
    """
    if max_degree is None:
        max_degree = f.max_dim
    if check:
        f.validate()
    if len(f) == 0:
        return Barcode()
    indptr, rows = f.boundary_csc()
    top = int(f.dims.max())
    low = _kernels.reduce_twist(indptr, rows, f.dims, top)
    return Barcode(_intervals_from_low(f, low, max_degree))


def rips_barcode(points, max_degree: int, t_max: float, max_dim: int | None = None, distances=None) -> Barcode:
    """Rips barcode of a point set up to ``max_degree``.

    Degrees 0 and 1 with triangles present (``max_dim >= 2``) take the
    implicit coboundary route, which never materialises the triangles.
    Anything else builds the explicit filtration.
    """
    if max_dim is None:
        max_dim = max_degree + 1
    if distances is None:
        distances = pairwise_distances(np.asarray(points, dtype=np.float64))
    if max_degree <= 1 and max_dim >= 2:
        return _rips_low_degree(np.ascontiguousarray(distances), max_degree, t_max)
    f = build_rips_filtration(None, max_dim, t_max, distances=distances)
    return compute_barcode(f, max_degree, check=False)


def _rips_low_degree(dist: np.ndarray, max_degree: int, t_max: float) -> Barcode:
    if not t_max > 0:
        raise ParameterError("t_max must be positive")
    intervals = []
    n = len(dist)
    if n == 0:
        return Barcode()
    h0, components, b1, d1 = _kernels.rips_low_degree_pairs(dist, float(t_max))
    intervals += [PersistenceInterval(0, 0.0, float(x)) for x in h0 if x > 0]
    intervals += [PersistenceInterval(0, 0.0, math.inf)] * int(components)
    if max_degree >= 1:
        keep = d1 > b1
        intervals += [PersistenceInterval(1, float(b), float(x)) for b, x in zip(b1[keep], d1[keep])]
    return Barcode(intervals)


def rips_long_bar_count(distances: np.ndarray, degree: int, threshold: float, t_max: float, max_dim: int) -> int:
    """``count_long_bars(rips_barcode(...), degree, threshold, t_max)`` without building objects."""
    if degree <= 1 and max_dim >= 2 and len(distances):
        h0, components, b1, d1 = _kernels.rips_low_degree_pairs(np.ascontiguousarray(distances), float(t_max))
        if degree == 0:
            return int(components) + int(np.sum(np.minimum(h0, math.inf) > threshold))
        lengths = np.where(d1 >= t_max, math.inf, d1 - b1)
        return int(np.sum(lengths > threshold))
    bc = rips_barcode(None, degree, t_max, max_dim, distances=distances)
    return count_long_bars(bc, degree, threshold, t_max)


def count_long_bars(bc: Barcode, dim: int, threshold: float, t_max: float = math.inf) -> int:
    """Number of degree-``dim`` intervals strictly longer than ``threshold``.

    Deaths at or beyond ``t_max`` count as infinite.
    """
    if threshold < 0:
        raise ParameterError("threshold must be >= 0")
    count = 0
    for iv in bc.in_degree(dim):
        length = math.inf if iv.death >= t_max else iv.length
        if length > threshold:
            count += 1
    return count


# ---------------------------------------------------------------------------
# dense oracle


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) by Gaussian elimination on a dense 0/1 matrix."""
    m = np.array(matrix, dtype=bool) if np.size(matrix) else np.zeros((0, 0), dtype=bool)
    rank = 0
    rows, cols = m.shape if m.ndim == 2 else (0, 0)
    for c in range(cols):
        if rank == rows:
            break
        hits = np.flatnonzero(m[rank:, c])
        if len(hits) == 0:
            continue
        p = rank + hits[0]
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        below = np.flatnonzero(m[:, c])
        below = below[below != rank]
        m[below] ^= m[rank]
        rank += 1
    return rank


def boundary_matrix_dense(faces: list, cofaces: list) -> np.ndarray:
    """0/1 matrix of the boundary map from ``cofaces`` (columns) to ``faces`` (rows)."""
    where = {s: i for i, s in enumerate(faces)}
    mat = np.zeros((len(faces), len(cofaces)), dtype=bool)
    for j, s in enumerate(cofaces):
        for d in range(len(s)):
            mat[where[s[:d] + s[d + 1 :]], j] = True
    return mat


def betti_numbers_at_scale(f: Filtration, t: float, max_degree: int) -> list[int]:
    """Betti numbers of the subcomplex with values ``<= t``.

    beta_i = dim C_i - rank d_i - rank d_{i+1}; a map between missing chain
    groups is the zero map.
    """
    if t < 0:
        raise ParameterError("t must be >= 0")
    by_dim = {}
    for s, value in zip(f.simplices, f.values):
        if value <= t:
            by_dim.setdefault(len(s) - 1, []).append(s)
    ranks = {}
    for i in range(1, max_degree + 2):
        lower, upper = by_dim.get(i - 1, []), by_dim.get(i, [])
        ranks[i] = gf2_rank(boundary_matrix_dense(lower, upper)) if lower and upper else 0
    return [len(by_dim.get(i, [])) - ranks.get(i, 0) - ranks.get(i + 1, 0) for i in range(max_degree + 1)]


# ---------------------------------------------------------------------------
# bottleneck distance


def _finite_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    """Bottleneck distance between finite diagrams, diagonal allowed."""
    na, nb = len(a), len(b)
    if na == 0 and nb == 0:
        return 0.0
    half_a = (a[:, 1] - a[:, 0]) / 2 if na else np.empty(0)
    half_b = (b[:, 1] - b[:, 0]) / 2 if nb else np.empty(0)
    # nodes: left = a points + diagonal copies of b; right = b points + diagonal copies of a
    size = na + nb
    cost = np.zeros((size, size))
    if na and nb:
        cost[:na, :nb] = np.maximum(
            np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
        )
    big = np.inf
    cost[:na, nb:] = big
    cost[:na, nb:][np.arange(na), np.arange(na)] = half_a
    cost[na:, :nb] = big
    cost[na:, :nb][np.arange(nb), np.arange(nb)] = half_b
    # diagonal-to-diagonal is free
    candidates = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching(cost <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def _perfect_matching(adjacency: np.ndarray) -> bool:
    match = maximum_bipartite_matching(csr_matrix(adjacency.astype(np.int8)), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(a: Barcode, b: Barcode, dim: int) -> float:
    """Bottleneck distance between the degree-``dim`` parts of two barcodes.

    Infinite intervals are matched only with infinite intervals (by sorted
    birth); differing counts give ``inf``.
    """
    pa, pb = a.pairs(dim), b.pairs(dim)
    ia, ib = np.isinf(pa[:, 1]), np.isinf(pb[:, 1])
    if ia.sum() != ib.sum():
        return math.inf
    essential = 0.0
    if ia.any():
        essential = float(np.max(np.abs(np.sort(pa[ia, 0]) - np.sort(pb[ib, 0]))))
    return max(essential, _finite_bottleneck(pa[~ia], pb[~ib]))

