"""Vietoris-Rips filtrations of small point sets."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataIntegrityError, ParameterError
from .geometry import pairwise_distances

Simplex = tuple  # strictly increasing vertex indices


def filtration_key(simplex: Sequence[int], value: float):
    """Sort key: value, then dimension, then lexicographic vertices."""
    return (value, len(simplex) - 1, tuple(simplex))


def filtration_order(a, b) -> int:
    """Three-way comparison of ``(simplex, value)`` pairs (-1, 0 or 1)."""
    ka, kb = filtration_key(*a), filtration_key(*b)
    return (ka > kb) - (ka < kb)


@dataclass
class Filtration:
    simplices: list
    values: np.ndarray
    max_dim: int
    t_max: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.dims = np.array([len(s) - 1 for s in self.simplices], dtype=np.int64)

    def __len__(self):
        return len(self.simplices)

    @property
    def entries(self) -> list:
        return list(zip(self.simplices, self.values.tolist()))

    @classmethod
    def from_entries(cls, entries: Iterable, max_dim=None, t_max=np.inf, sort=True) -> "Filtration":
        entries = [(tuple(int(v) for v in s), float(x)) for s, x in entries]
        if sort:
            entries.sort(key=functools.cmp_to_key(filtration_order))
        simplices = [s for s, _ in entries]
        values = [x for _, x in entries]
        if max_dim is None:
            max_dim = max((len(s) - 1 for s in simplices), default=0)
        return cls(simplices, np.array(values, dtype=np.float64), max_dim, t_max)

    def validate(self) -> None:
        """Raise :class:`DataIntegrityError` unless faces precede cofaces."""
        position = {}
        for pos, (s, value) in enumerate(zip(self.simplices, self.values)):
            if any(a >= b for a, b in zip(s, s[1:])):
                raise DataIntegrityError(f"simplex {s} is not strictly increasing")
            if len(s) > 1:
                for drop in range(len(s)):
                    face = s[:drop] + s[drop + 1 :]
                    fpos = position.get(face)
                    if fpos is None:
                        raise DataIntegrityError(f"face {face} of {s} missing or out of order")
                    if self.values[fpos] > value:
                        raise DataIntegrityError(f"face {face} has larger value than {s}")
            if s in position:
                raise DataIntegrityError(f"duplicate simplex {s}")
            position[s] = pos

    def boundary_csc(self) -> tuple[np.ndarray, np.ndarray]:
        """Boundary matrix as (indptr, row indices); rows are filtration positions."""
        position = {s: i for i, s in enumerate(self.simplices)}
        indptr = np.zeros(len(self) + 1, dtype=np.int64)
        rows = []
        for j, s in enumerate(self.simplices):
            if len(s) > 1:
                faces = sorted(position[s[:d] + s[d + 1 :]] for d in range(len(s)))
                rows.extend(faces)
            indptr[j + 1] = len(rows)
        return indptr, np.array(rows, dtype=np.int64)

    def to_text(self) -> str:
        lines = []
        for s, value in zip(self.simplices, self.values):
            lines.append(" ".join([repr(float(value)), str(len(s) - 1), *map(str, s)]))
        return "\n".join(lines) + ("\n" if lines else "")


def build_rips_filtration(points, max_dim: int, t_max: float, distances=None) -> Filtration:
    """All simplices of dimension <= ``max_dim`` and diameter <= ``t_max``.

    Simplices are grown one vertex at a time from cliques of the
    ``t_max``-neighbourhood graph; a simplex's value is its diameter.
    """
    if max_dim < 0:
        raise ParameterError("max_dim must be >= 0")
    if not t_max > 0:
        raise ParameterError("t_max must be positive")
    if distances is None:
        points = np.asarray(points, dtype=np.float64)
        n = 0 if points.size == 0 else len(points)
        dist = pairwise_distances(points) if n else np.zeros((0, 0))
    else:
        dist = np.asarray(distances, dtype=np.float64)
        n = len(dist)

    adjacent = dist <= t_max
    layers = [np.arange(n, dtype=np.int64).reshape(n, 1)]
    layer_values = [np.zeros(n)]
    for _ in range(max_dim):
        prev, prev_val = layers[-1], layer_values[-1]
        if len(prev) == 0:
            break
        ok = adjacent[prev].all(axis=1)
        ok &= np.arange(n)[None, :] > prev[:, -1:]
        rows, new_v = np.nonzero(ok)
        simp = np.hstack([prev[rows], new_v[:, None]])
        val = np.maximum(prev_val[rows], dist[prev[rows], new_v[:, None]].max(axis=1))
        layers.append(simp)
        layer_values.append(val)

    width = max_dim + 1
    total = sum(len(x) for x in layers)
    verts = np.full((total, width), -1, dtype=np.int64)
    values = np.empty(total)
    dims = np.empty(total, dtype=np.int64)
    at = 0
    for d, (simp, val) in enumerate(zip(layers, layer_values)):
        m = len(simp)
        verts[at : at + m, : d + 1] = simp
        values[at : at + m] = val
        dims[at : at + m] = d
        at += m
    order = np.lexsort([verts[:, c] for c in range(width - 1, -1, -1)] + [dims, values])
    simplices = [tuple(int(v) for v in row[: d + 1]) for row, d in zip(verts[order], dims[order])]
    return Filtration(simplices, values[order], max_dim, float(t_max))
