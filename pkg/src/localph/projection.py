"""PCA projection for visualising high-dimensional clouds."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def pca_project(points: np.ndarray, target_dim: int = 2):
    """Project onto the top ``target_dim`` principal axes.

    Returns ``(coords, captured)`` where ``captured`` is the fraction of
    total variance retained (1.0 for a constant cloud).
    """
    points = np.asarray(points, dtype=np.float64)
    if target_dim < 1:
        raise ParameterError("target_dim must be >= 1")
    if len(points) == 0:
        return np.zeros((0, target_dim)), 1.0
    centered = points - points.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    k = min(target_dim, vt.shape[0])
    coords = centered @ vt[:k].T
    if k < target_dim:
        coords = np.hstack([coords, np.zeros((len(points), target_dim - k))])
    total = float(np.sum(sv**2))
    captured = float(np.sum(sv[:k] ** 2) / total) if total > 0 else 1.0
    return coords, captured
