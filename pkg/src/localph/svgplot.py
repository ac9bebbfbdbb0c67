"""Dependency-free SVG scatter plots of labelled points."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import DataIntegrityError

COLOURS = {"intersection": "red", "boundary": "cyan", "manifold": "grey"}
PANEL = 360
MARGIN = 30


def _panel(coords: np.ndarray, labels, x0: float, title: str, radius: float) -> list[str]:
    out = [
        f'<g transform="translate({x0:.1f},0)">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>',
        f'<text x="{MARGIN + PANEL / 2}" y="{MARGIN - 8}" text-anchor="middle" font-size="12">{title}</text>',
    ]
    if len(coords):
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        span = float(np.max(hi - lo)) or 1.0
        scale = (PANEL - 20) / span
        # draw red last so intersection points stay visible
        order = sorted(range(len(coords)), key=lambda i: labels[i] == "intersection")
        for i in order:
            x = MARGIN + 10 + (coords[i, 0] - lo[0]) * scale
            y = MARGIN + PANEL - 10 - (coords[i, 1] - lo[1]) * scale
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" fill="{COLOURS[labels[i]]}"/>')
    out.append("</g>")
    return out


def scatter_svg(points: np.ndarray, labels, radius: float = 1.6) -> str:
    """Scatter plot; 3D input is drawn as the three coordinate-pair panels."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] not in (2, 3):
        if len(points) == 0:
            points = np.zeros((0, 2))
        else:
            raise DataIntegrityError("plot expects 2- or 3-dimensional points; project first")
    labels = list(labels)
    if len(labels) != len(points):
        raise DataIntegrityError(f"{len(labels)} labels for {len(points)} points")
    unknown = set(labels) - set(COLOURS)
    if unknown:
        raise DataIntegrityError(f"unknown labels {sorted(unknown)}")
    axes = "xyz"
    pairs = [(0, 1)] if points.shape[1] == 2 else list(combinations(range(3), 2))
    width = len(pairs) * (PANEL + MARGIN) + MARGIN
    height = PANEL + 2 * MARGIN
    body = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">']
    for p, (a, b) in enumerate(pairs):
        body += _panel(points[:, [a, b]], labels, p * (PANEL + MARGIN), f"{axes[a]}-{axes[b]}", radius)
    body.append("</svg>")
    return "\n".join(body) + "\n"
