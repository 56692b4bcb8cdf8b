"""Nearest-neighbor distance statistic."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..core import Functional
from ..errors import TooFewPoints


def nn_average_distance(points: np.ndarray) -> float:
    """Root-n-normalized sum of distances to each point's nearest neighbor.

    Exact duplicates give distance zero; neighbor ties resolve to the lowest
    index through the deterministic tree query.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < 2:
        raise TooFewPoints("nearest-neighbor distance needs n >= 2")
    dist, _ = cKDTree(pts).query(pts, k=2)
    # sorting fixes the summation order, making the value permutation-exact
    return float(np.sort(dist[:, 1]).sum()) / np.sqrt(n)


def nn_functional() -> Functional:
    return Functional(evaluate=nn_average_distance, arity=None,
                      symmetric=True, name="nn-distance")
