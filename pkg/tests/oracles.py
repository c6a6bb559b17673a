"""Independent checkers used by several test modules (no compiler code reused)."""

import math

import numpy as np


def sample_path(waypoints, step=0.1):
    """Points along the polyline every ``step`` um, endpoints included."""
    pts = []
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        n = max(1, math.ceil(math.dist((x0, y0), (x1, y1)) / step))
        for i in range(n + 1):
            t = i / n
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return np.array(pts).reshape(-1, 2)


def min_distance(waypoints, obstacles, step=0.1):
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    if len(obstacles) == 0 or len(waypoints) < 2:
        return math.inf
    pts = sample_path(waypoints, step)
    d = np.hypot(pts[:, None, 0] - obstacles[None, :, 0], pts[:, None, 1] - obstacles[None, :, 1])
    return float(d.min())


def compatible(u, v):
    """Pairwise AOD rule on ``(sx, ex, sy, ey)`` vectors, written out case by case."""
    for s_u, e_u, s_v, e_v in ((u[0], u[1], v[0], v[1]), (u[2], u[3], v[2], v[3])):
        if s_u < s_v and not e_u < e_v:
            return False
        if s_u > s_v and not e_u > e_v:
            return False
        if s_u == s_v and e_u != e_v:
            return False
    return True


def batch_violations(vectors):
    """Index pairs of a batch that cannot share one sweep."""
    return [(i, j) for i in range(len(vectors)) for j in range(i + 1, len(vectors))
            if not compatible(vectors[i], vectors[j])]
